use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gyro::csvio::{read_sweep, SweepRecord};
use gyro::report::Report;
use gyro::scenario::{self, Scenario};
use gyro::{exit, parallel};

const B0: &str = include_str!("../../../scenarios/b0.toml");

fn b0() -> Scenario {
    scenario::parse(B0, Path::new("b0.toml")).unwrap()
}

fn write_scenario(dir: &Path, name: &str, s: &Scenario) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, scenario::to_toml(s)).unwrap();
    p
}

fn gyro(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gyro"))
        .args(args)
        .env_remove("GYRO_CONSTANTS")
        .output()
        .unwrap()
}

fn run(cmd: &str, scenario: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd, "--scenario", scenario.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    gyro(&args)
}

fn parse_report(o: &Output) -> Report {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    let mut r = Report::new();
    for line in String::from_utf8(o.stdout.clone()).unwrap().lines() {
        let (k, v) = line.split_once(" = ").unwrap();
        match v.parse::<f64>() {
            Ok(x) => r.num(k, x),
            Err(_) => r.text(k, v.trim_matches('"')),
        };
    }
    r
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn phase_budget_reports_frame_dragging_rate() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_scenario(dir.path(), "b0.toml", &b0());
    let r = parse_report(&run("phase-budget", &p, dir.path(), &[]));
    let fd = r.get_f64("rate_frame_dragging_dot_n_rad_per_s").unwrap();
    assert!((fd / 2.9e-14 - 1.0).abs() < 0.03, "{fd}");
    assert_eq!(r.get_f64("phase_sagnac_rad"), Some(0.0));
    assert_eq!(r.get("phase_sagnac_rad"), Some("0e0"));
}

#[test]
fn gamma_scales_frame_dragging_affinely() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = b0();
    let base = parse_report(&run("phase-budget", &write_scenario(dir.path(), "a.toml", &s), dir.path(), &[]));
    s.ppn.gamma = 1.1;
    let alt = parse_report(&run("phase-budget", &write_scenario(dir.path(), "b.toml", &s), dir.path(), &[]));
    let ratio = alt.get_f64("phase_frame_dragging_rad").unwrap() / base.get_f64("phase_frame_dragging_rad").unwrap();
    assert!((ratio - 2.1 / 2.0).abs() < 1e-12, "{ratio}");
}

#[test]
fn unknown_key_is_rejected_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.toml");
    std::fs::write(&p, B0.replace("chi_deg = 52.1", "chi_deg = 52.1\nchi_rad = 0.9")).unwrap();
    let o = run("plan", &p, dir.path(), &[]);
    assert_eq!(code(&o), exit::VALIDATION);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("chi_rad") && err.contains("line"), "{err}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    let o = gyro(&["plan", "--scenario", d.join("missing.toml").to_str().unwrap()]);
    assert_eq!(code(&o), exit::VALIDATION);

    let mut s = b0();
    s.schema_version = 9;
    assert_eq!(code(&run("plan", &write_scenario(d, "v.toml", &s), d, &[])), exit::VALIDATION);

    let mut s = b0();
    s.sweep = None;
    assert_eq!(code(&run("noise-sweep", &write_scenario(d, "ns.toml", &s), d, &[])), exit::VALIDATION);

    let mut s = b0();
    s.operating.temperature_K = 0.7;
    assert_eq!(code(&run("plan", &write_scenario(d, "hot.toml", &s), d, &[])), exit::DOMAIN);

    let mut s = b0();
    s.geometry.critical_current_kg_per_s *= 10.0;
    assert_eq!(code(&run("plan", &write_scenario(d, "hyst.toml", &s), d, &[])), exit::DOMAIN);

    let mut s = b0();
    let sim = s.sim.as_mut().unwrap();
    sim.psd_scale = 1e17;
    sim.trials = 0;
    let o = run("simulate", &write_scenario(d, "loud.toml", &s), d, &[]);
    assert_eq!(code(&o), exit::SIMULATION);
    assert!(String::from_utf8_lossy(&o.stderr).contains("aborted"));
}

#[test]
fn noise_sweep_csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let s = b0();
    let p = write_scenario(dir.path(), "b0.toml", &s);
    let o = run("noise-sweep", &p, dir.path(), &[]);
    assert!(o.status.success());

    let loaded = scenario::load(&p).unwrap();
    let sweep = s.sweep.as_ref().unwrap();
    for (family, fluid) in [("solid", true), ("dashed", false)] {
        let spec = sweep.spec(fluid).unwrap();
        let rows = parallel::sweep(&loaded.constants, &loaded.geometry, &loaded.operating, &spec).unwrap();
        let expected: Vec<SweepRecord> = rows.iter().map(SweepRecord::from_row).collect();
        let read = read_sweep(&dir.path().join(format!("noise_sweep_{family}.csv"))).unwrap();
        assert_eq!(read, expected);
    }
    let solid = read_sweep(&dir.path().join("noise_sweep_solid.csv")).unwrap();
    let dashed = read_sweep(&dir.path().join("noise_sweep_dashed.csv")).unwrap();
    for (a, b) in solid.iter().zip(&dashed) {
        assert!(a.sqrt_s_omega.unwrap() >= b.sqrt_s_omega.unwrap());
    }
}

#[test]
fn plan_time_scales_with_inverse_square_target() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_scenario(dir.path(), "b0.toml", &b0());
    let a = parse_report(&run("plan", &p, dir.path(), &[]));
    let b = parse_report(&run("plan", &p, dir.path(), &["--target-rel-err", "0.004"]));
    for q in ["1e4", "1e5", "1e9"] {
        let k = format!("qd_{q}.measurement_time_s");
        let r = a.get_f64(&k).unwrap() / b.get_f64(&k).unwrap();
        assert!((r - 4.0).abs() < 1e-12, "{k}: {r}");
    }
}

fn small_sim() -> Scenario {
    let mut s = b0();
    let sim = s.sim.as_mut().unwrap();
    sim.duration_s = 1.0;
    sim.trials = 100;
    s
}

#[test]
fn seeded_simulate_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_scenario(dir.path(), "sim.toml", &small_sim());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(run("simulate", &p, &a, &[]).status.success());
    assert!(run("simulate", &p, &b, &[]).status.success());
    for f in ["trajectory.csv", "monte_carlo_trials.csv", "simulate_summary.txt"] {
        let x = std::fs::read(a.join(f)).unwrap();
        let y = std::fs::read(b.join(f)).unwrap();
        assert!(x == y, "{f} differs");
    }
    let c = dir.path().join("c");
    assert!(run("simulate", &p, &c, &["--seed", "5"]).status.success());
    assert_ne!(
        std::fs::read(a.join("monte_carlo_trials.csv")).unwrap(),
        std::fs::read(c.join("monte_carlo_trials.csv")).unwrap()
    );
}

#[test]
fn lossless_ringdown_does_not_decay() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = small_sim();
    let sim = s.sim.as_mut().unwrap();
    sim.trials = 0;
    sim.thermal_noise = false;
    sim.resistance_J_s_per_kg2 = Some(0.0);
    let r = parse_report(&run("simulate", &write_scenario(dir.path(), "r0.toml", &s), dir.path(), &[]));
    let decay = r.get_f64("ringdown_decay_per_s").unwrap();
    let se = r.get_f64("ringdown_decay_stderr_per_s").unwrap();
    assert!(decay.abs() <= 3.0 * se + 1e-9, "{decay} ± {se}");
}

fn design(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("design.toml");
    std::fs::write(&p, format!("schema_version = 1\nphi_a_max_rad = 0.2\n{body}")).unwrap();
    p
}

#[test]
fn optimize_singleton_space_returns_input() {
    let dir = tempfile::tempdir().unwrap();
    let s = b0();
    let p = write_scenario(dir.path(), "b0.toml", &s);
    let d = design(dir.path(), "[[free]]\nparameter = \"area_m2\"\nlower = 3e-2\nupper = 3e-2\n");
    let r = parse_report(&gyro(&[
        "optimize",
        "--scenario",
        p.to_str().unwrap(),
        "--design",
        d.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]));
    assert_eq!(r.get_f64("improvement_factor"), Some(1.0));
    let out = dir.path().join("optimized_scenario.toml");
    let back = scenario::load(&out).unwrap();
    assert_eq!(back.raw, s);
}

#[test]
fn optimize_free_area_hits_bound() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_scenario(dir.path(), "b0.toml", &b0());
    let d = design(dir.path(), "[[free]]\nparameter = \"area_m2\"\nlower = 3e-2\nupper = 3e-1\n");
    let r = parse_report(&gyro(&[
        "optimize",
        "--scenario",
        p.to_str().unwrap(),
        "--design",
        d.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]));
    assert!((r.get_f64("optimized.area_m2").unwrap() - 0.3).abs() < 1e-12);
    assert!((r.get_f64("improvement_factor").unwrap() - 10.0).abs() < 1e-6);
    assert!(r.get("active_constraints").unwrap().contains("area at upper bound"));
}

#[test]
fn optimize_rejects_unknown_parameter() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_scenario(dir.path(), "b0.toml", &b0());
    let d = design(dir.path(), "[[free]]\nparameter = \"area_cm2\"\nlower = 1\nupper = 2\n");
    let o = gyro(&[
        "optimize",
        "--scenario",
        p.to_str().unwrap(),
        "--design",
        d.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), exit::VALIDATION);
}

#[test]
fn constants_env_override() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_scenario(dir.path(), "b0.toml", &b0());
    let base = parse_report(&run("phase-budget", &p, dir.path(), &[]));
    let c = dir.path().join("constants.toml");
    std::fs::write(&c, gyro::constants::EMBEDDED.replace("6.67430e-11", "6.807786e-11")).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_gyro"))
        .args(["phase-budget", "--scenario", p.to_str().unwrap()])
        .env("GYRO_CONSTANTS", &c)
        .output()
        .unwrap();
    let alt = parse_report(&o);
    let k = "rate_frame_dragging_dot_n_rad_per_s";
    let ratio = alt.get_f64(k).unwrap() / base.get_f64(k).unwrap();
    assert!((ratio - 1.02).abs() < 1e-9, "{ratio}");
}
