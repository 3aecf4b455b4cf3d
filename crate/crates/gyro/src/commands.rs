//! Subcommand implementations. Each returns its report and writes files
//! only under the output directory.

use std::path::{Path, PathBuf};

use gyro_core::circuit::{Losses, OperatingPoint};
use gyro_core::dynamics::{ringdown_with_calibration, SimConfig};
use gyro_core::noise::design::{optimize_design, Bound, DesignSpace, OptimizerSettings, Parameter};
use gyro_core::noise::rotation_noise_density;
use gyro_core::relativity::{orientation_sensitivity, phase_budget, precession_rates, LabKinematics};
use gyro_core::circuit::CircuitModel;
use serde::Deserialize;

use crate::csvio;
use crate::error::{CliError, Result};
use crate::parallel;
use crate::report::Report;
use crate::scenario::{self, Geometry, Loaded, Operating};

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// |Ω_FD · n̂| at the scenario orientation (rad/s).
pub fn frame_dragging_signal(s: &Loaded) -> Result<f64> {
    let kin = LabKinematics::earth_surface(&s.constants, &s.orientation);
    let rates = precession_rates(&s.constants, &kin, &s.ppn)?;
    let (_, _, n) = s.orientation.unit_vectors();
    Ok(rates.frame_dragging.dot(&n).abs())
}

pub fn phase_budget_report(s: &Loaded) -> Result<Report> {
    let c = &s.constants;
    let area = s.geometry.area;
    let b = phase_budget(c, &s.orientation, area, &s.ppn)?;
    let kin = LabKinematics::earth_surface(c, &s.orientation);
    let rates = precession_rates(c, &kin, &s.ppn)?;
    let (_, _, n) = s.orientation.unit_vectors();
    let tau = b.proper_times(c);
    let sens = orientation_sensitivity(c, &s.orientation, area, &s.ppn)?;

    let mut r = Report::new();
    r.num("phase_sagnac_rad", b.sagnac)
        .num("phase_frame_dragging_rad", b.frame_dragging)
        .num("phase_geodetic_rad", b.geodetic)
        .num("phase_thomas_normal_force_rad", b.thomas.normal_force)
        .num("phase_thomas_rotation_rad", b.thomas.rotation)
        .num("phase_total_rad", b.total())
        .num("rate_earth_dot_n_rad_per_s", kin.earth_rotation.dot(&n))
        .num("rate_frame_dragging_dot_n_rad_per_s", rates.frame_dragging.dot(&n))
        .num("rate_geodetic_dot_n_rad_per_s", rates.geodetic.dot(&n))
        .num("rate_thomas_dot_n_rad_per_s", rates.thomas.dot(&n))
        .num("k_coefficient_per_s", rates.k_coeff)
        .num("proper_time_sagnac_s", tau.sagnac)
        .num("proper_time_frame_dragging_s", tau.frame_dragging)
        .num("proper_time_geodetic_s", tau.geodetic)
        .num("proper_time_thomas_s", tau.thomas)
        .num("proper_time_total_s", tau.total)
        .num("dsagnac_dtheta_rad_per_rad", sens.dsagnac_dtheta)
        .num("orientation_tolerance_rad", sens.angle_tolerance);
    Ok(r)
}

pub struct SweepOutput {
    pub report: Report,
    pub solid: PathBuf,
    pub dashed: PathBuf,
}

pub fn noise_sweep(s: &Loaded, out: &Path) -> Result<SweepOutput> {
    let sweep = s
        .raw
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::config(&s.path, "noise-sweep needs a [sweep] block"))?;
    ensure_dir(out)?;
    let mut report = Report::new();
    let mut paths = Vec::new();
    for (family, fluid) in [("solid", true), ("dashed", false)] {
        let spec = sweep.spec(fluid)?;
        let rows = parallel::sweep(&s.constants, &s.geometry, &s.operating, &spec)?;
        let path = out.join(format!("noise_sweep_{family}.csv"));
        csvio::write_sweep(&path, &rows)?;
        let errors = rows.iter().filter(|r| r.outcome.is_err()).count();
        report
            .text(format!("{family}_file"), path.display())
            .int(format!("{family}_rows"), rows.len() as u64)
            .int(format!("{family}_row_errors"), errors as u64);
        paths.push(path);
    }
    Ok(SweepOutput {
        report,
        solid: paths[0].clone(),
        dashed: paths[1].clone(),
    })
}

fn qd_key(q: f64) -> String {
    format!("qd_{q:e}")
}

pub fn plan(s: &Loaded, target_override: Option<f64>) -> Result<Report> {
    let target = target_override
        .or(s.raw.plan.as_ref().map(|p| p.target_rel_err))
        .unwrap_or(0.002);
    if !(target > 0.0 && target.is_finite()) {
        return Err(CliError::config(&s.path, "target relative error must be positive"));
    }
    let qs = s
        .raw
        .plan
        .as_ref()
        .and_then(|p| p.quality_factors.clone())
        .unwrap_or_else(|| vec![s.geometry.diaphragm_q]);
    let signal = frame_dragging_signal(s)?;
    let sens = orientation_sensitivity(&s.constants, &s.orientation, s.geometry.area, &s.ppn)?;
    let mut r = Report::new();
    r.num("signal_frame_dragging_rad_per_s", signal)
        .num("target_rel_err", target)
        .num("orientation_tolerance_rad", sens.angle_tolerance);
    for q in qs {
        let g = gyro_core::circuit::GyrometerGeometry { diaphragm_q: q, ..s.geometry };
        let model = CircuitModel::new(&s.constants, &g)?;
        let n = rotation_noise_density(&model, &s.operating, Losses::All)?;
        let k = qd_key(q);
        r.num(format!("{k}.q_h"), n.quality.q)
            .num(format!("{k}.sqrt_s_omega_rad_per_s_rtHz"), n.sqrt_s_omega)
            .num(format!("{k}.sqrt_s_tau_s_rtHz"), n.sqrt_s_tau)
            .num(format!("{k}.measurement_time_s"), n.measurement_time(signal, target)?)
            .num(format!("{k}.position_resolution_m_rtHz"), n.x_resolution_required);
    }
    Ok(r)
}

/// Simulation configuration assembled from the `[sim]` block.
pub fn sim_config(s: &Loaded, seed_override: Option<u64>) -> Result<SimConfig> {
    let sim = s
        .raw
        .sim
        .as_ref()
        .ok_or_else(|| CliError::config(&s.path, "simulate needs a [sim] block"))?;
    let mut cfg = SimConfig::ringdown(&s.model, &s.operating, sim.duration_s, seed_override.unwrap_or(sim.seed))?;
    if let Some(dt) = sim.dt_s {
        cfg.dt = dt;
    }
    if let Some(r) = sim.resistance_J_s_per_kg2 {
        cfg.resistance = r;
    }
    cfg.psd_scale = sim.psd_scale;
    cfg.decimation = sim.decimation;
    cfg.phase_bias = sim.phase_bias_rad;
    cfg.thermal_noise = sim.thermal_noise;
    cfg.validate()?;
    Ok(cfg)
}

pub fn simulate(s: &Loaded, seed_override: Option<u64>, out: &Path) -> Result<Report> {
    let cfg = sim_config(s, seed_override)?;
    let trials = s.raw.sim.as_ref().map_or(0, |x| x.trials);
    ensure_dir(out)?;
    let cal = gyro_core::dynamics::calibrate(&cfg)?;
    let rec = ringdown_with_calibration(&cfg, &cal, 0)?;
    let mut r = Report::new();
    r.int("seed", cfg.seed)
        .num("dt_s", cfg.dt)
        .num("duration_s", cfg.duration)
        .num("psd_scale", cfg.psd_scale)
        .num("resistance_J_s_per_kg2", cfg.resistance)
        .num("calibration_omega_ref_rad_per_s", cal.omega_ref)
        .num("calibration_domega_dbias_rad_per_s", cal.domega_dbias)
        .num("calibration_domega_damp2_rad_per_s_m2", cal.domega_damp2)
        .num("ringdown_omega_rad_per_s", rec.estimate.omega)
        .num("ringdown_omega_stderr_rad_per_s", rec.estimate.omega_stderr)
        .num("ringdown_decay_per_s", rec.estimate.fit.decay)
        .num("ringdown_decay_stderr_per_s", rec.estimate.fit.decay_stderr)
        .num("ringdown_phi0_rad", rec.phi0)
        .num("ringdown_phase_bias_rad", rec.phase_bias)
        .num("ringdown_rotation_rad_per_s", rec.rotation)
        .num("ringdown_rotation_stderr_rad_per_s", rec.rotation_stderr);
    if s.raw.output.write_trajectory {
        let p = out.join("trajectory.csv");
        csvio::write_trajectory(&p, &rec.trajectory)?;
        r.text("trajectory_file", "trajectory.csv");
    }
    if trials > 0 {
        let run = parallel::monte_carlo_with(&cfg, &s.operating, trials, cal)?;
        let p = out.join("monte_carlo_trials.csv");
        csvio::write_trials(&p, &run.outcomes)?;
        let m = &run.summary;
        r.int("mc_trials", m.trials as u64)
            .int("mc_failed", m.failed as u64)
            .num("mc_sqrt_s_omega_rad_per_s_rtHz", m.sqrt_s_omega)
            .num("mc_ci95_low", m.ci_low)
            .num("mc_ci95_high", m.ci_high)
            .num("mc_mean_rotation_rad_per_s", m.mean_rotation)
            .num("analytic_sqrt_s_omega_rad_per_s_rtHz", m.analytic.sqrt_s_omega)
            .num("mc_over_analytic", m.ratio_to_analytic())
            .text("trials_file", "monte_carlo_trials.csv");
    }
    r.write(&out.join("simulate_summary.txt"))?;
    Ok(r)
}

/// Design-space file for `optimize`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignFile {
    pub schema_version: u32,
    pub phi_a_max_rad: f64,
    #[serde(default = "yes")]
    pub include_fluid_losses: bool,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub random_samples: Option<usize>,
    #[serde(default)]
    pub max_evaluations: Option<usize>,
    #[serde(default)]
    pub free: Vec<FreeParameter>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreeParameter {
    /// Scenario key of the parameter, e.g. `area_m2` or `phi0_rad`.
    pub parameter: String,
    pub lower: f64,
    pub upper: f64,
}

/// Scenario key for each design parameter.
pub const PARAMETER_KEYS: [(&str, Parameter); 10] = [
    ("area_m2", Parameter::Area),
    ("line_length_m", Parameter::LineLength),
    ("line_cross_section_m2", Parameter::LineCrossSection),
    ("diaphragm_area_m2", Parameter::DiaphragmArea),
    ("spring_constant_N_per_m", Parameter::SpringConstant),
    ("diaphragm_omega_rad_per_s", Parameter::DiaphragmOmega),
    ("diaphragm_q", Parameter::DiaphragmQ),
    ("critical_current_kg_per_s", Parameter::CriticalCurrent),
    ("phi0_rad", Parameter::Phi0),
    ("phi_a_rad", Parameter::PhiA),
];

pub fn load_design(path: &Path) -> Result<DesignFile> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let d: DesignFile = toml::from_str(&text).map_err(|e| CliError::config(path, e.to_string()))?;
    if d.schema_version != 1 {
        return Err(CliError::config(path, format!("schema_version {} is not supported", d.schema_version)));
    }
    Ok(d)
}

pub struct OptimizeOutput {
    pub report: Report,
    pub scenario_file: PathBuf,
}

pub fn optimize(s: &Loaded, design_path: &Path, seed_override: Option<u64>, out: &Path) -> Result<OptimizeOutput> {
    let d = load_design(design_path)?;
    let mut free = Vec::with_capacity(d.free.len());
    for f in &d.free {
        let parameter = PARAMETER_KEYS
            .iter()
            .find(|(k, _)| *k == f.parameter)
            .map(|(_, p)| *p)
            .ok_or_else(|| CliError::config(design_path, format!("unknown parameter {:?}", f.parameter)))?;
        free.push(Bound {
            parameter,
            lower: f.lower,
            upper: f.upper,
        });
    }
    let space = DesignSpace {
        geometry: s.geometry,
        operating: s.operating,
        free,
        phi_a_max: d.phi_a_max_rad,
        losses: if d.include_fluid_losses { Losses::All } else { Losses::DiaphragmOnly },
    };
    let defaults = OptimizerSettings::default();
    let settings = OptimizerSettings {
        seed: seed_override.unwrap_or(d.seed),
        random_samples: d.random_samples.unwrap_or(defaults.random_samples),
        max_evaluations: d.max_evaluations.unwrap_or(defaults.max_evaluations),
    };
    let res = optimize_design(&s.constants, &space, &settings)?;

    let mut raw = s.raw.clone();
    raw.geometry = Geometry::from_model(&res.geometry);
    raw.operating = Operating::from_model(&OperatingPoint { ..res.operating });
    if let Some(p) = raw.constants_file.as_mut() {
        // Keep the reference valid from the output directory.
        let abs = s.path.parent().unwrap_or(Path::new(".")).join(&*p);
        *p = std::fs::canonicalize(&abs).unwrap_or(abs);
    }
    ensure_dir(out)?;
    let scenario_file = out.join("optimized_scenario.toml");
    let text = scenario::to_toml(&raw);
    scenario::validate(scenario::parse(&text, &scenario_file)?, &scenario_file)?;
    std::fs::write(&scenario_file, &text).map_err(|e| CliError::io(&scenario_file, e))?;

    let mut r = Report::new();
    r.num("baseline_sqrt_s_omega_rad_per_s_rtHz", res.baseline.sqrt_s_omega)
        .num("optimized_sqrt_s_omega_rad_per_s_rtHz", res.report.sqrt_s_omega)
        .num("improvement_factor", res.baseline.sqrt_s_omega / res.report.sqrt_s_omega)
        .int("evaluations", res.evaluations as u64)
        .int("seed", settings.seed)
        .text("active_constraints", res.active_constraints.join("; "))
        .text("scenario_file", scenario_file.display());
    for (key, p) in PARAMETER_KEYS {
        if space.free.iter().any(|b| b.parameter == p) {
            let v = match p {
                Parameter::Phi0 => res.operating.phi0,
                Parameter::PhiA => res.operating.phi_a,
                _ => geometry_value(&Geometry::from_model(&res.geometry), key),
            };
            r.num(format!("optimized.{key}"), v);
        }
    }
    r.write(&out.join("optimize_report.txt"))?;
    Ok(OptimizeOutput { report: r, scenario_file })
}

fn geometry_value(g: &Geometry, key: &str) -> f64 {
    match key {
        "area_m2" => g.area_m2,
        "line_length_m" => g.line_length_m,
        "line_cross_section_m2" => g.line_cross_section_m2,
        "diaphragm_area_m2" => g.diaphragm_area_m2,
        "spring_constant_N_per_m" => g.spring_constant_N_per_m,
        "diaphragm_omega_rad_per_s" => g.diaphragm_omega_rad_per_s,
        "diaphragm_q" => g.diaphragm_q,
        "critical_current_kg_per_s" => g.critical_current_kg_per_s,
        _ => f64::NAN,
    }
}
