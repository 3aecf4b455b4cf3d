mod common;

use common::{model, rel, B0_OP};
use gyro_core::circuit::{Losses, OperatingPoint};
use gyro_core::dynamics::fit::fit_decaying_sinusoid;
use gyro_core::dynamics::{
    calibrate, monte_carlo_sensitivity, ringdown_with_calibration, simulate, Impulse, SimConfig, Simulator,
};
use gyro_core::relativity::phase_to_rotation;

fn quiet(q_d: f64, phi0: f64, kick: f64, periods: f64) -> SimConfig {
    let m = model(q_d);
    let op = OperatingPoint { phi0, ..B0_OP };
    let mut cfg = SimConfig::ringdown(&m, &op, 1.0, 7).unwrap();
    cfg.duration = periods * cfg.period().unwrap();
    cfg.thermal_noise = false;
    cfg.resistance = 0.0;
    cfg.drive = Some(Impulse { phase_kick: kick, time: 0.0 });
    cfg
}

#[test]
fn linearized_frequency_matches_helmholtz() {
    for phi0 in [0.0, 1.0, 2.3] {
        let cfg = quiet(1e5, phi0, 1e-3, 60.0);
        let traj = simulate(&cfg, 0).unwrap();
        let expected = cfg.model.helmholtz_frequency(phi0).unwrap();
        let f = fit_decaying_sinusoid(&traj.x, cfg.dt * cfg.decimation as f64, expected, 0.03).unwrap();
        assert!(rel(f.omega, expected) < 1e-3, "phi0 {phi0}: {} vs {expected}", f.omega);
    }
}

#[test]
fn ringdown_decay_matches_quality_factor() {
    let mut cfg = quiet(10.0, 2.3, 0.02, 400.0);
    let q = cfg.model.quality_factor(2.3, 0.010, Losses::All).unwrap();
    cfg.resistance = q.total_resistance.0;
    let traj = simulate(&cfg, 0).unwrap();
    let f = fit_decaying_sinusoid(&traj.x, cfg.dt * cfg.decimation as f64, q.omega_h, 0.03).unwrap();
    assert!(rel(f.quality(), q.q) < 0.05, "Q fit {} vs {}", f.quality(), q.q);
}

#[test]
fn undamped_fit_has_no_decay() {
    let cfg = quiet(1e5, 2.3, 0.2, 200.0);
    let traj = simulate(&cfg, 0).unwrap();
    let f = fit_decaying_sinusoid(&traj.x, cfg.dt * cfg.decimation as f64, 603.0, 0.03).unwrap();
    assert!(f.decay.abs() <= 3.0 * f.decay_stderr + 1e-12, "{} ± {}", f.decay, f.decay_stderr);
}

#[test]
fn energy_conserved_without_dissipation() {
    let cfg = quiet(1e5, 2.3, 0.2, 1000.0);
    let per_period = (cfg.period().unwrap() / cfg.dt).round() as usize;
    let mut sim = Simulator::new(&cfg, 0).unwrap();
    let phi0 = sim.state().phi;
    sim.kick(0.2);
    let steps = cfg.steps() as usize;
    let window = 10 * per_period;
    let (mut head, mut tail) = (0.0, 0.0);
    for k in 0..steps {
        sim.step().unwrap();
        let e = sim.energy(phi0);
        if k < window {
            head += e;
        } else if k >= steps - window {
            tail += e;
        }
    }
    let drift = (tail - head).abs() / head;
    assert!(drift < 1e-8, "drift {drift:e}");
}

#[test]
fn equipartition() {
    let m = model(1.0);
    let mut cfg = SimConfig::ringdown(&m, &B0_OP, 40.0, 11).unwrap();
    cfg.drive = None;
    let q = m.quality_factor(2.3, 0.010, Losses::All).unwrap();
    let kt = m.constants().universal.boltzmann * 0.010;
    let burn = (1.0 / cfg.dt) as u64;
    let (mut kin, mut pot, mut n) = (0.0, 0.0, 0.0);
    for stream in 0..16 {
        let mut sim = Simulator::new(&cfg, stream).unwrap();
        let phi0 = sim.state().phi;
        for k in 0..cfg.steps() {
            sim.step().unwrap();
            if k >= burn && k % 8 == 0 {
                let s = sim.state();
                kin += s.q * s.q / (2.0 * m.capacitance.0);
                pot += sim.energy(phi0) - s.q * s.q / (2.0 * m.capacitance.0);
                n += 1.0;
            }
        }
    }
    let (kin, pot) = (kin / n, pot / n);
    assert!(rel(kin, 0.5 * kt) < 0.10, "Q quadrature {:.4}", kin / (0.5 * kt));
    assert!(rel(pot, 0.5 * kt) < 0.10, "phase quadrature {:.4}", pot / (0.5 * kt));
    assert!(q.q < 100.0);
}

#[test]
fn injection_recovery_and_sign() {
    let m = model(1e5);
    let mut cfg = SimConfig::ringdown(&m, &B0_OP, 10.0, 3).unwrap();
    cfg.thermal_noise = false;
    let cal = calibrate(&cfg).unwrap();

    // ω_H rises with Δφ₀ at φ₀ = 2.3: dω/dφ₀ < 0 and dφ₀/dΔφ₀ = −1/(1 + β cos φ₀) < 0.
    let beta = m.beta;
    let h = 1e-6;
    let dw_dphi = (m.helmholtz_frequency(2.3 + h).unwrap() - m.helmholtz_frequency(2.3 - h).unwrap()) / (2.0 * h);
    let analytic = dw_dphi * (-1.0 / (1.0 + beta * 2.3_f64.cos()));
    assert!(analytic > 0.0 && cal.domega_dbias > 0.0);
    assert!(rel(cal.domega_dbias, analytic) < 0.10, "{} vs {analytic}", cal.domega_dbias);

    let zero = ringdown_with_calibration(&cfg, &cal, 0).unwrap();
    assert!(zero.rotation.abs() <= zero.rotation_stderr, "{} ± {}", zero.rotation, zero.rotation_stderr);
    assert!(rel(zero.phi0, 2.3) < 1e-9);

    let injected = SimConfig { phase_bias: 1e-6, ..cfg };
    let rec = ringdown_with_calibration(&injected, &cal, 0).unwrap();
    let truth = phase_to_rotation(m.constants(), 1e-6, m.geometry().area);
    assert!(rel(rec.rotation, truth) < 0.01, "{} vs {truth}", rec.rotation);
    assert!(rec.estimate.omega > 0.0 && rec.rotation_stderr > 0.0);
}

#[test]
fn seeded_runs_are_bit_identical() {
    let m = model(1e5);
    let mut cfg = SimConfig::ringdown(&m, &B0_OP, 1.0, 42).unwrap();
    cfg.psd_scale = 1e6;
    let a = simulate(&cfg, 5).unwrap();
    let b = simulate(&cfg, 5).unwrap();
    assert_eq!(a, b);
    let c = simulate(&cfg, 6).unwrap();
    assert_ne!(a.x, c.x);
}

fn desk(duration: f64, psd_scale: f64) -> SimConfig {
    let m = model(1e5);
    let mut cfg = SimConfig::ringdown(&m, &B0_OP, duration, 2024).unwrap();
    cfg.dt = 50e-6;
    cfg.psd_scale = psd_scale;
    cfg
}

#[test]
fn monte_carlo_scaling() {
    let base = monte_carlo_sensitivity(&desk(5.0, 1e6), &B0_OP, 100).unwrap();
    let ratio = base.ratio_to_analytic();
    assert!(ratio > 1.0 / 3.0 && ratio < 3.0, "MC/analytic {ratio}");
    assert!(base.ci_low < base.sqrt_s_omega && base.sqrt_s_omega < base.ci_high);

    let long = monte_carlo_sensitivity(&desk(10.0, 1e6), &B0_OP, 100).unwrap();
    assert!(long.ci_low < base.ci_high && base.ci_low < long.ci_high, "{base:?}\n{long:?}");

    let loud = monte_carlo_sensitivity(&desk(5.0, 4e6), &B0_OP, 100).unwrap();
    assert!(loud.ci_low < 2.0 * base.ci_high && 2.0 * base.ci_low < loud.ci_high, "{base:?}\n{loud:?}");
    eprintln!(
        "MC ratios: base {:.3}, long {:.3}, loud {:.3}",
        ratio,
        long.ratio_to_analytic(),
        loud.ratio_to_analytic()
    );
}
