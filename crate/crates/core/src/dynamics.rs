//! Time-domain Langevin simulation of the Helmholtz circuit and the
//! impulse/ringdown rotation estimate built on it.
//!
//! State is the displaced mass Q on the diaphragm and the junction phase φ.
//! With φ_b the fluxoid bias and R the lumped series resistance,
//!
//! ```text
//! dQ/dt        = I(φ) = I_c sin φ + (ħ/m₄)(φ − φ_b)/L_l
//! (ħ/m₄) dφ/dt = −(Q/C_d + R I(φ) − μ_noise)
//! ```
//!
//! The conservative part is separable, H = Q²/2C_d + (ħ/m₄)[−I_c cos φ +
//! (ħ/m₄)(φ − φ_b)²/2L_l], and is advanced with a fourth-order Yoshida
//! composition of leapfrog steps. Damping and the thermal force are split
//! off after each step.

pub mod fit;

use core::f64::consts::PI;

use alloc::format;
use alloc::vec::Vec;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::circuit::{CircuitModel, Losses, OperatingPoint};
use crate::error::{Error, Result};
use crate::noise::{rotation_noise_density, NoiseReport};
use crate::physconst::check_phonon_regime;
use crate::relativity::phase_to_rotation;
use fit::{demodulate, fit_decaying_sinusoid, linear_slope, SinusoidFit};

/// Root of φ + β sin φ + Δφ = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaticSolution {
    pub phi0: f64,
    pub residual: f64,
    /// β ≥ 1: other roots may exist; the one nearest the guess is returned.
    pub multiple_roots: bool,
}

/// External fluxoid bias that places the static phase at `phi0`.
pub fn bias_for_operating_point(beta: f64, phi0: f64) -> f64 {
    -(phi0 + beta * phi0.sin())
}

/// Solves φ₀ + β sin φ₀ + Δφ_eff = 0 by safeguarded Newton iteration.
///
/// For 0 ≤ β < 1 the root is unique and bracketed by −Δφ ± β. For β ≥ 1 the
/// root reached from `guess` is returned with `multiple_roots` set.
pub fn static_operating_point(beta: f64, delta_phi_eff: f64, guess: f64) -> Result<StaticSolution> {
    if !(beta.is_finite() && beta >= 0.0 && delta_phi_eff.is_finite()) {
        return Err(Error::invalid("static operating point", format!("beta = {beta}, bias = {delta_phi_eff}")));
    }
    let f = |p: f64| p + beta * p.sin() + delta_phi_eff;
    let df = |p: f64| 1.0 + beta * p.cos();
    if beta < 1.0 {
        let (mut lo, mut hi) = (-delta_phi_eff - beta, -delta_phi_eff + beta);
        let mut p = if guess.is_finite() { guess.clamp(lo, hi) } else { -delta_phi_eff };
        for _ in 0..200 {
            let v = f(p);
            if v == 0.0 {
                break;
            }
            if v > 0.0 {
                hi = p;
            } else {
                lo = p;
            }
            let newton = p - v / df(p);
            let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if next == p || hi - lo <= 4.0 * f64::EPSILON * p.abs().max(1.0) {
                p = next;
                break;
            }
            p = next;
        }
        return Ok(StaticSolution {
            phi0: p,
            residual: f(p).abs(),
            multiple_roots: false,
        });
    }
    let mut p = if guess.is_finite() { guess } else { -delta_phi_eff };
    for _ in 0..200 {
        let d = df(p);
        if d.abs() < 1e-14 {
            p += 1e-3;
            continue;
        }
        let step = f(p) / d;
        p -= step.clamp(-0.5, 0.5);
        if step.abs() < 1e-15 * p.abs().max(1.0) {
            break;
        }
    }
    let residual = f(p).abs();
    if residual > 1e-10 {
        return Err(Error::invalid("static operating point", format!("Newton did not converge (residual {residual:e})")));
    }
    Ok(StaticSolution {
        phi0: p,
        residual,
        multiple_roots: true,
    })
}

/// Single-step phase kick applied at `time`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Impulse {
    /// rad
    pub phase_kick: f64,
    /// s
    pub time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub model: CircuitModel,
    /// Static junction phase at zero injected bias.
    pub phi0: f64,
    /// Additional fluxoid phase Δφ₀ (rotation or synthetic injection), rad.
    pub phase_bias: f64,
    /// K
    pub temperature: f64,
    /// Lumped series resistance R_tot.
    pub resistance: f64,
    /// Thermal force on or off.
    pub thermal_noise: bool,
    /// Multiplier on the thermal force PSD.
    pub psd_scale: f64,
    /// s
    pub dt: f64,
    /// s
    pub duration: f64,
    pub seed: u64,
    pub drive: Option<Impulse>,
    /// Record one sample every this many steps.
    pub decimation: usize,
}

impl SimConfig {
    /// Ringdown configuration at an operating point: R_tot from all loss
    /// channels, impulse of φ_A at t = 0, dt = T_H/200 rounded down to a
    /// whole number of microseconds.
    pub fn ringdown(model: &CircuitModel, op: &OperatingPoint, duration: f64, seed: u64) -> Result<Self> {
        op.validate()?;
        let q = model.quality_factor(op.phi0, op.temperature, Losses::All)?;
        let period = 2.0 * PI / q.omega_h;
        let dt = ((period / 200.0) * 1e6).floor() * 1e-6;
        Ok(Self {
            model: *model,
            phi0: op.phi0,
            phase_bias: 0.0,
            temperature: op.temperature,
            resistance: q.total_resistance.0,
            thermal_noise: true,
            psd_scale: 1.0,
            dt: if dt > 0.0 { dt } else { period / 200.0 },
            duration,
            seed,
            drive: Some(Impulse {
                phase_kick: op.phi_a,
                time: 0.0,
            }),
            decimation: 4,
        })
    }

    pub fn external_bias(&self) -> f64 {
        bias_for_operating_point(self.model.beta, self.phi0)
    }

    /// Linearized Helmholtz period at the unbiased operating point (s).
    pub fn period(&self) -> Result<f64> {
        Ok(2.0 * PI / self.model.helmholtz_frequency(self.phi0)?)
    }

    pub fn steps(&self) -> u64 {
        (self.duration / self.dt).round() as u64
    }

    pub fn validate(&self) -> Result<()> {
        if !self.model.is_non_hysteretic() {
            return Err(Error::invalid("simulation", format!("beta = {} must lie in (0, 1)", self.model.beta)));
        }
        let period = self.period()?;
        if !(self.dt > 0.0 && self.dt <= period / 200.0 * (1.0 + 1e-12)) {
            return Err(Error::invalid(
                "simulation",
                format!("dt = {:e} s must be positive and at most T_H/200 = {:e} s", self.dt, period / 200.0),
            ));
        }
        if !(self.duration >= 20.0 * period) {
            return Err(Error::invalid(
                "simulation",
                format!("duration = {} s is shorter than 20 periods ({:e} s)", self.duration, 20.0 * period),
            ));
        }
        check_phonon_regime(self.temperature)?;
        if !(self.resistance >= 0.0 && self.resistance.is_finite()) {
            return Err(Error::invalid("simulation", "resistance must be non-negative"));
        }
        if !(self.psd_scale >= 0.0 && self.psd_scale.is_finite()) {
            return Err(Error::invalid("simulation", "psd_scale must be non-negative"));
        }
        if !self.phase_bias.is_finite() || !self.phi0.is_finite() {
            return Err(Error::invalid("simulation", "phases must be finite"));
        }
        if self.decimation == 0 {
            return Err(Error::invalid("simulation", "decimation must be at least 1"));
        }
        if let Some(imp) = self.drive {
            if !(imp.phase_kick.is_finite() && imp.time >= 0.0 && imp.time < self.duration) {
                return Err(Error::invalid("simulation", "impulse must be finite and inside the run"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimState {
    /// kg
    pub q: f64,
    /// rad
    pub phi: f64,
    /// s
    pub t: f64,
}

/// Sampled trajectory; x is the diaphragm displacement Q/(ρ a_d).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub phi: Vec<f64>,
}

const YOSHIDA_W1: f64 = 1.351_207_191_959_657_6; // 1 / (2 − 2^(1/3))
const YOSHIDA_W0: f64 = -1.702_414_383_919_315_3; // −2^(1/3) w1

/// Stepper for one realization.
#[derive(Debug, Clone)]
pub struct Simulator {
    hbar_over_mass: f64,
    capacitance: f64,
    critical_current: f64,
    loop_inductance: f64,
    bias: f64,
    resistance: f64,
    noise_sigma: f64,
    dt: f64,
    x_per_q: f64,
    rng: ChaCha8Rng,
    step: u64,
    state: SimState,
}

impl Simulator {
    /// Starts at rest at the static root for the biased fluxoid relation.
    /// `stream` selects an independent RNG stream for the same seed.
    pub fn new(cfg: &SimConfig, stream: u64) -> Result<Self> {
        cfg.validate()?;
        let m = &cfg.model;
        let c = m.constants();
        let hm = c.hbar_over_mass();
        let delta = cfg.external_bias() + cfg.phase_bias;
        let root = static_operating_point(m.beta, delta, cfg.phi0)?;
        let kt = c.universal.boltzmann * cfg.temperature;
        let noise_sigma = if cfg.thermal_noise {
            (2.0 * kt * cfg.psd_scale * cfg.resistance * cfg.dt).sqrt() / hm
        } else {
            0.0
        };
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(stream);
        Ok(Self {
            hbar_over_mass: hm,
            capacitance: m.capacitance.0,
            critical_current: m.geometry().critical_current,
            loop_inductance: m.loop_inductance.0,
            bias: -delta,
            resistance: cfg.resistance,
            noise_sigma,
            dt: cfg.dt,
            x_per_q: 1.0 / (c.helium.density * m.geometry().diaphragm_area),
            rng,
            step: 0,
            state: SimState {
                q: 0.0,
                phi: root.phi0,
                t: 0.0,
            },
        })
    }

    pub fn state(&self) -> SimState {
        self.state
    }

    pub fn set_state(&mut self, state: SimState) {
        self.state = state;
    }

    pub fn displacement(&self) -> f64 {
        self.state.q * self.x_per_q
    }

    /// Total mass current through the junction and loop branches.
    #[inline]
    pub fn current(&self, phi: f64) -> f64 {
        self.critical_current * phi.sin() + self.hbar_over_mass * (phi - self.bias) / self.loop_inductance
    }

    /// Conservative energy, with the potential measured from `phi_ref`.
    pub fn energy(&self, phi_ref: f64) -> f64 {
        let hm = self.hbar_over_mass;
        let u = |p: f64| hm * (-self.critical_current * p.cos() + hm * (p - self.bias).powi(2) / (2.0 * self.loop_inductance));
        let s = &self.state;
        s.q * s.q / (2.0 * self.capacitance) + u(s.phi) - u(phi_ref)
    }

    pub fn kick(&mut self, dphi: f64) {
        self.state.phi += dphi;
    }

    #[inline]
    fn leapfrog(&mut self, h: f64) {
        let drift = 0.5 * h / (self.capacitance * self.hbar_over_mass);
        let s = &mut self.state;
        s.phi -= drift * s.q;
        s.q += h * (self.critical_current * s.phi.sin() + self.hbar_over_mass * (s.phi - self.bias) / self.loop_inductance);
        s.phi -= drift * s.q;
    }

    /// Advances one step of length dt.
    pub fn step(&mut self) -> Result<()> {
        let before = self.state.phi;
        self.leapfrog(YOSHIDA_W1 * self.dt);
        self.leapfrog(YOSHIDA_W0 * self.dt);
        self.leapfrog(YOSHIDA_W1 * self.dt);
        if self.resistance > 0.0 {
            let i = self.current(self.state.phi);
            self.state.phi -= self.dt * self.resistance * i / self.hbar_over_mass;
        }
        if self.noise_sigma > 0.0 {
            let xi: f64 = StandardNormal.sample(&mut self.rng);
            self.state.phi += self.noise_sigma * xi;
        }
        self.step += 1;
        self.state.t = self.step as f64 * self.dt;
        let jump = self.state.phi - before;
        if !(jump.abs() <= PI) || !self.state.q.is_finite() {
            return Err(Error::SimulationAbort {
                time: self.state.t,
                step: self.step,
                detail: format!("phase changed by {jump:e} rad in one step (q = {:e} kg)", self.state.q),
            });
        }
        Ok(())
    }
}

/// Runs a configuration to completion and returns the sampled trajectory.
/// Samples start at the impulse (or t = 0 without a drive).
pub fn simulate(cfg: &SimConfig, stream: u64) -> Result<Trajectory> {
    let mut sim = Simulator::new(cfg, stream)?;
    let steps = cfg.steps();
    let kick_step = cfg.drive.map(|d| (d.time / cfg.dt).round() as u64);
    let start = kick_step.unwrap_or(0);
    let n = ((steps - start) / cfg.decimation as u64 + 1) as usize;
    let mut out = Trajectory {
        t: Vec::with_capacity(n),
        x: Vec::with_capacity(n),
        phi: Vec::with_capacity(n),
    };
    for k in 0..steps {
        if Some(k) == kick_step {
            sim.kick(cfg.drive.map_or(0.0, |d| d.phase_kick));
        }
        if k >= start && (k - start).is_multiple_of(cfg.decimation as u64) {
            let s = sim.state();
            out.t.push(s.t);
            out.x.push(sim.displacement());
            out.phi.push(s.phi);
        }
        sim.step()?;
    }
    Ok(out)
}

/// Noiseless response of the estimator around the unbiased operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    /// Estimated frequency at zero injected bias (rad/s).
    pub omega_ref: f64,
    /// Mean squared demodulated amplitude of the reference run (m²).
    pub amp2_ref: f64,
    /// dω/d(a²) from a run with a 2.5% larger impulse.
    pub domega_damp2: f64,
    /// dω/dΔφ₀ (rad/s per rad) from a run with a small extra bias.
    pub domega_dbias: f64,
}

/// Demodulation segment length, in linearized periods.
const SEGMENT_PERIODS: f64 = 20.0;
/// Relative half-width of the coarse frequency search.
const SEARCH: f64 = 0.03;
const CALIBRATION_BIAS_STEP: f64 = 1e-5;
const CALIBRATION_KICK_SCALE: f64 = 1.025;

/// Frequency estimate for one ringdown.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyEstimate {
    /// Amplitude-corrected frequency (rad/s).
    pub omega: f64,
    pub omega_stderr: f64,
    pub fit: SinusoidFit,
    pub mean_amp2: f64,
}

fn segment_len(cfg: &SimConfig) -> Result<usize> {
    let sample_dt = cfg.dt * cfg.decimation as f64;
    Ok((SEGMENT_PERIODS * cfg.period()? / sample_dt).round() as usize)
}

/// Decaying-sinusoid fit followed by segmented demodulation at the fitted
/// frequency. The drift of segment phase is corrected for the amplitude
/// dependence of the frequency, ∫ s (a² − a²_ref) dt, before a line fit.
pub fn estimate_frequency(
    cfg: &SimConfig,
    traj: &Trajectory,
    amplitude_slope: f64,
    amp2_ref: f64,
) -> Result<FrequencyEstimate> {
    let sample_dt = cfg.dt * cfg.decimation as f64;
    let guess = cfg.model.helmholtz_frequency(cfg.phi0)?;
    let fit = fit_decaying_sinusoid(&traj.x, sample_dt, guess, SEARCH)?;
    let demod = demodulate(&traj.x, sample_dt, fit.omega, segment_len(cfg)?)?;
    let seg_dt = demod.times.get(1).map_or(0.0, |t1| t1 - demod.times[0]);
    let mut acc = 0.0;
    let corrected: Vec<f64> = demod
        .phases
        .iter()
        .zip(&demod.amplitudes2)
        .map(|(ph, a2)| {
            acc += amplitude_slope * (a2 - amp2_ref) * seg_dt;
            ph - acc
        })
        .collect();
    let (slope, se) = linear_slope(&demod.times, &corrected);
    Ok(FrequencyEstimate {
        omega: fit.omega + slope,
        omega_stderr: se,
        fit,
        mean_amp2: demod.mean_amplitude2(),
    })
}

/// Noiseless reference runs sharing the integrator and step of `cfg`.
pub fn calibrate(cfg: &SimConfig) -> Result<Calibration> {
    let base = SimConfig {
        thermal_noise: false,
        phase_bias: 0.0,
        ..*cfg
    };
    let drive = base
        .drive
        .ok_or_else(|| Error::invalid("simulation", "ringdown needs an impulse drive"))?;
    let reference_traj = simulate(&base, 0)?;
    let reference = estimate_frequency(&base, &reference_traj, 0.0, 0.0)?;
    let louder = SimConfig {
        drive: Some(Impulse {
            phase_kick: drive.phase_kick * CALIBRATION_KICK_SCALE,
            ..drive
        }),
        ..base
    };
    let louder = estimate_frequency(&louder, &simulate(&louder, 0)?, 0.0, 0.0)?;
    let slope = (louder.omega - reference.omega) / (louder.mean_amp2 - reference.mean_amp2);
    let amp2_ref = reference.mean_amp2;

    // Re-estimate with the amplitude correction so trials and reference
    // go through the same estimator.
    let reference = estimate_frequency(&base, &reference_traj, slope, amp2_ref)?;
    let biased = SimConfig {
        phase_bias: CALIBRATION_BIAS_STEP,
        ..base
    };
    let biased = estimate_frequency(&biased, &simulate(&biased, 0)?, slope, amp2_ref)?;
    Ok(Calibration {
        omega_ref: reference.omega,
        amp2_ref,
        domega_damp2: slope,
        domega_dbias: (biased.omega - reference.omega) / CALIBRATION_BIAS_STEP,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RingdownRecord {
    pub trajectory: Trajectory,
    pub estimate: FrequencyEstimate,
    /// Inferred fluxoid bias offset Δφ̂₀ (rad).
    pub phase_bias: f64,
    pub phase_bias_stderr: f64,
    /// Inferred static phase φ̂₀ (rad).
    pub phi0: f64,
    /// Inferred rotation along the loop normal Ω̂ (rad/s).
    pub rotation: f64,
    pub rotation_stderr: f64,
}

/// Impulse, free decay, frequency fit, and inversion to Ω̂ through the
/// calibrated response and the static fluxoid relation.
pub fn ringdown_with_calibration(cfg: &SimConfig, cal: &Calibration, stream: u64) -> Result<RingdownRecord> {
    let trajectory = simulate(cfg, stream)?;
    let estimate = estimate_frequency(cfg, &trajectory, cal.domega_damp2, cal.amp2_ref)?;
    let phase_bias = (estimate.omega - cal.omega_ref) / cal.domega_dbias;
    let phase_bias_stderr = estimate.omega_stderr / cal.domega_dbias.abs();
    let root = static_operating_point(cfg.model.beta, cfg.external_bias() + phase_bias, cfg.phi0)?;
    let c = cfg.model.constants();
    let area = cfg.model.geometry().area;
    Ok(RingdownRecord {
        trajectory,
        estimate,
        phase_bias,
        phase_bias_stderr,
        phi0: root.phi0,
        rotation: phase_to_rotation(c, phase_bias, area),
        rotation_stderr: phase_to_rotation(c, phase_bias_stderr, area).abs(),
    })
}

pub fn ringdown_experiment(cfg: &SimConfig) -> Result<RingdownRecord> {
    let cal = calibrate(cfg)?;
    ringdown_with_calibration(cfg, &cal, 0)
}

/// Ω̂ of one Monte Carlo trial; trial `index` uses RNG stream `index`.
pub fn run_trial(cfg: &SimConfig, cal: &Calibration, index: u64) -> Result<f64> {
    let trajectory = simulate(cfg, index)?;
    let est = estimate_frequency(cfg, &trajectory, cal.domega_damp2, cal.amp2_ref)?;
    let bias = (est.omega - cal.omega_ref) / cal.domega_dbias;
    Ok(phase_to_rotation(cfg.model.constants(), bias, cfg.model.geometry().area))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloSummary {
    pub trials: usize,
    pub failed: usize,
    /// std(Ω̂) · √duration (rad/s/√Hz).
    pub sqrt_s_omega: f64,
    /// 95% bootstrap interval on `sqrt_s_omega`.
    pub ci_low: f64,
    pub ci_high: f64,
    pub mean_rotation: f64,
    /// Analytic density at the same PSD scale.
    pub analytic: NoiseReport,
}

impl MonteCarloSummary {
    pub fn ratio_to_analytic(&self) -> f64 {
        self.sqrt_s_omega / self.analytic.sqrt_s_omega
    }
}

pub const MIN_TRIALS: usize = 100;
const BOOTSTRAP_RESAMPLES: usize = 1000;

/// Aggregates per-trial outcomes, in trial order. Fails if more than 1% of
/// the trials aborted.
pub fn summarize(cfg: &SimConfig, outcomes: &[Result<f64>], op: &OperatingPoint) -> Result<MonteCarloSummary> {
    let total = outcomes.len();
    let values: Vec<f64> = outcomes.iter().filter_map(|o| o.as_ref().ok().copied()).collect();
    let failed = total - values.len();
    if failed * 100 > total || values.len() < 2 {
        return Err(Error::TooManyFailures { failed, total });
    }
    let (mean, sd) = mean_std(&values);
    let root_t = cfg.duration.sqrt();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(u64::MAX);
    let mut stats: Vec<f64> = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    let mut buf = alloc::vec![0.0; values.len()];
    for _ in 0..BOOTSTRAP_RESAMPLES {
        for b in buf.iter_mut() {
            let u: u64 = rand_chacha::rand_core::RngCore::next_u64(&mut rng);
            *b = values[(u % values.len() as u64) as usize];
        }
        stats.push(mean_std(&buf).1 * root_t);
    }
    stats.sort_by(f64::total_cmp);
    let pick = |q: f64| stats[((q * (BOOTSTRAP_RESAMPLES - 1) as f64).round() as usize).min(BOOTSTRAP_RESAMPLES - 1)];

    let analytic_op = OperatingPoint {
        temperature: cfg.temperature,
        phi0: cfg.phi0,
        ..*op
    };
    let scale = if cfg.thermal_noise { cfg.psd_scale } else { 0.0 };
    let analytic = rotation_noise_density(&cfg.model, &analytic_op, Losses::All)?.with_psd_scale(scale);
    Ok(MonteCarloSummary {
        trials: total,
        failed,
        sqrt_s_omega: sd * root_t,
        ci_low: pick(0.025),
        ci_high: pick(0.975),
        mean_rotation: mean,
        analytic,
    })
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Serial Monte Carlo estimate of √S_Ω. `op` supplies φ_A for the analytic
/// comparison.
pub fn monte_carlo_sensitivity(cfg: &SimConfig, op: &OperatingPoint, n_trials: usize) -> Result<MonteCarloSummary> {
    if n_trials < MIN_TRIALS {
        return Err(Error::invalid("monte carlo", format!("need at least {MIN_TRIALS} trials, got {n_trials}")));
    }
    let cal = calibrate(cfg)?;
    let outcomes: Vec<Result<f64>> = (0..n_trials as u64).map(|i| run_trial(cfg, &cal, i)).collect();
    summarize(cfg, &outcomes, op)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::b0_geometry;
    use crate::physconst::fixture;

    const B0_OP: OperatingPoint = OperatingPoint {
        phi0: 2.3,
        phi_a: 0.2,
        temperature: 0.010,
    };

    fn model(q_d: f64) -> CircuitModel {
        CircuitModel::new(&fixture(), &b0_geometry(q_d)).unwrap()
    }

    #[test]
    fn static_root_examples() {
        let s = static_operating_point(0.8, 0.0, 0.0).unwrap();
        assert_eq!(s.phi0, 0.0);
        let bias = bias_for_operating_point(0.8, 2.3);
        assert!((bias + 2.8963).abs() < 1e-3, "{bias}");
        let s = static_operating_point(0.8, bias, 0.0).unwrap();
        assert!((s.phi0 - 2.3).abs() < 1e-12 && s.residual < 1e-12);

        let h = 1e-7;
        let a = static_operating_point(0.8, bias + h, 2.3).unwrap().phi0;
        let b = static_operating_point(0.8, bias - h, 2.3).unwrap().phi0;
        let fd = (a - b) / (2.0 * h);
        let exact = -1.0 / (1.0 + 0.8 * 2.3_f64.cos());
        assert!((fd / exact - 1.0).abs() < 1e-6, "{fd} {exact}");

        let s = static_operating_point(1.5, -3.0, 2.0).unwrap();
        assert!(s.multiple_roots && s.residual < 1e-10);
    }

    #[test]
    fn config_validation() {
        let m = model(1e5);
        let cfg = SimConfig::ringdown(&m, &B0_OP, 1.0, 1).unwrap();
        cfg.validate().unwrap();
        assert!(SimConfig { dt: cfg.dt * 2.0, ..cfg }.validate().is_err());
        assert!(SimConfig { duration: 0.1, ..cfg }.validate().is_err());
        assert!(SimConfig { temperature: 0.7, ..cfg }.validate().is_err());
        assert!(SimConfig { decimation: 0, ..cfg }.validate().is_err());
    }

    #[test]
    fn blow_up_is_reported() {
        let m = model(1e5);
        let mut cfg = SimConfig::ringdown(&m, &B0_OP, 1.0, 1).unwrap();
        cfg.psd_scale = 1e40;
        assert!(matches!(simulate(&cfg, 0), Err(Error::SimulationAbort { .. })));
    }

    #[test]
    fn energy_is_measured_from_reference() {
        let m = model(1e5);
        let cfg = SimConfig::ringdown(&m, &B0_OP, 1.0, 1).unwrap();
        let sim = Simulator::new(&cfg, 0).unwrap();
        assert_eq!(sim.energy(sim.state().phi), 0.0);
        assert!(sim.current(sim.state().phi).abs() < 1e-12 * m.geometry().critical_current);
    }
}
