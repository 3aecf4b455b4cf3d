//! Frequency estimation from a uniformly sampled ringdown.

use core::f64::consts::PI;

use alloc::format;
use alloc::vec::Vec;
use nalgebra::{Matrix3, Matrix5, Vector3, Vector5};

use crate::error::{Error, Result};

/// Least-squares fit of x(t) = e^{−γt}(a cos ωt + b sin ωt) + c.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinusoidFit {
    /// rad/s
    pub omega: f64,
    pub omega_stderr: f64,
    /// Amplitude decay rate γ (1/s).
    pub decay: f64,
    pub decay_stderr: f64,
    /// √(a² + b²) at the first sample, in the units of the data.
    pub amplitude: f64,
    pub offset: f64,
    /// RMS residual, in the units of the data.
    pub rms_residual: f64,
}

impl SinusoidFit {
    /// Q = ω / (2γ); infinite for a non-decaying fit.
    pub fn quality(&self) -> f64 {
        self.omega / (2.0 * self.decay)
    }
}

/// Fits a decaying sinusoid to samples `x` taken every `dt` seconds.
///
/// A coarse periodogram over ±`search` (relative) around `omega_guess`
/// seeds a Levenberg–Marquardt refinement of all five parameters.
pub fn fit_decaying_sinusoid(x: &[f64], dt: f64, omega_guess: f64, search: f64) -> Result<SinusoidFit> {
    let n = x.len();
    if n < 16 {
        return Err(Error::FitFailure {
            detail: format!("only {n} samples"),
            residual: f64::NAN,
        });
    }
    let scale = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::FitFailure {
            detail: "record is flat or non-finite".into(),
            residual: f64::NAN,
        });
    }
    let y: Vec<f64> = x.iter().map(|v| v / scale).collect();

    let omega0 = coarse_peak(&y, dt, omega_guess, search);
    let (a, b, c) = linear_fit(&y, dt, 0, omega0).ok_or_else(|| Error::FitFailure {
        detail: "singular seed fit".into(),
        residual: f64::NAN,
    })?;
    let mut p = Vector5::new(a, b, omega0, 0.0, c);
    let mut cost = residual_cost(&y, dt, &p);
    let mut lambda = 1e-3;
    let mut converged = false;
    for _ in 0..200 {
        let (jtj, jtr) = normal_equations(&y, dt, &p);
        let mut damped = jtj;
        for i in 0..5 {
            damped[(i, i)] += lambda * jtj[(i, i)].max(1e-300);
        }
        let Some(step) = damped.lu().solve(&(-jtr)) else {
            lambda *= 10.0;
            continue;
        };
        let trial = p + step;
        let trial_cost = residual_cost(&y, dt, &trial);
        if trial_cost.is_finite() && trial_cost <= cost {
            let rel_step = (step[2] / trial[2]).abs();
            let small = cost - trial_cost <= 1e-15 * cost.max(1e-300) && rel_step < 1e-12;
            p = trial;
            cost = trial_cost;
            lambda = (lambda * 0.3).max(1e-12);
            if small || rel_step < 1e-14 {
                converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                converged = true;
                break;
            }
        }
    }
    let dof = (n - 5) as f64;
    let sigma2 = 2.0 * cost / dof;
    let rms = (2.0 * cost / n as f64).sqrt() * scale;
    if !converged || !(p[2] > 0.0) || !p.iter().all(|v| v.is_finite()) {
        return Err(Error::FitFailure {
            detail: "Levenberg-Marquardt did not converge".into(),
            residual: rms,
        });
    }
    let (jtj, _) = normal_equations(&y, dt, &p);
    let cov = jtj.try_inverse().ok_or_else(|| Error::FitFailure {
        detail: "singular covariance".into(),
        residual: rms,
    })?;
    let amplitude = (p[0] * p[0] + p[1] * p[1]).sqrt();
    if rms > 0.5 * amplitude * scale {
        return Err(Error::FitFailure {
            detail: "residual comparable to the oscillation amplitude".into(),
            residual: rms,
        });
    }
    Ok(SinusoidFit {
        omega: p[2],
        omega_stderr: (sigma2 * cov[(2, 2)]).sqrt(),
        decay: p[3],
        decay_stderr: (sigma2 * cov[(3, 3)]).sqrt(),
        amplitude: amplitude * scale,
        offset: p[4] * scale,
        rms_residual: rms,
    })
}

/// Periodogram peak of the mean-removed record, refined by a parabola
/// through the three highest grid points.
fn coarse_peak(y: &[f64], dt: f64, omega_guess: f64, search: f64) -> f64 {
    const POINTS: usize = 81;
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let power = |omega: f64| {
        let step = (omega * dt).sin_cos();
        let (mut re, mut im) = (0.0, 0.0);
        let (mut c, mut s) = (1.0_f64, 0.0_f64);
        for &v in y {
            re += (v - mean) * c;
            im += (v - mean) * s;
            let nc = c * step.1 - s * step.0;
            s = s * step.1 + c * step.0;
            c = nc;
        }
        re * re + im * im
    };
    let grid: Vec<f64> = (0..POINTS)
        .map(|i| omega_guess * (1.0 + search * (2.0 * i as f64 / (POINTS - 1) as f64 - 1.0)))
        .collect();
    let p: Vec<f64> = grid.iter().map(|&w| power(w)).collect();
    let k = (0..POINTS).max_by(|&i, &j| p[i].total_cmp(&p[j])).unwrap_or(POINTS / 2);
    if k == 0 || k == POINTS - 1 {
        return grid[k];
    }
    let (l, m, r) = (p[k - 1], p[k], p[k + 1]);
    let denom = l - 2.0 * m + r;
    let shift = if denom < 0.0 { 0.5 * (l - r) / denom } else { 0.0 };
    grid[k] + shift * (grid[k + 1] - grid[k])
}

/// (a, b, c) minimizing Σ (a cos ωt + b sin ωt + c − y)², with t measured
/// from sample `start`.
fn linear_fit(y: &[f64], dt: f64, start: usize, omega: f64) -> Option<(f64, f64, f64)> {
    let mut m = Matrix3::zeros();
    let mut v = Vector3::zeros();
    for (i, &yi) in y.iter().enumerate() {
        let t = (start + i) as f64 * dt;
        let (s, c) = (omega * t).sin_cos();
        let row = Vector3::new(c, s, 1.0);
        m += row * row.transpose();
        v += row * yi;
    }
    let sol = m.lu().solve(&v)?;
    Some((sol[0], sol[1], sol[2]))
}

fn residual_cost(y: &[f64], dt: f64, p: &Vector5<f64>) -> f64 {
    let mut acc = 0.0;
    for (i, &yi) in y.iter().enumerate() {
        let t = i as f64 * dt;
        let (s, c) = (p[2] * t).sin_cos();
        let r = (-p[3] * t).exp() * (p[0] * c + p[1] * s) + p[4] - yi;
        acc += r * r;
    }
    0.5 * acc
}

fn normal_equations(y: &[f64], dt: f64, p: &Vector5<f64>) -> (Matrix5<f64>, Vector5<f64>) {
    let mut jtj = Matrix5::zeros();
    let mut jtr = Vector5::zeros();
    for (i, &yi) in y.iter().enumerate() {
        let t = i as f64 * dt;
        let (s, c) = (p[2] * t).sin_cos();
        let e = (-p[3] * t).exp();
        let osc = p[0] * c + p[1] * s;
        let r = e * osc + p[4] - yi;
        let j = Vector5::new(e * c, e * s, e * t * (p[1] * c - p[0] * s), -t * e * osc, 1.0);
        jtj += j * j.transpose();
        jtr += j * r;
    }
    (jtj, jtr)
}

/// Per-segment demodulation at a fixed reference frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct Demodulation {
    /// Segment mid-times, relative to the first sample (s).
    pub times: Vec<f64>,
    /// Unwrapped phase of each segment (rad).
    pub phases: Vec<f64>,
    /// Squared amplitude of each segment.
    pub amplitudes2: Vec<f64>,
}

impl Demodulation {
    pub fn mean_amplitude2(&self) -> f64 {
        self.amplitudes2.iter().sum::<f64>() / self.amplitudes2.len() as f64
    }
}

/// Splits the record into segments of `segment_len` samples and fits
/// a cos ωt + b sin ωt + c on each; phase θ = atan2(−b, a).
pub fn demodulate(x: &[f64], dt: f64, omega: f64, segment_len: usize) -> Result<Demodulation> {
    let count = x.len() / segment_len.max(1);
    if segment_len < 8 || count < 3 {
        return Err(Error::FitFailure {
            detail: format!("record too short for demodulation ({} samples, segment {segment_len})", x.len()),
            residual: f64::NAN,
        });
    }
    let mut out = Demodulation {
        times: Vec::with_capacity(count),
        phases: Vec::with_capacity(count),
        amplitudes2: Vec::with_capacity(count),
    };
    let mut prev = 0.0;
    for k in 0..count {
        let start = k * segment_len;
        let seg = &x[start..start + segment_len];
        let (a, b, _) = linear_fit(seg, dt, start, omega).ok_or_else(|| Error::FitFailure {
            detail: format!("singular demodulation segment {k}"),
            residual: f64::NAN,
        })?;
        let mut theta = (-b).atan2(a);
        if k > 0 {
            theta += 2.0 * PI * ((prev - theta) / (2.0 * PI)).round();
        }
        prev = theta;
        out.times.push((start as f64 + 0.5 * (segment_len - 1) as f64) * dt);
        out.phases.push(theta);
        out.amplitudes2.push(a * a + b * b);
    }
    Ok(out)
}

/// Ordinary least-squares line through (x, y): (slope, slope standard error).
pub fn linear_slope(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    let slope = sxy / sxx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - my - slope * (a - mx);
            r * r
        })
        .sum();
    let se = if n > 2.0 { (rss / (n - 2.0) / sxx).sqrt() } else { f64::INFINITY };
    (slope, se)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synth(n: usize, dt: f64, omega: f64, decay: f64, phase: f64) -> Vec<f64> {
        (0..n)
            .map(|i| {
                let t = i as f64 * dt;
                2e-9 * (-decay * t).exp() * (omega * t + phase).cos() + 1e-11
            })
            .collect()
    }

    #[test]
    fn recovers_clean_sinusoid() {
        let x = synth(20_000, 2e-4, 603.2, 0.3, 0.7);
        let f = fit_decaying_sinusoid(&x, 2e-4, 600.0, 0.02).unwrap();
        assert!((f.omega / 603.2 - 1.0).abs() < 1e-10, "{}", f.omega);
        assert!((f.decay - 0.3).abs() < 1e-8);
        assert!((f.amplitude / 2e-9 - 1.0).abs() < 1e-8);
        assert!((f.offset / 1e-11 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn flat_record_fails() {
        assert!(matches!(
            fit_decaying_sinusoid(&[0.0; 100], 1e-3, 600.0, 0.02),
            Err(Error::FitFailure { .. })
        ));
    }

    #[test]
    fn demodulated_phase_tracks_frequency_offset() {
        let dt = 2e-4;
        let x = synth(50_000, dt, 603.2, 0.0, 0.3);
        let d = demodulate(&x, dt, 603.0, 1000).unwrap();
        let (slope, _) = linear_slope(&d.times, &d.phases);
        assert!((slope - 0.2).abs() < 1e-6, "{slope}");
        // The 0.2 rad/s offset smears each 0.2 s segment slightly.
        assert!((d.mean_amplitude2() / 4e-18 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn line_fit() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let (s, se) = linear_slope(&x, &y);
        assert!((s - 2.0).abs() < 1e-15 && se < 1e-12);
    }
}
