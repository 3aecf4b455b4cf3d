//! Rayon drivers. Results are collected in index order, so output does not
//! depend on thread scheduling.

use gyro_core::circuit::{GyrometerGeometry, OperatingPoint};
use gyro_core::dynamics::{calibrate, run_trial, summarize, Calibration, MonteCarloSummary, SimConfig, MIN_TRIALS};
use gyro_core::noise::{sweep_point, SweepRow, SweepSpec};
use gyro_core::physconst::Constants;
use rayon::prelude::*;

pub fn sweep(
    constants: &Constants,
    geometry: &GyrometerGeometry,
    op: &OperatingPoint,
    spec: &SweepSpec,
) -> gyro_core::Result<Vec<SweepRow>> {
    spec.validate()?;
    let losses = spec.losses();
    let points: Vec<(f64, f64)> = spec.points().collect();
    Ok(points
        .par_iter()
        .map(|&(t, q)| sweep_point(constants, geometry, op, losses, t, q))
        .collect())
}

pub struct MonteCarloRun {
    pub calibration: Calibration,
    pub outcomes: Vec<gyro_core::Result<f64>>,
    pub summary: MonteCarloSummary,
}

pub fn monte_carlo(cfg: &SimConfig, op: &OperatingPoint, n_trials: usize) -> gyro_core::Result<MonteCarloRun> {
    if n_trials < MIN_TRIALS {
        return Err(gyro_core::Error::Invalid {
            what: "monte carlo",
            detail: format!("need at least {MIN_TRIALS} trials, got {n_trials}"),
        });
    }
    let calibration = calibrate(cfg)?;
    monte_carlo_with(cfg, op, n_trials, calibration)
}

pub fn monte_carlo_with(
    cfg: &SimConfig,
    op: &OperatingPoint,
    n_trials: usize,
    calibration: Calibration,
) -> gyro_core::Result<MonteCarloRun> {
    let outcomes: Vec<gyro_core::Result<f64>> = (0..n_trials as u64)
        .into_par_iter()
        .map(|i| run_trial(cfg, &calibration, i))
        .collect();
    let summary = summarize(cfg, &outcomes, op)?;
    Ok(MonteCarloRun {
        calibration,
        outcomes,
        summary,
    })
}
