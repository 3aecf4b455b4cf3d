//! CSV outputs. Column layouts are frozen in `data/columns.toml`.

use std::path::Path;
use std::sync::OnceLock;

use gyro_core::dynamics::Trajectory;
use gyro_core::noise::{SweepPoint, SweepRow};
use serde::Deserialize;

use crate::error::{CliError, Result};

pub const COLUMNS_SPEC: &str = include_str!("../data/columns.toml");

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnSpec {
    pub version: u32,
    pub noise_sweep: Columns,
    pub trajectory: Columns,
    pub monte_carlo: Columns,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Columns {
    pub columns: Vec<String>,
}

pub fn columns() -> &'static ColumnSpec {
    static SPEC: OnceLock<ColumnSpec> = OnceLock::new();
    SPEC.get_or_init(|| toml::from_str(COLUMNS_SPEC).expect("columns.toml is valid"))
}

/// One parsed row of a noise-sweep CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub temperature: f64,
    pub diaphragm_q: f64,
    pub sqrt_s_omega: Option<f64>,
    pub sqrt_s_tau: Option<f64>,
    pub q_h: Option<f64>,
    pub regime: String,
    pub errata: String,
}

impl SweepRecord {
    pub fn from_row(row: &SweepRow) -> Self {
        match &row.outcome {
            Ok(SweepPoint {
                sqrt_s_omega,
                sqrt_s_tau,
                q_h,
                regime,
            }) => Self {
                temperature: row.temperature,
                diaphragm_q: row.diaphragm_q,
                sqrt_s_omega: Some(*sqrt_s_omega),
                sqrt_s_tau: Some(*sqrt_s_tau),
                q_h: Some(*q_h),
                regime: regime.as_str().to_string(),
                errata: String::new(),
            },
            Err(e) => Self {
                temperature: row.temperature,
                diaphragm_q: row.diaphragm_q,
                sqrt_s_omega: None,
                sqrt_s_tau: None,
                q_h: None,
                regime: String::new(),
                errata: e.to_string(),
            },
        }
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> CliError + '_ {
    move |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_sweep(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(&columns().noise_sweep.columns).map_err(csv_err(path))?;
    for row in rows {
        let r = SweepRecord::from_row(row);
        w.write_record([
            format!("{:e}", r.temperature),
            format!("{:e}", r.diaphragm_q),
            fmt_opt(r.sqrt_s_omega),
            fmt_opt(r.sqrt_s_tau),
            fmt_opt(r.q_h),
            r.regime,
            r.errata,
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_sweep(path: &Path) -> Result<Vec<SweepRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let header: Vec<String> = r.headers().map_err(csv_err(path))?.iter().map(str::to_string).collect();
    if header != columns().noise_sweep.columns {
        return Err(CliError::config(path, format!("unexpected header {header:?}")));
    }
    let num = |s: &str| -> Result<f64> {
        s.parse::<f64>().map_err(|e| CliError::config(path, format!("bad number {s:?}: {e}")))
    };
    let opt = |s: &str| -> Result<Option<f64>> {
        if s.is_empty() {
            Ok(None)
        } else {
            num(s).map(Some)
        }
    };
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err(path))?;
        if rec.len() != 7 {
            return Err(CliError::config(path, format!("row has {} fields, expected 7", rec.len())));
        }
        out.push(SweepRecord {
            temperature: num(&rec[0])?,
            diaphragm_q: num(&rec[1])?,
            sqrt_s_omega: opt(&rec[2])?,
            sqrt_s_tau: opt(&rec[3])?,
            q_h: opt(&rec[4])?,
            regime: rec[5].to_string(),
            errata: rec[6].to_string(),
        });
    }
    Ok(out)
}

pub fn write_trajectory(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(&columns().trajectory.columns).map_err(csv_err(path))?;
    for ((t, x), phi) in traj.t.iter().zip(&traj.x).zip(&traj.phi) {
        w.write_record([format!("{t:e}"), format!("{x:e}"), format!("{phi:.17e}")])
            .map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_trials(path: &Path, outcomes: &[gyro_core::Result<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(&columns().monte_carlo.columns).map_err(csv_err(path))?;
    for (i, o) in outcomes.iter().enumerate() {
        let (v, e) = match o {
            Ok(v) => (format!("{v:e}"), String::new()),
            Err(e) => (String::new(), e.to_string()),
        };
        w.write_record([i.to_string(), v, e]).map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}
