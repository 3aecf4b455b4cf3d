//! Box-constrained design search over the analytic noise floor.
//!
//! The search runs in a normalized unit cube (log-spaced for geometric
//! parameters) with a seeded random pre-pass, a projected Nelder–Mead
//! simplex, a snap-to-bound pass and one restart. Infeasible points score
//! +∞, and the baseline is always a candidate, so the result is never worse
//! than the baseline.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardUniform};

use super::{rotation_noise_density, NoiseReport};
use crate::circuit::{CircuitModel, GyrometerGeometry, Losses, OperatingPoint};
use crate::error::{Error, Result};
use crate::physconst::Constants;

/// Design variables that can be freed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parameter {
    Area,
    LineLength,
    LineCrossSection,
    DiaphragmArea,
    SpringConstant,
    DiaphragmOmega,
    DiaphragmQ,
    CriticalCurrent,
    Phi0,
    PhiA,
}

impl Parameter {
    pub const ALL: [Parameter; 10] = [
        Parameter::Area,
        Parameter::LineLength,
        Parameter::LineCrossSection,
        Parameter::DiaphragmArea,
        Parameter::SpringConstant,
        Parameter::DiaphragmOmega,
        Parameter::DiaphragmQ,
        Parameter::CriticalCurrent,
        Parameter::Phi0,
        Parameter::PhiA,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Parameter::Area => "area",
            Parameter::LineLength => "line_length",
            Parameter::LineCrossSection => "line_cross_section",
            Parameter::DiaphragmArea => "diaphragm_area",
            Parameter::SpringConstant => "spring_constant",
            Parameter::DiaphragmOmega => "diaphragm_omega",
            Parameter::DiaphragmQ => "diaphragm_q",
            Parameter::CriticalCurrent => "critical_current",
            Parameter::Phi0 => "phi0",
            Parameter::PhiA => "phi_a",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }

    fn is_angle(self) -> bool {
        matches!(self, Parameter::Phi0 | Parameter::PhiA)
    }

    fn get(self, g: &GyrometerGeometry, op: &OperatingPoint) -> f64 {
        match self {
            Parameter::Area => g.area,
            Parameter::LineLength => g.line_length,
            Parameter::LineCrossSection => g.line_cross_section,
            Parameter::DiaphragmArea => g.diaphragm_area,
            Parameter::SpringConstant => g.spring_constant,
            Parameter::DiaphragmOmega => g.diaphragm_omega,
            Parameter::DiaphragmQ => g.diaphragm_q,
            Parameter::CriticalCurrent => g.critical_current,
            Parameter::Phi0 => op.phi0,
            Parameter::PhiA => op.phi_a,
        }
    }

    fn set(self, g: &mut GyrometerGeometry, op: &mut OperatingPoint, v: f64) {
        match self {
            Parameter::Area => g.area = v,
            Parameter::LineLength => g.line_length = v,
            Parameter::LineCrossSection => g.line_cross_section = v,
            Parameter::DiaphragmArea => g.diaphragm_area = v,
            Parameter::SpringConstant => g.spring_constant = v,
            Parameter::DiaphragmOmega => g.diaphragm_omega = v,
            Parameter::DiaphragmQ => g.diaphragm_q = v,
            Parameter::CriticalCurrent => g.critical_current = v,
            Parameter::Phi0 => op.phi0 = v,
            Parameter::PhiA => op.phi_a = v,
        }
    }
}

impl fmt::Display for Parameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bound {
    pub parameter: Parameter,
    pub lower: f64,
    pub upper: f64,
}

impl Bound {
    fn log_scaled(&self) -> bool {
        !self.parameter.is_angle()
    }

    fn value_at(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return self.lower;
        }
        if u >= 1.0 {
            return self.upper;
        }
        if self.log_scaled() {
            (self.lower.ln() + u * (self.upper / self.lower).ln()).exp()
        } else {
            self.lower + u * (self.upper - self.lower)
        }
    }

    fn unit_of(&self, v: f64) -> f64 {
        if self.upper == self.lower {
            return 0.0;
        }
        let u = if self.log_scaled() {
            (v / self.lower).ln() / (self.upper / self.lower).ln()
        } else {
            (v - self.lower) / (self.upper - self.lower)
        };
        u.clamp(0.0, 1.0)
    }
}

/// Baseline design plus the parameters allowed to move.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignSpace {
    pub geometry: GyrometerGeometry,
    pub operating: OperatingPoint,
    pub free: Vec<Bound>,
    /// Largest drive phase amplitude allowed (rad).
    pub phi_a_max: f64,
    pub losses: Losses,
}

impl DesignSpace {
    pub fn validate(&self) -> Result<()> {
        if !(self.phi_a_max.is_finite() && self.phi_a_max > 0.0) {
            return Err(Error::invalid("design space", "phi_a_max must be positive"));
        }
        for (i, b) in self.free.iter().enumerate() {
            let name = b.parameter.name();
            if !(b.lower.is_finite() && b.upper.is_finite() && b.lower <= b.upper) {
                return Err(Error::invalid("design space", alloc::format!("bounds on {name} must be finite and ordered")));
            }
            if b.log_scaled() && b.lower <= 0.0 {
                return Err(Error::invalid("design space", alloc::format!("lower bound on {name} must be positive")));
            }
            if self.free[..i].iter().any(|o| o.parameter == b.parameter) {
                return Err(Error::invalid("design space", alloc::format!("{name} listed twice")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OptimizerSettings {
    pub seed: u64,
    pub random_samples: usize,
    pub max_evaluations: usize,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            seed: 0,
            random_samples: 64,
            max_evaluations: 4000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignResult {
    pub geometry: GyrometerGeometry,
    pub operating: OperatingPoint,
    pub report: NoiseReport,
    pub baseline: NoiseReport,
    /// Constraints and bounds that hold with (near) equality at the optimum.
    pub active_constraints: Vec<String>,
    pub evaluations: usize,
}

/// Relative closeness at which a constraint or bound is reported as active.
const ACTIVE_TOL: f64 = 1e-4;

struct Problem<'a> {
    constants: &'a Constants,
    space: &'a DesignSpace,
    evaluations: usize,
}

impl Problem<'_> {
    fn decode(&self, u: &[f64]) -> (GyrometerGeometry, OperatingPoint) {
        let mut g = self.space.geometry;
        let mut op = self.space.operating;
        for (b, &x) in self.space.free.iter().zip(u) {
            b.parameter.set(&mut g, &mut op, b.value_at(x));
        }
        (g, op)
    }

    fn violations(&self, g: &GyrometerGeometry, op: &OperatingPoint) -> core::result::Result<CircuitModel, Vec<String>> {
        let model = CircuitModel::new(self.constants, g).map_err(|e| alloc::vec![e.to_string()])?;
        let mut v = Vec::new();
        if !(model.beta > 0.0 && model.beta < 1.0) {
            v.push(alloc::format!("0 < beta < 1 (beta = {:.4})", model.beta));
        }
        let margin = model.stability_margin(op.phi0);
        if !(margin > 0.0) {
            v.push(alloc::format!("cos(phi0) + 1/beta > 0 (margin = {margin:.4e})"));
        }
        if op.phi_a > self.space.phi_a_max {
            v.push(alloc::format!("phi_a <= {} (phi_a = {})", self.space.phi_a_max, op.phi_a));
        }
        if let Err(e) = op.validate() {
            v.push(e.to_string());
        }
        if v.is_empty() {
            Ok(model)
        } else {
            Err(v)
        }
    }

    fn report(&self, g: &GyrometerGeometry, op: &OperatingPoint) -> core::result::Result<NoiseReport, Vec<String>> {
        let model = self.violations(g, op)?;
        rotation_noise_density(&model, op, self.space.losses).map_err(|e| alloc::vec![e.to_string()])
    }

    fn objective(&mut self, u: &[f64]) -> f64 {
        self.evaluations += 1;
        let (g, op) = self.decode(u);
        match self.report(&g, &op) {
            Ok(r) if r.sqrt_s_omega.is_finite() && r.sqrt_s_omega > 0.0 => r.sqrt_s_omega.ln(),
            _ => f64::INFINITY,
        }
    }
}

/// Minimizes √S_Ω over the free parameters of `space`.
pub fn optimize_design(constants: &Constants, space: &DesignSpace, settings: &OptimizerSettings) -> Result<DesignResult> {
    space.validate()?;
    let mut problem = Problem {
        constants,
        space,
        evaluations: 0,
    };

    let mut outside = Vec::new();
    for b in &space.free {
        let v = b.parameter.get(&space.geometry, &space.operating);
        if !(v >= b.lower && v <= b.upper) {
            outside.push(alloc::format!("baseline {} = {v} outside [{}, {}]", b.parameter, b.lower, b.upper));
        }
    }
    if !outside.is_empty() {
        return Err(Error::Infeasible { violated: outside });
    }
    let baseline = problem
        .report(&space.geometry, &space.operating)
        .map_err(|violated| Error::Infeasible { violated })?;

    let n = space.free.len();
    let start: Vec<f64> = space
        .free
        .iter()
        .map(|b| b.unit_of(b.parameter.get(&space.geometry, &space.operating)))
        .collect();
    let mut best = (start.clone(), baseline.sqrt_s_omega.ln());

    if n > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
        for _ in 0..settings.random_samples {
            let u: Vec<f64> = (0..n).map(|_| StandardUniform.sample(&mut rng)).collect();
            let f = problem.objective(&u);
            if f < best.1 {
                best = (u, f);
            }
        }

        let budget = settings.max_evaluations / 2;
        best = nelder_mead(&mut problem, best, budget);
        best = snap_to_bounds(&mut problem, best);
        best = nelder_mead(&mut problem, best, budget);
        best = snap_to_bounds(&mut problem, best);
    }

    let (g, op) = problem.decode(&best.0);
    let report = problem.report(&g, &op).map_err(|violated| Error::Infeasible { violated })?;
    let active_constraints = active_constraints(&problem, &best.0, &g, &op);
    Ok(DesignResult {
        geometry: g,
        operating: op,
        report,
        baseline,
        active_constraints,
        evaluations: problem.evaluations,
    })
}

fn active_constraints(problem: &Problem<'_>, u: &[f64], g: &GyrometerGeometry, op: &OperatingPoint) -> Vec<String> {
    let mut out = Vec::new();
    for (b, &x) in problem.space.free.iter().zip(u) {
        if b.upper > b.lower {
            if x <= ACTIVE_TOL {
                out.push(alloc::format!("{} at lower bound", b.parameter));
            } else if x >= 1.0 - ACTIVE_TOL {
                out.push(alloc::format!("{} at upper bound", b.parameter));
            }
        }
    }
    if let Ok(model) = CircuitModel::new(problem.constants, g) {
        if model.beta > 1.0 - ACTIVE_TOL {
            out.push("beta < 1".into());
        }
        if model.stability_margin(op.phi0) * model.beta < ACTIVE_TOL {
            out.push("cos(phi0) + 1/beta > 0".into());
        }
    }
    if op.phi_a >= problem.space.phi_a_max * (1.0 - ACTIVE_TOL) {
        out.push("phi_a <= phi_a_max".into());
    }
    out
}

fn snap_to_bounds(problem: &mut Problem<'_>, mut best: (Vec<f64>, f64)) -> (Vec<f64>, f64) {
    for i in 0..best.0.len() {
        for edge in [0.0, 1.0] {
            let mut u = best.0.clone();
            u[i] = edge;
            let f = problem.objective(&u);
            if f < best.1 {
                best = (u, f);
            }
        }
    }
    best
}

/// Nelder–Mead with vertices projected onto the unit cube.
fn nelder_mead(problem: &mut Problem<'_>, start: (Vec<f64>, f64), budget: usize) -> (Vec<f64>, f64) {
    let n = start.0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push(start.clone());
    for i in 0..n {
        let mut u = start.0.clone();
        u[i] = if u[i] + 0.1 <= 1.0 { u[i] + 0.1 } else { u[i] - 0.1 };
        let f = problem.objective(&u);
        simplex.push((u, f));
    }
    let project = |v: Vec<f64>| -> Vec<f64> { v.into_iter().map(|x| x.clamp(0.0, 1.0)).collect() };
    let combine = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect() };

    let mut used = n;
    while used < budget {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[n].1 - simplex[0].1;
        let size = simplex[1..]
            .iter()
            .flat_map(|v| v.0.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if (spread.is_finite() && spread < 1e-12) || size < 1e-10 {
            break;
        }
        let mut centroid = alloc::vec![0.0; n];
        for v in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(&v.0) {
                *c += x / n as f64;
            }
        }
        let worst = simplex[n].clone();
        let reflected = project(combine(&centroid, &worst.0, -1.0));
        let fr = problem.objective(&reflected);
        used += 1;
        if fr < simplex[0].1 {
            let expanded = project(combine(&centroid, &worst.0, -2.0));
            let fe = problem.objective(&expanded);
            used += 1;
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
        } else {
            let contracted = if fr < worst.1 {
                project(combine(&centroid, &reflected, 0.5))
            } else {
                combine(&centroid, &worst.0, 0.5)
            };
            let fc = problem.objective(&contracted);
            used += 1;
            if fc < worst.1.min(fr) {
                simplex[n] = (contracted, fc);
            } else {
                let best = simplex[0].0.clone();
                for v in simplex[1..].iter_mut() {
                    let u = combine(&best, &v.0, 0.5);
                    let f = problem.objective(&u);
                    *v = (u, f);
                }
                used += n;
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let top = simplex.swap_remove(0);
    if top.1 < start.1 {
        top
    } else {
        start
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::b0_geometry;
    use crate::physconst::fixture;

    fn space(free: Vec<Bound>) -> DesignSpace {
        DesignSpace {
            geometry: b0_geometry(1e5),
            operating: OperatingPoint {
                phi0: 2.3,
                phi_a: 0.2,
                temperature: 0.010,
            },
            free,
            phi_a_max: 0.2,
            losses: Losses::All,
        }
    }

    #[test]
    fn singleton_returns_baseline() {
        let s = space(alloc::vec![]);
        let r = optimize_design(&fixture(), &s, &OptimizerSettings::default()).unwrap();
        assert_eq!(r.geometry, s.geometry);
        assert_eq!(r.operating, s.operating);
        assert_eq!(r.report.sqrt_s_omega, r.baseline.sqrt_s_omega);
    }

    #[test]
    fn area_goes_to_upper_bound() {
        let s = space(alloc::vec![Bound {
            parameter: Parameter::Area,
            lower: 3e-2,
            upper: 3e-1,
        }]);
        let r = optimize_design(&fixture(), &s, &OptimizerSettings::default()).unwrap();
        assert!((r.geometry.area - 3e-1).abs() < 1e-12);
        assert!((r.baseline.sqrt_s_omega / r.report.sqrt_s_omega - 10.0).abs() < 1e-9);
        assert!(r.active_constraints.iter().any(|c| c == "area at upper bound"));
    }

    #[test]
    fn phi0_matches_grid_scan() {
        let c = fixture();
        let s = space(alloc::vec![Bound {
            parameter: Parameter::Phi0,
            lower: 1.6,
            upper: 2.9,
        }]);
        let r = optimize_design(&c, &s, &OptimizerSettings::default()).unwrap();
        assert!(r.report.sqrt_s_omega <= r.baseline.sqrt_s_omega);

        let model = CircuitModel::new(&c, &s.geometry).unwrap();
        let grid_min = (0..1000)
            .filter_map(|i| {
                let op = OperatingPoint {
                    phi0: 1.6 + 1.3 * i as f64 / 999.0,
                    ..s.operating
                };
                rotation_noise_density(&model, &op, Losses::All).ok()
            })
            .map(|r| r.sqrt_s_omega)
            .fold(f64::INFINITY, f64::min);
        assert!(r.report.sqrt_s_omega <= grid_min * (1.0 + 1e-6), "{} vs {}", r.report.sqrt_s_omega, grid_min);
    }

    #[test]
    fn deterministic_for_seed() {
        let s = space(alloc::vec![
            Bound { parameter: Parameter::Phi0, lower: 1.6, upper: 2.9 },
            Bound { parameter: Parameter::CriticalCurrent, lower: 5e-10, upper: 2e-9 },
            Bound { parameter: Parameter::PhiA, lower: 0.05, upper: 0.3 },
        ]);
        let settings = OptimizerSettings { seed: 7, ..Default::default() };
        let a = optimize_design(&fixture(), &s, &settings).unwrap();
        let b = optimize_design(&fixture(), &s, &settings).unwrap();
        assert_eq!(a, b);
        assert!(a.operating.phi_a <= 0.2);
        let model = CircuitModel::new(&fixture(), &a.geometry).unwrap();
        assert!(model.beta < 1.0 && model.stability_margin(a.operating.phi0) > 0.0);
        assert!(a.report.sqrt_s_omega <= a.baseline.sqrt_s_omega);
    }

    #[test]
    fn infeasible_baseline_is_rejected() {
        let mut s = space(alloc::vec![]);
        s.phi_a_max = 0.1;
        assert!(matches!(
            optimize_design(&fixture(), &s, &OptimizerSettings::default()),
            Err(Error::Infeasible { .. })
        ));
        let s = space(alloc::vec![Bound { parameter: Parameter::Area, lower: 1.0, upper: 2.0 }]);
        assert!(matches!(
            optimize_design(&fixture(), &s, &OptimizerSettings::default()),
            Err(Error::Infeasible { .. })
        ));
    }

    #[test]
    fn parameter_names_round_trip() {
        for p in Parameter::ALL {
            assert_eq!(Parameter::from_name(p.name()), Some(p));
        }
        assert_eq!(Parameter::from_name("nope"), None);
    }
}
