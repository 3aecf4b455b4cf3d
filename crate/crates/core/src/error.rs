use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A parameter failed validation (sign, range, realizability).
    #[error("invalid {what}: {detail}")]
    Invalid { what: &'static str, detail: String },

    /// A value lies outside the domain where the model applies.
    #[error("{what} = {value} outside valid domain [{min}, {max}]")]
    Domain {
        what: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("singular input: {0}")]
    Singular(&'static str),

    /// The effective inductance L_J(phi0) || L_l is not positive.
    #[error("unstable operating point: cos(phi0) + 1/beta = {margin:.3e} <= 0")]
    Unstable { margin: f64 },

    #[error("infeasible design: {}", violated.join(", "))]
    Infeasible { violated: Vec<String> },

    #[error("simulation aborted at t = {time:.6e} s (step {step}): {detail}")]
    SimulationAbort {
        time: f64,
        step: u64,
        detail: String,
    },

    #[error("ringdown fit failed: {detail} (rms residual {residual:.3e})")]
    FitFailure { detail: String, residual: f64 },

    #[error("{failed} of {total} Monte Carlo trials aborted")]
    TooManyFailures { failed: usize, total: usize },
}

impl Error {
    pub(crate) fn invalid(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            detail: detail.into(),
        }
    }
}
