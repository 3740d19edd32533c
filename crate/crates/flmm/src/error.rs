//! Library error type.

use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Power series with vanishing constant term cannot be raised to a
    /// fractional power.
    DegenerateSeries,
    /// Requested FBDF/GNGF order outside the supported range 1..=6, or a
    /// fractional order the requested routine cannot handle.
    UnsupportedOrder(String),
    /// A custom generating function failed validation (unstable σ̂ roots or
    /// inconsistent ρ̂/σ̂ pair).
    InvalidGeneratingFunction(String),
    /// The exponential series for the tempered power derivative did not
    /// converge within the term budget (σ·t too large for this path).
    SeriesDivergence { sigma_t: f64 },
    /// Starting-weight system condition estimate exceeded 1e14.
    IllConditionedStartingSystem { cond: f64 },
    /// Block schedule requested for an index still inside the local window.
    ScheduleNotNeeded { n: usize, n0: usize },
    /// Generating function has no real-analytic integrand on the positive
    /// real axis; route it through the contour engine instead.
    UnsupportedForMethodII(String),
    /// Samples must be supplied in step order 0, 1, 2, …
    SequenceError { expected: usize, got: usize },
    /// Correction terms need u_1..u_m before the operator can be evaluated;
    /// steps 1..m must come from a startup integration.
    StartupRequired { step: usize, m: usize },
    /// Newton iteration failed to reach the residual tolerance.
    NonlinearSolveFailure { step: usize, residual: f64 },
    /// A non-finite value appeared in a solve.
    NonFiniteValue { step: usize },
    /// Per-step linear system of the reaction-diffusion scheme failed.
    StepFailure { step: usize, detail: String },
    /// Invalid problem parameters.
    InvalidParameter(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DegenerateSeries => {
                write!(f, "power series has zero constant term; fractional power undefined")
            }
            Error::UnsupportedOrder(what) => write!(f, "unsupported order: {what}"),
            Error::InvalidGeneratingFunction(why) => {
                write!(f, "invalid generating function: {why}")
            }
            Error::SeriesDivergence { sigma_t } => write!(
                f,
                "tempered power-derivative series did not converge (sigma*t = {sigma_t})"
            ),
            Error::IllConditionedStartingSystem { cond } => {
                write!(f, "starting-weight system ill-conditioned (cond ~ {cond:e})")
            }
            Error::ScheduleNotNeeded { n, n0 } => {
                write!(f, "no block schedule for n = {n} < n0 = {n0}; sum directly")
            }
            Error::UnsupportedForMethodII(gf) => {
                write!(f, "{gf} is not supported by the real-line engine")
            }
            Error::SequenceError { expected, got } => {
                write!(f, "sample out of order: expected step {expected}, got {got}")
            }
            Error::StartupRequired { step, m } => write!(
                f,
                "step {step} needs u_1..u_{m} from a startup integration before corrections apply"
            ),
            Error::NonlinearSolveFailure { step, residual } => {
                write!(f, "Newton failed at step {step} (residual {residual:e})")
            }
            Error::NonFiniteValue { step } => write!(f, "non-finite value at step {step}"),
            Error::StepFailure { step, detail } => write!(f, "step {step} failed: {detail}"),
            Error::InvalidParameter(why) => write!(f, "invalid parameter: {why}"),
        }
    }
}

impl std::error::Error for Error {}
