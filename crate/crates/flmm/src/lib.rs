//! Fractional linear multistep methods (FLMMs) for tempered fractional
//! integrals and derivatives, with two fast O(n)-memory evaluation engines
//! for the underlying discrete convolutions.
//!
//! The operator approximated throughout is the tempered fractional
//! derivative/integral `D^{σ,α}` (derivative for `α > 0`, integral of order
//! `−α` for `α < 0`; `σ = 0` recovers the classical Riemann–Liouville
//! operator).  A step-`τ` discretization reads
//!
//! ```text
//! τ^{-α} Σ_{k=0}^{n} ω_{n-k}^{(α,σ)} u_k
//! ```
//!
//! where the weights `ω_k^{(α,σ)} = e^{-kτσ} ω_k^{(α,0)}` come from a
//! generating function raised to the power `α` (see [`weights`]).  Evaluating
//! the convolution directly costs O(n_T²); the [`talbot`] engine compresses
//! the history into contour-quadrature blocks and the [`realline`] engine
//! into a single global trapezoidal rule with Q scalar geometric recurrences.
//!
//! On top of the convolution sit:
//! * [`operator`] — the corrected operator with starting weights,
//! * [`fode`] — a fully implicit solver for scalar tempered fractional ODEs,
//! * [`rd`] — a semi-implicit solver for a 1-D time-fractional
//!   activator-inhibitor system (Turing pattern formation).

pub mod error;
pub mod fode;
pub mod operator;
pub mod rd;
pub mod realline;
pub mod series;
pub mod special;
pub mod talbot;
pub mod weights;

pub use error::{Error, Result};
pub use operator::{Engine, FlmmOperator, OperatorConfig};
pub use weights::{GeneratingFunction, WeightTable};
