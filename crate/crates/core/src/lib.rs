//! Constant step-size SGDA and SEG chains for unconstrained variational
//! inequalities, treated as ergodic Markov chains: ergodic averages,
//! long-run variance and CLT replicate machinery, Richardson-Romberg bias
//! refinement, and diagnostics for the convergence envelopes and drift
//! inequalities, over a set of built-in benchmark games.

pub mod diagnostics;
pub mod ergodics;
pub mod error;
pub mod linalg;
pub mod operators;
pub mod oracle;
pub mod refinement;
pub mod solvers;

pub use error::{Error, Result};
