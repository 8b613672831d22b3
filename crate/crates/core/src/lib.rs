//! Level-1 QAOA on bounded-occurrence Max E3LIN2.
//!
//! * [`instance`]: clauses, validation, the text format, random generators.
//! * [`statevector`]: dense reference simulator.
//! * [`analytic`]: per-clause causal-cone evaluation of `W(γ)` at `β = π/4`.
//! * [`schedule`]: the odd-order Chebyshev angle grid and worst-case bounds.
//! * [`typical`]: sign-ensemble averages, closed forms and the variance bound.
//! * [`sampler`]: measurement sampling and brute-force optima.
//! * [`cli`]: report-producing commands behind the `e3lin2-qaoa` binary.

pub mod analytic;
pub mod cli;
pub mod error;
pub mod instance;
pub mod limits;
pub mod par;
pub mod rng;
pub mod sampler;
pub mod schedule;
pub mod statevector;
pub mod typical;

pub use error::{Error, Result};
pub use limits::Limits;
