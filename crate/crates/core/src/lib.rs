//! Bell's theorem in counting form.
//!
//! * [`quantum`]: exact joint, marginal and conditional predictions for a
//!   polarization-entangled photon pair.
//! * [`lhv`]: deterministic instruction-set models and integer censuses of
//!   emitted pairs.
//! * [`inequality`]: the Wigner–d'Espagnat inequality
//!   `N(a,c) + N(a⊥,b) ≥ N(b,c)`, with its step-by-step derivation on a census
//!   and its quantum evaluation.
//! * [`experiment`]: seeded Monte Carlo runs with space-like or time-like
//!   measurement ordering.
//! * [`optimize`]: the exact local bound and a search for the largest quantum
//!   violation.
//! * [`cli`]: the `bellsim` command line.

pub mod cli;
pub mod error;
pub mod experiment;
pub mod inequality;
pub mod lhv;
pub mod optimize;
pub mod quantum;

pub use error::{Error, Result};
pub use quantum::{Angle, Outcome};
