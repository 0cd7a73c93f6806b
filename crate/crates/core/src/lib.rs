//! Concentration inequalities and laws of large numbers for credal sets.
//!
//! The library has three layers:
//!
//! * [`credal`] / [`irrelevance`]: finite credal sets (extreme-point
//!   representation), exact lower/upper expectations, conditioning policies,
//!   and exhaustive irrelevance checks on small joint models.
//! * [`bounds`]: the closed-form tail/coverage bounds and threshold formulas,
//!   each under a fixed identifier.
//! * [`process`] / [`martingale`] / [`examples`]: adversarial
//!   forward-irrelevant process simulation with counter-based RNG, exact
//!   enumeration and backward-induction oracles, martingale desk checks, and
//!   the worked binary example family.
//!
//! The CLI in [`cli`] glues these together; everything it prints is
//! reproducible from the provenance block it emits.

pub mod bounds;
pub mod caps;
pub mod cli;
pub mod credal;
pub mod error;
pub mod examples;
pub mod irrelevance;
pub mod martingale;
pub mod process;
pub mod rng;

pub use error::{Error, Result};
