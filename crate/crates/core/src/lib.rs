//! Equilibrium analysis and Monte Carlo verification for a two-camp game of
//! offensive speech, condemnation, and whataboutism rebuttals.
//!
//! - [`model`]: parameters, states, and the per-level constants `c`, `theta`, `phi`.
//! - [`analytic`]: benchmark equilibrium, the PSPE family, the stable
//!   selection, and rebuttal / whataboutism statistics in closed form.
//! - [`dynamics`]: the equilibrium self-map, its iteration, the local
//!   stability test, and the benchmark stage recursion.
//! - [`simulate`]: seeded, worker-count-independent Monte Carlo estimators
//!   for every closed-form quantity.
//! - [`cli`]: configuration files, reports, and parameter sweeps used by the
//!   `whataboutism` binary.
//!
//! ```
//! use whataboutism::{analytic, model::ModelParams};
//!
//! let params = ModelParams::with_cbar(2.0, vec![1.8, 1.2], vec![1.1, 1.9]).unwrap();
//! let stable = analytic::stable_pspe(&params);
//! assert_eq!(stable.mstar, 2);
//! assert_eq!(stable.abstain[0], 0.0);
//! ```

pub mod analytic;
pub mod cli;
pub mod dynamics;
pub mod model;
pub mod simulate;

pub use analytic::{EquilibriumProfile, PspeFamily};
pub use model::{Camp, ModelParams, StateId};
