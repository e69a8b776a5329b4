//! Numerical laboratory for the mean-field limit of interacting diffusions.
//!
//! Three levels of description are modelled side by side:
//!
//! * the N-particle system, simulated by Euler–Maruyama ([`particles`]);
//! * the McKean–Vlasov Fokker–Planck equation, solved by finite volumes
//!   ([`mckean_vlasov`]);
//! * probability measures over probability measures ([`measures::MetaMeasure`]),
//!   compared through the nested Wasserstein distance ([`transport`]).
//!
//! [`harness`] turns the identities and inequalities relating those levels into
//! pass/fail checks, and [`experiment`] drives them from INI-style configs.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod csvio;
pub mod error;
pub mod experiment;
pub mod harness;
pub mod mckean_vlasov;
pub mod measures;
pub mod particles;
pub mod potentials;
pub mod transport;

pub use error::{Error, Result};
