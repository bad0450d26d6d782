//! Sparse system identification with p-norm constrained LMS filters.
//!
//! [`filters`] holds the four update rules (LMS, ℓp-LMS and the two
//! gradient-compared variants) behind a name-keyed [`filters::Registry`];
//! [`signals`] generates true systems, inputs and noise; [`harness`] runs
//! trials and Monte-Carlo ensembles; [`presets`] and [`scenario`] describe
//! experiments and [`report`] writes results.

pub mod error;
pub mod filters;
pub mod harness;
pub mod presets;
pub mod report;
pub mod scenario;
pub mod signals;

pub use error::{Error, Result};
