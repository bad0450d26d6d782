//! LMS-family weight updates and the gradient comparators.
//!
//! All updates share the form
//!
//! ```text
//! w_{k+1} = w_k + μ·e_k·x_k − gate_k ⊙ t(w_k)
//! ```
//!
//! where `t` is the p-norm zero attractor and the gate is all-zero (LMS),
//! all-one (ℓp-LMS), the instantaneous comparator (ℓpGC-LMS) or the windowed
//! comparator (ℓpNGC-LMS).

mod comparator;
mod registry;
mod state;
mod weights;

pub use comparator::{gc_comparator, ngc_comparator, ComparatorMatrix, ComparatorWindow};
pub use registry::{Lms, LpGc, LpLms, LpNgc, Registry, UpdateRule};
pub use state::{
    lms_step, lp_gated_step, lp_gc_step, lp_lms_step, lp_ngc_step, Algorithm, FilterState,
    NgcOrdering,
};
pub use weights::{lp_attractor, p_norm, sign, LpParams, WeightVector};
