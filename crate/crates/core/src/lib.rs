//! Area and volume comparison bounds for the level sets of the cosmological
//! time function.
//!
//! The crate evaluates initial-data integral bounds for level-set areas and
//! past volumes, integrates the Raychaudhuri comparison along congruences,
//! estimates generalized areas from volume quotients, and builds the family
//! of initial data that shows `L^p` control of the mean curvature is not
//! enough when `p < n`.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod congruence;
pub mod counterexample;
pub mod error;
pub mod initial_data;
pub mod integral_bounds;
pub mod level_sets;
pub mod model_geometry;
pub mod numerics;
pub mod verify;

pub use error::{Error, Result};
