//! Pursuit-evasion under mutual positional uncertainty on occupancy grids.

// `!(x >= 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod assignment;
pub mod belief;
pub mod env;
pub mod evader;
pub mod geodesic;
pub mod pursuer;
pub mod sim;
