//! Spiral-wave drift on curved surfaces with anisotropic diffusion.
//!
//! * [`geometry`] builds the diffusion metric and its Ricci curvature scalar.
//! * [`solver`] evolves Barkley kinetics on that metric and tracks the tip.
//! * [`driftlaw`] integrates the curvature-gradient drift law and its
//!   closed-form special cases.
//! * [`mobility`] turns tip trajectories into drift paths and fits the
//!   mobility coefficients; it also evaluates response-function overlaps.
//! * [`pipeline`] wires these stages into reproducible experiment bundles.

// Index loops mirror tensor index notation; negated comparisons reject NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod driftlaw;
pub mod geometry;
pub mod grid;
pub mod mobility;
pub mod pipeline;
pub mod solver;
