//! Numerical verification of integral identities for the torsion-type problem
//! `Δu + nku = -1` on domains of warped-product manifolds.
//!
//! * [`geometry`]: warped products, curvature, the closed conformal field.
//! * [`radial`]: radial solutions on balls and slabs.
//! * [`fem2d`]: P1 finite elements on two-dimensional domains of constant curvature.
//! * [`identities`]: the integral identities and inequalities as [`IdentityReport`]s.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exec;
pub mod expr;
pub mod fem2d;
pub mod geometry;
pub mod identities;
pub mod quadrature;
pub mod radial;
pub mod report;

pub use error::{Error, Result};
pub use exec::Execution;
pub use geometry::{CurvatureSample, Interval, Orientation, Warp, WarpModel};
pub use report::{IdentityReport, Relation};
