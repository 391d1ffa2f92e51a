//! Exact curvature of coordinate-defined Riemannian metrics and pointwise
//! verification of Codazzi-type structures, the cyclic curvature identity
//! `b_im R_jkl^m + b_jm R_kil^m + b_km R_ijl^m = 0`, the generalized
//! curvature tensor it induces, and curvature invariance of the wedge of
//! eigenspaces of `b`.

pub mod catalog;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod manifest;
pub mod report;
pub mod residual;
pub mod runner;
pub mod structures;
pub mod theorem;

pub use error::{Error, Result};
