//! Executable comparison geometry on singular surfaces.
//!
//! The crate works on three families of two-dimensional spaces (model
//! planes of constant curvature, Euclidean cones and spherical cones over
//! a circle) and provides:
//!
//! * κ-trigonometry and curvature-dimension coefficients ([`model_trig`]),
//! * exact distances, geodesics and ball volumes ([`spaces`]),
//! * distance-type semiconcave fields and their gradients ([`semiconcave`]),
//! * gradient flows and Lipschitz contraction certificates ([`flow`]),
//! * triangle and quadruple comparison tests ([`curvature_check`]),
//! * entropy, displacement interpolation and volume growth checks ([`ricci`]),
//! * approximate energies and loop fillings ([`plateau`]),
//! * a config-driven experiment runner ([`cli`]).
// `!(x > 0.0)` guards are deliberate: they reject NaN along with the bad range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod curvature_check;
pub mod flow;
pub mod model_trig;
pub mod plateau;
pub mod quadrature;
pub mod report;
pub mod ricci;
pub mod rng;
pub mod semiconcave;
pub mod spaces;

pub use model_trig::{CdParams, Extended, Kappa, TriangleSides, Vertex};
pub use spaces::{Space, SpaceError, SpacePoint, TangentVector};
