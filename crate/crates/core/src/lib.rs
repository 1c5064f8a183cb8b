//! Medial fields over signed-distance scenes.
//!
//! A medial field `MF(x)` stores the local thickness of a shape (or of its
//! complement) at every point: the radius of the maximally inscribed empty
//! sphere whose spoke passes through `x`. Together with the O(1) surface
//! projection a distance field already provides, it unlocks a family of
//! shape-aware operations without ever extracting medial-axis geometry.
//!
//! The crate provides:
//! - [`field`]: analytic SDF scenes (CSG trees), sampled grids, projection;
//! - [`medial`]: an exact spoke-marching oracle for `MF`, the medial
//!   projection operator, and residual checks for the variational
//!   characterization of the medial field;
//! - [`trace`]: plain and medial sphere tracing, CPU rendering, iteration
//!   statistics, and medial-field ambient occlusion;
//! - [`proxy`]: sphere-set collision proxies via furthest sphere sampling
//!   plus the baselines it is measured against;
//! - [`neural`]: a four-headed MLP that learns `phi`, `MF+`, `MF-` and
//!   `grad phi` from a ground-truth field, usable as a drop-in field.

pub mod error;
pub mod field;
pub mod math;
pub mod medial;
pub mod neural;
pub mod proxy;
pub mod trace;

pub use error::{Error, Result};
pub use field::{DistanceField, Scene, ShapeField, ShapeSpec};
pub use math::{Aabb, Ray, Vec2, Vec3, Vector};
pub use medial::MedialField;
