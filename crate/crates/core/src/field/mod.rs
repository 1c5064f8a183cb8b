//! Signed distance fields: the evaluation trait, surface projection, and the
//! concrete backends (analytic CSG trees, sampled grids).
//!
//! Sign convention: `phi < 0` inside the shape, `phi > 0` outside, `phi = 0`
//! on the boundary. For exact fields `|phi|` is the Euclidean distance to the
//! boundary and the gradient is a unit vector wherever it exists.

mod grid;
mod scene;
mod shape;

pub use grid::{bake_grid, read_grid, write_grid, GridField, GridSide};
pub use scene::{builtin_scene, builtin_scene_names, load_scene, resolve_scene, save_scene, Scene};
pub use shape::{ShapeField, ShapeSpec, SurfacePoint};

use crate::error::{Error, Result};
use crate::math::{Aabb, Vector};

/// Raw gradients with magnitude below this are reported undefined: the query
/// sits on a medial locus or primitive center.
pub const GRAD_UNDEFINED_EPS: f64 = 1e-6;

/// One field evaluation: signed distance plus the unit gradient when defined.
#[derive(Clone, Copy, Debug)]
pub struct FieldSample<const D: usize> {
    pub phi: f64,
    /// Unit gradient; `None` on the medial locus.
    pub grad: Option<Vector<D>>,
}

/// An evaluable signed distance field over `R^D`.
///
/// Evaluation is pure and immutable, so fields are safe to query from many
/// threads at once.
pub trait DistanceField<const D: usize>: Send + Sync {
    /// Signed distance at `x` (negative inside).
    fn phi(&self, x: Vector<D>) -> f64;

    /// Unit gradient of `phi` at `x`.
    fn grad(&self, x: Vector<D>) -> Result<Vector<D>>;

    /// Conservative axis-aligned bound of the surface.
    fn bounds(&self) -> Aabb<D>;

    fn sample(&self, x: Vector<D>) -> FieldSample<D> {
        FieldSample {
            phi: self.phi(x),
            grad: self.grad(x).ok(),
        }
    }

    /// Length of the bounding-box diagonal; the scene-scale unit for
    /// tolerances and epsilons.
    fn diag(&self) -> f64 {
        self.bounds().diagonal()
    }

    /// Closest-point projection `x - grad(x) * phi(x)` onto the surface.
    fn project_surface(&self, x: Vector<D>) -> Result<Vector<D>> {
        let g = self.grad(x)?;
        Ok(x - g * self.phi(x))
    }
}

impl<const D: usize, F: DistanceField<D> + ?Sized> DistanceField<D> for &F {
    fn phi(&self, x: Vector<D>) -> f64 {
        (**self).phi(x)
    }
    fn grad(&self, x: Vector<D>) -> Result<Vector<D>> {
        (**self).grad(x)
    }
    fn bounds(&self) -> Aabb<D> {
        (**self).bounds()
    }
}

/// Central-difference gradient with step `h`, renormalized to unit length.
///
/// Returns `GradientUndefined` when the raw difference quotient has magnitude
/// below [`GRAD_UNDEFINED_EPS`].
pub fn finite_difference_grad<const D: usize>(
    phi: impl Fn(Vector<D>) -> f64,
    x: Vector<D>,
    h: f64,
) -> Result<Vector<D>> {
    let mut g = Vector::<D>::ZERO;
    for a in 0..D {
        let e = Vector::axis_unit(a) * h;
        g[a] = (phi(x + e) - phi(x - e)) / (2.0 * h);
    }
    g.normalized(GRAD_UNDEFINED_EPS)
        .ok_or(Error::GradientUndefined)
}
