//! Baked medial-field grids: the non-neural storage backend.
//!
//! The medial field jumps across the surface, so interior and exterior are
//! baked into separate grids and selected by the sign of phi at query time.

use super::{mf_oracle, MedialField, OracleConfig};
use crate::error::{Error, Result};
use crate::field::{bake_grid, DistanceField, GridField, GridSide};
use crate::math::{Aabb, Vector};
use rayon::prelude::*;

/// Bakes oracle medial-field values on a lattice for one side of the surface.
///
/// Lattice nodes on the wrong side (or on the surface) store the same-side
/// value extrapolated through the nearest surface point, keeping the grid
/// smooth where interpolation cells straddle the boundary.
pub fn bake_mf_grid<const D: usize>(
    field: &(impl DistanceField<D> + ?Sized),
    cfg: &OracleConfig,
    bounds: Aabb<D>,
    resolution: [usize; D],
    side: GridSide,
) -> Result<GridField<D>> {
    // Reuse the SDF baking lattice layout, then overwrite the values.
    let mut grid = bake_grid(field, bounds, resolution)?;
    let offset = 1e-4 * field.diag();
    let want_sign = match side {
        GridSide::Interior => -1.0,
        GridSide::Exterior => 1.0,
    };
    let positions: Vec<Vector<D>> = (0..grid.node_count())
        .map(|lin| {
            let mut idx = [0usize; D];
            let mut rem = lin;
            for a in 0..D {
                idx[a] = rem % grid.resolution[a];
                rem /= grid.resolution[a];
            }
            grid.node_position(idx)
        })
        .collect();
    grid.values = positions
        .par_iter()
        .map(|&p| mf_same_side(field, cfg, p, want_sign, offset))
        .collect();
    grid.side = Some(side);
    Ok(grid)
}

fn mf_same_side<const D: usize>(
    field: &(impl DistanceField<D> + ?Sized),
    cfg: &OracleConfig,
    p: Vector<D>,
    want_sign: f64,
    offset: f64,
) -> f64 {
    let phi = field.phi(p);
    let query = if phi.signum() == want_sign && phi.abs() > cfg.tol {
        p
    } else {
        // Wrong side: project to the surface and step a hair onto ours.
        match field.grad(p) {
            Ok(g) => p - g * phi + g * (want_sign * offset),
            Err(_) => return phi.abs().max(offset),
        }
    };
    match mf_oracle(field, cfg, query) {
        Ok(s) => s.radius,
        Err(_) => field.phi(query).abs().max(offset),
    }
}

/// Two baked grids plus the field that picks the side at query time.
pub struct GridMf<'f, F: ?Sized, const D: usize> {
    pub field: &'f F,
    pub interior: GridField<D>,
    pub exterior: GridField<D>,
}

impl<'f, const D: usize, F: DistanceField<D> + ?Sized> GridMf<'f, F, D> {
    pub fn bake(
        field: &'f F,
        cfg: &OracleConfig,
        bounds: Aabb<D>,
        resolution: [usize; D],
    ) -> Result<Self> {
        Ok(GridMf {
            field,
            interior: bake_mf_grid(field, cfg, bounds, resolution, GridSide::Interior)?,
            exterior: bake_mf_grid(field, cfg, bounds, resolution, GridSide::Exterior)?,
        })
    }

    pub fn from_grids(
        field: &'f F,
        interior: GridField<D>,
        exterior: GridField<D>,
    ) -> Result<Self> {
        if interior.side != Some(GridSide::Interior) || exterior.side != Some(GridSide::Exterior) {
            return Err(Error::Format(
                "grid side tags do not match interior/exterior roles".into(),
            ));
        }
        Ok(GridMf {
            field,
            interior,
            exterior,
        })
    }
}

impl<'f, const D: usize, F: DistanceField<D> + ?Sized> MedialField<D> for GridMf<'f, F, D> {
    fn mf(&self, x: Vector<D>) -> Result<f64> {
        if self.field.phi(x) < 0.0 {
            Ok(self.interior.interpolate(x))
        } else {
            Ok(self.exterior.interpolate(x))
        }
    }
}
