//! The three non-medial proxy representations the medial spheres are
//! measured against.

use super::{interior_points, ProxyKind, ProxySet, Sphere};
use crate::error::Result;
use crate::field::{bake_grid, DistanceField, GridField};
use crate::math::Vector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Uniform interior points with the tangent-sphere radius `|phi|` the SDF
/// provides for free. Spheres are empty by the distance-field definition.
pub fn baseline_tangent<const D: usize>(
    field: &(impl DistanceField<D> + ?Sized),
    n: usize,
    seed: u64,
) -> Result<ProxySet<D>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spheres = interior_points(field, n, &mut rng)?
        .into_iter()
        .map(|p| Sphere {
            center: p,
            radius: field.phi(p).abs(),
        })
        .collect();
    Ok(ProxySet {
        kind: ProxyKind::Tangent,
        seed,
        spheres,
    })
}

/// Spheres at the centers of a regular `grid_res^D` cell partition of the
/// bounds, kept where the center is interior. The radius is capped at both
/// the half cell diagonal and `|phi|` so the spheres stay empty.
pub fn baseline_uniform<const D: usize>(
    field: &(impl DistanceField<D> + ?Sized),
    grid_res: usize,
) -> ProxySet<D> {
    let bounds = field.bounds();
    let ext = bounds.extent();
    let mut cell = Vector::<D>::ZERO;
    for a in 0..D {
        cell[a] = ext[a] / grid_res as f64;
    }
    let half_diag = 0.5 * cell.norm();
    let mut spheres = Vec::new();
    let total = grid_res.pow(D as u32);
    for lin in 0..total {
        let mut rem = lin;
        let mut center = bounds.min;
        for a in 0..D {
            let idx = rem % grid_res;
            rem /= grid_res;
            center[a] += cell[a] * (idx as f64 + 0.5);
        }
        let phi = field.phi(center);
        if phi < 0.0 {
            spheres.push(Sphere {
                center,
                radius: half_diag.min(phi.abs()),
            });
        }
    }
    ProxySet {
        kind: ProxyKind::Uniform,
        seed: 0,
        spheres,
    }
}

/// The SDF-grid representation: collision is `interpolated phi < 0`, memory
/// is one float per lattice node.
pub fn baseline_sdf_grid<const D: usize>(
    field: &(impl DistanceField<D> + ?Sized),
    grid_res: usize,
) -> Result<GridField<D>> {
    bake_grid(field, field.bounds(), [grid_res.max(2); D])
}
