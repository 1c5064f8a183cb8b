//! Residual evaluators for the variational characterization of the medial
//! field. A candidate field with zero maximality, inscription and
//! orthogonality residuals everywhere off the surface and medial locus is
//! the medial field; a corrupted candidate fires at least one of them.

use super::{medial_project, MedialField};
use crate::error::{Error, Result};
use crate::field::DistanceField;
use crate::math::Vector;

/// Half-width of the band around the surface and the medial locus excluded
/// from orthogonality checks; finite-difference gradients need room.
pub fn orthogonality_exclusion(diag: f64) -> f64 {
    1e-2 * diag
}

/// `max(|phi(x)| - MF(x), 0)`: how far the candidate falls below the tangent
/// sphere radius. Zero iff the maximality constraint holds at `x`.
pub fn residual_maximality<const D: usize>(
    mf: &(impl MedialField<D> + ?Sized),
    field: &(impl DistanceField<D> + ?Sized),
    x: Vector<D>,
) -> Result<f64> {
    Ok((field.phi(x).abs() - mf.mf(x)?).max(0.0))
}

/// `| |phi(project(x))| - MF(x) |` with the projection built from the
/// candidate's own value. Clamped exterior queries are skipped (returns 0):
/// the clamp is a policy, not a property of the field.
pub fn residual_inscription<const D: usize>(
    mf: &(impl MedialField<D> + ?Sized),
    field: &(impl DistanceField<D> + ?Sized),
    x: Vector<D>,
) -> Result<f64> {
    let (value, clamped) = mf.mf_clamped(x)?;
    if clamped {
        return Ok(0.0);
    }
    let center = medial_project(field, value, x)?;
    Ok((field.phi(center).abs() - value).abs())
}

/// Finite-difference MF gradients steeper than this cannot be certified:
/// the exact field's tangential slope blows up approaching the exterior
/// clamp transition, and axis-aligned stencils leak that slope into the
/// radial component. True fields stay well under this away from clamps.
const ORTHOGONALITY_STEEPNESS_CAP: f64 = 4.0;

/// `|grad MF(x) . grad phi(x)|` with the candidate gradient taken by central
/// differences of step `fd_step`.
///
/// Fails with `ExcludedRegion` inside the exclusion band around the surface
/// (`|phi| < delta`) or the medial locus (`MF - |phi| < delta`), where any
/// stencil point reports the exterior clamp, or where the stencil slope
/// exceeds what finite differences can resolve.
pub fn residual_orthogonality<const D: usize>(
    mf: &(impl MedialField<D> + ?Sized),
    field: &(impl DistanceField<D> + ?Sized),
    x: Vector<D>,
    fd_step: f64,
) -> Result<f64> {
    let delta = orthogonality_exclusion(field.diag());
    let aphi = field.phi(x).abs();
    let (center, clamped) = mf.mf_clamped(x)?;
    if aphi < delta || center - aphi < delta || clamped {
        return Err(Error::ExcludedRegion);
    }
    let g_phi = field.grad(x)?;
    let mut g_mf = Vector::<D>::ZERO;
    for a in 0..D {
        let e = Vector::axis_unit(a) * fd_step;
        let (hi, hi_clamped) = mf.mf_clamped(x + e)?;
        let (lo, lo_clamped) = mf.mf_clamped(x - e)?;
        if hi_clamped || lo_clamped {
            return Err(Error::ExcludedRegion);
        }
        g_mf[a] = (hi - lo) / (2.0 * fd_step);
    }
    if g_mf.norm() > ORTHOGONALITY_STEEPNESS_CAP {
        return Err(Error::ExcludedRegion);
    }
    Ok(g_mf.dot(g_phi).abs())
}

/// Largest deviation of the candidate along the spoke through `x`: the medial
/// field is constant on every spoke, so `max_t |MF(p + t n) - MF(x)|` over
/// `t` in `(tol, MF(x) - tol)` measures how far the candidate strays.
pub fn spoke_constancy_check<const D: usize>(
    mf: &(impl MedialField<D> + ?Sized),
    field: &(impl DistanceField<D> + ?Sized),
    x: Vector<D>,
    n_samples: usize,
) -> Result<f64> {
    let tol = 1e-6 * field.diag();
    let phi = field.phi(x);
    let g = field.grad(x)?;
    let n = g * phi.signum();
    let foot = x - g * phi;
    let value = mf.mf(x)?;
    let mut worst = 0.0f64;
    for i in 0..n_samples {
        let t = tol + (value - 2.0 * tol) * (i as f64 + 0.5) / n_samples as f64;
        if t <= 0.0 {
            continue;
        }
        let other = mf.mf(foot + n * t)?;
        worst = worst.max((other - value).abs());
    }
    Ok(worst)
}
