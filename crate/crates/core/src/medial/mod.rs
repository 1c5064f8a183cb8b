//! Ground-truth medial fields by spoke marching.
//!
//! Every query point `x` off the surface has a foot point `p` (its surface
//! projection) and a spoke direction `n = grad|phi|(x)`. The distance field
//! is exactly linear along the spoke, `|phi(p + t n)| = t`, up to the medial
//! radius; the first `t` where the identity breaks is the local thickness
//! `MF(x)`. Marching that bracket needs nothing but field queries, so the
//! oracle works on any exact distance field without medial-axis geometry.

mod bake;
mod residual;

pub use bake::{bake_mf_grid, GridMf};
pub use residual::{
    orthogonality_exclusion, residual_inscription, residual_maximality, residual_orthogonality,
    spoke_constancy_check,
};

use crate::error::{Error, Result};
use crate::field::DistanceField;
use crate::math::Vector;

/// A trainable or baked or exact medial-field backend.
pub trait MedialField<const D: usize>: Send + Sync {
    /// Local thickness at `x`.
    fn mf(&self, x: Vector<D>) -> Result<f64>;

    /// Local thickness plus whether the exterior clamp was applied.
    fn mf_clamped(&self, x: Vector<D>) -> Result<(f64, bool)> {
        Ok((self.mf(x)?, false))
    }
}

impl<const D: usize, M: MedialField<D> + ?Sized> MedialField<D> for &M {
    fn mf(&self, x: Vector<D>) -> Result<f64> {
        (**self).mf(x)
    }
    fn mf_clamped(&self, x: Vector<D>) -> Result<(f64, bool)> {
        (**self).mf_clamped(x)
    }
}

/// One oracle evaluation: the spoke through `x` resolved to its medial sphere.
#[derive(Clone, Copy, Debug)]
pub struct MedialSample<const D: usize> {
    pub query: Vector<D>,
    /// Surface projection of the query.
    pub foot: Vector<D>,
    /// Center of the medial sphere the spoke ends at.
    pub medial_center: Vector<D>,
    /// Radius of that sphere: the medial-field value at the query.
    pub radius: f64,
    /// True when the exterior clamp `r_max` stopped the march.
    pub clamped: bool,
}

/// Spoke-march configuration.
#[derive(Clone, Copy, Debug)]
pub struct OracleConfig {
    /// Exterior clamp. Convex or open scenes have unbounded complements,
    /// where the exterior medial radius is infinite; clamped spheres stay
    /// inside the true (larger) empty region, so consumers remain correct.
    pub r_max: f64,
    /// Bisection tolerance, in scene units.
    pub tol: f64,
    /// Doubling budget before the march gives up and clamps.
    pub max_doublings: u32,
    /// Allowed deviation of the spoke-start identity before the input field
    /// is declared inexact.
    pub identity_slack: f64,
}

impl OracleConfig {
    /// Defaults scaled to the scene diagonal: `r_max = 4 diag`, `tol = 1e-6 diag`.
    pub fn for_diag(diag: f64) -> Self {
        OracleConfig {
            r_max: 4.0 * diag,
            tol: 1e-6 * diag,
            max_doublings: 60,
            identity_slack: 1e-5 * diag,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_r_max(mut self, r_max: f64) -> Self {
        self.r_max = r_max;
        self
    }
}

/// Projects `x` along the spoke onto the medial axis:
/// `x + grad|phi|(x) * (mf_value - |phi(x)|)` with `grad|phi| = sign(phi) grad phi`.
///
/// This is the spoke intersection with the medial axis, not the closest-point
/// projection onto it.
pub fn medial_project<const D: usize>(
    field: &(impl DistanceField<D> + ?Sized),
    mf_value: f64,
    x: Vector<D>,
) -> Result<Vector<D>> {
    let phi = field.phi(x);
    let g = field.grad(x)?;
    let n = g * phi.signum();
    Ok(x + n * (mf_value - phi.abs()))
}

/// Evaluates the exact medial field at `x` by marching the spoke.
///
/// Finds the largest `t` in `[|phi(x)|, r_max]` with `|phi(p + t n)| >= t - tol`
/// by exponential doubling followed by bisection on the first violation.
pub fn mf_oracle<const D: usize>(
    field: &(impl DistanceField<D> + ?Sized),
    cfg: &OracleConfig,
    x: Vector<D>,
) -> Result<MedialSample<D>> {
    let phi = field.phi(x);
    let t0 = phi.abs();
    if t0 <= cfg.tol {
        return Err(Error::QueryOnSurface);
    }
    let g = match field.grad(x) {
        Ok(g) => g,
        // A spoke grazing two boundary points at once: the query already sits
        // on the medial locus, so its own tangent sphere is the medial sphere.
        Err(Error::GradientUndefined) => {
            return Ok(MedialSample {
                query: x,
                foot: x,
                medial_center: x,
                radius: t0,
                clamped: false,
            })
        }
        Err(e) => return Err(e),
    };
    let n = g * phi.signum();
    let foot = x - g * phi;

    // The identity |phi(p + t n)| = t must already hold on [0, t0]; checked
    // at the foot and mid-spoke. Larger deviations mean the input is not an
    // exact distance field.
    let start_dev = field
        .phi(foot)
        .abs()
        .max((field.phi(foot + n * (0.5 * t0)).abs() - 0.5 * t0).abs());
    if start_dev > cfg.identity_slack {
        return Err(Error::SpokeMarchFailed {
            deviation: start_dev,
        });
    }

    let holds = |t: f64| field.phi(foot + n * t).abs() >= t - cfg.tol;

    // Exponential doubling until the identity breaks or the clamp is reached.
    let mut lo = t0;
    let mut hi = None;
    let mut t = t0;
    for _ in 0..cfg.max_doublings {
        if t >= cfg.r_max {
            break;
        }
        t = (2.0 * t).min(cfg.r_max);
        if holds(t) {
            lo = t;
        } else {
            hi = Some(t);
            break;
        }
    }

    let radius = match hi {
        None => {
            // Identity held all the way out: the complement is locally
            // unbounded and the clamp applies.
            let radius = cfg.r_max;
            return Ok(MedialSample {
                query: x,
                foot,
                medial_center: foot + n * radius,
                radius,
                clamped: true,
            });
        }
        Some(mut hi) => {
            // Run the bracket down to machine precision: a coarse stop would
            // quantize the field and pollute finite-difference gradients of MF.
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if holds(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        }
    };

    Ok(MedialSample {
        query: x,
        foot,
        medial_center: foot + n * radius,
        radius,
        clamped: false,
    })
}

/// The exact oracle wrapped as a [`MedialField`] backend.
pub struct OracleMf<'f, F: ?Sized, const D: usize> {
    pub field: &'f F,
    pub cfg: OracleConfig,
}

impl<'f, const D: usize, F: DistanceField<D> + ?Sized> OracleMf<'f, F, D> {
    pub fn new(field: &'f F, cfg: OracleConfig) -> Self {
        OracleMf { field, cfg }
    }

    pub fn sample(&self, x: Vector<D>) -> Result<MedialSample<D>> {
        mf_oracle(self.field, &self.cfg, x)
    }
}

impl<'f, const D: usize, F: DistanceField<D> + ?Sized> MedialField<D> for OracleMf<'f, F, D> {
    fn mf(&self, x: Vector<D>) -> Result<f64> {
        Ok(self.sample(x)?.radius)
    }

    fn mf_clamped(&self, x: Vector<D>) -> Result<(f64, bool)> {
        let s = self.sample(x)?;
        Ok((s.radius, s.clamped))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{builtin_scene, Scene, ShapeField};
    use crate::math::Vec2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn scene2(name: &str) -> ShapeField<2> {
        match builtin_scene(name).unwrap() {
            Scene::D2(f) => f,
            Scene::D3(_) => panic!("expected 2D scene"),
        }
    }

    #[test]
    fn disk_interior_resolves_to_center() {
        let f = scene2("disk");
        let cfg = OracleConfig::for_diag(f.diag());
        let s = mf_oracle(&f, &cfg, Vec2::new(0.3, 0.0)).unwrap();
        assert!(
            (s.radius - 1.0).abs() < 2.0 * cfg.tol,
            "radius {}",
            s.radius
        );
        assert!(s.medial_center.norm() < 2.0 * cfg.tol);
        assert!(!s.clamped);
        assert!((s.foot - Vec2::new(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn disk_exterior_clamps() {
        let f = scene2("disk");
        let cfg = OracleConfig::for_diag(f.diag()).with_r_max(10.0);
        let s = mf_oracle(&f, &cfg, Vec2::new(2.0, 0.0)).unwrap();
        assert_eq!(s.radius, 10.0);
        assert!(s.clamped);
    }

    #[test]
    fn box_interior_diagonal_spoke() {
        let f = scene2("box");
        let cfg = OracleConfig::for_diag(f.diag());
        // Foot (1, 0.25); the spoke along -x meets the diagonal at t = 0.75.
        let s = mf_oracle(&f, &cfg, Vec2::new(0.5, 0.25)).unwrap();
        assert!(
            (s.radius - 0.75).abs() < 2.0 * cfg.tol,
            "radius {}",
            s.radius
        );
        assert!((s.medial_center - Vec2::new(0.25, 0.25)).norm() < 1e-5);
    }

    #[test]
    fn medial_point_tie_breaks_to_self() {
        let f = scene2("disk");
        let cfg = OracleConfig::for_diag(f.diag());
        let s = mf_oracle(&f, &cfg, Vec2::ZERO).unwrap();
        assert_eq!(s.radius, 1.0);
        assert_eq!(s.medial_center, Vec2::ZERO);
    }

    #[test]
    fn projection_examples() {
        let f = scene2("disk");
        // mf = |phi| leaves the point in place.
        let x = Vec2::new(0.3, 0.0);
        let kept = medial_project(&f, f.phi(x).abs(), x).unwrap();
        assert!((kept - x).norm() < 1e-12);
        // Projecting with the true thickness reaches the disk center.
        let center = medial_project(&f, 1.0, x).unwrap();
        assert!(center.norm() < 1e-12);

        let slab = scene2("slab");
        let p = medial_project(&slab, 1.0, Vec2::new(5.0, 0.2)).unwrap();
        assert!((p - Vec2::new(5.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn ball_containment_identity() {
        let f = scene2("box");
        let cfg = OracleConfig::for_diag(f.diag());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..500 {
            let x = f.bounds().sample_uniform(&mut rng);
            if f.phi(x).abs() <= cfg.tol {
                continue;
            }
            let Ok(s) = mf_oracle(&f, &cfg, x) else {
                continue;
            };
            // ||center - query|| + |phi(query)| = radius, by construction.
            let lhs = (s.medial_center - x).norm() + f.phi(x).abs();
            assert!(
                (lhs - s.radius).abs() < 1e-9,
                "identity off by {}",
                lhs - s.radius
            );
        }
    }

    #[test]
    fn medial_ball_is_empty() {
        let f = scene2("two_disks");
        let cfg = OracleConfig::for_diag(f.diag());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut checked = 0;
        while checked < 200 {
            let x = f.bounds().sample_uniform(&mut rng);
            if f.phi(x).abs() <= 1e-3 {
                continue;
            }
            let Ok(s) = mf_oracle(&f, &cfg, x) else {
                continue;
            };
            let sign = f.phi(x).signum();
            // Interior points of the ball keep the query's sign.
            for _ in 0..300 {
                let dir = crate::math::random_unit_vector::<2>(&mut rng);
                let r = s.radius * rng.random::<f64>().sqrt() * 0.999;
                let z = s.medial_center + dir * r;
                let pz = f.phi(z);
                assert!(
                    pz.signum() == sign || pz.abs() < 1e-6 * f.diag(),
                    "ball not empty at {z:?}: phi {pz}"
                );
            }
            checked += 1;
        }
    }

    #[test]
    fn inexact_field_detected() {
        // A lattice-sampled disk is not an exact SDF near the surface; queries
        // near the rim must either succeed or report the inexactness rather
        // than silently return garbage.
        let f = scene2("disk");
        let grid = crate::field::bake_grid(&f, crate::math::Aabb::centered(1.4), [9, 9]).unwrap();
        let cfg = OracleConfig {
            identity_slack: 1e-9,
            ..OracleConfig::for_diag(f.diag())
        };
        let r = mf_oracle(&grid, &cfg, Vec2::new(0.97, 0.4));
        assert!(matches!(r, Err(Error::SpokeMarchFailed { .. })), "{r:?}");
    }
}
