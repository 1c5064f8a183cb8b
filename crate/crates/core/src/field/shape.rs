//! Analytic shape trees: leaf primitives with exact signed distances and
//! gradients, composed by union / intersection / difference.
//!
//! CSG composition via min/max is an exact distance field only away from
//! blend regions; the bundled scenes keep primitives disjoint so every
//! quantitative consumer sees exact values.

use super::{finite_difference_grad, DistanceField, GRAD_UNDEFINED_EPS};
use crate::error::{Error, Result};
use crate::math::{random_unit_vector, Aabb, Vector};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

const MAX_TREE_DEPTH: usize = 32;

/// Serializable shape tree. Leaves are exact primitives; interior nodes
/// compose children with min/max.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ShapeSpec<const D: usize> {
    Sphere {
        center: Vector<D>,
        radius: f64,
    },
    Box {
        center: Vector<D>,
        half_extents: Vector<D>,
    },
    Capsule {
        a: Vector<D>,
        b: Vector<D>,
        radius: f64,
    },
    /// Torus around the z axis; 3D only.
    Torus {
        center: Vector<D>,
        major_radius: f64,
        minor_radius: f64,
    },
    /// Solid half-space on the negative side of the plane normal.
    Halfspace {
        point: Vector<D>,
        normal: Vector<D>,
    },
    /// Solid `|x[axis]| <= half_width`, centered on the origin.
    Slab {
        axis: usize,
        half_width: f64,
    },
    Union {
        children: Vec<ShapeSpec<D>>,
    },
    Intersection {
        children: Vec<ShapeSpec<D>>,
    },
    /// First child minus the rest.
    Difference {
        children: Vec<ShapeSpec<D>>,
    },
}

impl<const D: usize> ShapeSpec<D> {
    pub fn validate(&self) -> Result<()> {
        self.validate_at(0)
    }

    fn validate_at(&self, depth: usize) -> Result<()> {
        if depth > MAX_TREE_DEPTH {
            return Err(Error::InvalidScene(format!(
                "shape tree deeper than {MAX_TREE_DEPTH}"
            )));
        }
        let bad = |msg: &str| Err(Error::InvalidScene(msg.to_string()));
        match self {
            ShapeSpec::Sphere { center, radius } => {
                if !center.is_finite() || !(*radius > 0.0) {
                    return bad("sphere needs finite center and radius > 0");
                }
            }
            ShapeSpec::Box {
                center,
                half_extents,
            } => {
                if !center.is_finite()
                    || !half_extents.is_finite()
                    || (0..D).any(|i| !(half_extents[i] > 0.0))
                {
                    return bad("box needs finite center and positive half extents");
                }
            }
            ShapeSpec::Capsule { a, b, radius } => {
                if !a.is_finite() || !b.is_finite() || !(*radius > 0.0) {
                    return bad("capsule needs finite endpoints and radius > 0");
                }
                if (*b - *a).norm() < 1e-12 {
                    return bad("capsule endpoints coincide; use a sphere");
                }
            }
            ShapeSpec::Torus {
                center,
                major_radius,
                minor_radius,
            } => {
                if D != 3 {
                    return bad("torus is 3D only");
                }
                if !center.is_finite() || !(*minor_radius > 0.0) || !(*major_radius > *minor_radius)
                {
                    return bad("torus needs major_radius > minor_radius > 0");
                }
            }
            ShapeSpec::Halfspace { point, normal } => {
                if !point.is_finite() || normal.normalized(1e-12).is_none() {
                    return bad("halfspace needs a finite point and nonzero normal");
                }
            }
            ShapeSpec::Slab { axis, half_width } => {
                if *axis >= D || !(*half_width > 0.0) {
                    return bad("slab needs axis < dim and half_width > 0");
                }
            }
            ShapeSpec::Union { children }
            | ShapeSpec::Intersection { children }
            | ShapeSpec::Difference { children } => {
                if children.is_empty() {
                    return bad("composite node needs at least one child");
                }
                for c in children {
                    c.validate_at(depth + 1)?;
                }
            }
        }
        Ok(())
    }

    pub fn is_leaf(&self) -> bool {
        !matches!(
            self,
            ShapeSpec::Union { .. } | ShapeSpec::Intersection { .. } | ShapeSpec::Difference { .. }
        )
    }

    /// Signed distance. Exact for leaves; min/max bound for composites.
    pub fn phi(&self, x: Vector<D>) -> f64 {
        match self {
            ShapeSpec::Sphere { center, radius } => (x - *center).norm() - radius,
            ShapeSpec::Box {
                center,
                half_extents,
            } => {
                let q = (x - *center).abs() - *half_extents;
                let outside = q.max(Vector::ZERO).norm();
                outside + q.max_component().min(0.0)
            }
            ShapeSpec::Capsule { a, b, radius } => {
                let ab = *b - *a;
                let t = ((x - *a).dot(ab) / ab.norm_squared()).clamp(0.0, 1.0);
                (x - (*a + ab * t)).norm() - radius
            }
            ShapeSpec::Torus {
                center,
                major_radius,
                minor_radius,
            } => {
                let p = x - *center;
                let rho = (p[0] * p[0] + p[1] * p[1]).sqrt();
                let qx = rho - major_radius;
                (qx * qx + p[2] * p[2]).sqrt() - minor_radius
            }
            ShapeSpec::Halfspace { point, normal } => {
                let n = normal.normalized(1e-12).expect("validated normal");
                (x - *point).dot(n)
            }
            ShapeSpec::Slab { axis, half_width } => x[*axis].abs() - half_width,
            ShapeSpec::Union { children } => children
                .iter()
                .map(|c| c.phi(x))
                .fold(f64::INFINITY, f64::min),
            ShapeSpec::Intersection { children } => children
                .iter()
                .map(|c| c.phi(x))
                .fold(f64::NEG_INFINITY, f64::max),
            ShapeSpec::Difference { children } => {
                let mut acc = children[0].phi(x);
                for c in &children[1..] {
                    acc = acc.max(-c.phi(x));
                }
                acc
            }
        }
    }

    /// Point-in-shape by analytic containment, independent of the phi sign.
    pub fn contains(&self, x: Vector<D>) -> bool {
        match self {
            ShapeSpec::Sphere { center, radius } => (x - *center).norm() < *radius,
            ShapeSpec::Box {
                center,
                half_extents,
            } => (0..D).all(|i| (x[i] - center[i]).abs() < half_extents[i]),
            ShapeSpec::Capsule { a, b, radius } => {
                let ab = *b - *a;
                let t = ((x - *a).dot(ab) / ab.norm_squared()).clamp(0.0, 1.0);
                (x - (*a + ab * t)).norm() < *radius
            }
            ShapeSpec::Torus {
                center,
                major_radius,
                minor_radius,
            } => {
                let p = x - *center;
                let rho = (p[0] * p[0] + p[1] * p[1]).sqrt();
                let qx = rho - major_radius;
                (qx * qx + p[2] * p[2]).sqrt() < *minor_radius
            }
            ShapeSpec::Halfspace { point, normal } => {
                let n = normal.normalized(1e-12).expect("validated normal");
                (x - *point).dot(n) < 0.0
            }
            ShapeSpec::Slab { axis, half_width } => x[*axis].abs() < *half_width,
            ShapeSpec::Union { children } => children.iter().any(|c| c.contains(x)),
            ShapeSpec::Intersection { children } => children.iter().all(|c| c.contains(x)),
            ShapeSpec::Difference { children } => {
                children[0].contains(x) && children[1..].iter().all(|c| !c.contains(x))
            }
        }
    }

    /// Analytic unit gradient of a leaf primitive.
    fn leaf_grad(&self, x: Vector<D>) -> Result<Vector<D>> {
        match self {
            ShapeSpec::Sphere { center, .. } => (x - *center)
                .normalized(GRAD_UNDEFINED_EPS)
                .ok_or(Error::GradientUndefined),
            ShapeSpec::Box {
                center,
                half_extents,
            } => {
                let p = x - *center;
                let q = p.abs() - *half_extents;
                if q.max_component() > 0.0 {
                    // Outside: gradient points away from the closest
                    // face/edge/corner. The exterior of a box is smooth, so
                    // the direction is valid however short the offset vector.
                    let mut g = Vector::ZERO;
                    for i in 0..D {
                        g[i] = p[i].signum() * q[i].max(0.0);
                    }
                    g.normalized(1e-300).ok_or(Error::GradientUndefined)
                } else {
                    // Inside: axis of the nearest face; ties sit on the medial set.
                    let mut best = 0;
                    for i in 1..D {
                        if q[i] > q[best] {
                            best = i;
                        }
                    }
                    for i in 0..D {
                        if i != best && (q[i] - q[best]).abs() < GRAD_UNDEFINED_EPS {
                            return Err(Error::GradientUndefined);
                        }
                    }
                    Ok(Vector::axis_unit(best) * p[best].signum())
                }
            }
            ShapeSpec::Capsule { a, b, .. } => {
                let ab = *b - *a;
                let t = ((x - *a).dot(ab) / ab.norm_squared()).clamp(0.0, 1.0);
                (x - (*a + ab * t))
                    .normalized(GRAD_UNDEFINED_EPS)
                    .ok_or(Error::GradientUndefined)
            }
            ShapeSpec::Torus {
                center,
                major_radius,
                ..
            } => {
                let p = x - *center;
                let rho = (p[0] * p[0] + p[1] * p[1]).sqrt();
                if rho < GRAD_UNDEFINED_EPS {
                    return Err(Error::GradientUndefined); // on the torus axis
                }
                let qx = rho - major_radius;
                let qn = (qx * qx + p[2] * p[2]).sqrt();
                if qn < GRAD_UNDEFINED_EPS {
                    return Err(Error::GradientUndefined); // on the core circle
                }
                let mut g = Vector::ZERO;
                g[0] = qx / qn * p[0] / rho;
                g[1] = qx / qn * p[1] / rho;
                g[2] = p[2] / qn;
                Ok(g)
            }
            ShapeSpec::Halfspace { normal, .. } => {
                Ok(normal.normalized(1e-12).expect("validated normal"))
            }
            ShapeSpec::Slab { axis, .. } => {
                if x[*axis].abs() < GRAD_UNDEFINED_EPS {
                    Err(Error::GradientUndefined) // center plane of the slab
                } else {
                    Ok(Vector::axis_unit(*axis) * x[*axis].signum())
                }
            }
            _ => unreachable!("leaf_grad called on a composite node"),
        }
    }

    /// Surface measure (perimeter in 2D, area in 3D) used to weight leaves
    /// during surface sampling. Unbounded primitives are clipped to `bounds`.
    fn leaf_measure(&self, bounds: &Aabb<D>) -> f64 {
        let ext = bounds.extent();
        match self {
            ShapeSpec::Sphere { radius, .. } => match D {
                2 => TAU * radius,
                _ => 4.0 * PI * radius * radius,
            },
            ShapeSpec::Box { half_extents, .. } => match D {
                2 => 4.0 * (half_extents[0] + half_extents[1]),
                _ => {
                    8.0 * (half_extents[0] * half_extents[1]
                        + half_extents[1] * half_extents[2]
                        + half_extents[0] * half_extents[2])
                }
            },
            ShapeSpec::Capsule { a, b, radius } => {
                let len = (*b - *a).norm();
                match D {
                    2 => 2.0 * len + TAU * radius,
                    _ => TAU * radius * len + 4.0 * PI * radius * radius,
                }
            }
            ShapeSpec::Torus {
                major_radius,
                minor_radius,
                ..
            } => 4.0 * PI * PI * major_radius * minor_radius,
            // Plane patch inside the bounds; the cross-section through the
            // box center is a workable weight for leaf selection.
            ShapeSpec::Halfspace { normal, .. } => {
                let n = normal.normalized(1e-12).expect("validated normal");
                let mut dominant = 0;
                for i in 1..D {
                    if n[i].abs() > n[dominant].abs() {
                        dominant = i;
                    }
                }
                (0..D).filter(|i| *i != dominant).map(|i| ext[i]).product()
            }
            ShapeSpec::Slab { axis, .. } => {
                2.0 * (0..D)
                    .filter(|i| i != axis)
                    .map(|i| ext[i])
                    .product::<f64>()
            }
            _ => unreachable!("leaf_measure called on a composite node"),
        }
    }

    /// Uniform sample on the leaf boundary (clipped to `bounds` for unbounded
    /// leaves). Returns the point and its outward unit normal.
    fn leaf_sample(&self, bounds: &Aabb<D>, rng: &mut impl Rng) -> (Vector<D>, Vector<D>) {
        match self {
            ShapeSpec::Sphere { center, radius } => {
                let dir = random_unit_vector::<D>(rng);
                (*center + dir * *radius, dir)
            }
            ShapeSpec::Box {
                center,
                half_extents,
            } => {
                // Pick a face pair weighted by its measure, then a side.
                let mut weights = [0.0; 8];
                let mut total = 0.0;
                for a in 0..D {
                    let w: f64 = (0..D)
                        .filter(|i| *i != a)
                        .map(|i| 2.0 * half_extents[i])
                        .product();
                    weights[a] = w;
                    total += w;
                }
                let mut pick = rng.random_range(0.0..total);
                let mut axis = D - 1;
                for (a, w) in weights[..D].iter().enumerate() {
                    if pick < *w {
                        axis = a;
                        break;
                    }
                    pick -= w;
                }
                let side = if rng.random::<bool>() { 1.0 } else { -1.0 };
                let mut p = *center;
                p[axis] += side * half_extents[axis];
                for i in 0..D {
                    if i != axis {
                        p[i] = center[i] + rng.random_range(-half_extents[i]..half_extents[i]);
                    }
                }
                (p, Vector::axis_unit(axis) * side)
            }
            ShapeSpec::Capsule { a, b, radius } => {
                let ab = *b - *a;
                let len = ab.norm();
                let axis = ab / len;
                let (side_area, cap_area) = match D {
                    2 => (2.0 * len, TAU * radius),
                    _ => (TAU * radius * len, 4.0 * PI * radius * radius),
                };
                if rng.random_range(0.0..side_area + cap_area) < side_area {
                    // Cylinder side: radial direction orthogonal to the axis.
                    let t = rng.random_range(0.0..1.0);
                    let radial = loop {
                        let dir = random_unit_vector::<D>(rng);
                        let ortho = dir - axis * dir.dot(axis);
                        if let Some(u) = ortho.normalized(1e-9) {
                            break u;
                        }
                    };
                    (*a + ab * t + radial * *radius, radial)
                } else {
                    // End caps: a full sphere of directions split by hemisphere.
                    let dir = random_unit_vector::<D>(rng);
                    let end = if dir.dot(axis) >= 0.0 { *b } else { *a };
                    (end + dir * *radius, dir)
                }
            }
            ShapeSpec::Torus {
                center,
                major_radius,
                minor_radius,
            } => {
                // Area element is (R + r cos t) dt dp: rejection on the tube angle.
                let tube = loop {
                    let t = rng.random_range(0.0..TAU);
                    let accept =
                        (major_radius + minor_radius * t.cos()) / (major_radius + minor_radius);
                    if rng.random::<f64>() < accept {
                        break t;
                    }
                };
                let ring = rng.random_range(0.0..TAU);
                let mut p = *center;
                let mut n = Vector::ZERO;
                p[0] += (major_radius + minor_radius * tube.cos()) * ring.cos();
                p[1] += (major_radius + minor_radius * tube.cos()) * ring.sin();
                p[2] += minor_radius * tube.sin();
                n[0] = tube.cos() * ring.cos();
                n[1] = tube.cos() * ring.sin();
                n[2] = tube.sin();
                (p, n)
            }
            ShapeSpec::Halfspace { point, normal } => {
                let n = normal.normalized(1e-12).expect("validated normal");
                // Anchor at the box center projected onto the plane, then
                // sample a tangent patch and reject outside the bounds.
                let anchor = bounds.center() - n * (bounds.center() - *point).dot(n);
                let tangent = tangent_basis(n);
                let half = 0.5 * bounds.diagonal();
                for _ in 0..10_000 {
                    let mut p = anchor;
                    for t in tangent.iter().take(D - 1) {
                        p += *t * rng.random_range(-half..half);
                    }
                    if bounds.padded(1e-9).contains(p) {
                        return (p, n);
                    }
                }
                (anchor, n)
            }
            ShapeSpec::Slab { axis, half_width } => {
                let side = if rng.random::<bool>() { 1.0 } else { -1.0 };
                let mut p = bounds.sample_uniform(rng);
                p[*axis] = side * half_width;
                (p, Vector::axis_unit(*axis) * side)
            }
            _ => unreachable!("leaf_sample called on a composite node"),
        }
    }

    /// Flattens the tree into `(leaf, polarity)` pairs. Polarity is -1 for
    /// subtracted leaves, whose outward normal flips in the composite.
    fn collect_leaves(&self, polarity: f64, out: &mut Vec<(ShapeSpec<D>, f64)>) {
        match self {
            ShapeSpec::Union { children } | ShapeSpec::Intersection { children } => {
                for c in children {
                    c.collect_leaves(polarity, out);
                }
            }
            ShapeSpec::Difference { children } => {
                children[0].collect_leaves(polarity, out);
                for c in &children[1..] {
                    c.collect_leaves(-polarity, out);
                }
            }
            leaf => out.push((leaf.clone(), polarity)),
        }
    }
}

/// Orthonormal tangent frame completing a unit normal.
fn tangent_basis<const D: usize>(n: Vector<D>) -> Vec<Vector<D>> {
    let mut basis = Vec::with_capacity(D - 1);
    // Seed with the coordinate axis least aligned with n, then Gram-Schmidt.
    let mut candidates: Vec<Vector<D>> = (0..D).map(Vector::axis_unit).collect();
    candidates.sort_by(|a, b| {
        a.dot(n)
            .abs()
            .partial_cmp(&b.dot(n).abs())
            .expect("finite normals")
    });
    for c in candidates {
        if basis.len() == D - 1 {
            break;
        }
        let mut v = c - n * c.dot(n);
        for b in &basis {
            v -= *b * v.dot(*b);
        }
        if let Some(u) = v.normalized(1e-9) {
            basis.push(u);
        }
    }
    basis
}

/// A point on the scene surface with its outward unit normal.
#[derive(Clone, Copy, Debug)]
pub struct SurfacePoint<const D: usize> {
    pub point: Vector<D>,
    pub normal: Vector<D>,
}

/// A validated shape tree together with its scene bounds: the ground-truth
/// distance field every other module consumes.
#[derive(Clone, Debug)]
pub struct ShapeField<const D: usize> {
    spec: ShapeSpec<D>,
    bounds: Aabb<D>,
    diag: f64,
    leaves: Vec<(ShapeSpec<D>, f64)>,
    leaf_cum_measure: Vec<f64>,
}

impl<const D: usize> ShapeField<D> {
    pub fn new(spec: ShapeSpec<D>, bounds: Aabb<D>) -> Result<Self> {
        spec.validate()?;
        if bounds.is_degenerate() {
            return Err(Error::BoundsDegenerate);
        }
        let mut leaves = Vec::new();
        spec.collect_leaves(1.0, &mut leaves);
        let mut leaf_cum_measure = Vec::with_capacity(leaves.len());
        let mut acc = 0.0;
        for (leaf, _) in &leaves {
            acc += leaf.leaf_measure(&bounds);
            leaf_cum_measure.push(acc);
        }
        Ok(ShapeField {
            diag: bounds.diagonal(),
            spec,
            bounds,
            leaves,
            leaf_cum_measure,
        })
    }

    pub fn spec(&self) -> &ShapeSpec<D> {
        &self.spec
    }

    /// Analytic membership test, independent of the signed distance.
    pub fn contains(&self, x: Vector<D>) -> bool {
        self.spec.contains(x)
    }

    pub fn surface_measure(&self) -> f64 {
        *self.leaf_cum_measure.last().expect("at least one leaf")
    }

    /// Uniform sample on the composite surface with its ground-truth normal.
    ///
    /// Candidates come from a measure-weighted leaf; points shadowed by
    /// another primitive (|phi| > 0 there) are rejected, so the result always
    /// satisfies `|phi| < 1e-9 * diag`.
    pub fn sample_surface(&self, rng: &mut impl Rng) -> SurfacePoint<D> {
        let total = self.surface_measure();
        let tol = 1e-9 * self.diag;
        for _ in 0..100_000 {
            let pick = rng.random_range(0.0..total);
            let idx = self
                .leaf_cum_measure
                .partition_point(|cum| *cum <= pick)
                .min(self.leaves.len() - 1);
            let (leaf, polarity) = &self.leaves[idx];
            let (point, normal) = leaf.leaf_sample(&self.bounds, rng);
            if self.phi(point).abs() <= tol {
                return SurfacePoint {
                    point,
                    normal: normal * *polarity,
                };
            }
        }
        panic!("surface sampling starved: no leaf point lies on the composite boundary");
    }
}

impl<const D: usize> DistanceField<D> for ShapeField<D> {
    fn phi(&self, x: Vector<D>) -> f64 {
        self.spec.phi(x)
    }

    fn grad(&self, x: Vector<D>) -> Result<Vector<D>> {
        if self.spec.is_leaf() {
            self.spec.leaf_grad(x)
        } else {
            // Composite trees fall back to central differences; the step
            // trades truncation against cancellation at double precision.
            let h = 1e-4 * self.diag;
            finite_difference_grad(|p| self.spec.phi(p), x, h)
        }
    }

    fn bounds(&self) -> Aabb<D> {
        self.bounds
    }

    fn diag(&self) -> f64 {
        self.diag
    }
}
