//! Fixed-dimension vectors, rays, and axis-aligned boxes.
//!
//! The scene dimension `D` (2 or 3) is a compile-time constant; a scene never
//! mixes dimensions, so everything downstream is generic over `D`.

use serde::de::{self, SeqAccess, Visitor};
use serde::ser::SerializeTuple;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::ops::{Add, AddAssign, Div, Index, IndexMut, Mul, Neg, Sub, SubAssign};

/// A point or direction in `D`-dimensional scene space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vector<const D: usize>(pub [f64; D]);

impl<const D: usize> Serialize for Vector<D> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut tup = serializer.serialize_tuple(D)?;
        for v in &self.0 {
            tup.serialize_element(v)?;
        }
        tup.end()
    }
}

impl<'de, const D: usize> Deserialize<'de> for Vector<D> {
    fn deserialize<De: Deserializer<'de>>(deserializer: De) -> Result<Self, De::Error> {
        struct VecVisitor<const D: usize>;
        impl<'de, const D: usize> Visitor<'de> for VecVisitor<D> {
            type Value = Vector<D>;
            fn expecting(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                write!(f, "an array of {D} numbers")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Self::Value, A::Error> {
                let mut out = Vector::<D>::ZERO;
                for i in 0..D {
                    out.0[i] = seq
                        .next_element()?
                        .ok_or_else(|| de::Error::invalid_length(i, &self))?;
                }
                if seq.next_element::<f64>()?.is_some() {
                    return Err(de::Error::invalid_length(D + 1, &self));
                }
                Ok(out)
            }
        }
        deserializer.deserialize_tuple(D, VecVisitor::<D>)
    }
}

pub type Vec2 = Vector<2>;
pub type Vec3 = Vector<3>;

impl<const D: usize> Vector<D> {
    pub const ZERO: Self = Vector([0.0; D]);

    pub fn splat(v: f64) -> Self {
        Vector([v; D])
    }

    pub fn dot(self, rhs: Self) -> f64 {
        let mut acc = 0.0;
        for i in 0..D {
            acc += self.0[i] * rhs.0[i];
        }
        acc
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// Unit vector in the same direction, or `None` when the norm is below `eps`.
    pub fn normalized(self, eps: f64) -> Option<Self> {
        let n = self.norm();
        if n < eps {
            None
        } else {
            Some(self / n)
        }
    }

    pub fn distance(self, rhs: Self) -> f64 {
        (self - rhs).norm()
    }

    pub fn abs(self) -> Self {
        let mut out = self;
        for v in out.0.iter_mut() {
            *v = v.abs();
        }
        out
    }

    pub fn min(self, rhs: Self) -> Self {
        let mut out = self;
        for i in 0..D {
            out.0[i] = out.0[i].min(rhs.0[i]);
        }
        out
    }

    pub fn max(self, rhs: Self) -> Self {
        let mut out = self;
        for i in 0..D {
            out.0[i] = out.0[i].max(rhs.0[i]);
        }
        out
    }

    pub fn max_component(self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_finite(self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// Unit basis vector along `axis`.
    pub fn axis_unit(axis: usize) -> Self {
        let mut out = Self::ZERO;
        out.0[axis] = 1.0;
        out
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn from_slice(s: &[f64]) -> Self {
        let mut out = Self::ZERO;
        out.0.copy_from_slice(s);
        out
    }
}

impl Vec3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vector([x, y, z])
    }

    pub fn cross(self, rhs: Self) -> Self {
        let [a1, a2, a3] = self.0;
        let [b1, b2, b3] = rhs.0;
        Vector([a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1])
    }
}

impl Vec2 {
    pub fn new(x: f64, y: f64) -> Self {
        Vector([x, y])
    }
}

impl<const D: usize> Index<usize> for Vector<D> {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl<const D: usize> IndexMut<usize> for Vector<D> {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl<const D: usize> Add for Vector<D> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for i in 0..D {
            self.0[i] += rhs.0[i];
        }
        self
    }
}

impl<const D: usize> AddAssign for Vector<D> {
    fn add_assign(&mut self, rhs: Self) {
        for i in 0..D {
            self.0[i] += rhs.0[i];
        }
    }
}

impl<const D: usize> Sub for Vector<D> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for i in 0..D {
            self.0[i] -= rhs.0[i];
        }
        self
    }
}

impl<const D: usize> SubAssign for Vector<D> {
    fn sub_assign(&mut self, rhs: Self) {
        for i in 0..D {
            self.0[i] -= rhs.0[i];
        }
    }
}

impl<const D: usize> Neg for Vector<D> {
    type Output = Self;
    fn neg(mut self) -> Self {
        for v in self.0.iter_mut() {
            *v = -*v;
        }
        self
    }
}

impl<const D: usize> Mul<f64> for Vector<D> {
    type Output = Self;
    fn mul(mut self, k: f64) -> Self {
        for v in self.0.iter_mut() {
            *v *= k;
        }
        self
    }
}

impl<const D: usize> Div<f64> for Vector<D> {
    type Output = Self;
    fn div(self, k: f64) -> Self {
        self * (1.0 / k)
    }
}

/// A ray with unit direction.
#[derive(Clone, Copy, Debug)]
pub struct Ray<const D: usize> {
    pub origin: Vector<D>,
    pub dir: Vector<D>,
}

impl<const D: usize> Ray<D> {
    /// Builds a ray, normalizing the direction. Panics on a zero direction.
    pub fn new(origin: Vector<D>, dir: Vector<D>) -> Self {
        let dir = dir
            .normalized(1e-12)
            .expect("ray direction must be nonzero");
        debug_assert!((dir.norm() - 1.0).abs() < 1e-9);
        Ray { origin, dir }
    }

    pub fn at(&self, t: f64) -> Vector<D> {
        self.origin + self.dir * t
    }
}

/// Axis-aligned box, used for scene bounds and grid extents.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aabb<const D: usize> {
    pub min: Vector<D>,
    pub max: Vector<D>,
}

impl<const D: usize> Aabb<D> {
    pub fn new(min: Vector<D>, max: Vector<D>) -> Self {
        Aabb { min, max }
    }

    /// Cube centered at the origin with the given half extent.
    pub fn centered(half: f64) -> Self {
        Aabb {
            min: Vector::splat(-half),
            max: Vector::splat(half),
        }
    }

    pub fn extent(&self) -> Vector<D> {
        self.max - self.min
    }

    pub fn center(&self) -> Vector<D> {
        (self.min + self.max) * 0.5
    }

    pub fn diagonal(&self) -> f64 {
        self.extent().norm()
    }

    pub fn is_degenerate(&self) -> bool {
        (0..D).any(|i| !(self.max[i] - self.min[i] > 0.0))
    }

    pub fn contains(&self, p: Vector<D>) -> bool {
        (0..D).all(|i| p[i] >= self.min[i] && p[i] <= self.max[i])
    }

    pub fn clamp(&self, p: Vector<D>) -> Vector<D> {
        p.max(self.min).min(self.max)
    }

    /// Minkowski-grown box.
    pub fn padded(&self, pad: f64) -> Self {
        Aabb {
            min: self.min - Vector::splat(pad),
            max: self.max + Vector::splat(pad),
        }
    }

    pub fn sample_uniform(&self, rng: &mut impl rand::Rng) -> Vector<D> {
        let mut p = Vector::ZERO;
        for i in 0..D {
            p[i] = rng.random_range(self.min[i]..self.max[i]);
        }
        p
    }
}

/// Standard normal draw via Box-Muller; two uniforms per call.
pub fn standard_normal(rng: &mut impl rand::Rng) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Uniform direction on the unit sphere in `D` dimensions.
pub fn random_unit_vector<const D: usize>(rng: &mut impl rand::Rng) -> Vector<D> {
    loop {
        let mut v = Vector::<D>::ZERO;
        for i in 0..D {
            v[i] = standard_normal(rng);
        }
        if let Some(u) = v.normalized(1e-9) {
            return u;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn vector_ops() {
        let a = Vec2::new(1.0, 2.0);
        let b = Vec2::new(3.0, -1.0);
        assert_eq!(a + b, Vec2::new(4.0, 1.0));
        assert_eq!(a.dot(b), 1.0);
        assert_eq!((a * 2.0)[1], 4.0);
        assert!((Vec2::new(3.0, 4.0).norm() - 5.0).abs() < 1e-15);
    }

    #[test]
    fn cross_product_orthogonal() {
        let a = Vec3::new(1.0, 0.0, 0.0);
        let b = Vec3::new(0.0, 1.0, 0.0);
        assert_eq!(a.cross(b), Vec3::new(0.0, 0.0, 1.0));
    }

    #[test]
    fn ray_normalizes() {
        let r = Ray::new(Vec2::ZERO, Vec2::new(3.0, 4.0));
        assert!((r.dir.norm() - 1.0).abs() < 1e-12);
        assert!((r.at(5.0) - Vec2::new(3.0, 4.0)).norm() < 1e-12);
    }

    #[test]
    fn aabb_diag() {
        let b = Aabb::<2>::centered(2.0);
        assert!((b.diagonal() - 32f64.sqrt()).abs() < 1e-12);
        assert!(b.contains(Vec2::new(1.9, -1.9)));
        assert!(!b.contains(Vec2::new(2.1, 0.0)));
    }

    #[test]
    fn normal_draw_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 100_000;
        let samples: Vec<f64> = (0..n).map(|_| standard_normal(&mut rng)).collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var - 1.0).abs() < 0.03, "var {var}");
    }
}
