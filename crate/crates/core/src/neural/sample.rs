//! Training batches: surface points with ground-truth normals, plus volume
//! points made by jittering the surface samples with an isotropic Gaussian.

use crate::field::ShapeField;
use crate::math::{standard_normal, Vector};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct SampleBatch<const D: usize> {
    pub surface_points: Vec<Vector<D>>,
    pub surface_normals: Vec<Vector<D>>,
    pub volume_points: Vec<Vector<D>>,
}

impl<const D: usize> SampleBatch<D> {
    pub fn len(&self) -> usize {
        self.surface_points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.surface_points.is_empty()
    }
}

/// Draws one batch; deterministic given the rng state.
pub fn sample_batch<const D: usize>(
    scene: &ShapeField<D>,
    batch_size: usize,
    sigma_volume: f64,
    rng: &mut ChaCha8Rng,
) -> SampleBatch<D> {
    let mut surface_points = Vec::with_capacity(batch_size);
    let mut surface_normals = Vec::with_capacity(batch_size);
    let mut volume_points = Vec::with_capacity(batch_size);
    for _ in 0..batch_size {
        let s = scene.sample_surface(rng);
        surface_points.push(s.point);
        surface_normals.push(s.normal);
        let mut offset = Vector::<D>::ZERO;
        for a in 0..D {
            offset[a] = sigma_volume * standard_normal(rng);
        }
        volume_points.push(s.point + offset);
    }
    SampleBatch {
        surface_points,
        surface_normals,
        volume_points,
    }
}
