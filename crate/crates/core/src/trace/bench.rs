//! Iteration statistics and the random-pose tracing benchmark.

use super::{medial_trace, naive_trace, Camera, TraceConfig};
use crate::field::DistanceField;
use crate::math::{random_unit_vector, Aabb, Vec3};
use crate::medial::MedialField;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Histogram of per-ray iteration counts.
#[derive(Clone, Debug)]
pub struct IterationStats {
    /// `histogram[i]` counts rays that took `i` iterations; the last bucket
    /// absorbs everything at or beyond the budget.
    pub histogram: Vec<u64>,
    pub rays: u64,
    pub total_iterations: u64,
}

impl IterationStats {
    pub fn new(max_iters: usize) -> Self {
        IterationStats {
            histogram: vec![0; max_iters + 1],
            rays: 0,
            total_iterations: 0,
        }
    }

    pub fn record(&mut self, iterations: u32) {
        let bucket = (iterations as usize).min(self.histogram.len() - 1);
        self.histogram[bucket] += 1;
        self.rays += 1;
        self.total_iterations += iterations as u64;
    }

    pub fn merge(&mut self, other: &IterationStats) {
        if self.histogram.len() < other.histogram.len() {
            self.histogram.resize(other.histogram.len(), 0);
        }
        for (i, c) in other.histogram.iter().enumerate() {
            let bucket = i.min(self.histogram.len() - 1);
            self.histogram[bucket] += c;
        }
        self.rays += other.rays;
        self.total_iterations += other.total_iterations;
    }

    /// Mean iterations per ray, pooled over everything recorded.
    pub fn mean(&self) -> f64 {
        if self.rays == 0 {
            0.0
        } else {
            self.total_iterations as f64 / self.rays as f64
        }
    }

    /// Fraction of rays strictly above `threshold` iterations.
    pub fn tail_fraction(&self, threshold: f64) -> f64 {
        if self.rays == 0 {
            return 0.0;
        }
        let over: u64 = self
            .histogram
            .iter()
            .enumerate()
            .filter(|(i, _)| *i as f64 > threshold)
            .map(|(_, c)| c)
            .sum();
        over as f64 / self.rays as f64
    }
}

/// Per-backend outcome of a pose sweep. Summary statistics are over
/// per-frame means; the histogram pools every ray.
#[derive(Clone, Debug)]
pub struct BenchReport {
    pub per_frame_mean: Vec<f64>,
    pub pooled: IterationStats,
}

impl BenchReport {
    pub fn mean(&self) -> f64 {
        self.per_frame_mean.iter().sum::<f64>() / self.per_frame_mean.len().max(1) as f64
    }

    pub fn min(&self) -> f64 {
        self.per_frame_mean
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.per_frame_mean
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Cameras on a sphere around the scene, deterministic per seed.
pub fn bench_cameras(
    bounds: Aabb<3>,
    n_poses: usize,
    seed: u64,
    resolution: (u32, u32),
) -> Vec<Camera> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let center = bounds.center();
    let dist = 1.4 * bounds.diagonal();
    (0..n_poses)
        .map(|_| {
            let dir = random_unit_vector::<3>(&mut rng);
            let mut cam = Camera::new(center + dir * dist, center, resolution.0, resolution.1);
            cam.up = Vec3::new(0.0, 0.0, 1.0);
            cam
        })
        .collect()
}

/// Renders `n_poses` random views with both backends, counting iterations
/// only (no shading). Returns `(naive, medial)` reports.
pub fn bench_poses(
    field: &(impl DistanceField<3> + ?Sized),
    mf: &(impl MedialField<3> + ?Sized),
    n_poses: usize,
    seed: u64,
    cfg: &TraceConfig,
    resolution: (u32, u32),
) -> (BenchReport, BenchReport) {
    let cameras = bench_cameras(field.bounds(), n_poses, seed, resolution);
    let mut naive = BenchReport {
        per_frame_mean: Vec::new(),
        pooled: IterationStats::new(cfg.max_iters as usize),
    };
    let mut medial = BenchReport {
        per_frame_mean: Vec::new(),
        pooled: IterationStats::new(cfg.max_iters as usize),
    };
    for cam in &cameras {
        let rows: Vec<(IterationStats, IterationStats)> = (0..cam.height)
            .into_par_iter()
            .map(|py| {
                let mut sn = IterationStats::new(cfg.max_iters as usize);
                let mut sm = IterationStats::new(cfg.max_iters as usize);
                for px in 0..cam.width {
                    let ray = cam.primary_ray(px, py);
                    sn.record(naive_trace(field, ray, cfg).iterations);
                    sm.record(medial_trace(field, mf, ray, cfg).iterations);
                }
                (sn, sm)
            })
            .collect();
        let mut frame_n = IterationStats::new(cfg.max_iters as usize);
        let mut frame_m = IterationStats::new(cfg.max_iters as usize);
        for (sn, sm) in &rows {
            frame_n.merge(sn);
            frame_m.merge(sm);
        }
        naive.per_frame_mean.push(frame_n.mean());
        medial.per_frame_mean.push(frame_m.mean());
        naive.pooled.merge(&frame_n);
        medial.pooled.merge(&frame_m);
    }
    (naive, medial)
}
