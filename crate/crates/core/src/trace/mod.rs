//! Sphere tracing along rays, plain and medial.
//!
//! Plain sphere tracing steps by the unsigned distance, which collapses near
//! grazing surfaces. The medial variant steps to the exit of the medial
//! sphere containing the current point: that sphere is tangent to the same
//! surface but centered on the medial axis, so its exit distance never
//! collapses and is always at least the plain step.

mod bench;
mod camera;
mod image;
mod render;

pub use bench::{bench_cameras, bench_poses, BenchReport, IterationStats};
pub use camera::Camera;
pub use image::{visualize_field_2d, Image, Palette};
pub use render::{mfao, render, RenderOutput, Shading, MFAO_A, MFAO_P};

use crate::field::DistanceField;
use crate::math::{Ray, Vector};
use crate::medial::{medial_project, MedialField};

/// Backend selector for rendering commands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    Naive,
    Medial,
}

/// Ray-march configuration. Defaults scale with the scene diagonal.
#[derive(Clone, Copy, Debug)]
pub struct TraceConfig {
    /// Hit threshold on |phi|.
    pub epsilon: f64,
    /// Ray budget: beyond this travel the ray is a miss.
    pub t_max: f64,
    pub max_iters: u32,
    /// Safety shrink for inexact (neural) medial fields; 1 on exact fields.
    pub radius_scale: f64,
    pub backend: Backend,
}

impl TraceConfig {
    pub fn for_diag(diag: f64) -> Self {
        TraceConfig {
            epsilon: 1e-4 * diag,
            t_max: 4.0 * diag,
            max_iters: 256,
            radius_scale: 1.0,
            backend: Backend::Naive,
        }
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceStatus {
    Hit,
    Miss,
    BudgetExhausted,
}

#[derive(Clone, Copy, Debug)]
pub struct TraceResult<const D: usize> {
    pub status: TraceStatus,
    pub point: Vector<D>,
    pub t: f64,
    /// Field/MF query bundles spent; the unit both backends are compared in.
    pub iterations: u32,
}

/// One accepted march step, for overstep audits.
#[derive(Clone, Copy, Debug)]
pub struct StepRecord<const D: usize> {
    pub from: Vector<D>,
    pub abs_phi: f64,
    pub step: f64,
    /// False when the step fell back to the plain |phi| step.
    pub medial: bool,
}

/// Once a ray is inside the epsilon tube, keep taking plain steps toward the
/// root so both backends report the same first intersection. Bounded and
/// monotone; these trailing queries are shared overhead, not loop iterations.
fn polish_hit<const D: usize>(
    field: &(impl DistanceField<D> + ?Sized),
    ray: Ray<D>,
    t_hit: f64,
    aphi_hit: f64,
    epsilon: f64,
) -> (f64, Vector<D>) {
    let target = 1e-3 * epsilon;
    let mut t = t_hit;
    let mut aphi = aphi_hit;
    for _ in 0..32 {
        if aphi < target {
            break;
        }
        let next_t = t + aphi;
        let next = field.phi(ray.at(next_t)).abs();
        if next >= aphi {
            break; // walking away: tangent graze, keep the closest point
        }
        t = next_t;
        aphi = next;
    }
    (t, ray.at(t))
}

/// Plain sphere tracing: `x <- x + |phi(x)| d` until `|phi| < eps`.
pub fn naive_trace<const D: usize>(
    field: &(impl DistanceField<D> + ?Sized),
    ray: Ray<D>,
    cfg: &TraceConfig,
) -> TraceResult<D> {
    let mut t = 0.0;
    let mut iterations = 0;
    loop {
        let x = ray.at(t);
        let aphi = field.phi(x).abs();
        iterations += 1;
        if aphi < cfg.epsilon {
            let (t, point) = polish_hit(field, ray, t, aphi, cfg.epsilon);
            return TraceResult {
                status: TraceStatus::Hit,
                point,
                t,
                iterations,
            };
        }
        if t > cfg.t_max {
            return TraceResult {
                status: TraceStatus::Miss,
                point: x,
                t,
                iterations,
            };
        }
        if iterations >= cfg.max_iters {
            return TraceResult {
                status: TraceStatus::BudgetExhausted,
                point: x,
                t,
                iterations,
            };
        }
        t += aphi;
    }
}

/// Medial sphere tracing with a plain-step fallback.
///
/// Each iteration projects the query onto the medial axis, forms the medial
/// sphere of radius `lambda * MF(x)`, and steps to the ray's exit from it:
/// `beta = (c - x) . d`, `s = beta + sqrt(beta^2 - (|c - x|^2 - r^2))`.
/// When the discriminant is negative or the step would fall below `|phi|`
/// (possible with inexact fields or clamped spheres in concave pockets), the
/// plain step is taken instead, preserving the no-overstep guarantee.
pub fn medial_trace<const D: usize>(
    field: &(impl DistanceField<D> + ?Sized),
    mf: &(impl MedialField<D> + ?Sized),
    ray: Ray<D>,
    cfg: &TraceConfig,
) -> TraceResult<D> {
    medial_trace_impl(field, mf, ray, cfg, &mut None)
}

/// As [`medial_trace`], recording every accepted step.
pub fn medial_trace_recorded<const D: usize>(
    field: &(impl DistanceField<D> + ?Sized),
    mf: &(impl MedialField<D> + ?Sized),
    ray: Ray<D>,
    cfg: &TraceConfig,
    steps: &mut Vec<StepRecord<D>>,
) -> TraceResult<D> {
    let mut sink = Some(steps);
    medial_trace_impl(field, mf, ray, cfg, &mut sink)
}

fn medial_trace_impl<const D: usize>(
    field: &(impl DistanceField<D> + ?Sized),
    mf: &(impl MedialField<D> + ?Sized),
    ray: Ray<D>,
    cfg: &TraceConfig,
    steps: &mut Option<&mut Vec<StepRecord<D>>>,
) -> TraceResult<D> {
    let mut t = 0.0;
    let mut iterations = 0;
    loop {
        let x = ray.at(t);
        let aphi = field.phi(x).abs();
        iterations += 1;
        if aphi < cfg.epsilon {
            let (t, point) = polish_hit(field, ray, t, aphi, cfg.epsilon);
            return TraceResult {
                status: TraceStatus::Hit,
                point,
                t,
                iterations,
            };
        }
        if t > cfg.t_max {
            return TraceResult {
                status: TraceStatus::Miss,
                point: x,
                t,
                iterations,
            };
        }
        if iterations >= cfg.max_iters {
            return TraceResult {
                status: TraceStatus::BudgetExhausted,
                point: x,
                t,
                iterations,
            };
        }

        let mut step = aphi;
        let mut medial = false;
        if let Ok(value) = mf.mf(x) {
            if let Ok(center) = medial_project(field, value, x) {
                let r = cfg.radius_scale * value;
                let to_center = center - x;
                let beta = to_center.dot(ray.dir);
                let disc = beta * beta - (to_center.norm_squared() - r * r);
                if disc >= 0.0 {
                    let s = beta + disc.sqrt();
                    if s >= aphi {
                        step = s;
                        medial = true;
                    }
                }
            }
        }
        debug_assert!(step >= aphi);
        if let Some(sink) = steps.as_deref_mut() {
            sink.push(StepRecord {
                from: x,
                abs_phi: aphi,
                step,
                medial,
            });
        }
        t += step;
    }
}
