//! Per-pixel primary-ray rendering of 3D scenes and medial-field ambient
//! occlusion.

use super::{
    medial_trace, naive_trace, Backend, Camera, Image, IterationStats, TraceConfig, TraceStatus,
};
use crate::error::{Error, Result};
use crate::field::DistanceField;
use crate::math::Vec3;
use crate::medial::MedialField;
use rayon::prelude::*;

/// Default occlusion strength constants.
pub const MFAO_A: f64 = 1.5;
pub const MFAO_P: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Shading {
    /// Surface normal mapped to RGB.
    NormalColor,
    Lambertian,
    LambertianAo {
        a: f64,
        p: f64,
        eps_off: f64,
    },
}

impl Shading {
    pub fn lambertian_ao(trace_eps: f64) -> Self {
        Shading::LambertianAo {
            a: MFAO_A,
            p: MFAO_P,
            // Small outward offset keeps the sample in the shape complement.
            eps_off: 2.0 * trace_eps,
        }
    }
}

/// Ambient-occlusion proxy from the complement's local thickness:
/// `min(a * MF(x + grad phi * eps_off)^p, 1)`, evaluated just outside the
/// surface. Thin complement pockets darken; open regions saturate to 1.
pub fn mfao<const D: usize>(
    mf: &(impl MedialField<D> + ?Sized),
    field: &(impl DistanceField<D> + ?Sized),
    x_surface: crate::math::Vector<D>,
    a: f64,
    p: f64,
    eps_off: f64,
) -> Result<f64> {
    let g = field.grad(x_surface)?;
    let value = mf.mf(x_surface + g * eps_off)?.max(0.0);
    Ok((a * value.powf(p)).min(1.0))
}

const BACKGROUND: [u8; 3] = [20, 24, 30];
const ALBEDO: [f64; 3] = [0.80, 0.80, 0.85];
const AMBIENT: f64 = 0.35;

pub struct RenderOutput {
    pub image: Image,
    pub stats: IterationStats,
    /// Per-pixel hit point and ray parameter, row-major; `None` on miss.
    pub hits: Vec<Option<(Vec3, f64)>>,
}

/// Traces one primary ray per pixel and shades hits.
///
/// `mf` is required by the medial backend and by MFAO shading; rendering is
/// deterministic and parallel over rows.
pub fn render(
    field: &(impl DistanceField<3> + ?Sized),
    mf: Option<&(impl MedialField<3> + ?Sized)>,
    camera: &Camera,
    cfg: &TraceConfig,
    shading: Shading,
) -> Result<RenderOutput> {
    if cfg.backend == Backend::Medial && mf.is_none() {
        return Err(Error::InvalidScene(
            "medial backend requires a medial field".into(),
        ));
    }
    if matches!(shading, Shading::LambertianAo { .. }) && mf.is_none() {
        return Err(Error::InvalidScene(
            "ambient-occlusion shading requires a medial field".into(),
        ));
    }
    let light = Vec3::new(0.4, 0.3, 0.85).normalized(1e-12).expect("light");

    let rows: Vec<(Vec<[u8; 3]>, Vec<u32>, Vec<Option<(Vec3, f64)>>)> = (0..camera.height)
        .into_par_iter()
        .map(|py| {
            let mut colors = Vec::with_capacity(camera.width as usize);
            let mut iters = Vec::with_capacity(camera.width as usize);
            let mut hits = Vec::with_capacity(camera.width as usize);
            for px in 0..camera.width {
                let ray = camera.primary_ray(px, py);
                let result = match (cfg.backend, mf) {
                    (Backend::Naive, _) => naive_trace(field, ray, cfg),
                    (Backend::Medial, Some(m)) => medial_trace(field, m, ray, cfg),
                    (Backend::Medial, None) => unreachable!("checked above"),
                };
                iters.push(result.iterations);
                if result.status == TraceStatus::Hit {
                    hits.push(Some((result.point, result.t)));
                    colors.push(shade(field, mf, result.point, light, &shading));
                } else {
                    hits.push(None);
                    colors.push(BACKGROUND);
                }
            }
            (colors, iters, hits)
        })
        .collect();

    let mut image = Image::new(camera.width, camera.height);
    let mut stats = IterationStats::new(cfg.max_iters as usize);
    let mut hits = Vec::with_capacity((camera.width * camera.height) as usize);
    for (py, (colors, iters, row_hits)) in rows.into_iter().enumerate() {
        for (px, c) in colors.into_iter().enumerate() {
            image.set(px as u32, py as u32, c);
        }
        for it in iters {
            stats.record(it);
        }
        hits.extend(row_hits);
    }
    Ok(RenderOutput { image, stats, hits })
}

fn shade(
    field: &(impl DistanceField<3> + ?Sized),
    mf: Option<&(impl MedialField<3> + ?Sized)>,
    point: Vec3,
    light: Vec3,
    shading: &Shading,
) -> [u8; 3] {
    let normal = match field.grad(point) {
        Ok(n) => n,
        Err(_) => return [128, 128, 128],
    };
    match shading {
        Shading::NormalColor => {
            let to_u8 = |v: f64| (((v + 1.0) * 0.5).clamp(0.0, 1.0) * 255.0).round() as u8;
            [to_u8(normal[0]), to_u8(normal[1]), to_u8(normal[2])]
        }
        Shading::Lambertian => lambert(normal, light, 1.0),
        Shading::LambertianAo { a, p, eps_off } => {
            let ao = mf
                .and_then(|m| mfao(m, field, point, *a, *p, *eps_off).ok())
                .unwrap_or(1.0);
            lambert(normal, light, ao)
        }
    }
}

fn lambert(normal: Vec3, light: Vec3, ao: f64) -> [u8; 3] {
    let diffuse = normal.dot(light).max(0.0);
    let shade = AMBIENT * ao + (1.0 - AMBIENT) * diffuse;
    let mut rgb = [0u8; 3];
    for (i, albedo) in ALBEDO.iter().enumerate() {
        rgb[i] = ((albedo * shade).clamp(0.0, 1.0) * 255.0).round() as u8;
    }
    rgb
}
