//! Surface-accuracy evaluation of proxies and the memory/accuracy table.

use super::{
    baseline_sdf_grid, baseline_tangent, baseline_uniform, furthest_sphere_sampling,
    sample_medial_candidates, FssConfig, ProxySet, Sphere,
};
use crate::error::{Error, Result};
use crate::field::{DistanceField, GridField, ShapeField};
use crate::math::Vector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Distance field implied by a sphere set: `min_i(|y - c_i| - r_i)`.
pub fn sphere_set_phi<const D: usize>(spheres: &[Sphere<D>], y: Vector<D>) -> f64 {
    spheres
        .iter()
        .map(|s| (y - s.center).norm() - s.radius)
        .fold(f64::INFINITY, f64::min)
}

/// Mean |proxy phi| over ground-truth surface samples, as a percentage of the
/// scene diagonal. Zero means the proxy surface matches the shape exactly.
pub fn surface_mae<const D: usize>(
    proxy: &ProxySet<D>,
    scene: &ShapeField<D>,
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    if proxy.spheres.is_empty() {
        return Err(Error::EmptyProxy);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = 0.0;
    for _ in 0..n_samples {
        let y = scene.sample_surface(&mut rng).point;
        acc += sphere_set_phi(&proxy.spheres, y).abs();
    }
    Ok(100.0 * acc / n_samples as f64 / scene.diag())
}

/// Surface MAE of the SDF-grid representation, same normalization.
pub fn surface_mae_grid<const D: usize>(
    grid: &GridField<D>,
    scene: &ShapeField<D>,
    n_samples: usize,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = 0.0;
    for _ in 0..n_samples {
        let y = scene.sample_surface(&mut rng).point;
        acc += grid.interpolate(y).abs();
    }
    100.0 * acc / n_samples as f64 / scene.diag()
}

#[derive(Clone, Debug)]
pub struct ParetoRow {
    pub kind: String,
    /// The float budget this row competed under.
    pub budget: usize,
    /// Floats actually used (at most the budget).
    pub floats: usize,
    pub mae_percent: f64,
}

/// Builds all four representations at each float budget and scores them.
///
/// Sphere kinds get `budget / (D+1)` spheres; the uniform baseline searches
/// the largest grid resolution whose kept spheres fit the budget; the SDF
/// grid uses `floor(budget^(1/D))` nodes per axis.
pub fn pareto_report<const D: usize>(
    scene: &ShapeField<D>,
    budgets: &[usize],
    n_mae_samples: usize,
    seed: u64,
) -> Result<Vec<ParetoRow>> {
    let mut rows = Vec::new();
    for &budget in budgets {
        let m = (budget / (D + 1)).max(1);

        let fss_cfg = FssConfig::for_diag(scene.diag(), (8 * m).max(512), m, seed);
        let candidates = sample_medial_candidates(scene, &fss_cfg)?;
        let take = fss_cfg.m_select.min(candidates.len());
        let (medial, _) = furthest_sphere_sampling(
            &candidates,
            &FssConfig {
                m_select: take,
                ..fss_cfg
            },
        )?;
        rows.push(ParetoRow {
            kind: "medial".into(),
            budget,
            floats: medial.memory_floats(),
            mae_percent: surface_mae(&medial, scene, n_mae_samples, seed ^ 1)?,
        });

        let tangent = baseline_tangent(scene, m, seed)?;
        rows.push(ParetoRow {
            kind: "tangent".into(),
            budget,
            floats: tangent.memory_floats(),
            mae_percent: surface_mae(&tangent, scene, n_mae_samples, seed ^ 1)?,
        });

        if let Some(uniform) = best_uniform_under(scene, budget) {
            rows.push(ParetoRow {
                kind: "uniform".into(),
                budget,
                floats: uniform.memory_floats(),
                mae_percent: surface_mae(&uniform, scene, n_mae_samples, seed ^ 1)?,
            });
        }

        let res = (budget as f64).powf(1.0 / D as f64).floor() as usize;
        if res >= 2 {
            let grid = baseline_sdf_grid(scene, res)?;
            rows.push(ParetoRow {
                kind: "sdf_grid".into(),
                budget,
                floats: grid.node_count(),
                mae_percent: surface_mae_grid(&grid, scene, n_mae_samples, seed ^ 1),
            });
        }
    }
    Ok(rows)
}

fn best_uniform_under<const D: usize>(scene: &ShapeField<D>, budget: usize) -> Option<ProxySet<D>> {
    let mut best: Option<ProxySet<D>> = None;
    for res in 1..=128 {
        let set = baseline_uniform(scene, res);
        if set.spheres.is_empty() {
            continue;
        }
        if set.memory_floats() <= budget {
            let better = best
                .as_ref()
                .map(|b| set.memory_floats() > b.memory_floats())
                .unwrap_or(true);
            if better {
                best = Some(set);
            }
        } else {
            break;
        }
    }
    best
}
