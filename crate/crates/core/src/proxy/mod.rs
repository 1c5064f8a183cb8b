//! Sphere-set collision proxies.
//!
//! Medial candidates come from interior points pushed onto the medial axis
//! by the O(1) medial projection; furthest sphere sampling then greedily
//! picks spheres maximizing the minimum normalized separation
//! `|x_n - x_m| / (r_n + r_m + eps)`, favoring large, non-overlapping,
//! maximally inscribed spheres.

mod baseline;
mod eval;

pub use baseline::{baseline_sdf_grid, baseline_tangent, baseline_uniform};
pub use eval::{pareto_report, sphere_set_phi, surface_mae, surface_mae_grid, ParetoRow};

use crate::error::{Error, Result};
use crate::field::DistanceField;
use crate::math::Vector;
use crate::medial::{mf_oracle, OracleConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Sphere<const D: usize> {
    pub center: Vector<D>,
    pub radius: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProxyKind {
    Medial,
    Tangent,
    Uniform,
}

impl std::fmt::Display for ProxyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProxyKind::Medial => write!(f, "medial"),
            ProxyKind::Tangent => write!(f, "tangent"),
            ProxyKind::Uniform => write!(f, "uniform"),
        }
    }
}

/// A sphere-set proxy; memory cost is `(D + 1)` floats per sphere.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProxySet<const D: usize> {
    pub kind: ProxyKind,
    pub seed: u64,
    pub spheres: Vec<Sphere<D>>,
}

impl<const D: usize> ProxySet<D> {
    pub fn memory_floats(&self) -> usize {
        self.spheres.len() * (D + 1)
    }

    pub fn save_json(&self, path: &Path, manifest: Option<&str>) -> Result<()> {
        #[derive(Serialize)]
        struct Doc<'a, const D: usize> {
            kind: ProxyKind,
            d: usize,
            seed: u64,
            #[serde(skip_serializing_if = "Option::is_none")]
            manifest: Option<&'a str>,
            spheres: &'a [Sphere<D>],
        }
        let doc = Doc {
            kind: self.kind,
            d: D,
            seed: self.seed,
            manifest,
            spheres: &self.spheres,
        };
        let text = serde_json::to_string_pretty(&doc).map_err(|e| Error::Format(e.to_string()))?;
        std::fs::write(path, text)?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct FssConfig {
    /// Interior candidate points to draw.
    pub n_candidates: usize,
    /// Spheres to keep.
    pub m_select: usize,
    /// Separation offset; keeps tiny, geometrically irrelevant spheres from
    /// dominating the normalized separation.
    pub epsilon: f64,
    pub seed: u64,
}

impl FssConfig {
    /// `epsilon = 0.05 * diag` absent any better guidance.
    pub fn for_diag(diag: f64, n_candidates: usize, m_select: usize, seed: u64) -> Self {
        FssConfig {
            n_candidates,
            m_select,
            epsilon: 0.05 * diag,
            seed,
        }
    }
}

/// Draws interior-uniform points and pushes each onto the medial axis,
/// yielding maximally inscribed candidate spheres. Near-duplicate centers
/// (within `1e-5 * diag`) are deduplicated; exterior spokes are excluded by
/// construction since sampling is interior-only.
pub fn sample_medial_candidates<const D: usize>(
    field: &(impl DistanceField<D> + ?Sized),
    cfg: &FssConfig,
) -> Result<Vec<Sphere<D>>> {
    // Tight oracle tolerance: candidate radii feed MAE numbers directly.
    let oracle_cfg = OracleConfig::for_diag(field.diag()).with_tol(1e-9 * field.diag());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let bounds = field.bounds();
    let mut mapped: Vec<Sphere<D>> = Vec::with_capacity(cfg.n_candidates);
    let mut interior: u64 = 0;
    let mut trials: u64 = 0;
    while interior < cfg.n_candidates as u64 {
        trials += 1;
        if trials >= 1_000_000 && (interior as f64) < 0.001 * trials as f64 {
            return Err(Error::RejectionStarved);
        }
        let x = bounds.sample_uniform(&mut rng);
        if field.phi(x) >= -oracle_cfg.tol {
            continue;
        }
        interior += 1;
        let Ok(sample) = mf_oracle(field, &oracle_cfg, x) else {
            continue;
        };
        if sample.clamped {
            continue;
        }
        mapped.push(Sphere {
            center: sample.medial_center,
            radius: sample.radius,
        });
    }
    // Interior points sharing a medial sphere map to one candidate.
    let dedup = 1e-5 * field.diag();
    let mut accepted: Vec<Sphere<D>> = Vec::with_capacity(mapped.len());
    for s in mapped {
        if !accepted
            .iter()
            .any(|a| (a.center - s.center).norm() < dedup)
        {
            accepted.push(s);
        }
    }
    Ok(accepted)
}

/// Greedy furthest sphere sampling.
///
/// The seed sphere is the largest radius (ties to the lowest index); each
/// following pick maximizes the minimum normalized separation to the selected
/// set. Returns the proxy set and the separation achieved at each pick, which
/// is non-increasing.
pub fn furthest_sphere_sampling<const D: usize>(
    candidates: &[Sphere<D>],
    cfg: &FssConfig,
) -> Result<(ProxySet<D>, Vec<f64>)> {
    if candidates.is_empty() {
        return Err(Error::NotEnoughCandidates {
            have: 0,
            want: cfg.m_select,
        });
    }
    if cfg.m_select > candidates.len() {
        return Err(Error::NotEnoughCandidates {
            have: candidates.len(),
            want: cfg.m_select,
        });
    }
    let separation = |a: &Sphere<D>, b: &Sphere<D>| {
        (a.center - b.center).norm() / (a.radius + b.radius + cfg.epsilon)
    };

    let mut seed_idx = 0;
    for (i, c) in candidates.iter().enumerate() {
        if c.radius > candidates[seed_idx].radius {
            seed_idx = i;
        }
    }

    let mut selected = Vec::with_capacity(cfg.m_select);
    let mut achieved = Vec::with_capacity(cfg.m_select.saturating_sub(1));
    let mut min_sep: Vec<f64> = candidates
        .iter()
        .map(|c| separation(c, &candidates[seed_idx]))
        .collect();
    let mut taken = vec![false; candidates.len()];
    taken[seed_idx] = true;
    selected.push(candidates[seed_idx]);

    while selected.len() < cfg.m_select {
        let mut best: Option<usize> = None;
        for i in 0..candidates.len() {
            if taken[i] {
                continue;
            }
            match best {
                None => best = Some(i),
                Some(b) if min_sep[i] > min_sep[b] => best = Some(i),
                _ => {}
            }
        }
        let pick = best.expect("m_select <= candidates");
        taken[pick] = true;
        achieved.push(min_sep[pick]);
        selected.push(candidates[pick]);
        for i in 0..candidates.len() {
            if !taken[i] {
                min_sep[i] = min_sep[i].min(separation(&candidates[i], &candidates[pick]));
            }
        }
    }

    Ok((
        ProxySet {
            kind: ProxyKind::Medial,
            seed: cfg.seed,
            spheres: selected,
        },
        achieved,
    ))
}

/// Interior-uniform points for the tangent and uniform baselines.
pub(crate) fn interior_points<const D: usize>(
    field: &(impl DistanceField<D> + ?Sized),
    n: usize,
    rng: &mut impl Rng,
) -> Result<Vec<Vector<D>>> {
    let bounds = field.bounds();
    let mut out = Vec::with_capacity(n);
    let mut trials: u64 = 0;
    while out.len() < n {
        trials += 1;
        if trials >= 1_000_000 && (out.len() as f64) < 0.001 * trials as f64 {
            return Err(Error::RejectionStarved);
        }
        let x = bounds.sample_uniform(rng);
        if field.phi(x) < 0.0 {
            out.push(x);
        }
    }
    Ok(out)
}
