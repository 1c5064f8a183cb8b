//! The training objective: surface/normal reconstruction, the three medial
//! constraints enforced stochastically, the Eikonal term, two regularizers,
//! and the gradient-head consistency term.
//!
//! Input gradients inside the losses are one-sided finite differences of
//! taped forward passes, so the whole objective stays exactly differentiable
//! with respect to the parameters; nothing here needs nested derivatives.

use super::net::{
    push_params, tape_head, tape_trunk, MlpParams, TapeParams, HEAD_GRAD, HEAD_MF_MINUS,
    HEAD_MF_PLUS, HEAD_PHI,
};
use super::sample::SampleBatch;
use super::tape::{Tape, Var};
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::field::{DistanceField, ShapeField};
use crate::math::Vector;

pub const LOSS_NAMES: [&str; 9] = [
    "surface",
    "normal",
    "maximal",
    "inscribed",
    "orthogonal",
    "eikonal",
    "minsurface",
    "curvature",
    "gradient",
];

/// Weighted combination; the curvature weight is scheduled separately as
/// `10^-(1 + 4t)` over training progress `t` in [0, 1].
#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
pub struct LossWeights {
    pub surface: f64,
    pub normal: f64,
    pub maximal: f64,
    pub inscribed: f64,
    pub orthogonal: f64,
    pub eikonal: f64,
    pub minsurface: f64,
    pub gradient: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            surface: 1e4,
            normal: 10.0,
            maximal: 1e2,
            inscribed: 5e2,
            orthogonal: 3e-2,
            eikonal: 1.0,
            minsurface: 1.0,
            gradient: 1.0,
        }
    }
}

impl LossWeights {
    /// Drops the medial-specific terms, leaving a plain neural SDF objective.
    pub fn ablate_medial(mut self) -> Self {
        self.maximal = 0.0;
        self.inscribed = 0.0;
        self.orthogonal = 0.0;
        self
    }
}

pub fn curvature_weight(progress: f64) -> f64 {
    10f64.powf(-(1.0 + 4.0 * progress.clamp(0.0, 1.0)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossTerms {
    pub surface: f64,
    pub normal: f64,
    pub maximal: f64,
    pub inscribed: f64,
    pub orthogonal: f64,
    pub eikonal: f64,
    pub minsurface: f64,
    pub curvature: f64,
    pub gradient: f64,
}

impl LossTerms {
    pub fn as_array(&self) -> [f64; 9] {
        [
            self.surface,
            self.normal,
            self.maximal,
            self.inscribed,
            self.orthogonal,
            self.eikonal,
            self.minsurface,
            self.curvature,
            self.gradient,
        ]
    }

    pub fn weighted_total(&self, w: &LossWeights, curvature_w: f64) -> f64 {
        self.surface * w.surface
            + self.normal * w.normal
            + self.maximal * w.maximal
            + self.inscribed * w.inscribed
            + self.orthogonal * w.orthogonal
            + self.eikonal * w.eikonal
            + self.minsurface * w.minsurface
            + self.curvature * curvature_w
            + self.gradient * w.gradient
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|v| v.is_finite())
    }
}

/// Finite-difference steps used inside the losses.
#[derive(Clone, Copy, Debug)]
pub struct LossGeometry {
    /// One-sided step for input gradients.
    pub fd_step: f64,
    /// Forward step along the gradient for the curvature estimate.
    pub curvature_step: f64,
}

impl LossGeometry {
    pub fn for_diag(diag: f64) -> Self {
        LossGeometry {
            fd_step: 1e-5 * diag,
            curvature_step: 1e-3 * diag,
        }
    }
}

pub struct LossVars {
    pub surface: Var,
    pub normal: Var,
    pub maximal: Var,
    pub inscribed: Var,
    pub orthogonal: Var,
    pub eikonal: Var,
    pub minsurface: Var,
    pub curvature: Var,
    pub gradient: Var,
}

impl LossVars {
    pub fn read(&self, tape: &Tape) -> LossTerms {
        LossTerms {
            surface: tape.value(self.surface).item(),
            normal: tape.value(self.normal).item(),
            maximal: tape.value(self.maximal).item(),
            inscribed: tape.value(self.inscribed).item(),
            orthogonal: tape.value(self.orthogonal).item(),
            eikonal: tape.value(self.eikonal).item(),
            minsurface: tape.value(self.minsurface).item(),
            curvature: tape.value(self.curvature).item(),
            gradient: tape.value(self.gradient).item(),
        }
    }

    /// Weighted scalar total on the tape; zero-weight terms are left out of
    /// the graph so ablated runs skip their backward work.
    pub fn weighted_total(&self, tape: &mut Tape, w: &LossWeights, curvature_w: f64) -> Var {
        let parts = [
            (self.surface, w.surface),
            (self.normal, w.normal),
            (self.maximal, w.maximal),
            (self.inscribed, w.inscribed),
            (self.orthogonal, w.orthogonal),
            (self.eikonal, w.eikonal),
            (self.minsurface, w.minsurface),
            (self.curvature, curvature_w),
            (self.gradient, w.gradient),
        ];
        let mut acc: Option<Var> = None;
        for (term, weight) in parts {
            if weight == 0.0 {
                continue;
            }
            let scaled = tape.scale(term, weight);
            acc = Some(match acc {
                None => scaled,
                Some(prev) => tape.add(prev, scaled),
            });
        }
        acc.expect("at least one loss term has nonzero weight")
    }
}

fn rows_tensor<const D: usize>(points: &[Vector<D>]) -> Tensor {
    let mut t = Tensor::zeros(points.len(), D);
    for (r, p) in points.iter().enumerate() {
        t.data[r * D..(r + 1) * D].copy_from_slice(p.as_slice());
    }
    t
}

/// Records the objective for one batch on `tape` and returns the term
/// handles. `tp` must come from [`push_params`] on the same tape. Terms
/// whose weight in `active` is zero are skipped (their handle is a constant
/// zero), so ablated runs never build the dead subgraphs.
pub fn build_losses<const D: usize>(
    tape: &mut Tape,
    params: &MlpParams,
    tp: &TapeParams,
    scene: &ShapeField<D>,
    batch: &SampleBatch<D>,
    geo: &LossGeometry,
    active: &LossWeights,
) -> Result<LossVars> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    assert_eq!(params.cfg.dim, D);
    let b = batch.volume_points.len();
    let h = geo.fd_step;
    let need_mf_center = active.maximal != 0.0 || active.inscribed != 0.0;
    let need_mf_grad = active.orthogonal != 0.0;

    // Ground-truth lookups at the fixed sample points. `spoke_dir` is the
    // supervised field's `grad |phi| = sign(phi) grad phi`; rows where the
    // gradient is undefined (medial loci) carry zeros and a cleared validity
    // mask.
    let mut abs_phi_gt = Tensor::zeros(b, 1);
    let mut mask_pos = Tensor::zeros(b, 1);
    let mut mask_neg = Tensor::zeros(b, 1);
    let mut n_gt = Tensor::zeros(b, D);
    let mut spoke_dir = Tensor::zeros(b, D);
    let mut spoke_valid = Tensor::zeros(b, 1);
    for (r, x) in batch.volume_points.iter().enumerate() {
        let phi = scene.phi(*x);
        abs_phi_gt.data[r] = phi.abs();
        if phi > 0.0 {
            mask_pos.data[r] = 1.0;
        } else {
            mask_neg.data[r] = 1.0;
        }
        if let Ok(g) = scene.grad(*x) {
            n_gt.data[r * D..(r + 1) * D].copy_from_slice(g.as_slice());
            let dir = g * phi.signum();
            spoke_dir.data[r * D..(r + 1) * D].copy_from_slice(dir.as_slice());
            spoke_valid.data[r] = 1.0;
        }
    }
    let abs_phi_gt = tape.constant(abs_phi_gt);
    let mask_pos = tape.constant(mask_pos);
    let mask_neg = tape.constant(mask_neg);
    let n_gt = tape.constant(n_gt);
    let spoke_dir = tape.constant(spoke_dir);
    let spoke_valid = tape.constant(spoke_valid);

    // Center pass over the volume batch.
    let x_v = tape.constant(rows_tensor(&batch.volume_points));
    let trunk_v = tape_trunk(tape, params, tp, x_v);
    let phi_v = tape_head(tape, params, tp, trunk_v, HEAD_PHI);
    let gh_v = tape_head(tape, params, tp, trunk_v, HEAD_GRAD);
    let side = |tape: &mut Tape, plus: Var, minus: Var| {
        let p = tape.mul(plus, mask_pos);
        let m = tape.mul(minus, mask_neg);
        tape.add(p, m)
    };
    let mf_sel_v = if need_mf_center || need_mf_grad {
        let mfp_v = tape_head(tape, params, tp, trunk_v, HEAD_MF_PLUS);
        let mfm_v = tape_head(tape, params, tp, trunk_v, HEAD_MF_MINUS);
        Some(side(tape, mfp_v, mfm_v))
    } else {
        None
    };

    // Shift constants reused by every perturbed pass.
    let shifts: Vec<Var> = (0..D)
        .map(|a| {
            let mut s = Tensor::zeros(b, D);
            for r in 0..b {
                s.data[r * D + a] = h;
            }
            tape.constant(s)
        })
        .collect();

    // One-sided FD gradients of phi and of the side-selected MF head.
    let mut g_cols = Vec::with_capacity(D);
    let mut gmf_cols = Vec::with_capacity(D);
    for a in 0..D {
        let x_p = tape.add(x_v, shifts[a]);
        let trunk_p = tape_trunk(tape, params, tp, x_p);
        let phi_p = tape_head(tape, params, tp, trunk_p, HEAD_PHI);
        let dphi = tape.sub(phi_p, phi_v);
        g_cols.push(tape.scale(dphi, 1.0 / h));
        if need_mf_grad {
            let mfp_p = tape_head(tape, params, tp, trunk_p, HEAD_MF_PLUS);
            let mfm_p = tape_head(tape, params, tp, trunk_p, HEAD_MF_MINUS);
            let mf_sel_p = side(tape, mfp_p, mfm_p);
            let dmf = tape.sub(mf_sel_p, mf_sel_v.expect("center MF built"));
            gmf_cols.push(tape.scale(dmf, 1.0 / h));
        }
    }
    let g = tape.concat_cols(&g_cols);

    let zero = tape.constant(Tensor::scalar(0.0));

    // Eikonal: (|grad phi| - 1)^2.
    let g_norm = tape.row_norm(g);
    let eik_res = tape.add_scalar(g_norm, -1.0);
    let eik_sq = tape.square(eik_res);
    let eikonal = tape.mean_all(eik_sq);

    // Gradient-head consistency: |head - grad phi|^2.
    let gdiff = tape.sub(gh_v, g);
    let gdiff2 = tape.square(gdiff);
    let gsum = tape.row_sum(gdiff2);
    let gradient = tape.mean_all(gsum);

    // Orthogonality: (grad MF . grad_GT phi)^2.
    let orthogonal = if need_mf_grad {
        let g_mf = tape.concat_cols(&gmf_cols);
        let orth_dot = tape.row_dot(g_mf, n_gt);
        let orth_sq = tape.square(orth_dot);
        tape.mean_all(orth_sq)
    } else {
        zero
    };

    // Maximality: max(|phi_GT| - MF, 0)^2.
    let maximal = if active.maximal != 0.0 {
        let max_gap = tape.sub(abs_phi_gt, mf_sel_v.expect("center MF built"));
        let max_act = tape.relu(max_gap);
        let max_sq = tape.square(max_act);
        tape.mean_all(max_sq)
    } else {
        zero
    };

    // Thin-surface regularizer: exp(-100 |phi|).
    let abs_phi_v = tape.abs(phi_v);
    let ms_exp = tape.scale(abs_phi_v, -100.0);
    let ms = tape.exp(ms_exp);
    let minsurface = tape.mean_all(ms);

    // Curvature: |(grad phi(x + t g) - grad phi(x)) / t|_1, one forward step.
    let t_step = geo.curvature_step;
    let offset = tape.scale(g, t_step);
    let x_c = tape.add(x_v, offset);
    let trunk_c = tape_trunk(tape, params, tp, x_c);
    let phi_c = tape_head(tape, params, tp, trunk_c, HEAD_PHI);
    let mut g2_cols = Vec::with_capacity(D);
    for a in 0..D {
        let x_cp = tape.add(x_c, shifts[a]);
        let trunk_cp = tape_trunk(tape, params, tp, x_cp);
        let phi_cp = tape_head(tape, params, tp, trunk_cp, HEAD_PHI);
        let d = tape.sub(phi_cp, phi_c);
        g2_cols.push(tape.scale(d, 1.0 / h));
    }
    let g2 = tape.concat_cols(&g2_cols);
    let curv_diff = tape.sub(g2, g);
    let curv_rate = tape.scale(curv_diff, 1.0 / t_step);
    let curv_abs = tape.abs(curv_rate);
    let curv_sum = tape.row_sum(curv_abs);
    let curvature = tape.mean_all(curv_sum);

    // Inscription: |phi_GT(project(x))| must equal the claimed MF. Only MF
    // is network-derived; the spoke direction and |phi(x)| come from the
    // supervised field. (A self-referential |phi| or direction lets the
    // residual couple back into the phi head: any direction error biases the
    // target low, and the strongly weighted term then drags MF onto its
    // |phi| floor and distorts the phi slope.)
    let inscribed = if active.inscribed != 0.0 {
        let mf_sel_v = mf_sel_v.expect("center MF built");
        let delta = tape.sub(mf_sel_v, abs_phi_gt);
        let spoke = tape.mul_row(spoke_dir, delta);
        let proj = tape.add(x_v, spoke);
        let (ext_val, ext_grad) = {
            let pv = tape.value(proj);
            let mut vals = Tensor::zeros(b, 1);
            let mut grads = Tensor::zeros(b, D);
            for r in 0..b {
                let p = Vector::<D>::from_slice(pv.row(r));
                vals.data[r] = scene.phi(p);
                if let Ok(gr) = scene.grad(p) {
                    grads.data[r * D..(r + 1) * D].copy_from_slice(gr.as_slice());
                }
            }
            (vals, grads)
        };
        let phi_gt_proj = tape.external(proj, ext_val, ext_grad);
        let target = tape.abs(phi_gt_proj);
        let ins_res = tape.sub(target, mf_sel_v);
        let ins_masked = tape.mul(ins_res, spoke_valid);
        let ins_sq = tape.square(ins_masked);
        tape.mean_all(ins_sq)
    } else {
        zero
    };

    // Surface batch: phi at the surface and the gradient head against the
    // ground-truth normals.
    let x_s = tape.constant(rows_tensor(&batch.surface_points));
    let n_s = tape.constant(rows_tensor(&batch.surface_normals));
    let trunk_s = tape_trunk(tape, params, tp, x_s);
    let phi_s = tape_head(tape, params, tp, trunk_s, HEAD_PHI);
    let gh_s = tape_head(tape, params, tp, trunk_s, HEAD_GRAD);
    let surf_sq = tape.square(phi_s);
    let surface = tape.mean_all(surf_sq);
    let ndiff = tape.sub(gh_s, n_s);
    let ndiff2 = tape.square(ndiff);
    let nsum = tape.row_sum(ndiff2);
    let normal = tape.mean_all(nsum);

    Ok(LossVars {
        surface,
        normal,
        maximal,
        inscribed,
        orthogonal,
        eikonal,
        minsurface,
        curvature,
        gradient,
    })
}

/// Evaluates every loss term for a batch without differentiating.
pub fn losses<const D: usize>(
    params: &MlpParams,
    scene: &ShapeField<D>,
    batch: &SampleBatch<D>,
    geo: &LossGeometry,
) -> Result<LossTerms> {
    let mut tape = Tape::new();
    let tp = push_params(&mut tape, params);
    let vars = build_losses(
        &mut tape,
        params,
        &tp,
        scene,
        batch,
        geo,
        &LossWeights::default(),
    )?;
    Ok(vars.read(&tape))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{builtin_scene, Scene};
    use crate::math::Vec2;
    use crate::neural::net::{init_network, NetConfig};

    fn disk() -> ShapeField<2> {
        match builtin_scene("disk").unwrap() {
            Scene::D2(f) => f,
            _ => unreachable!(),
        }
    }

    fn tiny_params(seed: u64) -> MlpParams {
        init_network(
            seed,
            &NetConfig {
                dim: 2,
                fourier_bands: 2,
                fourier_alpha: 1e-3,
                fourier_freq_scale: 1.5,
                backbone_layers: 2,
                backbone_width: 6,
                head_width: 5,
                softplus_beta: 100.0,
                geo_radius: 2.0,
            },
        )
    }

    fn small_batch(scene: &ShapeField<2>) -> SampleBatch<2> {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        super::super::sample::sample_batch(
            scene,
            16,
            0.5 * crate::field::DistanceField::diag(scene),
            &mut rng,
        )
    }

    #[test]
    fn empty_batch_is_an_error() {
        let scene = disk();
        let params = tiny_params(1);
        let empty = SampleBatch::<2> {
            surface_points: vec![],
            surface_normals: vec![],
            volume_points: vec![],
        };
        assert!(matches!(
            losses(&params, &scene, &empty, &LossGeometry::for_diag(1.0)),
            Err(Error::EmptyBatch)
        ));
    }

    #[test]
    fn all_terms_nonnegative_and_finite() {
        let scene = disk();
        let params = tiny_params(3);
        let batch = small_batch(&scene);
        let geo = LossGeometry::for_diag(crate::field::DistanceField::diag(&scene));
        let t = losses(&params, &scene, &batch, &geo).unwrap();
        for (name, v) in LOSS_NAMES.iter().zip(t.as_array()) {
            assert!(v.is_finite() && v >= 0.0, "{name} = {v}");
        }
    }

    #[test]
    fn curvature_schedule_endpoints() {
        assert!((curvature_weight(0.0) - 1e-1).abs() < 1e-15);
        assert!((curvature_weight(1.0) - 1e-5).abs() < 1e-18);
    }

    #[test]
    fn zero_phi_on_surface_kills_surface_loss() {
        let scene = disk();
        let mut params = tiny_params(5);
        // Zero the phi head so it outputs exactly 0 everywhere.
        for l in &mut params.heads[HEAD_PHI] {
            l.w.fill(0.0);
            l.b.fill(0.0);
        }
        let batch = small_batch(&scene);
        let geo = LossGeometry::for_diag(crate::field::DistanceField::diag(&scene));
        let t = losses(&params, &scene, &batch, &geo).unwrap();
        assert_eq!(t.surface, 0.0);
    }

    /// Every loss term's parameter gradient against central differences in
    /// parameter space, on a tiny network. Exercises the matmul backward, the
    /// FD-gradient chains, the input-dependent curvature points and the
    /// ground-truth external hook.
    #[test]
    fn parameter_gradients_match_fd() {
        let scene = disk();
        let params0 = tiny_params(7);
        let batch = SampleBatch::<2> {
            surface_points: vec![Vec2::new(1.0, 0.0), Vec2::new(0.0, -1.0)],
            surface_normals: vec![Vec2::new(1.0, 0.0), Vec2::new(0.0, -1.0)],
            volume_points: vec![Vec2::new(0.45, 0.2), Vec2::new(1.2, -0.4)],
        };
        let geo = LossGeometry {
            fd_step: 1e-5,
            curvature_step: 1e-3,
        };

        let term_value = |params: &MlpParams, term: usize| -> f64 {
            let t = losses(params, &scene, &batch, &geo).unwrap();
            t.as_array()[term]
        };

        for term in 0..9 {
            // Analytic gradient by backward from this term alone.
            let mut tape = Tape::new();
            let tp = push_params(&mut tape, &params0);
            let vars = build_losses(
                &mut tape,
                &params0,
                &tp,
                &scene,
                &batch,
                &geo,
                &LossWeights::default(),
            )
            .unwrap();
            let root = [
                vars.surface,
                vars.normal,
                vars.maximal,
                vars.inscribed,
                vars.orthogonal,
                vars.eikonal,
                vars.minsurface,
                vars.curvature,
                vars.gradient,
            ][term];
            let mut grads = params0.zero_grads();
            tape.backward(root, &mut grads);

            // FD in parameter space, starting at h = 1e-5. The loss embeds
            // difference quotients (input step 1e-5, curvature step 1e-3), so
            // its evaluated value carries f64 rounding noise amplified by the
            // reciprocal of those steps; the theta difference divides that
            // noise by 2h again. The comparison subtracts the resulting
            // measurement floor and escalates h where it dominates.
            let loss_scale = term_value(&params0, term).abs().max(1.0);
            let amplification = match LOSS_NAMES[term] {
                "curvature" => 1.0 / (geo.fd_step * geo.curvature_step),
                "eikonal" | "gradient" | "orthogonal" | "inscribed" => 1.0 / geo.fd_step,
                _ => 1e2,
            };
            let mut worst: (f64, f64, f64) = (0.0, 0.0, 0.0);
            let n_tensors = grads.len();
            for ti in 0..n_tensors {
                for i in 0..grads[ti].data.len() {
                    let a = grads[ti].data[i];
                    let mut best: Option<(f64, f64)> = None;
                    for h in [1e-5, 1e-4, 1e-3] {
                        let noise = 4.0 * f64::EPSILON * loss_scale * amplification / (2.0 * h);
                        let mut hi = params0.clone();
                        hi.param_tensors_mut()[ti].data[i] += h;
                        let mut lo = params0.clone();
                        lo.param_tensors_mut()[ti].data[i] -= h;
                        let fd = (term_value(&hi, term) - term_value(&lo, term)) / (2.0 * h);
                        let err =
                            ((a - fd).abs() - noise).max(0.0) / a.abs().max(fd.abs()).max(1e-9);
                        if best.map(|(e, _)| err < e).unwrap_or(true) {
                            best = Some((err, fd));
                        }
                        if err < 1e-3 {
                            break;
                        }
                    }
                    let (err, fd) = best.expect("at least one step evaluated");
                    if err > worst.0 {
                        worst = (err, a, fd);
                    }
                }
            }
            assert!(
                worst.0 < 1e-3,
                "{}: rel err {:.2e} (analytic {:.6e} vs fd {:.6e})",
                LOSS_NAMES[term],
                worst.0,
                worst.1,
                worst.2
            );
        }
    }

    /// The spec's hand-built fixture: a one-hidden-unit path evaluated on
    /// three fixed points, every term recomputed with independent scalar
    /// arithmetic.
    #[test]
    fn tiny_network_terms_match_hand_computation() {
        let scene = disk();
        let cfg = NetConfig {
            dim: 2,
            fourier_bands: 1,
            fourier_alpha: 1e-3,
            fourier_freq_scale: 1.0,
            backbone_layers: 1,
            backbone_width: 1,
            head_width: 1,
            softplus_beta: 100.0,
            geo_radius: 1.0,
        };
        let params = init_network(2, &cfg);
        let batch = SampleBatch::<2> {
            surface_points: vec![
                Vec2::new(1.0, 0.0),
                Vec2::new(0.0, 1.0),
                Vec2::new(-1.0, 0.0),
            ],
            surface_normals: vec![
                Vec2::new(1.0, 0.0),
                Vec2::new(0.0, 1.0),
                Vec2::new(-1.0, 0.0),
            ],
            volume_points: vec![
                Vec2::new(0.4, 0.1),
                Vec2::new(1.3, -0.2),
                Vec2::new(-0.5, 0.6),
            ],
        };
        let geo = LossGeometry {
            fd_step: 1e-5,
            curvature_step: 1e-3,
        };
        let got = losses(&params, &scene, &batch, &geo).unwrap();

        // Independent scalar evaluation path.
        let forward = |x: &[f64]| params.forward(x);
        let fd_grad = |head: &dyn Fn(&[f64]) -> f64, x: &[f64]| -> Vec<f64> {
            (0..2)
                .map(|a| {
                    let mut p = x.to_vec();
                    p[a] += geo.fd_step;
                    (head(&p) - head(x)) / geo.fd_step
                })
                .collect()
        };
        let phi_of = |x: &[f64]| forward(x).phi;
        let mf_of = |x: &[f64], pos: bool| {
            let o = forward(x);
            if pos {
                o.mf_plus
            } else {
                o.mf_minus
            }
        };

        let mut surface = 0.0;
        let mut normal = 0.0;
        for (p, n) in batch.surface_points.iter().zip(&batch.surface_normals) {
            let o = forward(p.as_slice());
            surface += o.phi * o.phi;
            normal += (0..2).map(|a| (o.grad[a] - n[a]).powi(2)).sum::<f64>();
        }
        surface /= 3.0;
        normal /= 3.0;
        assert!((got.surface - surface).abs() < 1e-12 * surface.max(1.0));
        assert!((got.normal - normal).abs() < 1e-12 * normal.max(1.0));

        let mut maximal = 0.0;
        let mut eikonal = 0.0;
        let mut gradient = 0.0;
        let mut orthogonal = 0.0;
        let mut minsurface = 0.0;
        let mut curvature = 0.0;
        let mut inscribed = 0.0;
        for x in &batch.volume_points {
            let phi_gt = scene.phi(*x);
            let pos = phi_gt > 0.0;
            let o = forward(x.as_slice());
            let mf = if pos { o.mf_plus } else { o.mf_minus };
            maximal += (phi_gt.abs() - mf).max(0.0).powi(2);
            let g = fd_grad(&phi_of, x.as_slice());
            // Same zero-gradient floor as the tape's row_norm.
            let gn = (g[0] * g[0] + g[1] * g[1]).sqrt().max(1e-30);
            eikonal += (gn - 1.0).powi(2);
            gradient += (0..2).map(|a| (o.grad[a] - g[a]).powi(2)).sum::<f64>();
            let gmf = fd_grad(&|p: &[f64]| mf_of(p, pos), x.as_slice());
            let ngt = scene.grad(*x).unwrap();
            orthogonal += (gmf[0] * ngt[0] + gmf[1] * ngt[1]).powi(2);
            minsurface += (-100.0 * o.phi.abs()).exp();
            // Curvature by the same one-sided stencils.
            let x2 = [
                x[0] + geo.curvature_step * g[0],
                x[1] + geo.curvature_step * g[1],
            ];
            let g2 = fd_grad(&phi_of, &x2);
            curvature += ((g2[0] - g[0]).abs() + (g2[1] - g[1]).abs()) / geo.curvature_step;
            // Inscription: supervised spoke direction, network MF.
            let sign = if pos { 1.0 } else { -1.0 };
            let delta = mf - phi_gt.abs();
            if let Ok(ngt) = scene.grad(*x) {
                let proj = Vec2::new(x[0] + sign * ngt[0] * delta, x[1] + sign * ngt[1] * delta);
                inscribed += (scene.phi(proj).abs() - mf).powi(2);
            }
        }
        maximal /= 3.0;
        eikonal /= 3.0;
        gradient /= 3.0;
        orthogonal /= 3.0;
        minsurface /= 3.0;
        curvature /= 3.0;
        inscribed /= 3.0;

        let close = |a: f64, b: f64, name: &str| {
            assert!(
                (a - b).abs() <= 1e-9 * b.abs().max(1e-6),
                "{name}: tape {a} hand {b}"
            );
        };
        close(got.maximal, maximal, "maximal");
        close(got.eikonal, eikonal, "eikonal");
        close(got.gradient, gradient, "gradient");
        close(got.orthogonal, orthogonal, "orthogonal");
        close(got.minsurface, minsurface, "minsurface");
        close(got.curvature, curvature, "curvature");
        close(got.inscribed, inscribed, "inscribed");
    }
}
