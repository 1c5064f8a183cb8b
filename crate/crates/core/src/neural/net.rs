//! The four-headed field network.
//!
//! A shared backbone embeds the (Fourier-encoded) coordinate; four dedicated
//! heads decode it into `phi`, `MF+`, `MF-` and `grad phi`. The medial field
//! jumps across the surface, so the two MF heads model the interior and
//! exterior separately and the sign of `phi` picks the side at query time.

use super::tape::{sigmoid, softplus, Tape, Var};
use super::tensor::Tensor;
use crate::math::standard_normal;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const HEAD_PHI: usize = 0;
pub const HEAD_MF_PLUS: usize = 1;
pub const HEAD_MF_MINUS: usize = 2;
pub const HEAD_GRAD: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NetConfig {
    pub dim: usize,
    pub fourier_bands: usize,
    /// Fourier channel weighting `w_i = alpha * |f_i|`, keeping the encoding
    /// small at init so the spherical bias of the geometric initialization
    /// survives.
    pub fourier_alpha: f64,
    /// Stddev of the random Fourier frequencies (radians per scene unit).
    pub fourier_freq_scale: f64,
    pub backbone_layers: usize,
    pub backbone_width: usize,
    pub head_width: usize,
    pub softplus_beta: f64,
    /// Radius of the initial sphere: `phi_init(x) ~ |x| - geo_radius`.
    pub geo_radius: f64,
}

impl NetConfig {
    /// Reference architecture scaled to a scene: 64 bands, 6 backbone
    /// layers, 64-wide heads.
    pub fn for_scene(dim: usize, diag: f64) -> Self {
        NetConfig {
            dim,
            fourier_bands: 64,
            fourier_alpha: 1e-3,
            fourier_freq_scale: 16.0 / diag,
            backbone_layers: 6,
            backbone_width: 64,
            head_width: 64,
            softplus_beta: 100.0,
            geo_radius: 0.5 * diag,
        }
    }

    pub fn feature_dim(&self) -> usize {
        self.dim + 2 * self.fourier_bands
    }

    pub fn head_out_dim(&self, head: usize) -> usize {
        if head == HEAD_GRAD {
            self.dim
        } else {
            1
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Linear {
    /// `[in x out]`.
    pub w: Tensor,
    /// `[1 x out]`.
    pub b: Tensor,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MlpParams {
    pub cfg: NetConfig,
    pub seed: u64,
    /// Fixed random frequencies, `[bands x dim]`; not trained.
    pub fourier: Tensor,
    /// Per-band channel weights `alpha * |f_i|`.
    pub fourier_weights: Vec<f64>,
    pub backbone: Vec<Linear>,
    /// `heads[HEAD_*]`: two hidden layers plus a linear output each.
    pub heads: Vec<Vec<Linear>>,
}

/// One full forward evaluation at a point.
#[derive(Clone, Debug)]
pub struct HeadOut {
    pub phi: f64,
    pub mf_plus: f64,
    pub mf_minus: f64,
    pub grad: Vec<f64>,
}

impl HeadOut {
    /// The side-selection rule: `MF+` outside (`phi > 0`), `MF-` otherwise.
    pub fn mf_selected(&self) -> f64 {
        if self.phi > 0.0 {
            self.mf_plus
        } else {
            self.mf_minus
        }
    }
}

/// Deterministic geometric-flavored initialization.
///
/// Hidden weights are zero-mean normals with He-style variance; the first
/// layer uses variance `2/dim` so the raw coordinate channels carry the same
/// signal as in a plain coordinate MLP (the Fourier channels are tiny by the
/// `alpha` weighting). The phi head's output layer is the constant positive
/// row with bias `-geo_radius`, which makes the initial field approximately
/// `|x| - geo_radius`: a sphere.
pub fn init_network(seed: u64, cfg: &NetConfig) -> MlpParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = move |std: f64| -> f64 { standard_normal(&mut rng) * std };

    let mut fourier = Tensor::zeros(cfg.fourier_bands, cfg.dim);
    for v in fourier.data.iter_mut() {
        *v = normal(cfg.fourier_freq_scale);
    }
    let fourier_weights: Vec<f64> = (0..cfg.fourier_bands)
        .map(|i| {
            let norm: f64 = fourier.row(i).iter().map(|x| x * x).sum::<f64>().sqrt();
            cfg.fourier_alpha * norm
        })
        .collect();

    let mut linear = |fan_in: usize, out: usize, std: f64| -> Linear {
        let mut w = Tensor::zeros(fan_in, out);
        for v in w.data.iter_mut() {
            *v = normal(std);
        }
        Linear {
            w,
            b: Tensor::zeros(1, out),
        }
    };

    let w = cfg.backbone_width;
    let mut backbone = Vec::with_capacity(cfg.backbone_layers);
    backbone.push(linear(cfg.feature_dim(), w, (2.0 / cfg.dim as f64).sqrt()));
    for _ in 1..cfg.backbone_layers {
        backbone.push(linear(w, w, (2.0 / w as f64).sqrt()));
    }

    let h = cfg.head_width;
    let hidden_std = (2.0 / w as f64).sqrt();
    let inner_std = (2.0 / h as f64).sqrt();
    let mut heads = Vec::with_capacity(4);
    for head in 0..4 {
        let mut layers = vec![linear(w, h, hidden_std), linear(h, h, inner_std)];
        let out = cfg.head_out_dim(head);
        let final_layer = match head {
            HEAD_PHI => {
                let mut l = Linear {
                    w: Tensor::zeros(h, 1),
                    b: Tensor::zeros(1, 1),
                };
                l.w.fill((std::f64::consts::PI / h as f64).sqrt());
                l.b.data[0] = -cfg.geo_radius;
                l
            }
            HEAD_GRAD => linear(h, out, inner_std * 0.1),
            _ => {
                // MF heads start at a scene-scaled positive thickness; the
                // constraint losses then only have to shape the field, not
                // lift it from zero.
                let mut l = linear(h, out, inner_std * 0.05);
                l.b.data[0] = 0.5 * cfg.geo_radius;
                l
            }
        };
        layers.push(final_layer);
        heads.push(layers);
    }

    MlpParams {
        cfg: *cfg,
        seed,
        fourier,
        fourier_weights,
        backbone,
        heads,
    }
}

impl MlpParams {
    /// Learnable tensors in the canonical flatten order (backbone layers then
    /// heads, weight before bias). Checkpoints and gradient slots share it.
    pub fn param_tensors(&self) -> Vec<&Tensor> {
        let mut out = Vec::new();
        for l in &self.backbone {
            out.push(&l.w);
            out.push(&l.b);
        }
        for head in &self.heads {
            for l in head {
                out.push(&l.w);
                out.push(&l.b);
            }
        }
        out
    }

    pub fn param_tensors_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = Vec::new();
        for l in &mut self.backbone {
            out.push(&mut l.w);
            out.push(&mut l.b);
        }
        for head in &mut self.heads {
            for l in head {
                out.push(&mut l.w);
                out.push(&mut l.b);
            }
        }
        out
    }

    pub fn zero_grads(&self) -> Vec<Tensor> {
        self.param_tensors()
            .iter()
            .map(|t| Tensor::zeros(t.rows, t.cols))
            .collect()
    }

    /// Input features: `[x, w_i sin(f_i . x), w_i cos(f_i . x)]`.
    pub fn features(&self, x: &[f64]) -> Vec<f64> {
        let cfg = &self.cfg;
        let mut out = Vec::with_capacity(cfg.feature_dim());
        out.extend_from_slice(x);
        // Layout: [x, sin block, cos block].
        let mut coss = Vec::with_capacity(cfg.fourier_bands);
        for i in 0..cfg.fourier_bands {
            let z: f64 = self.fourier.row(i).iter().zip(x).map(|(f, v)| f * v).sum();
            let (s, c) = z.sin_cos();
            out.push(self.fourier_weights[i] * s);
            coss.push(self.fourier_weights[i] * c);
        }
        out.extend(coss);
        out
    }

    fn linear_into(l: &Linear, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend_from_slice(&l.b.data);
        for (k, &v) in input.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let wrow = l.w.row(k);
            for (o, w) in out.iter_mut().zip(wrow) {
                *o += v * w;
            }
        }
    }

    fn trunk(&self, x: &[f64]) -> Vec<f64> {
        let beta = self.cfg.softplus_beta;
        let mut cur = self.features(x);
        let mut next = Vec::new();
        for l in &self.backbone {
            Self::linear_into(l, &cur, &mut next);
            for v in next.iter_mut() {
                *v = softplus(*v, beta);
            }
            std::mem::swap(&mut cur, &mut next);
        }
        cur
    }

    fn head_forward(&self, head: usize, trunk: &[f64]) -> Vec<f64> {
        let beta = self.cfg.softplus_beta;
        let layers = &self.heads[head];
        let mut cur = trunk.to_vec();
        let mut next = Vec::new();
        for (i, l) in layers.iter().enumerate() {
            Self::linear_into(l, &cur, &mut next);
            if i + 1 < layers.len() {
                for v in next.iter_mut() {
                    *v = softplus(*v, beta);
                }
            }
            std::mem::swap(&mut cur, &mut next);
        }
        cur
    }

    /// Deterministic full forward pass.
    pub fn forward(&self, x: &[f64]) -> HeadOut {
        assert_eq!(x.len(), self.cfg.dim);
        let trunk = self.trunk(x);
        HeadOut {
            phi: self.head_forward(HEAD_PHI, &trunk)[0],
            mf_plus: self.head_forward(HEAD_MF_PLUS, &trunk)[0],
            mf_minus: self.head_forward(HEAD_MF_MINUS, &trunk)[0],
            grad: self.head_forward(HEAD_GRAD, &trunk),
        }
    }

    pub fn forward_phi(&self, x: &[f64]) -> f64 {
        let trunk = self.trunk(x);
        self.head_forward(HEAD_PHI, &trunk)[0]
    }

    /// Exact reverse-mode gradient of the phi head with respect to the input.
    pub fn input_gradient(&self, x: &[f64]) -> Vec<f64> {
        let cfg = &self.cfg;
        let beta = cfg.softplus_beta;

        // Forward, keeping pre-activations of every layer on the phi path.
        let feats = self.features(x);
        let mut acts: Vec<Vec<f64>> = Vec::new(); // post-activation inputs per layer
        let mut pres: Vec<Vec<f64>> = Vec::new(); // pre-activations per layer
        let mut cur = feats.clone();
        let phi_layers: Vec<&Linear> = self
            .backbone
            .iter()
            .chain(self.heads[HEAD_PHI].iter())
            .collect();
        let n_layers = phi_layers.len();
        for (i, l) in phi_layers.iter().enumerate() {
            acts.push(cur.clone());
            let mut pre = Vec::new();
            Self::linear_into(l, &cur, &mut pre);
            pres.push(pre.clone());
            cur = pre;
            if i + 1 < n_layers {
                for v in cur.iter_mut() {
                    *v = softplus(*v, beta);
                }
            }
        }

        // Backward: cotangent 1 on the scalar output.
        let mut cot = vec![1.0f64];
        for i in (0..n_layers).rev() {
            let l = phi_layers[i];
            if i + 1 < n_layers {
                // The activation applied after this layer's pre-activation
                // belongs to the consumer; nothing to do here.
            }
            // d(pre)/d(input) through w: cot_in[k] = sum_n w[k,n] cot[n].
            let mut cot_in = vec![0.0f64; l.w.rows];
            for (k, ci) in cot_in.iter_mut().enumerate() {
                let wrow = l.w.row(k);
                *ci = wrow.iter().zip(&cot).map(|(w, c)| w * c).sum();
            }
            if i > 0 {
                // Input of this layer was softplus(pre of layer i-1).
                for (ci, z) in cot_in.iter_mut().zip(&pres[i - 1]) {
                    *ci *= sigmoid(beta * z);
                }
            }
            cot = cot_in;
        }
        let _ = acts;

        // cot now carries d phi / d features; map back to the coordinate.
        let mut grad = vec![0.0f64; cfg.dim];
        for a in 0..cfg.dim {
            grad[a] += cot[a];
        }
        for i in 0..cfg.fourier_bands {
            let z: f64 = self.fourier.row(i).iter().zip(x).map(|(f, v)| f * v).sum();
            let wsin = cot[cfg.dim + i] * self.fourier_weights[i] * z.cos();
            let wcos = cot[cfg.dim + cfg.fourier_bands + i] * self.fourier_weights[i] * (-z.sin());
            for a in 0..cfg.dim {
                grad[a] += (wsin + wcos) * self.fourier.get(i, a);
            }
        }
        grad
    }
}

/// Parameter nodes of one tape recording, slots aligned with
/// [`MlpParams::param_tensors`].
pub struct TapeParams {
    pub backbone: Vec<(Var, Var)>,
    pub heads: Vec<Vec<(Var, Var)>>,
    /// Transposed fourier matrix `[dim x bands]` as a constant.
    pub fourier_t: Var,
}

pub fn push_params(tape: &mut Tape, params: &MlpParams) -> TapeParams {
    let mut slot = 0;
    let mut push_linear = |tape: &mut Tape, l: &Linear| {
        let w = tape.param(l.w.clone(), slot);
        slot += 1;
        let b = tape.param(l.b.clone(), slot);
        slot += 1;
        (w, b)
    };
    let backbone = params
        .backbone
        .iter()
        .map(|l| push_linear(tape, l))
        .collect();
    let heads = params
        .heads
        .iter()
        .map(|hl| hl.iter().map(|l| push_linear(tape, l)).collect())
        .collect();
    let mut ft = Tensor::zeros(params.cfg.dim, params.cfg.fourier_bands);
    for i in 0..params.cfg.fourier_bands {
        for a in 0..params.cfg.dim {
            ft.set(a, i, params.fourier.get(i, a));
        }
    }
    let fourier_t = tape.constant(ft);
    TapeParams {
        backbone,
        heads,
        fourier_t,
    }
}

/// Features + backbone on tape for a batch of points `x: [B x dim]`.
pub fn tape_trunk(tape: &mut Tape, params: &MlpParams, tp: &TapeParams, x: Var) -> Var {
    let beta = params.cfg.softplus_beta;
    let z = tape.matmul(x, tp.fourier_t);
    let enc = tape.fourier_pair(z, params.fourier_weights.clone());
    let mut cur = tape.concat_cols(&[x, enc]);
    for (w, b) in &tp.backbone {
        let lin = tape.matmul(cur, *w);
        let biased = tape.add_bias(lin, *b);
        cur = tape.softplus(biased, beta);
    }
    cur
}

/// One head on tape; the trunk is shared between heads of the same point.
pub fn tape_head(
    tape: &mut Tape,
    params: &MlpParams,
    tp: &TapeParams,
    trunk: Var,
    head: usize,
) -> Var {
    let beta = params.cfg.softplus_beta;
    let layers = &tp.heads[head];
    let mut cur = trunk;
    for (i, (w, b)) in layers.iter().enumerate() {
        let lin = tape.matmul(cur, *w);
        cur = tape.add_bias(lin, *b);
        if i + 1 < layers.len() {
            cur = tape.softplus(cur, beta);
        }
    }
    cur
}
