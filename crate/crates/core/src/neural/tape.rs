//! Reverse-mode automatic differentiation over batched tensors.
//!
//! Each training step records its whole computation (forward passes at the
//! sample points and every perturbed point, plus the loss arithmetic) on one
//! tape; a single backward sweep then yields exact parameter gradients of the
//! recorded loss. Nodes are matrix-level ops, so tape overhead is negligible
//! next to the matmuls.

use super::tensor::{matmul_acc, matmul_nt_acc, matmul_tn_acc, Tensor};

/// Handle to a tape node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Var(usize);

enum Op {
    /// Constant leaf: no gradient flows in.
    Leaf,
    /// Learnable leaf: backward accumulates into `param_grads[slot]`.
    Param {
        slot: usize,
    },
    MatMul {
        a: Var,
        w: Var,
    },
    AddBias {
        a: Var,
        b: Var,
    },
    Add {
        a: Var,
        b: Var,
    },
    Sub {
        a: Var,
        b: Var,
    },
    Mul {
        a: Var,
        b: Var,
    },
    Scale {
        a: Var,
        k: f64,
    },
    AddScalar {
        a: Var,
    },
    Softplus {
        a: Var,
        beta: f64,
    },
    Sin {
        a: Var,
    },
    Cos {
        a: Var,
    },
    Abs {
        a: Var,
    },
    Relu {
        a: Var,
    },
    Exp {
        a: Var,
    },
    ConcatCols {
        parts: Vec<Var>,
    },
    ColScale {
        a: Var,
        weights: Vec<f64>,
    },
    /// Fused Fourier channel pair: `[w sin(z), w cos(z)]` per band. Backward
    /// reuses the stored outputs, so it costs no transcendentals.
    FourierPair {
        a: Var,
        weights: Vec<f64>,
    },
    RowDot {
        a: Var,
        b: Var,
    },
    RowNorm {
        a: Var,
    },
    MulRow {
        a: Var,
        s: Var,
    },
    DivRow {
        a: Var,
        s: Var,
    },
    RowSum {
        a: Var,
    },
    MeanAll {
        a: Var,
    },
    /// Externally evaluated scalar function of each row, with its gradient
    /// supplied at record time. Used for ground-truth field lookups inside
    /// differentiated losses.
    External {
        a: Var,
        grad: Tensor,
    },
}

struct Node {
    value: Tensor,
    op: Op,
    rg: bool,
}

const NORM_FLOOR: f64 = 1e-30;

pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Tape {
            nodes: Vec::with_capacity(512),
        }
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    fn push(&mut self, value: Tensor, op: Op, rg: bool) -> Var {
        self.nodes.push(Node { value, op, rg });
        Var(self.nodes.len() - 1)
    }

    fn rg(&self, v: Var) -> bool {
        self.nodes[v.0].rg
    }

    pub fn constant(&mut self, t: Tensor) -> Var {
        self.push(t, Op::Leaf, false)
    }

    pub fn param(&mut self, t: Tensor, slot: usize) -> Var {
        self.push(t, Op::Param { slot }, true)
    }

    pub fn matmul(&mut self, a: Var, w: Var) -> Var {
        let mut out = Tensor::zeros(self.value(a).rows, self.value(w).cols);
        matmul_acc(self.value(a), self.value(w), &mut out);
        let rg = self.rg(a) || self.rg(w);
        self.push(out, Op::MatMul { a, w }, rg)
    }

    pub fn add_bias(&mut self, a: Var, b: Var) -> Var {
        let (av, bv) = (self.value(a), self.value(b));
        assert_eq!(bv.rows, 1);
        assert_eq!(av.cols, bv.cols);
        let mut out = av.clone();
        for r in 0..out.rows {
            let row = &mut out.data[r * out.cols..(r + 1) * out.cols];
            for (o, add) in row.iter_mut().zip(&bv.data) {
                *o += add;
            }
        }
        let rg = self.rg(a) || self.rg(b);
        self.push(out, Op::AddBias { a, b }, rg)
    }

    fn zip_elementwise(&mut self, a: Var, b: Var, f: impl Fn(f64, f64) -> f64, op: Op) -> Var {
        let (av, bv) = (self.value(a), self.value(b));
        assert_eq!(av.rows, bv.rows, "shape mismatch");
        assert_eq!(av.cols, bv.cols, "shape mismatch");
        let data = av
            .data
            .iter()
            .zip(&bv.data)
            .map(|(x, y)| f(*x, *y))
            .collect();
        let out = Tensor::from_vec(av.rows, av.cols, data);
        let rg = self.rg(a) || self.rg(b);
        self.push(out, op, rg)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        self.zip_elementwise(a, b, |x, y| x + y, Op::Add { a, b })
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        self.zip_elementwise(a, b, |x, y| x - y, Op::Sub { a, b })
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        self.zip_elementwise(a, b, |x, y| x * y, Op::Mul { a, b })
    }

    pub fn square(&mut self, a: Var) -> Var {
        self.mul(a, a)
    }

    fn map_elementwise(&mut self, a: Var, f: impl Fn(f64) -> f64, op: Op) -> Var {
        let av = self.value(a);
        let data = av.data.iter().map(|x| f(*x)).collect();
        let out = Tensor::from_vec(av.rows, av.cols, data);
        let rg = self.rg(a);
        self.push(out, op, rg)
    }

    pub fn scale(&mut self, a: Var, k: f64) -> Var {
        self.map_elementwise(a, |x| x * k, Op::Scale { a, k })
    }

    pub fn add_scalar(&mut self, a: Var, k: f64) -> Var {
        self.map_elementwise(a, |x| x + k, Op::AddScalar { a })
    }

    pub fn softplus(&mut self, a: Var, beta: f64) -> Var {
        self.map_elementwise(a, |z| softplus(z, beta), Op::Softplus { a, beta })
    }

    pub fn sin(&mut self, a: Var) -> Var {
        self.map_elementwise(a, f64::sin, Op::Sin { a })
    }

    pub fn cos(&mut self, a: Var) -> Var {
        self.map_elementwise(a, f64::cos, Op::Cos { a })
    }

    pub fn abs(&mut self, a: Var) -> Var {
        self.map_elementwise(a, f64::abs, Op::Abs { a })
    }

    pub fn relu(&mut self, a: Var) -> Var {
        self.map_elementwise(a, |x| x.max(0.0), Op::Relu { a })
    }

    pub fn exp(&mut self, a: Var) -> Var {
        self.map_elementwise(a, f64::exp, Op::Exp { a })
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Var {
        let rows = self.value(parts[0]).rows;
        let total: usize = parts.iter().map(|p| self.value(*p).cols).sum();
        let mut out = Tensor::zeros(rows, total);
        let mut at = 0;
        for p in parts {
            let pv = self.value(*p);
            assert_eq!(pv.rows, rows);
            for r in 0..rows {
                out.data[r * total + at..r * total + at + pv.cols].copy_from_slice(pv.row(r));
            }
            at += pv.cols;
        }
        let rg = parts.iter().any(|p| self.rg(*p));
        self.push(
            out,
            Op::ConcatCols {
                parts: parts.to_vec(),
            },
            rg,
        )
    }

    /// `[w_i sin(z_i), w_i cos(z_i)]` from phases `z: [B x bands]`, one
    /// `sin_cos` per element.
    pub fn fourier_pair(&mut self, a: Var, weights: Vec<f64>) -> Var {
        let av = self.value(a);
        let bands = av.cols;
        assert_eq!(bands, weights.len());
        let mut out = Tensor::zeros(av.rows, 2 * bands);
        for r in 0..av.rows {
            let src = av.row(r);
            for (i, (&z, &w)) in src.iter().zip(&weights).enumerate() {
                let (s, c) = z.sin_cos();
                out.data[r * 2 * bands + i] = w * s;
                out.data[r * 2 * bands + bands + i] = w * c;
            }
        }
        let rg = self.rg(a);
        self.push(out, Op::FourierPair { a, weights }, rg)
    }

    pub fn col_scale(&mut self, a: Var, weights: Vec<f64>) -> Var {
        let av = self.value(a);
        assert_eq!(av.cols, weights.len());
        let mut out = av.clone();
        for r in 0..out.rows {
            let row = &mut out.data[r * out.cols..(r + 1) * out.cols];
            for (o, w) in row.iter_mut().zip(&weights) {
                *o *= w;
            }
        }
        let rg = self.rg(a);
        self.push(out, Op::ColScale { a, weights }, rg)
    }

    pub fn row_dot(&mut self, a: Var, b: Var) -> Var {
        let (av, bv) = (self.value(a), self.value(b));
        assert_eq!(av.rows, bv.rows);
        assert_eq!(av.cols, bv.cols);
        let mut out = Tensor::zeros(av.rows, 1);
        for r in 0..av.rows {
            out.data[r] = av.row(r).iter().zip(bv.row(r)).map(|(x, y)| x * y).sum();
        }
        let rg = self.rg(a) || self.rg(b);
        self.push(out, Op::RowDot { a, b }, rg)
    }

    /// Euclidean norm per row, floored away from zero so downstream divisions
    /// stay finite.
    pub fn row_norm(&mut self, a: Var) -> Var {
        let av = self.value(a);
        let mut out = Tensor::zeros(av.rows, 1);
        for r in 0..av.rows {
            let n: f64 = av.row(r).iter().map(|x| x * x).sum::<f64>().sqrt();
            out.data[r] = n.max(NORM_FLOOR);
        }
        let rg = self.rg(a);
        self.push(out, Op::RowNorm { a }, rg)
    }

    /// Broadcast multiply: `a[b, j] * s[b]`.
    pub fn mul_row(&mut self, a: Var, s: Var) -> Var {
        let (av, sv) = (self.value(a), self.value(s));
        assert_eq!(sv.cols, 1);
        assert_eq!(av.rows, sv.rows);
        let mut out = av.clone();
        for r in 0..out.rows {
            let k = sv.data[r];
            for o in &mut out.data[r * out.cols..(r + 1) * out.cols] {
                *o *= k;
            }
        }
        let rg = self.rg(a) || self.rg(s);
        self.push(out, Op::MulRow { a, s }, rg)
    }

    /// Broadcast divide: `a[b, j] / s[b]`.
    pub fn div_row(&mut self, a: Var, s: Var) -> Var {
        let (av, sv) = (self.value(a), self.value(s));
        assert_eq!(sv.cols, 1);
        assert_eq!(av.rows, sv.rows);
        let mut out = av.clone();
        for r in 0..out.rows {
            let k = 1.0 / sv.data[r];
            for o in &mut out.data[r * out.cols..(r + 1) * out.cols] {
                *o *= k;
            }
        }
        let rg = self.rg(a) || self.rg(s);
        self.push(out, Op::DivRow { a, s }, rg)
    }

    pub fn row_sum(&mut self, a: Var) -> Var {
        let av = self.value(a);
        let mut out = Tensor::zeros(av.rows, 1);
        for r in 0..av.rows {
            out.data[r] = av.row(r).iter().sum();
        }
        let rg = self.rg(a);
        self.push(out, Op::RowSum { a }, rg)
    }

    pub fn mean_all(&mut self, a: Var) -> Var {
        let av = self.value(a);
        let mean = av.data.iter().sum::<f64>() / av.len() as f64;
        let rg = self.rg(a);
        self.push(Tensor::scalar(mean), Op::MeanAll { a }, rg)
    }

    /// Records an externally evaluated per-row scalar: `value[b] = f(a[b, :])`
    /// with `grad[b, :] = df/da`. Backward applies the supplied gradient.
    pub fn external(&mut self, a: Var, value: Tensor, grad: Tensor) -> Var {
        let av = self.value(a);
        assert_eq!(value.rows, av.rows);
        assert_eq!(value.cols, 1);
        assert_eq!(grad.rows, av.rows);
        assert_eq!(grad.cols, av.cols);
        let rg = self.rg(a);
        self.push(value, Op::External { a, grad }, rg)
    }

    /// Reverse sweep from a scalar `root`, accumulating parameter gradients
    /// into `param_grads` (indexed by the slots given to [`Tape::param`]).
    pub fn backward(&self, root: Var, param_grads: &mut [Tensor]) {
        assert_eq!(self.value(root).len(), 1, "backward needs a scalar root");
        let mut grads: Vec<Option<Tensor>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[root.0] = Some(Tensor::scalar(1.0));

        for idx in (0..self.nodes.len()).rev() {
            if !self.nodes[idx].rg {
                continue;
            }
            let Some(cot) = grads[idx].take() else {
                continue;
            };
            let add = |grads: &mut Vec<Option<Tensor>>, v: Var, f: &mut dyn FnMut(&mut Tensor)| {
                if !self.nodes[v.0].rg {
                    return;
                }
                let val = &self.nodes[v.0].value;
                let slot = grads[v.0].get_or_insert_with(|| Tensor::zeros(val.rows, val.cols));
                f(slot);
            };
            match &self.nodes[idx].op {
                Op::Leaf => {}
                Op::Param { slot } => {
                    let g = &mut param_grads[*slot];
                    for (o, c) in g.data.iter_mut().zip(&cot.data) {
                        *o += c;
                    }
                }
                Op::MatMul { a, w } => {
                    add(&mut grads, *a, &mut |g| {
                        matmul_nt_acc(&cot, &self.nodes[w.0].value, g)
                    });
                    add(&mut grads, *w, &mut |g| {
                        matmul_tn_acc(&self.nodes[a.0].value, &cot, g)
                    });
                }
                Op::AddBias { a, b } => {
                    add(&mut grads, *a, &mut |g| {
                        for (o, c) in g.data.iter_mut().zip(&cot.data) {
                            *o += c;
                        }
                    });
                    add(&mut grads, *b, &mut |g| {
                        for r in 0..cot.rows {
                            for (o, c) in g.data.iter_mut().zip(cot.row(r)) {
                                *o += c;
                            }
                        }
                    });
                }
                Op::Add { a, b } => {
                    for v in [a, b] {
                        add(&mut grads, *v, &mut |g| {
                            for (o, c) in g.data.iter_mut().zip(&cot.data) {
                                *o += c;
                            }
                        });
                    }
                }
                Op::Sub { a, b } => {
                    add(&mut grads, *a, &mut |g| {
                        for (o, c) in g.data.iter_mut().zip(&cot.data) {
                            *o += c;
                        }
                    });
                    add(&mut grads, *b, &mut |g| {
                        for (o, c) in g.data.iter_mut().zip(&cot.data) {
                            *o -= c;
                        }
                    });
                }
                Op::Mul { a, b } => {
                    add(&mut grads, *a, &mut |g| {
                        let bv = &self.nodes[b.0].value;
                        for ((o, c), x) in g.data.iter_mut().zip(&cot.data).zip(&bv.data) {
                            *o += c * x;
                        }
                    });
                    add(&mut grads, *b, &mut |g| {
                        let av = &self.nodes[a.0].value;
                        for ((o, c), x) in g.data.iter_mut().zip(&cot.data).zip(&av.data) {
                            *o += c * x;
                        }
                    });
                }
                Op::Scale { a, k } => {
                    add(&mut grads, *a, &mut |g| {
                        for (o, c) in g.data.iter_mut().zip(&cot.data) {
                            *o += c * k;
                        }
                    });
                }
                Op::AddScalar { a } => {
                    add(&mut grads, *a, &mut |g| {
                        for (o, c) in g.data.iter_mut().zip(&cot.data) {
                            *o += c;
                        }
                    });
                }
                Op::Softplus { a, beta } => {
                    add(&mut grads, *a, &mut |g| {
                        let av = &self.nodes[a.0].value;
                        for ((o, c), z) in g.data.iter_mut().zip(&cot.data).zip(&av.data) {
                            *o += c * sigmoid(beta * z);
                        }
                    });
                }
                Op::Sin { a } => {
                    add(&mut grads, *a, &mut |g| {
                        let av = &self.nodes[a.0].value;
                        for ((o, c), z) in g.data.iter_mut().zip(&cot.data).zip(&av.data) {
                            *o += c * z.cos();
                        }
                    });
                }
                Op::Cos { a } => {
                    add(&mut grads, *a, &mut |g| {
                        let av = &self.nodes[a.0].value;
                        for ((o, c), z) in g.data.iter_mut().zip(&cot.data).zip(&av.data) {
                            *o -= c * z.sin();
                        }
                    });
                }
                Op::Abs { a } => {
                    add(&mut grads, *a, &mut |g| {
                        let av = &self.nodes[a.0].value;
                        for ((o, c), z) in g.data.iter_mut().zip(&cot.data).zip(&av.data) {
                            *o += c * z.signum() * (*z != 0.0) as i32 as f64;
                        }
                    });
                }
                Op::Relu { a } => {
                    add(&mut grads, *a, &mut |g| {
                        let av = &self.nodes[a.0].value;
                        for ((o, c), z) in g.data.iter_mut().zip(&cot.data).zip(&av.data) {
                            if *z > 0.0 {
                                *o += c;
                            }
                        }
                    });
                }
                Op::Exp { a } => {
                    let out = &self.nodes[idx].value;
                    add(&mut grads, *a, &mut |g| {
                        for ((o, c), y) in g.data.iter_mut().zip(&cot.data).zip(&out.data) {
                            *o += c * y;
                        }
                    });
                }
                Op::ConcatCols { parts } => {
                    let mut at = 0;
                    for p in parts {
                        let cols = self.nodes[p.0].value.cols;
                        add(&mut grads, *p, &mut |g| {
                            for r in 0..cot.rows {
                                let src = &cot.data[r * cot.cols + at..r * cot.cols + at + cols];
                                let dst = &mut g.data[r * cols..(r + 1) * cols];
                                for (o, c) in dst.iter_mut().zip(src) {
                                    *o += c;
                                }
                            }
                        });
                        at += cols;
                    }
                }
                Op::FourierPair { a, weights } => {
                    let out = &self.nodes[idx].value;
                    let bands = weights.len();
                    add(&mut grads, *a, &mut |g| {
                        // d(w sin z) = (w cos z) dz and d(w cos z) = -(w sin z) dz,
                        // both already sitting in the forward output.
                        for r in 0..cot.rows {
                            let crow = cot.row(r);
                            let orow = out.row(r);
                            let dst = &mut g.data[r * bands..(r + 1) * bands];
                            for i in 0..bands {
                                dst[i] += crow[i] * orow[bands + i] - crow[bands + i] * orow[i];
                            }
                        }
                    });
                }
                Op::ColScale { a, weights } => {
                    add(&mut grads, *a, &mut |g| {
                        for r in 0..cot.rows {
                            let src = cot.row(r);
                            let dst = &mut g.data[r * weights.len()..(r + 1) * weights.len()];
                            for ((o, c), w) in dst.iter_mut().zip(src).zip(weights) {
                                *o += c * w;
                            }
                        }
                    });
                }
                Op::RowDot { a, b } => {
                    add(&mut grads, *a, &mut |g| {
                        let bv = &self.nodes[b.0].value;
                        for r in 0..bv.rows {
                            let c = cot.data[r];
                            let src = bv.row(r);
                            let dst = &mut g.data[r * bv.cols..(r + 1) * bv.cols];
                            for (o, x) in dst.iter_mut().zip(src) {
                                *o += c * x;
                            }
                        }
                    });
                    add(&mut grads, *b, &mut |g| {
                        let av = &self.nodes[a.0].value;
                        for r in 0..av.rows {
                            let c = cot.data[r];
                            let src = av.row(r);
                            let dst = &mut g.data[r * av.cols..(r + 1) * av.cols];
                            for (o, x) in dst.iter_mut().zip(src) {
                                *o += c * x;
                            }
                        }
                    });
                }
                Op::RowNorm { a } => {
                    let out = &self.nodes[idx].value;
                    add(&mut grads, *a, &mut |g| {
                        let av = &self.nodes[a.0].value;
                        for r in 0..av.rows {
                            let c = cot.data[r] / out.data[r];
                            let src = av.row(r);
                            let dst = &mut g.data[r * av.cols..(r + 1) * av.cols];
                            for (o, x) in dst.iter_mut().zip(src) {
                                *o += c * x;
                            }
                        }
                    });
                }
                Op::MulRow { a, s } => {
                    add(&mut grads, *a, &mut |g| {
                        let sv = &self.nodes[s.0].value;
                        for r in 0..sv.rows {
                            let k = sv.data[r];
                            let src = cot.row(r);
                            let dst = &mut g.data[r * cot.cols..(r + 1) * cot.cols];
                            for (o, c) in dst.iter_mut().zip(src) {
                                *o += c * k;
                            }
                        }
                    });
                    add(&mut grads, *s, &mut |g| {
                        let av = &self.nodes[a.0].value;
                        for r in 0..av.rows {
                            let mut acc = 0.0;
                            for (c, x) in cot.row(r).iter().zip(av.row(r)) {
                                acc += c * x;
                            }
                            g.data[r] += acc;
                        }
                    });
                }
                Op::DivRow { a, s } => {
                    add(&mut grads, *a, &mut |g| {
                        let sv = &self.nodes[s.0].value;
                        for r in 0..sv.rows {
                            let k = 1.0 / sv.data[r];
                            let src = cot.row(r);
                            let dst = &mut g.data[r * cot.cols..(r + 1) * cot.cols];
                            for (o, c) in dst.iter_mut().zip(src) {
                                *o += c * k;
                            }
                        }
                    });
                    add(&mut grads, *s, &mut |g| {
                        let av = &self.nodes[a.0].value;
                        let sv = &self.nodes[s.0].value;
                        for r in 0..av.rows {
                            let inv2 = 1.0 / (sv.data[r] * sv.data[r]);
                            let mut acc = 0.0;
                            for (c, x) in cot.row(r).iter().zip(av.row(r)) {
                                acc += c * x;
                            }
                            g.data[r] -= acc * inv2;
                        }
                    });
                }
                Op::RowSum { a } => {
                    add(&mut grads, *a, &mut |g| {
                        for r in 0..cot.rows {
                            let c = cot.data[r];
                            for o in &mut g.data[r * g.cols..(r + 1) * g.cols] {
                                *o += c;
                            }
                        }
                    });
                }
                Op::MeanAll { a } => {
                    add(&mut grads, *a, &mut |g| {
                        let c = cot.data[0] / g.len() as f64;
                        for o in &mut g.data {
                            *o += c;
                        }
                    });
                }
                Op::External { a, grad } => {
                    add(&mut grads, *a, &mut |g| {
                        for r in 0..grad.rows {
                            let c = cot.data[r];
                            let src = grad.row(r);
                            let dst = &mut g.data[r * grad.cols..(r + 1) * grad.cols];
                            for (o, x) in dst.iter_mut().zip(src) {
                                *o += c * x;
                            }
                        }
                    });
                }
            }
        }
    }
}

impl Default for Tape {
    fn default() -> Self {
        Self::new()
    }
}

/// Numerically stable `ln(1 + exp(beta z)) / beta`.
///
/// Beyond |beta z| = 37 the correction term is below one ulp of the result,
/// so the saturated branches return exactly `z` and `0`; with steep betas
/// most activations take those free paths.
pub fn softplus(z: f64, beta: f64) -> f64 {
    let bz = beta * z;
    if bz > 37.0 {
        z
    } else if bz < -37.0 {
        0.0
    } else if bz > 0.0 {
        z + (-bz).exp().ln_1p() / beta
    } else {
        bz.exp().ln_1p() / beta
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z > 37.0 {
        1.0
    } else if z < -37.0 {
        0.0
    } else if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}
