//! Dense `f64` tensors with a reverse-mode gradient tape.
//!
//! The tape is rebuilt on every forward pass (define-by-run), which keeps
//! the semantics of input-dependent routing masks trivially correct: the
//! recorded graph is exactly the computation that produced the loss.
//! Tensors are immutable once created; `backward` populates `grad` slots.
//!
//! Overflow is an error, not a value: every operation checks its output
//! for NaN/Inf and fails loudly instead of letting poison propagate.

mod adam;
mod gradcheck;
pub mod kernels;

pub use adam::{adam_step, clip_global_norm, AdamHyper, AdamState};
pub use gradcheck::grad_check;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TensorError {
    #[error("shape mismatch in {op}: {details}")]
    Shape { op: &'static str, details: String },
    #[error("non-finite values produced by {op}")]
    NonFinite { op: &'static str },
    #[error("invalid operation: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, TensorError>;

/// A dense row-major tensor. `grad` is populated by [`Tape::backward`].
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
    requires_grad: bool,
    grad: Option<Vec<f64>>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let numel: usize = shape.iter().product();
        if numel != data.len() {
            return Err(TensorError::Shape {
                op: "new",
                details: format!("shape {:?} wants {} elements, got {}", shape, numel, data.len()),
            });
        }
        Ok(Tensor { shape, data, requires_grad: false, grad: None })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let numel = shape.iter().product();
        Tensor { shape, data: vec![0.0; numel], requires_grad: false, grad: None }
    }

    pub fn scalar(x: f64) -> Self {
        Tensor { shape: vec![], data: vec![x], requires_grad: false, grad: None }
    }

    pub fn vector(data: Vec<f64>) -> Self {
        Tensor { shape: vec![data.len()], data, requires_grad: false, grad: None }
    }

    pub fn matrix(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Tensor { shape: vec![r, c], data, requires_grad: false, grad: None }
    }

    pub fn with_grad(mut self) -> Self {
        self.requires_grad = true;
        self
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn grad(&self) -> Option<&[f64]> {
        self.grad.as_deref()
    }

    pub fn requires_grad(&self) -> bool {
        self.requires_grad
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }

    pub fn is_scalar(&self) -> bool {
        self.numel() == 1
    }

    /// Scalar value; panics if not a single element.
    pub fn item(&self) -> f64 {
        assert_eq!(self.numel(), 1, "item() on non-scalar tensor");
        self.data[0]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    fn dims2(&self, op: &'static str) -> Result<(usize, usize)> {
        match self.shape.as_slice() {
            [r, c] => Ok((*r, *c)),
            s => Err(TensorError::Shape { op, details: format!("expected 2-d tensor, got {:?}", s) }),
        }
    }
}

/// Handle to a tensor recorded on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TensorId(usize);

/// Saved cosine state for the backward rule.
#[derive(Debug, Clone)]
struct CosSaved {
    norm_u: f64,
    norm_v: f64,
    cos: f64,
    degenerate: bool,
}

#[derive(Debug)]
enum Op {
    Leaf,
    Add { a: TensorId, b: TensorId },
    AddRow { x: TensorId, bias: TensorId },
    Mul { a: TensorId, b: TensorId },
    Scale { x: TensorId, c: f64 },
    MulMask { x: TensorId, mask: Vec<f64> },
    MatMul { a: TensorId, b: TensorId, m: usize, k: usize, n: usize },
    MatMulNT { a: TensorId, b: TensorId, m: usize, k: usize, n: usize },
    RowScale { x: TensorId, s: TensorId, rows: usize, cols: usize },
    SoftmaxRows { x: TensorId, rows: usize, cols: usize },
    MaskedSoftmaxRows { x: TensorId, allowed: Vec<bool>, rows: usize, cols: usize },
    LayerNorm { x: TensorId, gain: TensorId, bias: TensorId, rows: usize, cols: usize, inv_std: Vec<f64>, xhat: Vec<f64> },
    Cosine { u: TensorId, v: TensorId, saved: CosSaved },
    CosineRows { rep: TensorId, f: TensorId, rows: usize, cols: usize, saved: Vec<CosSaved> },
    MaskGate { cos: TensorId, dm_dc: Vec<f64> },
    Embedding { table: TensorId, ids: Vec<usize>, cols: usize },
    Relu { x: TensorId },
    ConcatCols { parts: Vec<TensorId>, rows: usize, widths: Vec<usize> },
    CrossEntropy { logits: TensorId, targets: Vec<usize>, pad_id: usize, probs: Vec<f64>, active: usize, cols: usize },
    Sum { x: TensorId },
    Mean { x: TensorId },
}

struct Node {
    tensor: Tensor,
    op: Op,
}

/// Epsilon added inside the layer-norm variance square root.
pub const LAYER_NORM_EPS: f64 = 1e-5;

/// Records operations in execution order; `backward` traverses them in
/// exact reverse order. A tape can be replayed backward only once.
#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
    backward_done: bool,
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, id: TensorId) -> &Tensor {
        &self.nodes[id.0].tensor
    }

    /// Gradient of the last `backward` root w.r.t. this tensor, if recorded.
    pub fn grad(&self, id: TensorId) -> Option<&[f64]> {
        self.nodes[id.0].tensor.grad()
    }

    /// Record a tensor, tracking gradients per its `requires_grad` flag.
    pub fn leaf(&mut self, tensor: Tensor) -> TensorId {
        self.push(tensor, Op::Leaf)
    }

    /// Record a tensor that never receives gradients.
    pub fn constant(&mut self, mut tensor: Tensor) -> TensorId {
        tensor.requires_grad = false;
        self.push(tensor, Op::Leaf)
    }

    fn push(&mut self, tensor: Tensor, op: Op) -> TensorId {
        self.nodes.push(Node { tensor, op });
        TensorId(self.nodes.len() - 1)
    }

    fn out(&mut self, shape: Vec<usize>, data: Vec<f64>, requires_grad: bool, op: Op, name: &'static str) -> Result<TensorId> {
        let t = Tensor { shape, data, requires_grad, grad: None };
        if !t.is_finite() {
            return Err(TensorError::NonFinite { op: name });
        }
        Ok(self.push(t, op))
    }

    fn rg(&self, ids: &[TensorId]) -> bool {
        ids.iter().any(|id| self.nodes[id.0].tensor.requires_grad)
    }

    fn data_of(&self, id: TensorId) -> &[f64] {
        &self.nodes[id.0].tensor.data
    }

    // ── forward operations ───────────────────────────────────────────

    pub fn add(&mut self, a: TensorId, b: TensorId) -> Result<TensorId> {
        let (ta, tb) = (&self.nodes[a.0].tensor, &self.nodes[b.0].tensor);
        if ta.shape != tb.shape {
            return Err(TensorError::Shape {
                op: "add",
                details: format!("{:?} vs {:?}", ta.shape, tb.shape),
            });
        }
        let data = ta.data.iter().zip(&tb.data).map(|(x, y)| x + y).collect();
        let shape = ta.shape.clone();
        let rg = self.rg(&[a, b]);
        self.out(shape, data, rg, Op::Add { a, b }, "add")
    }

    /// `x[n×d] + bias[d]` broadcast over rows.
    pub fn add_row(&mut self, x: TensorId, bias: TensorId) -> Result<TensorId> {
        let (n, d) = self.nodes[x.0].tensor.dims2("add_row")?;
        if self.nodes[bias.0].tensor.shape != [d] {
            return Err(TensorError::Shape {
                op: "add_row",
                details: format!(
                    "bias {:?} does not match row width {}",
                    self.nodes[bias.0].tensor.shape, d
                ),
            });
        }
        let xd = self.data_of(x);
        let bd = self.data_of(bias);
        let mut data = Vec::with_capacity(n * d);
        for i in 0..n {
            for j in 0..d {
                data.push(xd[i * d + j] + bd[j]);
            }
        }
        let rg = self.rg(&[x, bias]);
        self.out(vec![n, d], data, rg, Op::AddRow { x, bias }, "add_row")
    }

    pub fn mul(&mut self, a: TensorId, b: TensorId) -> Result<TensorId> {
        let (ta, tb) = (&self.nodes[a.0].tensor, &self.nodes[b.0].tensor);
        if ta.shape != tb.shape {
            return Err(TensorError::Shape {
                op: "mul",
                details: format!("{:?} vs {:?}", ta.shape, tb.shape),
            });
        }
        let data = ta.data.iter().zip(&tb.data).map(|(x, y)| x * y).collect();
        let shape = ta.shape.clone();
        let rg = self.rg(&[a, b]);
        self.out(shape, data, rg, Op::Mul { a, b }, "mul")
    }

    pub fn scale(&mut self, x: TensorId, c: f64) -> Result<TensorId> {
        let tx = &self.nodes[x.0].tensor;
        let data = tx.data.iter().map(|v| v * c).collect();
        let shape = tx.shape.clone();
        let rg = self.rg(&[x]);
        self.out(shape, data, rg, Op::Scale { x, c }, "scale")
    }

    /// Elementwise multiply by a fixed mask (dropout keep-mask, already
    /// scaled by 1/(1-p)). The mask is a constant: no gradient flows to it.
    pub fn mul_mask(&mut self, x: TensorId, mask: Vec<f64>) -> Result<TensorId> {
        let tx = &self.nodes[x.0].tensor;
        if tx.data.len() != mask.len() {
            return Err(TensorError::Shape {
                op: "mul_mask",
                details: format!("mask length {} vs tensor {}", mask.len(), tx.data.len()),
            });
        }
        let data = tx.data.iter().zip(&mask).map(|(v, m)| v * m).collect();
        let shape = tx.shape.clone();
        let rg = self.rg(&[x]);
        self.out(shape, data, rg, Op::MulMask { x, mask }, "mul_mask")
    }

    /// C[m×n] = A[m×k] · B[k×n]
    pub fn matmul(&mut self, a: TensorId, b: TensorId) -> Result<TensorId> {
        let (m, k) = self.nodes[a.0].tensor.dims2("matmul")?;
        let (k2, n) = self.nodes[b.0].tensor.dims2("matmul")?;
        if k != k2 {
            return Err(TensorError::Shape {
                op: "matmul",
                details: format!("inner dims {} vs {}", k, k2),
            });
        }
        let mut data = vec![0.0; m * n];
        kernels::mm_nn(&mut data, self.data_of(a), self.data_of(b), m, k, n);
        let rg = self.rg(&[a, b]);
        self.out(vec![m, n], data, rg, Op::MatMul { a, b, m, k, n }, "matmul")
    }

    /// C[m×n] = A[m×k] · B[n×k]ᵀ
    pub fn matmul_nt(&mut self, a: TensorId, b: TensorId) -> Result<TensorId> {
        let (m, k) = self.nodes[a.0].tensor.dims2("matmul_nt")?;
        let (n, k2) = self.nodes[b.0].tensor.dims2("matmul_nt")?;
        if k != k2 {
            return Err(TensorError::Shape {
                op: "matmul_nt",
                details: format!("inner dims {} vs {}", k, k2),
            });
        }
        let mut data = vec![0.0; m * n];
        kernels::mm_nt(&mut data, self.data_of(a), self.data_of(b), m, k, n);
        let rg = self.rg(&[a, b]);
        self.out(vec![m, n], data, rg, Op::MatMulNT { a, b, m, k, n }, "matmul_nt")
    }

    /// Scales row `j` of `x[n×d]` by `s[j]`.
    pub fn row_scale(&mut self, x: TensorId, s: TensorId) -> Result<TensorId> {
        let (n, d) = self.nodes[x.0].tensor.dims2("row_scale")?;
        if self.nodes[s.0].tensor.shape != [n] {
            return Err(TensorError::Shape {
                op: "row_scale",
                details: format!("scale {:?} vs {} rows", self.nodes[s.0].tensor.shape, n),
            });
        }
        let xd = self.data_of(x);
        let sd = self.data_of(s);
        let mut data = Vec::with_capacity(n * d);
        for i in 0..n {
            let si = sd[i];
            for j in 0..d {
                data.push(xd[i * d + j] * si);
            }
        }
        let rg = self.rg(&[x, s]);
        self.out(vec![n, d], data, rg, Op::RowScale { x, s, rows: n, cols: d }, "row_scale")
    }

    /// Row-wise softmax with max-subtraction for stability.
    pub fn softmax_rows(&mut self, x: TensorId) -> Result<TensorId> {
        let (n, d) = self.nodes[x.0].tensor.dims2("softmax_rows")?;
        let xd = self.data_of(x);
        let mut data = vec![0.0; n * d];
        for i in 0..n {
            let row = &xd[i * d..(i + 1) * d];
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut z = 0.0;
            for (j, &v) in row.iter().enumerate() {
                let e = (v - max).exp();
                data[i * d + j] = e;
                z += e;
            }
            for j in 0..d {
                data[i * d + j] /= z;
            }
        }
        let rg = self.rg(&[x]);
        self.out(vec![n, d], data, rg, Op::SoftmaxRows { x, rows: n, cols: d }, "softmax_rows")
    }

    /// Row-wise softmax restricted to `allowed` entries; disallowed outputs
    /// are exactly zero and receive no gradient. Used for causal attention.
    pub fn masked_softmax_rows(&mut self, x: TensorId, allowed: Vec<bool>) -> Result<TensorId> {
        let (n, d) = self.nodes[x.0].tensor.dims2("masked_softmax_rows")?;
        if allowed.len() != n * d {
            return Err(TensorError::Shape {
                op: "masked_softmax_rows",
                details: format!("mask length {} vs {}", allowed.len(), n * d),
            });
        }
        let xd = self.data_of(x);
        let mut data = vec![0.0; n * d];
        for i in 0..n {
            let row = &xd[i * d..(i + 1) * d];
            let sel = &allowed[i * d..(i + 1) * d];
            let max = row
                .iter()
                .zip(sel)
                .filter(|(_, &a)| a)
                .map(|(&v, _)| v)
                .fold(f64::NEG_INFINITY, f64::max);
            if max == f64::NEG_INFINITY {
                return Err(TensorError::Invalid(format!(
                    "masked_softmax_rows: row {} has no allowed entries",
                    i
                )));
            }
            let mut z = 0.0;
            for j in 0..d {
                if sel[j] {
                    let e = (row[j] - max).exp();
                    data[i * d + j] = e;
                    z += e;
                }
            }
            for j in 0..d {
                data[i * d + j] /= z;
            }
        }
        let rg = self.rg(&[x]);
        self.out(vec![n, d], data, rg, Op::MaskedSoftmaxRows { x, allowed, rows: n, cols: d }, "masked_softmax_rows")
    }

    /// Per-row normalization to mean 0 / variance 1 followed by `gain ⊙ x + bias`.
    pub fn layer_norm(&mut self, x: TensorId, gain: TensorId, bias: TensorId) -> Result<TensorId> {
        let (n, d) = self.nodes[x.0].tensor.dims2("layer_norm")?;
        if d < 2 {
            return Err(TensorError::Shape {
                op: "layer_norm",
                details: format!("last axis must be >= 2, got {}", d),
            });
        }
        for (name, id) in [("gain", gain), ("bias", bias)] {
            let t = &self.nodes[id.0].tensor;
            if t.shape != [d] {
                return Err(TensorError::Shape {
                    op: "layer_norm",
                    details: format!("{} {:?} vs width {}", name, t.shape, d),
                });
            }
        }
        let xd = self.data_of(x);
        let gd = self.data_of(gain);
        let bd = self.data_of(bias);
        let mut data = vec![0.0; n * d];
        let mut inv_std = vec![0.0; n];
        let mut xhat = vec![0.0; n * d];
        for i in 0..n {
            let row = &xd[i * d..(i + 1) * d];
            let mean = row.iter().sum::<f64>() / d as f64;
            let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / d as f64;
            let inv = 1.0 / (var + LAYER_NORM_EPS).sqrt();
            inv_std[i] = inv;
            for j in 0..d {
                let h = (row[j] - mean) * inv;
                xhat[i * d + j] = h;
                data[i * d + j] = gd[j] * h + bd[j];
            }
        }
        let rg = self.rg(&[x, gain, bias]);
        self.out(
            vec![n, d],
            data,
            rg,
            Op::LayerNorm { x, gain, bias, rows: n, cols: d, inv_std, xhat },
            "layer_norm",
        )
    }

    fn cos_parts(u: &[f64], v: &[f64]) -> CosSaved {
        let norm_u = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        let norm_v = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm_u == 0.0 || norm_v == 0.0 {
            // zero vectors get similarity 0 with zero gradient
            return CosSaved { norm_u, norm_v, cos: 0.0, degenerate: true };
        }
        let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
        let cos = (dot / (norm_u * norm_v)).clamp(-1.0, 1.0);
        CosSaved { norm_u, norm_v, cos, degenerate: false }
    }

    /// Cosine similarity of two vectors, clamped to [-1, 1].
    pub fn cosine_similarity(&mut self, u: TensorId, v: TensorId) -> Result<TensorId> {
        let (tu, tv) = (&self.nodes[u.0].tensor, &self.nodes[v.0].tensor);
        if tu.shape.len() != 1 || tu.shape != tv.shape {
            return Err(TensorError::Shape {
                op: "cosine_similarity",
                details: format!("{:?} vs {:?}", tu.shape, tv.shape),
            });
        }
        let saved = Self::cos_parts(&tu.data, &tv.data);
        let cos = saved.cos;
        let rg = self.rg(&[u, v]);
        self.out(vec![], vec![cos], rg, Op::Cosine { u, v, saved }, "cosine_similarity")
    }

    /// Cosine similarity of `rep[d]` against every row of `f[n×d]`.
    pub fn cosine_rows(&mut self, rep: TensorId, f: TensorId) -> Result<TensorId> {
        let (n, d) = self.nodes[f.0].tensor.dims2("cosine_rows")?;
        if self.nodes[rep.0].tensor.shape != [d] {
            return Err(TensorError::Shape {
                op: "cosine_rows",
                details: format!("rep {:?} vs row width {}", self.nodes[rep.0].tensor.shape, d),
            });
        }
        let rd = self.data_of(rep);
        let fd = self.data_of(f);
        let mut data = Vec::with_capacity(n);
        let mut saved = Vec::with_capacity(n);
        for i in 0..n {
            let parts = Self::cos_parts(rd, &fd[i * d..(i + 1) * d]);
            data.push(parts.cos);
            saved.push(parts);
        }
        let rg = self.rg(&[rep, f]);
        self.out(vec![n], data, rg, Op::CosineRows { rep, f, rows: n, cols: d, saved }, "cosine_rows")
    }

    /// Routing gate over a vector of cosines: entries with `cos > tau` pass
    /// (value `exp(1 - cos)`, or exactly 1 in binary mode), the rest are
    /// exactly zero. The selection indicator carries no gradient; the
    /// `exp(1 - cos)` factor does.
    pub fn mask_gate(&mut self, cos: TensorId, tau: f64, binary: bool) -> Result<TensorId> {
        let tc = &self.nodes[cos.0].tensor;
        if tc.shape.len() != 1 {
            return Err(TensorError::Shape {
                op: "mask_gate",
                details: format!("expected vector, got {:?}", tc.shape),
            });
        }
        let n = tc.data.len();
        let mut data = Vec::with_capacity(n);
        let mut dm_dc = vec![0.0; n];
        for (j, &c) in tc.data.iter().enumerate() {
            if c > tau {
                if binary {
                    data.push(1.0);
                } else {
                    let m = (1.0 - c).exp();
                    data.push(m);
                    dm_dc[j] = -m;
                }
            } else {
                data.push(0.0);
            }
        }
        let rg = self.rg(&[cos]);
        self.out(vec![n], data, rg, Op::MaskGate { cos, dm_dc }, "mask_gate")
    }

    /// Gathers `table[id]` rows; gradients scatter-add back into the table.
    pub fn embedding(&mut self, table: TensorId, ids: &[usize]) -> Result<TensorId> {
        let (v, d) = self.nodes[table.0].tensor.dims2("embedding")?;
        for &id in ids {
            if id >= v {
                return Err(TensorError::Invalid(format!(
                    "embedding id {} out of range (table has {} rows)",
                    id, v
                )));
            }
        }
        let td = self.data_of(table);
        let mut data = Vec::with_capacity(ids.len() * d);
        for &id in ids {
            data.extend_from_slice(&td[id * d..(id + 1) * d]);
        }
        let rg = self.rg(&[table]);
        self.out(vec![ids.len(), d], data, rg, Op::Embedding { table, ids: ids.to_vec(), cols: d }, "embedding")
    }

    pub fn relu(&mut self, x: TensorId) -> Result<TensorId> {
        let tx = &self.nodes[x.0].tensor;
        let data = tx.data.iter().map(|&v| v.max(0.0)).collect();
        let shape = tx.shape.clone();
        let rg = self.rg(&[x]);
        self.out(shape, data, rg, Op::Relu { x }, "relu")
    }

    /// Concatenates 2-d tensors with equal row counts along columns.
    pub fn concat_cols(&mut self, parts: &[TensorId]) -> Result<TensorId> {
        if parts.is_empty() {
            return Err(TensorError::Invalid("concat_cols of nothing".into()));
        }
        let (rows, _) = self.nodes[parts[0].0].tensor.dims2("concat_cols")?;
        let mut widths = Vec::with_capacity(parts.len());
        for &p in parts {
            let (r, c) = self.nodes[p.0].tensor.dims2("concat_cols")?;
            if r != rows {
                return Err(TensorError::Shape {
                    op: "concat_cols",
                    details: format!("row counts differ: {} vs {}", rows, r),
                });
            }
            widths.push(c);
        }
        let total: usize = widths.iter().sum();
        let mut data = Vec::with_capacity(rows * total);
        for i in 0..rows {
            for (&p, &w) in parts.iter().zip(&widths) {
                let td = &self.nodes[p.0].tensor.data;
                data.extend_from_slice(&td[i * w..(i + 1) * w]);
            }
        }
        let rg = self.rg(parts);
        self.out(vec![rows, total], data, rg, Op::ConcatCols { parts: parts.to_vec(), rows, widths }, "concat_cols")
    }

    /// Mean over non-pad positions of `-log softmax(logits)[target]`.
    pub fn cross_entropy(&mut self, logits: TensorId, targets: &[usize], pad_id: usize) -> Result<TensorId> {
        let (t, v) = self.nodes[logits.0].tensor.dims2("cross_entropy")?;
        if targets.len() != t {
            return Err(TensorError::Shape {
                op: "cross_entropy",
                details: format!("{} targets vs {} rows", targets.len(), t),
            });
        }
        for &y in targets {
            if y != pad_id && y >= v {
                return Err(TensorError::Invalid(format!(
                    "cross_entropy target {} out of range (vocab {})",
                    y, v
                )));
            }
        }
        let active = targets.iter().filter(|&&y| y != pad_id).count();
        if active == 0 {
            return Err(TensorError::Invalid("cross_entropy: all positions padded".into()));
        }
        let ld = self.data_of(logits);
        let mut probs = vec![0.0; t * v];
        let mut loss = 0.0;
        for i in 0..t {
            let row = &ld[i * v..(i + 1) * v];
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut z = 0.0;
            for (j, &x) in row.iter().enumerate() {
                let e = (x - max).exp();
                probs[i * v + j] = e;
                z += e;
            }
            for j in 0..v {
                probs[i * v + j] /= z;
            }
            if targets[i] != pad_id {
                let lse = max + z.ln();
                loss += lse - row[targets[i]];
            }
        }
        loss /= active as f64;
        let rg = self.rg(&[logits]);
        self.out(
            vec![],
            vec![loss],
            rg,
            Op::CrossEntropy { logits, targets: targets.to_vec(), pad_id, probs, active, cols: v },
            "cross_entropy",
        )
    }

    pub fn sum(&mut self, x: TensorId) -> Result<TensorId> {
        let tx = &self.nodes[x.0].tensor;
        let s = tx.data.iter().sum();
        let rg = self.rg(&[x]);
        self.out(vec![], vec![s], rg, Op::Sum { x }, "sum")
    }

    pub fn mean(&mut self, x: TensorId) -> Result<TensorId> {
        let tx = &self.nodes[x.0].tensor;
        if tx.data.is_empty() {
            return Err(TensorError::Invalid("mean of empty tensor".into()));
        }
        let s = tx.data.iter().sum::<f64>() / tx.data.len() as f64;
        let rg = self.rg(&[x]);
        self.out(vec![], vec![s], rg, Op::Mean { x }, "mean")
    }

    // ── backward ─────────────────────────────────────────────────────

    /// Populates `grad` on every `requires_grad` tensor reachable from
    /// `root`, accumulating additively across fan-out.
    pub fn backward(&mut self, root: TensorId) -> Result<()> {
        if self.backward_done {
            return Err(TensorError::Invalid("backward already replayed on this tape".into()));
        }
        if !self.nodes[root.0].tensor.is_scalar() {
            return Err(TensorError::Invalid(format!(
                "backward root must be scalar, got shape {:?}",
                self.nodes[root.0].tensor.shape
            )));
        }
        self.backward_done = true;

        let mut grads: Vec<Option<Vec<f64>>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[root.0] = Some(vec![1.0]);

        for idx in (0..=root.0).rev() {
            if !self.nodes[idx].tensor.requires_grad {
                continue;
            }
            let g = match grads[idx].take() {
                Some(g) => g,
                None => continue,
            };
            self.propagate(idx, &g, &mut grads);
            self.nodes[idx].tensor.grad = Some(g);
        }
        Ok(())
    }

    fn propagate(&self, idx: usize, g: &[f64], grads: &mut Vec<Option<Vec<f64>>>) {
        let rg = |id: TensorId| self.nodes[id.0].tensor.requires_grad;
        let numel = |id: TensorId| self.nodes[id.0].tensor.numel();
        macro_rules! acc {
            ($id:expr) => {
                grads[$id.0].get_or_insert_with(|| vec![0.0; numel($id)])
            };
        }
        match &self.nodes[idx].op {
            Op::Leaf => {}
            Op::Add { a, b } => {
                for id in [*a, *b] {
                    if rg(id) {
                        let dst = acc!(id);
                        for (d, &v) in dst.iter_mut().zip(g) {
                            *d += v;
                        }
                    }
                }
            }
            Op::AddRow { x, bias } => {
                if rg(*x) {
                    let dst = acc!(*x);
                    for (d, &v) in dst.iter_mut().zip(g) {
                        *d += v;
                    }
                }
                if rg(*bias) {
                    let d = numel(*bias);
                    let dst = acc!(*bias);
                    for (i, &v) in g.iter().enumerate() {
                        dst[i % d] += v;
                    }
                }
            }
            Op::Mul { a, b } => {
                if rg(*a) {
                    let other = self.data_of(*b);
                    let dst = acc!(*a);
                    for i in 0..g.len() {
                        dst[i] += g[i] * other[i];
                    }
                }
                if rg(*b) {
                    let other = self.data_of(*a);
                    let dst = acc!(*b);
                    for i in 0..g.len() {
                        dst[i] += g[i] * other[i];
                    }
                }
            }
            Op::Scale { x, c } => {
                if rg(*x) {
                    let dst = acc!(*x);
                    for (d, &v) in dst.iter_mut().zip(g) {
                        *d += v * c;
                    }
                }
            }
            Op::MulMask { x, mask } => {
                if rg(*x) {
                    let dst = acc!(*x);
                    for i in 0..g.len() {
                        dst[i] += g[i] * mask[i];
                    }
                }
            }
            Op::MatMul { a, b, m, k, n } => {
                if rg(*a) {
                    let bd = self.data_of(*b);
                    let dst = acc!(*a);
                    kernels::mm_nt(dst, g, bd, *m, *n, *k);
                }
                if rg(*b) {
                    let ad = self.data_of(*a);
                    let dst = acc!(*b);
                    kernels::mm_tn(dst, ad, g, *m, *k, *n);
                }
            }
            Op::MatMulNT { a, b, m, k, n } => {
                // C = A·Bᵀ with B[n×k]: dA = dC·B, dB = dCᵀ·A
                if rg(*a) {
                    let bd = self.data_of(*b);
                    let dst = acc!(*a);
                    kernels::mm_nn(dst, g, bd, *m, *n, *k);
                }
                if rg(*b) {
                    let ad = self.data_of(*a);
                    let dst = acc!(*b);
                    kernels::mm_tn(dst, g, ad, *m, *n, *k);
                }
            }
            Op::RowScale { x, s, rows, cols } => {
                if rg(*x) {
                    let sd = self.data_of(*s);
                    let dst = acc!(*x);
                    for i in 0..*rows {
                        let si = sd[i];
                        for j in 0..*cols {
                            dst[i * cols + j] += g[i * cols + j] * si;
                        }
                    }
                }
                if rg(*s) {
                    let xd = self.data_of(*x);
                    let dst = acc!(*s);
                    for i in 0..*rows {
                        let mut acc = 0.0;
                        for j in 0..*cols {
                            acc += g[i * cols + j] * xd[i * cols + j];
                        }
                        dst[i] += acc;
                    }
                }
            }
            Op::SoftmaxRows { x, rows, cols } => {
                if rg(*x) {
                    let y = &self.nodes[idx].tensor.data;
                    let dst = acc!(*x);
                    for i in 0..*rows {
                        let yr = &y[i * cols..(i + 1) * cols];
                        let gr = &g[i * cols..(i + 1) * cols];
                        let dot: f64 = yr.iter().zip(gr).map(|(a, b)| a * b).sum();
                        for j in 0..*cols {
                            dst[i * cols + j] += yr[j] * (gr[j] - dot);
                        }
                    }
                }
            }
            Op::MaskedSoftmaxRows { x, allowed, rows, cols } => {
                if rg(*x) {
                    let y = &self.nodes[idx].tensor.data;
                    let dst = acc!(*x);
                    for i in 0..*rows {
                        let yr = &y[i * cols..(i + 1) * cols];
                        let gr = &g[i * cols..(i + 1) * cols];
                        let sel = &allowed[i * cols..(i + 1) * cols];
                        let dot: f64 = yr
                            .iter()
                            .zip(gr)
                            .zip(sel)
                            .filter(|(_, &a)| a)
                            .map(|((y, g), _)| y * g)
                            .sum();
                        for j in 0..*cols {
                            if sel[j] {
                                dst[i * cols + j] += yr[j] * (gr[j] - dot);
                            }
                        }
                    }
                }
            }
            Op::LayerNorm { x, gain, bias, rows, cols, inv_std, xhat } => {
                let gd = self.data_of(*gain);
                if rg(*gain) {
                    let dst = acc!(*gain);
                    for i in 0..*rows {
                        for j in 0..*cols {
                            dst[j] += g[i * cols + j] * xhat[i * cols + j];
                        }
                    }
                }
                if rg(*bias) {
                    let dst = acc!(*bias);
                    for i in 0..*rows {
                        for j in 0..*cols {
                            dst[j] += g[i * cols + j];
                        }
                    }
                }
                if rg(*x) {
                    let dst = acc!(*x);
                    let dn = *cols as f64;
                    for i in 0..*rows {
                        let inv = inv_std[i];
                        let hr = &xhat[i * cols..(i + 1) * cols];
                        let mut sum_dh = 0.0;
                        let mut sum_dh_h = 0.0;
                        for j in 0..*cols {
                            let dh = g[i * cols + j] * gd[j];
                            sum_dh += dh;
                            sum_dh_h += dh * hr[j];
                        }
                        for j in 0..*cols {
                            let dh = g[i * cols + j] * gd[j];
                            dst[i * cols + j] += inv * (dh - sum_dh / dn - hr[j] * sum_dh_h / dn);
                        }
                    }
                }
            }
            Op::Cosine { u, v, saved } => {
                let dg = g[0];
                let (nu, nv, c) = (saved.norm_u, saved.norm_v, saved.cos);
                if rg(*u) {
                    let ud = self.data_of(*u);
                    let vd = self.data_of(*v);
                    let dst = acc!(*u);
                    if !saved.degenerate {
                        for j in 0..ud.len() {
                            dst[j] += dg * (vd[j] / (nu * nv) - c * ud[j] / (nu * nu));
                        }
                    }
                }
                if rg(*v) {
                    let ud = self.data_of(*u);
                    let vd = self.data_of(*v);
                    let dst = acc!(*v);
                    if !saved.degenerate {
                        for j in 0..vd.len() {
                            dst[j] += dg * (ud[j] / (nu * nv) - c * vd[j] / (nv * nv));
                        }
                    }
                }
            }
            Op::CosineRows { rep, f, rows, cols, saved } => {
                if rg(*rep) {
                    let repd = self.data_of(*rep);
                    let fd = self.data_of(*f);
                    let dst = acc!(*rep);
                    for i in 0..*rows {
                        let s = &saved[i];
                        if s.degenerate || g[i] == 0.0 {
                            continue;
                        }
                        let fr = &fd[i * cols..(i + 1) * cols];
                        for j in 0..*cols {
                            dst[j] += g[i] * (fr[j] / (s.norm_u * s.norm_v) - s.cos * repd[j] / (s.norm_u * s.norm_u));
                        }
                    }
                }
                if rg(*f) {
                    let repd = self.data_of(*rep);
                    let fd = self.data_of(*f);
                    let dst = acc!(*f);
                    for i in 0..*rows {
                        let s = &saved[i];
                        if s.degenerate || g[i] == 0.0 {
                            continue;
                        }
                        let fr = &fd[i * cols..(i + 1) * cols];
                        for j in 0..*cols {
                            dst[i * cols + j] +=
                                g[i] * (repd[j] / (s.norm_u * s.norm_v) - s.cos * fr[j] / (s.norm_v * s.norm_v));
                        }
                    }
                }
            }
            Op::MaskGate { cos, dm_dc } => {
                if rg(*cos) {
                    let dst = acc!(*cos);
                    for j in 0..g.len() {
                        dst[j] += g[j] * dm_dc[j];
                    }
                }
            }
            Op::Embedding { table, ids, cols } => {
                if rg(*table) {
                    let dst = acc!(*table);
                    for (i, &id) in ids.iter().enumerate() {
                        for j in 0..*cols {
                            dst[id * cols + j] += g[i * cols + j];
                        }
                    }
                }
            }
            Op::Relu { x } => {
                if rg(*x) {
                    let xd = self.data_of(*x);
                    let dst = acc!(*x);
                    for i in 0..g.len() {
                        if xd[i] > 0.0 {
                            dst[i] += g[i];
                        }
                    }
                }
            }
            Op::ConcatCols { parts, rows, widths } => {
                let total: usize = widths.iter().sum();
                let mut offset = 0;
                for (&p, &w) in parts.iter().zip(widths) {
                    if rg(p) {
                        let dst = acc!(p);
                        for i in 0..*rows {
                            for j in 0..w {
                                dst[i * w + j] += g[i * total + offset + j];
                            }
                        }
                    }
                    offset += w;
                }
            }
            Op::CrossEntropy { logits, targets, pad_id, probs, active, cols } => {
                if rg(*logits) {
                    let dg = g[0] / *active as f64;
                    let dst = acc!(*logits);
                    for (i, &y) in targets.iter().enumerate() {
                        if y == *pad_id {
                            continue;
                        }
                        for j in 0..*cols {
                            let indicator = if j == y { 1.0 } else { 0.0 };
                            dst[i * cols + j] += dg * (probs[i * cols + j] - indicator);
                        }
                    }
                }
            }
            Op::Sum { x } => {
                if rg(*x) {
                    let dst = acc!(*x);
                    for d in dst.iter_mut() {
                        *d += g[0];
                    }
                }
            }
            Op::Mean { x } => {
                if rg(*x) {
                    let dst = acc!(*x);
                    let s = g[0] / dst.len() as f64;
                    for d in dst.iter_mut() {
                        *d += s;
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests;
