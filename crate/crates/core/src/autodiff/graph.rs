use alloc::vec;
use alloc::vec::Vec;

use super::kernels::{axpy, gemm_acc, gemm_at_b_acc, transpose};
use super::{Scalar, Tensor};
use crate::error::{Error, Result};

/// Handle to a node of a [`Graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Marks an empty segment in max-pool argmax tables.
const NONE: u32 = u32::MAX;

/// Geometry of a stride-1 3D convolution over a channels-last voxel grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Conv3dShape {
    pub dims: [usize; 3],
    pub kernel: usize,
    pub padding: usize,
}

impl Conv3dShape {
    pub fn out_dims(&self) -> [usize; 3] {
        self.dims.map(|d| d + 2 * self.padding + 1 - self.kernel)
    }

    pub fn voxels(&self) -> usize {
        self.dims.iter().product()
    }
}

#[derive(Debug, Clone)]
enum Op<T> {
    Input,
    Param,
    MatMul(Var, Var),
    Linear { x: Var, w: Var, b: Option<Var> },
    Add(Var, Var),
    AddRow(Var, Var),
    Relu(Var),
    Sigmoid(Var),
    SegmentMax { x: Var, argmax: Vec<u32> },
    Conv3d { x: Var, w: Var, b: Var, shape: Conv3dShape, cols: Vec<T> },
    Concat(Vec<Var>),
    GatherRows { x: Var, index: Vec<u32> },
    GroupMean { x: Var, group: usize },
    BceLogits { logits: Var, targets: Vec<T> },
    BceProb { p: Var, targets: Vec<T> },
    WeightedSum { x: Var, weights: Vec<T> },
}

struct Node<T> {
    value: Tensor<T>,
    op: Op<T>,
    needs_grad: bool,
}

/// Reverse-mode autodiff tape. Values are computed eagerly as nodes are
/// added; [`Graph::backward`] fills gradients for every node that depends on
/// a parameter.
pub struct Graph<T: Scalar> {
    nodes: Vec<Node<T>>,
    grads: Vec<Option<Vec<T>>>,
}

impl<T: Scalar> Default for Graph<T> {
    fn default() -> Self {
        Self::new()
    }
}

/// Probability clamp for the probability-space cross-entropy.
pub const PROB_EPS: f64 = 1e-6;

fn mismatch(op: &'static str, lhs: &[usize], rhs: &[usize]) -> Error {
    Error::ShapeMismatch { op, lhs: lhs.to_vec(), rhs: rhs.to_vec() }
}

pub(crate) fn sigmoid<T: Scalar>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

impl<T: Scalar> Graph<T> {
    pub fn new() -> Self {
        Graph { nodes: Vec::new(), grads: Vec::new() }
    }

    fn push(&mut self, value: Tensor<T>, op: Op<T>, needs_grad: bool) -> Var {
        self.nodes.push(Node { value, op, needs_grad });
        self.grads.push(None);
        Var(self.nodes.len() - 1)
    }

    fn needs(&self, vars: &[Var]) -> bool {
        vars.iter().any(|v| self.nodes[v.0].needs_grad)
    }

    /// Constant input; no gradient is propagated into it.
    pub fn input(&mut self, t: Tensor<T>) -> Var {
        self.push(t, Op::Input, false)
    }

    /// Trainable leaf.
    pub fn param(&mut self, t: Tensor<T>) -> Var {
        self.push(t, Op::Param, true)
    }

    pub fn value(&self, v: Var) -> &Tensor<T> {
        &self.nodes[v.0].value
    }

    pub fn grad(&self, v: Var) -> Option<&[T]> {
        self.grads[v.0].as_deref()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn matrix(&self, v: Var, op: &'static str) -> Result<(usize, usize)> {
        let s = self.value(v).shape();
        if s.len() != 2 {
            return Err(Error::invalid(alloc::format!("{op} expects a matrix, got shape {s:?}")));
        }
        Ok((s[0], s[1]))
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (m, k) = self.matrix(a, "matmul")?;
        let (k2, n) = self.matrix(b, "matmul")?;
        if k != k2 {
            return Err(mismatch("matmul", self.value(a).shape(), self.value(b).shape()));
        }
        let mut out = vec![T::zero(); m * n];
        gemm_acc(self.value(a).data(), self.value(b).data(), &mut out, m, k, n);
        let ng = self.needs(&[a, b]);
        Ok(self.push(Tensor::new(vec![m, n], out)?, Op::MatMul(a, b), ng))
    }

    /// `x · w + b` with `x` of shape `[n, in]`, `w` `[in, out]`, `b` `[out]`.
    pub fn linear(&mut self, x: Var, w: Var, b: Option<Var>) -> Result<Var> {
        let (m, k) = self.matrix(x, "linear")?;
        let (k2, n) = self.matrix(w, "linear")?;
        if k != k2 {
            return Err(mismatch("linear", self.value(x).shape(), self.value(w).shape()));
        }
        let mut out = vec![T::zero(); m * n];
        if let Some(b) = b {
            let bv = self.value(b);
            if bv.len() != n {
                return Err(mismatch("linear bias", self.value(w).shape(), bv.shape()));
            }
            for row in out.chunks_exact_mut(n) {
                row.copy_from_slice(bv.data());
            }
        }
        gemm_acc(self.value(x).data(), self.value(w).data(), &mut out, m, k, n);
        let mut deps = vec![x, w];
        deps.extend(b);
        let ng = self.needs(&deps);
        Ok(self.push(Tensor::new(vec![m, n], out)?, Op::Linear { x, w, b }, ng))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let (va, vb) = (self.value(a), self.value(b));
        if va.shape() != vb.shape() {
            return Err(mismatch("add", va.shape(), vb.shape()));
        }
        let out: Vec<T> = va.data().iter().zip(vb.data()).map(|(x, y)| *x + *y).collect();
        let shape = va.shape().to_vec();
        let ng = self.needs(&[a, b]);
        Ok(self.push(Tensor::new(shape, out)?, Op::Add(a, b), ng))
    }

    /// Adds the vector `row` to every row of `a`.
    pub fn add_row(&mut self, a: Var, row: Var) -> Result<Var> {
        let (va, vr) = (self.value(a), self.value(row));
        let c = va.cols();
        if vr.len() != c {
            return Err(mismatch("add_row", va.shape(), vr.shape()));
        }
        let mut out = va.data().to_vec();
        for r in out.chunks_exact_mut(c.max(1)) {
            for (x, y) in r.iter_mut().zip(vr.data()) {
                *x += *y;
            }
        }
        let shape = va.shape().to_vec();
        let ng = self.needs(&[a, row]);
        Ok(self.push(Tensor::new(shape, out)?, Op::AddRow(a, row), ng))
    }

    pub fn relu(&mut self, x: Var) -> Var {
        let v = self.value(x);
        let out = Tensor::from_fn(v.shape().to_vec(), |i| v.data()[i].max(T::zero()));
        let ng = self.needs(&[x]);
        self.push(out, Op::Relu(x), ng)
    }

    pub fn sigmoid(&mut self, x: Var) -> Var {
        let v = self.value(x);
        let out = Tensor::from_fn(v.shape().to_vec(), |i| sigmoid(v.data()[i]));
        let ng = self.needs(&[x]);
        self.push(out, Op::Sigmoid(x), ng)
    }

    /// Per-segment, per-column maximum over the rows of `x` (`[n, f]`);
    /// row `i` belongs to segment `segments[i]`. Empty segments yield zeros;
    /// ties go to the lowest row.
    pub fn segment_max(&mut self, x: Var, segments: &[u32], count: usize) -> Result<Var> {
        let (n, f) = self.matrix(x, "segment_max")?;
        if segments.len() != n {
            return Err(mismatch("segment_max", self.value(x).shape(), &[segments.len()]));
        }
        if let Some(&s) = segments.iter().find(|&&s| s as usize >= count) {
            return Err(Error::invalid(alloc::format!("segment id {s} out of range {count}")));
        }
        let xv = self.value(x).data();
        let mut out = vec![T::zero(); count * f];
        let mut argmax = vec![NONE; count * f];
        for (i, &s) in segments.iter().enumerate() {
            let s = s as usize;
            let row = &xv[i * f..(i + 1) * f];
            let (o, a) = (&mut out[s * f..(s + 1) * f], &mut argmax[s * f..(s + 1) * f]);
            for j in 0..f {
                if a[j] == NONE || row[j] > o[j] {
                    o[j] = row[j];
                    a[j] = i as u32;
                }
            }
        }
        let ng = self.needs(&[x]);
        Ok(self.push(Tensor::new(vec![count, f], out)?, Op::SegmentMax { x, argmax }, ng))
    }

    /// Stride-1 convolution of a channels-last grid `x` (`[voxels, cin]`)
    /// with `w` (`[k³, cin, cout]`) and bias `b` (`[cout]`), zero padding.
    pub fn conv3d(&mut self, x: Var, w: Var, b: Var, shape: Conv3dShape) -> Result<Var> {
        let (g, cin) = self.matrix(x, "conv3d")?;
        let ws = self.value(w).shape().to_vec();
        let k = shape.kernel;
        if g != shape.voxels() || ws.len() != 3 || ws[0] != k * k * k || ws[1] != cin {
            return Err(mismatch("conv3d", self.value(x).shape(), &ws));
        }
        if k == 0 || shape.dims.iter().any(|&d| d + 2 * shape.padding < k) {
            return Err(Error::invalid(alloc::format!("kernel {k} too large for grid {:?}", shape.dims)));
        }
        let cout = ws[2];
        if self.value(b).len() != cout {
            return Err(mismatch("conv3d bias", &ws, self.value(b).shape()));
        }
        let od = shape.out_dims();
        let o: usize = od.iter().product();
        let width = k * k * k * cin;
        let cols = im2col(self.value(x).data(), shape, cin);
        let mut out = vec![T::zero(); o * cout];
        for row in out.chunks_exact_mut(cout) {
            row.copy_from_slice(self.value(b).data());
        }
        gemm_acc(&cols, self.value(w).data(), &mut out, o, width, cout);
        let ng = self.needs(&[x, w, b]);
        let cols = if ng { cols } else { Vec::new() };
        Ok(self.push(Tensor::new(vec![o, cout], out)?, Op::Conv3d { x, w, b, shape, cols }, ng))
    }

    /// Column-wise concatenation of matrices with equal row counts.
    pub fn concat(&mut self, parts: &[Var]) -> Result<Var> {
        let first = *parts.first().ok_or_else(|| Error::invalid("concat of nothing"))?;
        let (n, _) = self.matrix(first, "concat")?;
        let mut widths = Vec::with_capacity(parts.len());
        for &p in parts {
            let (r, c) = self.matrix(p, "concat")?;
            if r != n {
                return Err(mismatch("concat", self.value(first).shape(), self.value(p).shape()));
            }
            widths.push(c);
        }
        let total: usize = widths.iter().sum();
        let mut out = vec![T::zero(); n * total];
        let mut off = 0;
        for (&p, &c) in parts.iter().zip(&widths) {
            let src = self.value(p).data();
            for r in 0..n {
                out[r * total + off..r * total + off + c].copy_from_slice(&src[r * c..(r + 1) * c]);
            }
            off += c;
        }
        let ng = self.needs(parts);
        Ok(self.push(Tensor::new(vec![n, total], out)?, Op::Concat(parts.to_vec()), ng))
    }

    pub fn gather_rows(&mut self, x: Var, index: &[u32]) -> Result<Var> {
        let (m, f) = self.matrix(x, "gather_rows")?;
        if let Some(&i) = index.iter().find(|&&i| i as usize >= m) {
            return Err(Error::invalid(alloc::format!("row index {i} out of range {m}")));
        }
        let xv = self.value(x).data();
        let mut out = Vec::with_capacity(index.len() * f);
        for &i in index {
            out.extend_from_slice(&xv[i as usize * f..(i as usize + 1) * f]);
        }
        let ng = self.needs(&[x]);
        Ok(self.push(Tensor::new(vec![index.len(), f], out)?, Op::GatherRows { x, index: index.to_vec() }, ng))
    }

    /// Mean over consecutive groups of `group` rows.
    pub fn group_mean(&mut self, x: Var, group: usize) -> Result<Var> {
        let (n, f) = self.matrix(x, "group_mean")?;
        if group == 0 || n % group != 0 {
            return Err(Error::invalid(alloc::format!("{n} rows do not split into groups of {group}")));
        }
        let xv = self.value(x).data();
        let scale = T::one() / T::of(group as f64);
        let mut out = vec![T::zero(); n / group * f];
        for r in 0..n {
            axpy(scale, &xv[r * f..(r + 1) * f], &mut out[r / group * f..(r / group + 1) * f]);
        }
        let ng = self.needs(&[x]);
        Ok(self.push(Tensor::new(vec![n / group, f], out)?, Op::GroupMean { x, group }, ng))
    }

    /// Mean binary cross-entropy of logits against 0/1 targets.
    pub fn bce_with_logits(&mut self, logits: Var, targets: &[T]) -> Result<Var> {
        let z = self.value(logits);
        if z.len() != targets.len() || targets.is_empty() {
            return Err(mismatch("bce_with_logits", z.shape(), &[targets.len()]));
        }
        let total: T = z.data().iter().zip(targets).map(|(&z, &y)| bce_logit(z, y)).sum();
        let loss = total / T::of(targets.len() as f64);
        let ng = self.needs(&[logits]);
        Ok(self.push(Tensor::scalar(loss), Op::BceLogits { logits, targets: targets.to_vec() }, ng))
    }

    /// Mean binary cross-entropy of probabilities clamped to
    /// `[PROB_EPS, 1 − PROB_EPS]`.
    pub fn bce_prob(&mut self, p: Var, targets: &[T]) -> Result<Var> {
        let pv = self.value(p);
        if pv.len() != targets.len() || targets.is_empty() {
            return Err(mismatch("bce_prob", pv.shape(), &[targets.len()]));
        }
        let total: T = pv.data().iter().zip(targets).map(|(&p, &y)| bce_prob(p, y)).sum();
        let loss = total / T::of(targets.len() as f64);
        let ng = self.needs(&[p]);
        Ok(self.push(Tensor::scalar(loss), Op::BceProb { p, targets: targets.to_vec() }, ng))
    }

    /// `Σ xᵢ·wᵢ` for a constant weight vector.
    pub fn weighted_sum(&mut self, x: Var, weights: &[T]) -> Result<Var> {
        let xv = self.value(x);
        if xv.len() != weights.len() {
            return Err(mismatch("weighted_sum", xv.shape(), &[weights.len()]));
        }
        let s: T = xv.data().iter().zip(weights).map(|(a, b)| *a * *b).sum();
        let ng = self.needs(&[x]);
        Ok(self.push(Tensor::scalar(s), Op::WeightedSum { x, weights: weights.to_vec() }, ng))
    }

    fn accumulate(&mut self, v: Var, f: impl FnOnce(&mut [T], &[Node<T>])) {
        if !self.nodes[v.0].needs_grad {
            return;
        }
        let n = self.nodes[v.0].value.len();
        let g = self.grads[v.0].get_or_insert_with(|| vec![T::zero(); n]);
        f(g, &self.nodes);
    }

    /// Back-propagates from the scalar `loss`. Gradients of earlier calls are
    /// cleared first.
    pub fn backward(&mut self, loss: Var) -> Result<()> {
        if self.value(loss).len() != 1 {
            return Err(Error::invalid(alloc::format!(
                "backward needs a scalar loss, got shape {:?}",
                self.value(loss).shape()
            )));
        }
        for g in &mut self.grads {
            *g = None;
        }
        if !self.nodes[loss.0].needs_grad {
            return Ok(());
        }
        self.grads[loss.0] = Some(vec![T::one()]);
        for i in (0..=loss.0).rev() {
            let Some(gy) = self.grads[i].take() else { continue };
            if !self.nodes[i].needs_grad {
                self.grads[i] = Some(gy);
                continue;
            }
            let op = core::mem::replace(&mut self.nodes[i].op, Op::Input);
            self.backprop(i, &op, &gy);
            self.nodes[i].op = op;
            self.grads[i] = Some(gy);
        }
        Ok(())
    }

    fn backprop(&mut self, i: usize, op: &Op<T>, gy: &[T]) {
        match op {
            Op::Input | Op::Param => {}
            Op::MatMul(a, b) => {
                let (m, k) = dims2(&self.nodes[a.0].value);
                let n = self.nodes[b.0].value.cols();
                let (a, b) = (*a, *b);
                self.accumulate(a, |g, nodes| {
                    let bt = transpose(nodes[b.0].value.data(), k, n);
                    gemm_acc(gy, &bt, g, m, n, k);
                });
                self.accumulate(b, |g, nodes| gemm_at_b_acc(nodes[a.0].value.data(), gy, g, m, k, n));
            }
            Op::Linear { x, w, b } => {
                let (m, k) = dims2(&self.nodes[x.0].value);
                let n = self.nodes[w.0].value.cols();
                let (x, w) = (*x, *w);
                self.accumulate(x, |g, nodes| {
                    let wt = transpose(nodes[w.0].value.data(), k, n);
                    gemm_acc(gy, &wt, g, m, n, k);
                });
                self.accumulate(w, |g, nodes| gemm_at_b_acc(nodes[x.0].value.data(), gy, g, m, k, n));
                if let Some(b) = *b {
                    self.accumulate(b, |g, _| {
                        for row in gy.chunks_exact(n) {
                            axpy(T::one(), row, g);
                        }
                    });
                }
            }
            Op::Add(a, b) => {
                for v in [*a, *b] {
                    self.accumulate(v, |g, _| axpy(T::one(), gy, g));
                }
            }
            Op::AddRow(a, row) => {
                self.accumulate(*a, |g, _| axpy(T::one(), gy, g));
                let c = self.nodes[row.0].value.len().max(1);
                self.accumulate(*row, |g, _| {
                    for r in gy.chunks_exact(c) {
                        axpy(T::one(), r, g);
                    }
                });
            }
            Op::Relu(x) => {
                self.accumulate(*x, |g, nodes| {
                    for ((gx, &y), &d) in g.iter_mut().zip(nodes[i].value.data()).zip(gy) {
                        if y > T::zero() {
                            *gx += d;
                        }
                    }
                });
            }
            Op::Sigmoid(x) => {
                self.accumulate(*x, |g, nodes| {
                    for ((gx, &s), &d) in g.iter_mut().zip(nodes[i].value.data()).zip(gy) {
                        *gx += d * s * (T::one() - s);
                    }
                });
            }
            Op::SegmentMax { x, argmax } => {
                let f = self.nodes[x.0].value.cols();
                self.accumulate(*x, |g, _| {
                    for (slot, (&a, &d)) in argmax.iter().zip(gy).enumerate() {
                        if a != NONE {
                            g[a as usize * f + slot % f] += d;
                        }
                    }
                });
            }
            Op::Conv3d { x, w, b, shape, cols } => {
                let cin = self.nodes[x.0].value.cols();
                let k3 = shape.kernel.pow(3);
                let cout = self.nodes[w.0].value.shape()[2];
                let o: usize = shape.out_dims().iter().product();
                let width = k3 * cin;
                let (x, w) = (*x, *w);
                self.accumulate(w, |g, _| gemm_at_b_acc(cols, gy, g, o, width, cout));
                self.accumulate(*b, |g, _| {
                    for row in gy.chunks_exact(cout) {
                        axpy(T::one(), row, g);
                    }
                });
                self.accumulate(x, |g, nodes| {
                    let wt = transpose(nodes[w.0].value.data(), width, cout);
                    let mut dcols = vec![T::zero(); o * width];
                    gemm_acc(gy, &wt, &mut dcols, o, cout, width);
                    col2im_acc(&dcols, *shape, cin, g);
                });
            }
            Op::Concat(parts) => {
                let total = self.nodes[i].value.cols();
                let n = self.nodes[i].value.rows();
                let mut off = 0;
                for &p in parts {
                    let c = self.nodes[p.0].value.cols();
                    self.accumulate(p, |g, _| {
                        for r in 0..n {
                            axpy(T::one(), &gy[r * total + off..r * total + off + c], &mut g[r * c..(r + 1) * c]);
                        }
                    });
                    off += c;
                }
            }
            Op::GatherRows { x, index } => {
                let f = self.nodes[x.0].value.cols();
                self.accumulate(*x, |g, _| {
                    for (r, &src) in index.iter().enumerate() {
                        axpy(T::one(), &gy[r * f..(r + 1) * f], &mut g[src as usize * f..(src as usize + 1) * f]);
                    }
                });
            }
            Op::GroupMean { x, group } => {
                let f = self.nodes[x.0].value.cols();
                let n = self.nodes[x.0].value.rows();
                let scale = T::one() / T::of(*group as f64);
                self.accumulate(*x, |g, _| {
                    for r in 0..n {
                        axpy(scale, &gy[r / group * f..(r / group + 1) * f], &mut g[r * f..(r + 1) * f]);
                    }
                });
            }
            Op::BceLogits { logits, targets } => {
                let scale = gy[0] / T::of(targets.len() as f64);
                self.accumulate(*logits, |g, nodes| {
                    for ((gx, &z), &y) in g.iter_mut().zip(nodes[logits.0].value.data()).zip(targets) {
                        *gx += scale * (sigmoid(z) - y);
                    }
                });
            }
            Op::BceProb { p, targets } => {
                let scale = gy[0] / T::of(targets.len() as f64);
                let eps = T::of(PROB_EPS);
                self.accumulate(*p, |g, nodes| {
                    for ((gx, &pv), &y) in g.iter_mut().zip(nodes[p.0].value.data()).zip(targets) {
                        if pv > eps && pv < T::one() - eps {
                            *gx += scale * (pv - y) / (pv * (T::one() - pv));
                        }
                    }
                });
            }
            Op::WeightedSum { x, weights } => {
                self.accumulate(*x, |g, _| axpy(gy[0], weights, g));
            }
        }
    }
}

fn dims2<T: Scalar>(t: &Tensor<T>) -> (usize, usize) {
    (t.rows(), t.cols())
}

pub(crate) fn bce_logit<T: Scalar>(z: T, y: T) -> T {
    z.max(T::zero()) - z * y + (T::one() + (-z.abs()).exp()).ln()
}

pub(crate) fn bce_prob<T: Scalar>(p: T, y: T) -> T {
    let eps = T::of(PROB_EPS);
    let p = p.max(eps).min(T::one() - eps);
    -(y * p.ln() + (T::one() - y) * (T::one() - p).ln())
}

/// Rows of kernel-window neighborhoods: output voxel `o` gets the inputs at
/// every kernel offset (x-major, then y, then z), zeros outside the grid.
fn im2col<T: Scalar>(x: &[T], s: Conv3dShape, cin: usize) -> Vec<T> {
    let o: usize = s.out_dims().iter().product();
    let width = s.kernel.pow(3) * cin;
    let mut cols = vec![T::zero(); o * width];
    for_each_tap(s, |o, tap, src| {
        cols[o * width + tap * cin..o * width + (tap + 1) * cin].copy_from_slice(&x[src * cin..(src + 1) * cin]);
    });
    cols
}

fn col2im_acc<T: Scalar>(dcols: &[T], s: Conv3dShape, cin: usize, g: &mut [T]) {
    let width = s.kernel.pow(3) * cin;
    for_each_tap(s, |o, tap, src| {
        axpy(T::one(), &dcols[o * width + tap * cin..o * width + (tap + 1) * cin], &mut g[src * cin..(src + 1) * cin]);
    });
}

/// Calls `f(output voxel, kernel tap, input voxel)` for every in-grid tap.
fn for_each_tap(s: Conv3dShape, mut f: impl FnMut(usize, usize, usize)) {
    let [ox, oy, oz] = s.out_dims();
    let [gx, gy, gz] = s.dims.map(|d| d as isize);
    let (k, p) = (s.kernel as isize, s.padding as isize);
    for a in 0..ox as isize {
        for b in 0..oy as isize {
            for c in 0..oz as isize {
                let o = ((a as usize) * oy + b as usize) * oz + c as usize;
                let mut tap = 0;
                for dx in 0..k {
                    for dy in 0..k {
                        for dz in 0..k {
                            let (ix, iy, iz) = (a + dx - p, b + dy - p, c + dz - p);
                            if ix >= 0 && ix < gx && iy >= 0 && iy < gy && iz >= 0 && iz < gz {
                                f(o, tap, ((ix * gy + iy) * gz + iz) as usize);
                            }
                            tap += 1;
                        }
                    }
                }
            }
        }
    }
}
