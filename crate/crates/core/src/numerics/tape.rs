//! Reverse-mode differentiation over a dynamically recorded operation list.
//!
//! Every operation appends a node holding its output value and enough saved
//! state to compute its adjoint. Node indices are creation order, which is a
//! valid topological order, so the backward pass is a single reverse sweep.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use super::kernels::{self, ConvGeom};
use super::{ParamId, ParamStore, Tensor};
use crate::error::{Error, Result};

pub const BN_EPS: f64 = 1e-5;

#[derive(Debug)]
enum Op {
    Leaf,
    GraphMix { adj: usize, x: usize },
    TemporalConv { x: usize, w: usize, b: Option<usize>, geom: ConvGeom },
    Relu { x: usize },
    BatchNorm { x: usize, gamma: usize, beta: usize, xhat: Vec<f64>, inv_std: Vec<f64>, train: bool },
    GlobalAvgPool { x: usize },
    Linear { x: usize, w: usize, b: Option<usize> },
    Add { a: usize, b: usize },
    Mul { a: usize, b: usize },
    Scale { x: usize, factor: f64 },
    Select { x: usize, index: usize },
    GatherJoints { x: usize, indices: Vec<usize> },
    GroupMean { x: usize, group: usize },
    Softmax { x: usize },
    CrossEntropy { x: usize, labels: Vec<usize>, probs: Vec<f64> },
    Sum { x: usize },
}

struct Node {
    value: Rc<Tensor>,
    op: Op,
    param: Option<ParamId>,
}

/// Recording of one forward evaluation.
#[derive(Default)]
pub struct Tape {
    nodes: RefCell<Vec<Node>>,
    param_leaves: RefCell<HashMap<ParamId, usize>>,
}

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy)]
pub struct Var<'t> {
    tape: &'t Tape,
    id: usize,
}

impl std::fmt::Debug for Var<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Var")
            .field("id", &self.id)
            .field("shape", &self.shape())
            .finish()
    }
}

/// Per-channel running statistics of a batch-normalization layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunningStats {
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
}

impl RunningStats {
    pub fn new(channels: usize) -> Self {
        RunningStats {
            mean: vec![0.0; channels],
            var: vec![1.0; channels],
        }
    }
}

/// Batch-normalization mode. Training updates the running statistics in place.
pub enum NormMode<'a> {
    Train { running: &'a mut RunningStats, momentum: f64 },
    Eval { running: &'a RunningStats },
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn push(&self, value: Tensor, op: Op, op_name: &'static str) -> Result<Var<'_>> {
        if !value.all_finite() {
            return Err(Error::NonFinite { op: op_name });
        }
        let mut nodes = self.nodes.borrow_mut();
        nodes.push(Node {
            value: Rc::new(value),
            op,
            param: None,
        });
        Ok(Var {
            tape: self,
            id: nodes.len() - 1,
        })
    }

    fn value(&self, id: usize) -> Rc<Tensor> {
        Rc::clone(&self.nodes.borrow()[id].value)
    }

    /// Record a constant or input tensor.
    pub fn leaf(&self, value: Tensor) -> Result<Var<'_>> {
        self.push(value, Op::Leaf, "leaf")
    }

    /// Record a parameter as a leaf. Repeated calls for the same id return
    /// the same node, so shared parameters accumulate one gradient.
    pub fn param(&self, store: &ParamStore, id: ParamId) -> Result<Var<'_>> {
        if let Some(&node) = self.param_leaves.borrow().get(&id) {
            return Ok(Var { tape: self, id: node });
        }
        let var = self.leaf(store.get(id).value.clone())?;
        self.nodes.borrow_mut()[var.id].param = Some(id);
        self.param_leaves.borrow_mut().insert(id, var.id);
        Ok(var)
    }

    /// Reverse sweep from a one-element `root`. Gradients of parameter
    /// leaves are added into `store` when one is given.
    pub fn backward(&self, root: Var<'_>, store: Option<&mut ParamStore>) -> Result<Gradients> {
        if !std::ptr::eq(root.tape, self) {
            return Err(Error::contract("root belongs to a different tape"));
        }
        let nodes = self.nodes.borrow();
        if !nodes[root.id].value.is_scalar() {
            return Err(Error::contract(format!(
                "backward root must be scalar, got shape {:?}",
                nodes[root.id].value.shape()
            )));
        }
        let mut grads: Vec<Option<Tensor>> = (0..nodes.len()).map(|_| None).collect();
        grads[root.id] = Some(Tensor::ones(nodes[root.id].value.shape().to_vec()));

        for id in (0..=root.id).rev() {
            let Some(g) = grads[id].take() else { continue };
            backprop_node(&nodes, id, &g, &mut grads)?;
            grads[id] = Some(g);
        }

        if let Some(store) = store {
            for (i, node) in nodes.iter().enumerate() {
                if let (Some(pid), Some(g)) = (node.param, &grads[i]) {
                    store.accumulate_grad(pid, g)?;
                }
            }
        }
        Ok(Gradients { grads })
    }
}

/// Adjoints of every node reached by a backward sweep.
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    /// Gradient with respect to `var`, zeros if the root does not depend on it.
    pub fn wrt(&self, var: Var<'_>) -> Tensor {
        match &self.grads[var.id] {
            Some(g) => g.clone(),
            None => Tensor::zeros(var.shape()),
        }
    }
}

fn accumulate(grads: &mut [Option<Tensor>], id: usize, g: Tensor) -> Result<()> {
    match &mut grads[id] {
        Some(existing) => existing.add_assign(&g),
        slot @ None => {
            *slot = Some(g);
            Ok(())
        }
    }
}

fn backprop_node(nodes: &[Node], id: usize, g: &Tensor, grads: &mut [Option<Tensor>]) -> Result<()> {
    let node = &nodes[id];
    let val = |i: usize| -> &Tensor { &nodes[i].value };
    match &node.op {
        Op::Leaf => {}
        Op::GraphMix { adj, x } => {
            let a = val(*adj);
            let v = a.shape()[0];
            let (gx, ga) = kernels::graph_mix_backward(a.data(), v, val(*x).data(), g.data());
            accumulate(grads, *x, Tensor::new(val(*x).shape().to_vec(), gx)?)?;
            accumulate(grads, *adj, Tensor::new(a.shape().to_vec(), ga)?)?;
        }
        Op::TemporalConv { x, w, b, geom } => {
            let (gx, gw, gb) = kernels::conv_backward(geom, val(*x).data(), val(*w).data(), g.data());
            accumulate(grads, *x, Tensor::new(val(*x).shape().to_vec(), gx)?)?;
            accumulate(grads, *w, Tensor::new(val(*w).shape().to_vec(), gw)?)?;
            if let Some(b) = b {
                accumulate(grads, *b, Tensor::new(val(*b).shape().to_vec(), gb)?)?;
            }
        }
        Op::Relu { x } => {
            let gx = val(*x).zip_map(g, |xv, gv| if xv > 0.0 { gv } else { 0.0 })?;
            accumulate(grads, *x, gx)?;
        }
        Op::BatchNorm { x, gamma, beta, xhat, inv_std, train } => {
            let shape = val(*x).shape().to_vec();
            let (n, c) = (shape[0], shape[1]);
            let plane: usize = shape[2..].iter().product();
            let gam = val(*gamma).data();
            let gd = g.data();
            let mut gx = vec![0.0; gd.len()];
            let mut ggamma = vec![0.0; c];
            let mut gbeta = vec![0.0; c];
            let m = (n * plane) as f64;
            for ci in 0..c {
                let mut sum_g = 0.0;
                let mut sum_gx = 0.0;
                for ni in 0..n {
                    let off = (ni * c + ci) * plane;
                    for k in off..off + plane {
                        sum_g += gd[k];
                        sum_gx += gd[k] * xhat[k];
                    }
                }
                ggamma[ci] = sum_gx;
                gbeta[ci] = sum_g;
                let scale = gam[ci] * inv_std[ci];
                for ni in 0..n {
                    let off = (ni * c + ci) * plane;
                    for k in off..off + plane {
                        gx[k] = if *train {
                            scale * (gd[k] - sum_g / m - xhat[k] * sum_gx / m)
                        } else {
                            scale * gd[k]
                        };
                    }
                }
            }
            accumulate(grads, *x, Tensor::new(shape, gx)?)?;
            accumulate(grads, *gamma, Tensor::new(vec![c], ggamma)?)?;
            accumulate(grads, *beta, Tensor::new(vec![c], gbeta)?)?;
        }
        Op::GlobalAvgPool { x } => {
            let shape = val(*x).shape().to_vec();
            let plane = shape[2] * shape[3];
            let inv = 1.0 / plane as f64;
            let mut gx = Vec::with_capacity(shape.iter().product());
            for &gv in g.data() {
                gx.extend(std::iter::repeat_n(gv * inv, plane));
            }
            accumulate(grads, *x, Tensor::new(shape, gx)?)?;
        }
        Op::Linear { x, w, b } => {
            let xv = val(*x);
            let wv = val(*w);
            let (rows, features) = (xv.shape()[0], xv.shape()[1]);
            let outputs = wv.shape()[0];
            let mut gx = vec![0.0; rows * features];
            let mut gw = vec![0.0; outputs * features];
            let mut gb = vec![0.0; outputs];
            for r in 0..rows {
                for k in 0..outputs {
                    let gv = g.data()[r * outputs + k];
                    gb[k] += gv;
                    for f in 0..features {
                        gx[r * features + f] += gv * wv.data()[k * features + f];
                        gw[k * features + f] += gv * xv.data()[r * features + f];
                    }
                }
            }
            accumulate(grads, *x, Tensor::new(xv.shape().to_vec(), gx)?)?;
            accumulate(grads, *w, Tensor::new(wv.shape().to_vec(), gw)?)?;
            if let Some(b) = b {
                accumulate(grads, *b, Tensor::new(vec![outputs], gb)?)?;
            }
        }
        Op::Add { a, b } => {
            accumulate(grads, *a, g.clone())?;
            accumulate(grads, *b, g.clone())?;
        }
        Op::Mul { a, b } => {
            accumulate(grads, *a, g.zip_map(val(*b), |gv, bv| gv * bv)?)?;
            accumulate(grads, *b, g.zip_map(val(*a), |gv, av| gv * av)?)?;
        }
        Op::Scale { x, factor } => {
            accumulate(grads, *x, g.map(|gv| gv * factor))?;
        }
        Op::Select { x, index } => {
            let shape = val(*x).shape().to_vec();
            let block = g.numel();
            let mut gx = vec![0.0; shape.iter().product()];
            gx[index * block..(index + 1) * block].copy_from_slice(g.data());
            accumulate(grads, *x, Tensor::new(shape, gx)?)?;
        }
        Op::GatherJoints { x, indices } => {
            let shape = val(*x).shape().to_vec();
            let v = shape[3];
            let s = indices.len();
            let rows = g.numel() / s;
            let mut gx = vec![0.0; shape.iter().product()];
            for r in 0..rows {
                for (k, &j) in indices.iter().enumerate() {
                    gx[r * v + j] += g.data()[r * s + k];
                }
            }
            accumulate(grads, *x, Tensor::new(shape, gx)?)?;
        }
        Op::GroupMean { x, group } => {
            let shape = val(*x).shape().to_vec();
            let features = shape[1];
            let inv = 1.0 / *group as f64;
            let mut gx = vec![0.0; shape.iter().product()];
            for (r, row) in gx.chunks_mut(features).enumerate() {
                let src = &g.data()[(r / group) * features..(r / group + 1) * features];
                for (d, s) in row.iter_mut().zip(src) {
                    *d = s * inv;
                }
            }
            accumulate(grads, *x, Tensor::new(shape, gx)?)?;
        }
        Op::Softmax { x } => {
            let y = &node.value;
            let k = y.shape()[1];
            let mut gx = vec![0.0; y.numel()];
            for ((yr, gr), out) in y.data().chunks(k).zip(g.data().chunks(k)).zip(gx.chunks_mut(k)) {
                let inner: f64 = yr.iter().zip(gr).map(|(a, b)| a * b).sum();
                for ((o, &yv), &gv) in out.iter_mut().zip(yr).zip(gr) {
                    *o = yv * (gv - inner);
                }
            }
            accumulate(grads, *x, Tensor::new(y.shape().to_vec(), gx)?)?;
        }
        Op::CrossEntropy { x, labels, probs } => {
            let shape = val(*x).shape().to_vec();
            let k = shape[1];
            let scale = g.data()[0] / labels.len() as f64;
            let mut gx = probs.clone();
            for (r, &label) in labels.iter().enumerate() {
                gx[r * k + label] -= 1.0;
            }
            gx.iter_mut().for_each(|v| *v *= scale);
            accumulate(grads, *x, Tensor::new(shape, gx)?)?;
        }
        Op::Sum { x } => {
            let shape = val(*x).shape().to_vec();
            accumulate(grads, *x, Tensor::full(shape, g.data()[0]))?;
        }
    }
    Ok(())
}

fn softmax_rows(data: &[f64], k: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(data.len());
    for row in data.chunks(k) {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = row.iter().map(|v| (v - max).exp()).collect();
        let total: f64 = exps.iter().sum();
        out.extend(exps.into_iter().map(|e| e / total));
    }
    out
}

/// Row-wise softmax of a `[N, K]` tensor, outside of any tape.
pub fn softmax(scores: &Tensor) -> Result<Tensor> {
    scores.expect_rank(2, "softmax")?;
    Tensor::new(scores.shape().to_vec(), softmax_rows(scores.data(), scores.shape()[1]))
}

impl<'t> Var<'t> {
    pub fn tape(&self) -> &'t Tape {
        self.tape
    }

    pub fn value(&self) -> Rc<Tensor> {
        self.tape.value(self.id)
    }

    pub fn shape(&self) -> Vec<usize> {
        self.tape.nodes.borrow()[self.id].value.shape().to_vec()
    }

    fn same_tape(&self, other: &Var<'_>) -> Result<()> {
        if std::ptr::eq(self.tape, other.tape) {
            Ok(())
        } else {
            Err(Error::contract("operands recorded on different tapes"))
        }
    }

    /// Neighbour aggregation over the joint axis:
    /// `out[n,c,t,v] = sum_j adj[v,j] * x[n,c,t,j]`.
    pub fn graph_mix(self, adj: Var<'t>) -> Result<Var<'t>> {
        self.same_tape(&adj)?;
        let x = self.value();
        let a = adj.value();
        x.expect_rank(4, "graph_mix")?;
        let v = x.shape()[3];
        if a.shape() != [v, v] {
            return Err(Error::dim(format!(
                "graph_mix: adjacency {:?} does not match joint extent {v}",
                a.shape()
            )));
        }
        let out = kernels::graph_mix(a.data(), v, x.data());
        self.tape.push(
            Tensor::new(x.shape().to_vec(), out)?,
            Op::GraphMix { adj: adj.id, x: self.id },
            "graph_mix",
        )
    }

    /// Per-joint 1-D convolution along time with zero padding `(t-1)/2`.
    /// `weight` is `[C_out, C_in, t]`, `bias` is `[C_out]`.
    pub fn temporal_conv(self, weight: Var<'t>, bias: Option<Var<'t>>, stride: usize) -> Result<Var<'t>> {
        self.same_tape(&weight)?;
        let x = self.value();
        let w = weight.value();
        x.expect_rank(4, "temporal_conv")?;
        w.expect_rank(3, "temporal_conv weight")?;
        let (n, c_in, t_in, v) = (x.shape()[0], x.shape()[1], x.shape()[2], x.shape()[3]);
        let (c_out, w_in, kernel) = (w.shape()[0], w.shape()[1], w.shape()[2]);
        if kernel % 2 == 0 {
            return Err(Error::config(format!("temporal kernel width {kernel} must be odd")));
        }
        if stride < 1 {
            return Err(Error::config("temporal stride must be at least 1"));
        }
        if w_in != c_in {
            return Err(Error::dim(format!(
                "temporal_conv: weight expects {w_in} input channels, input has {c_in}"
            )));
        }
        let bias_val = match bias {
            Some(b) => {
                self.same_tape(&b)?;
                let bv = b.value();
                if bv.shape() != [c_out] {
                    return Err(Error::dim(format!(
                        "temporal_conv: bias {:?} should be [{c_out}]",
                        bv.shape()
                    )));
                }
                Some(bv)
            }
            None => None,
        };
        let geom = ConvGeom::same(n, c_in, c_out, t_in, v, kernel, stride);
        let out = kernels::conv_forward(&geom, x.data(), w.data(), bias_val.as_deref().map(Tensor::data));
        self.tape.push(
            Tensor::new(vec![n, c_out, geom.t_out, v], out)?,
            Op::TemporalConv {
                x: self.id,
                w: weight.id,
                b: bias.map(|b| b.id),
                geom,
            },
            "temporal_conv",
        )
    }

    pub fn relu(self) -> Result<Var<'t>> {
        let out = self.value().map(|v| v.max(0.0));
        self.tape.push(out, Op::Relu { x: self.id }, "relu")
    }

    /// Per-channel normalization over every axis except axis 1.
    pub fn batch_norm(self, gamma: Var<'t>, beta: Var<'t>, mode: NormMode<'_>) -> Result<Var<'t>> {
        self.same_tape(&gamma)?;
        self.same_tape(&beta)?;
        let x = self.value();
        if x.ndim() < 2 {
            return Err(Error::dim("batch_norm needs at least [N, C]"));
        }
        let (n, c) = (x.shape()[0], x.shape()[1]);
        let plane: usize = x.shape()[2..].iter().product();
        let (gam, bet) = (gamma.value(), beta.value());
        if gam.shape() != [c] || bet.shape() != [c] {
            return Err(Error::dim(format!("batch_norm: scale/shift must be [{c}]")));
        }
        let count = n * plane;
        let xd = x.data();
        let mut mean = vec![0.0; c];
        let mut var = vec![0.0; c];
        let train = matches!(mode, NormMode::Train { .. });
        match mode {
            NormMode::Train { running, momentum } => {
                if running.mean.len() != c {
                    return Err(Error::dim("batch_norm: running stats channel mismatch"));
                }
                for ci in 0..c {
                    let mut s = 0.0;
                    for ni in 0..n {
                        let off = (ni * c + ci) * plane;
                        s += xd[off..off + plane].iter().sum::<f64>();
                    }
                    let mu = s / count as f64;
                    let mut ss = 0.0;
                    for ni in 0..n {
                        let off = (ni * c + ci) * plane;
                        ss += xd[off..off + plane].iter().map(|v| (v - mu) * (v - mu)).sum::<f64>();
                    }
                    mean[ci] = mu;
                    var[ci] = ss / count as f64;
                    let unbiased = if count > 1 { ss / (count - 1) as f64 } else { var[ci] };
                    running.mean[ci] = (1.0 - momentum) * running.mean[ci] + momentum * mu;
                    running.var[ci] = (1.0 - momentum) * running.var[ci] + momentum * unbiased;
                }
            }
            NormMode::Eval { running } => {
                if running.mean.len() != c {
                    return Err(Error::dim("batch_norm: running stats channel mismatch"));
                }
                mean.copy_from_slice(&running.mean);
                var.copy_from_slice(&running.var);
            }
        }
        let inv_std: Vec<f64> = var.iter().map(|v| 1.0 / (v + BN_EPS).sqrt()).collect();
        let mut xhat = vec![0.0; xd.len()];
        let mut out = vec![0.0; xd.len()];
        for ni in 0..n {
            for ci in 0..c {
                let off = (ni * c + ci) * plane;
                for k in off..off + plane {
                    xhat[k] = (xd[k] - mean[ci]) * inv_std[ci];
                    out[k] = gam.data()[ci] * xhat[k] + bet.data()[ci];
                }
            }
        }
        self.tape.push(
            Tensor::new(x.shape().to_vec(), out)?,
            Op::BatchNorm {
                x: self.id,
                gamma: gamma.id,
                beta: beta.id,
                xhat,
                inv_std,
                train,
            },
            "batch_norm",
        )
    }

    /// `[N, C, T, V] -> [N, C]`, averaging over time and joints.
    pub fn global_avg_pool(self) -> Result<Var<'t>> {
        let x = self.value();
        x.expect_rank(4, "global_avg_pool")?;
        let (n, c) = (x.shape()[0], x.shape()[1]);
        let plane = x.shape()[2] * x.shape()[3];
        let out: Vec<f64> = x
            .data()
            .chunks(plane)
            .map(|p| p.iter().sum::<f64>() / plane as f64)
            .collect();
        self.tape
            .push(Tensor::new(vec![n, c], out)?, Op::GlobalAvgPool { x: self.id }, "global_avg_pool")
    }

    /// `[N, F] x [K, F]^T + [K] -> [N, K]`.
    pub fn linear(self, weight: Var<'t>, bias: Option<Var<'t>>) -> Result<Var<'t>> {
        self.same_tape(&weight)?;
        let x = self.value();
        let w = weight.value();
        x.expect_rank(2, "linear")?;
        w.expect_rank(2, "linear weight")?;
        let (rows, features) = (x.shape()[0], x.shape()[1]);
        let outputs = w.shape()[0];
        if w.shape()[1] != features {
            return Err(Error::dim(format!(
                "linear: weight {:?} incompatible with input {:?}",
                w.shape(),
                x.shape()
            )));
        }
        let bias_val = match bias {
            Some(b) => {
                let bv = b.value();
                if bv.shape() != [outputs] {
                    return Err(Error::dim("linear: bias shape mismatch"));
                }
                Some(bv)
            }
            None => None,
        };
        let out = kernels::linear_forward(
            x.data(),
            rows,
            features,
            w.data(),
            outputs,
            bias_val.as_deref().map(Tensor::data),
        );
        self.tape.push(
            Tensor::new(vec![rows, outputs], out)?,
            Op::Linear {
                x: self.id,
                w: weight.id,
                b: bias.map(|b| b.id),
            },
            "linear",
        )
    }

    pub fn add(self, other: Var<'t>) -> Result<Var<'t>> {
        self.same_tape(&other)?;
        let out = self.value().zip_map(&other.value(), |a, b| a + b)?;
        self.tape.push(out, Op::Add { a: self.id, b: other.id }, "add")
    }

    /// Elementwise product of equally shaped operands.
    pub fn mul(self, other: Var<'t>) -> Result<Var<'t>> {
        self.same_tape(&other)?;
        let out = self.value().zip_map(&other.value(), |a, b| a * b)?;
        self.tape.push(out, Op::Mul { a: self.id, b: other.id }, "mul")
    }

    pub fn scale(self, factor: f64) -> Result<Var<'t>> {
        let out = self.value().map(|v| v * factor);
        self.tape.push(out, Op::Scale { x: self.id, factor }, "scale")
    }

    /// Slice `x[index]` along the leading axis.
    pub fn select(self, index: usize) -> Result<Var<'t>> {
        let x = self.value();
        if x.ndim() < 2 || index >= x.shape()[0] {
            return Err(Error::dim(format!("select({index}) on shape {:?}", x.shape())));
        }
        let rest = x.shape()[1..].to_vec();
        let block: usize = rest.iter().product();
        let out = x.data()[index * block..(index + 1) * block].to_vec();
        self.tape
            .push(Tensor::new(rest, out)?, Op::Select { x: self.id, index }, "select")
    }

    /// Gather joint columns of a `[N, C, T, V]` tensor in the given order.
    pub fn gather_joints(self, indices: &[usize]) -> Result<Var<'t>> {
        let x = self.value();
        x.expect_rank(4, "gather_joints")?;
        let v = x.shape()[3];
        if indices.is_empty() {
            return Err(Error::dim("gather_joints: empty index list"));
        }
        if let Some(&bad) = indices.iter().find(|&&j| j >= v) {
            return Err(Error::dim(format!("gather_joints: joint {bad} out of range for V={v}")));
        }
        let rows = x.numel() / v;
        let mut out = Vec::with_capacity(rows * indices.len());
        for row in x.data().chunks(v) {
            out.extend(indices.iter().map(|&j| row[j]));
        }
        let mut shape = x.shape().to_vec();
        shape[3] = indices.len();
        self.tape.push(
            Tensor::new(shape, out)?,
            Op::GatherJoints {
                x: self.id,
                indices: indices.to_vec(),
            },
            "gather_joints",
        )
    }

    /// `[N*G, F] -> [N, F]`, averaging each run of `group` consecutive rows.
    pub fn group_mean(self, group: usize) -> Result<Var<'t>> {
        let x = self.value();
        x.expect_rank(2, "group_mean")?;
        let (rows, features) = (x.shape()[0], x.shape()[1]);
        if group == 0 || rows % group != 0 {
            return Err(Error::dim(format!("group_mean: {rows} rows not divisible by {group}")));
        }
        let mut out = vec![0.0; rows / group * features];
        for (r, row) in x.data().chunks(features).enumerate() {
            let dst = &mut out[(r / group) * features..(r / group + 1) * features];
            for (d, s) in dst.iter_mut().zip(row) {
                *d += s / group as f64;
            }
        }
        self.tape.push(
            Tensor::new(vec![rows / group, features], out)?,
            Op::GroupMean { x: self.id, group },
            "group_mean",
        )
    }

    pub fn softmax(self) -> Result<Var<'t>> {
        let out = softmax(&self.value())?;
        self.tape.push(out, Op::Softmax { x: self.id }, "softmax")
    }

    /// Mean over rows of `-log softmax(scores)[label]`.
    pub fn cross_entropy(self, labels: &[usize]) -> Result<Var<'t>> {
        let x = self.value();
        x.expect_rank(2, "cross_entropy")?;
        let (rows, k) = (x.shape()[0], x.shape()[1]);
        if labels.len() != rows {
            return Err(Error::contract(format!(
                "cross_entropy: {} labels for {rows} rows",
                labels.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
            return Err(Error::contract(format!("label {bad} out of range for {k} classes")));
        }
        let probs = softmax_rows(x.data(), k);
        let mut loss = 0.0;
        for (row, &label) in x.data().chunks(k).zip(labels) {
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
            loss += lse - row[label];
        }
        loss /= rows as f64;
        self.tape.push(
            Tensor::scalar(loss),
            Op::CrossEntropy {
                x: self.id,
                labels: labels.to_vec(),
                probs,
            },
            "cross_entropy",
        )
    }

    pub fn sum(self) -> Result<Var<'t>> {
        let total = self.value().sum();
        self.tape.push(Tensor::scalar(total), Op::Sum { x: self.id }, "sum")
    }
}
