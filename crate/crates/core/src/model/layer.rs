//! Single-layer forward passes.
//!
//! The parameter bundles take tape variables, so the same functions serve the
//! full network, the gradient checks and the linear-mode equivalence tests.
//! Dropping the bias, norm and activation gives the purely linear operator.

use crate::error::{Error, Result};
use crate::graphs::AdjacencyStack;
use crate::numerics::{NormMode, Var};

use super::LayerConfig;

/// Affine batch normalization applied after a convolution.
pub struct Norm<'t, 'a> {
    pub gamma: Var<'t>,
    pub beta: Var<'t>,
    pub mode: NormMode<'a>,
}

impl<'t> Norm<'t, '_> {
    fn apply(self, x: Var<'t>) -> Result<Var<'t>> {
        x.batch_norm(self.gamma, self.beta, self.mode)
    }
}

/// Shortcut added to the block output before the final activation.
pub enum Shortcut<'t, 'a> {
    None,
    Identity,
    /// Strided 1x1 convolution: weight `[C_out, C_in, 1]`.
    Projection {
        weight: Var<'t>,
        bias: Option<Var<'t>>,
        norm: Option<Norm<'t, 'a>>,
    },
}

impl<'t> Shortcut<'t, '_> {
    fn apply(self, input: Var<'t>, out: Var<'t>, stride: usize) -> Result<Var<'t>> {
        match self {
            Shortcut::None => Ok(out),
            Shortcut::Identity => {
                if input.shape() != out.shape() {
                    return Err(Error::dim(format!(
                        "identity shortcut: input {:?} vs output {:?}",
                        input.shape(),
                        out.shape()
                    )));
                }
                out.add(input)
            }
            Shortcut::Projection { weight, bias, norm } => {
                let mut r = input.temporal_conv(weight, bias, stride)?;
                if let Some(norm) = norm {
                    r = norm.apply(r)?;
                }
                out.add(r)
            }
        }
    }
}

/// Variables of one TGN layer.
pub struct TgnLayerVars<'t, 'a> {
    /// `[K, C_out, C_in, t]`: one temporal kernel bank per partition.
    pub weight: Var<'t>,
    pub bias: Option<Var<'t>>,
    /// `[K, V, V]` learnable edge-importance masks.
    pub masks: Option<Var<'t>>,
    pub norm: Option<Norm<'t, 'a>>,
    pub shortcut: Shortcut<'t, 'a>,
    pub relu: bool,
}

impl<'t, 'a> TgnLayerVars<'t, 'a> {
    /// The purely linear layer: no bias, mask, norm, shortcut or activation.
    pub fn linear(weight: Var<'t>) -> Self {
        TgnLayerVars {
            weight,
            bias: None,
            masks: None,
            norm: None,
            shortcut: Shortcut::None,
            relu: false,
        }
    }
}

fn check_masks(masks: &Var<'_>, stack: &AdjacencyStack) -> Result<()> {
    let (k, v) = (stack.len(), stack.num_nodes());
    if masks.shape() != [k, v, v] {
        return Err(Error::dim(format!(
            "edge masks {:?} should be [{k}, {v}, {v}]",
            masks.shape()
        )));
    }
    Ok(())
}

fn partition_adjacency<'t>(x: &Var<'t>, stack: &AdjacencyStack, masks: Option<Var<'t>>, p: usize) -> Result<Var<'t>> {
    let a = x.tape().leaf(stack.partitions[p].clone())?;
    match masks {
        Some(m) => a.mul(m.select(p)?),
        None => Ok(a),
    }
}

fn check_input(x: &Var<'_>, stack: &AdjacencyStack, c_in: usize, what: &str) -> Result<()> {
    let shape = x.shape();
    if shape.len() != 4 || shape[1] != c_in || shape[3] != stack.num_nodes() {
        return Err(Error::dim(format!(
            "{what}: input {shape:?} should be [N, {c_in}, T, {}]",
            stack.num_nodes()
        )));
    }
    Ok(())
}

/// One TGN layer on `[N, C_in, T, V]`.
///
/// For each partition `p` the features are first aggregated over the
/// partition's neighbours and then convolved along time with that partition's
/// kernel bank; the partition outputs are summed. Because joint mixing and
/// per-joint temporal convolution act on different axes, this equals
/// convolving first and mixing afterwards, at lower cost whenever
/// `C_out * t >= C_in`.
pub fn tgn_layer_forward<'t>(
    x: Var<'t>,
    stack: &AdjacencyStack,
    layer: &LayerConfig,
    vars: TgnLayerVars<'t, '_>,
) -> Result<Var<'t>> {
    layer.validate()?;
    check_input(&x, stack, layer.c_in, "tgn layer")?;
    let k = stack.len();
    let expect = [k, layer.c_out, layer.c_in, layer.temporal_kernel];
    if vars.weight.shape() != expect {
        return Err(Error::dim(format!(
            "tgn layer weight {:?} should be {expect:?}",
            vars.weight.shape()
        )));
    }
    if let Some(m) = &vars.masks {
        check_masks(m, stack)?;
    }
    let mut out: Option<Var<'t>> = None;
    for p in 0..k {
        let adj = partition_adjacency(&x, stack, vars.masks, p)?;
        let bias = if p == 0 { vars.bias } else { None };
        let y = x.graph_mix(adj)?.temporal_conv(vars.weight.select(p)?, bias, layer.stride)?;
        out = Some(match out {
            Some(acc) => acc.add(y)?,
            None => y,
        });
    }
    let mut y = out.expect("at least one partition");
    if let Some(norm) = vars.norm {
        y = norm.apply(y)?;
    }
    y = vars.shortcut.apply(x, y, layer.stride)?;
    if vars.relu {
        y = y.relu()?;
    }
    Ok(y)
}

/// Variables of one baseline GCN + TCN block.
pub struct BaselineLayerVars<'t, 'a> {
    /// `[K, C_out, C_in, 1]` per-partition channel projections.
    pub gcn_weight: Var<'t>,
    pub gcn_bias: Option<Var<'t>>,
    pub masks: Option<Var<'t>>,
    pub gcn_norm: Option<Norm<'t, 'a>>,
    /// `[C_out, C_out, t]` temporal convolution.
    pub tcn_weight: Var<'t>,
    pub tcn_bias: Option<Var<'t>>,
    pub tcn_norm: Option<Norm<'t, 'a>>,
    pub shortcut: Shortcut<'t, 'a>,
    pub relu: bool,
}

impl<'t, 'a> BaselineLayerVars<'t, 'a> {
    pub fn linear(gcn_weight: Var<'t>, tcn_weight: Var<'t>) -> Self {
        BaselineLayerVars {
            gcn_weight,
            gcn_bias: None,
            masks: None,
            gcn_norm: None,
            tcn_weight,
            tcn_bias: None,
            tcn_norm: None,
            shortcut: Shortcut::None,
            relu: false,
        }
    }
}

/// Per-frame graph convolution followed by a temporal convolution of width
/// `layer.temporal_kernel`, applied with the layer's stride.
pub fn baseline_gcn_tcn_forward<'t>(
    x: Var<'t>,
    stack: &AdjacencyStack,
    layer: &LayerConfig,
    vars: BaselineLayerVars<'t, '_>,
) -> Result<Var<'t>> {
    layer.validate()?;
    check_input(&x, stack, layer.c_in, "baseline layer")?;
    let k = stack.len();
    if vars.gcn_weight.shape() != [k, layer.c_out, layer.c_in, 1] {
        return Err(Error::dim(format!(
            "baseline gcn weight {:?} should be [{k}, {}, {}, 1]",
            vars.gcn_weight.shape(),
            layer.c_out,
            layer.c_in
        )));
    }
    let tcn = [layer.c_out, layer.c_out, layer.temporal_kernel];
    if vars.tcn_weight.shape() != tcn {
        return Err(Error::dim(format!(
            "baseline tcn weight {:?} should be {tcn:?}",
            vars.tcn_weight.shape()
        )));
    }
    if let Some(m) = &vars.masks {
        check_masks(m, stack)?;
    }
    let mut h: Option<Var<'t>> = None;
    for p in 0..k {
        let adj = partition_adjacency(&x, stack, vars.masks, p)?;
        let bias = if p == 0 { vars.gcn_bias } else { None };
        let y = x.graph_mix(adj)?.temporal_conv(vars.gcn_weight.select(p)?, bias, 1)?;
        h = Some(match h {
            Some(acc) => acc.add(y)?,
            None => y,
        });
    }
    let mut h = h.expect("at least one partition");
    if let Some(norm) = vars.gcn_norm {
        h = norm.apply(h)?;
    }
    if vars.relu {
        h = h.relu()?;
    }
    let mut y = h.temporal_conv(vars.tcn_weight, vars.tcn_bias, layer.stride)?;
    if let Some(norm) = vars.tcn_norm {
        y = norm.apply(y)?;
    }
    y = vars.shortcut.apply(x, y, layer.stride)?;
    if vars.relu {
        y = y.relu()?;
    }
    Ok(y)
}

/// Collapse a linear baseline block into an equivalent TGN kernel:
/// `W[p, o, i, tau] = sum_m tcn[o, m, tau] * gcn[p, m, i]`.
pub fn fuse_baseline_weights(
    gcn: &crate::numerics::Tensor,
    tcn: &crate::numerics::Tensor,
) -> Result<crate::numerics::Tensor> {
    let gs = gcn.shape();
    let ts = tcn.shape();
    if gs.len() != 4 || gs[3] != 1 || ts.len() != 3 || ts[1] != gs[1] {
        return Err(Error::dim(format!("cannot fuse gcn {gs:?} with tcn {ts:?}")));
    }
    let (k, mid, c_in) = (gs[0], gs[1], gs[2]);
    let (c_out, t) = (ts[0], ts[2]);
    let mut w = vec![0.0; k * c_out * c_in * t];
    for p in 0..k {
        for o in 0..c_out {
            for i in 0..c_in {
                for tau in 0..t {
                    let mut s = 0.0;
                    for m in 0..mid {
                        s += tcn.data()[(o * mid + m) * t + tau] * gcn.data()[(p * mid + m) * c_in + i];
                    }
                    w[((p * c_out + o) * c_in + i) * t + tau] = s;
                }
            }
        }
    }
    crate::numerics::Tensor::new(vec![k, c_out, c_in, t], w)
}
