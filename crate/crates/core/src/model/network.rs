//! The multi-scale network: one layer stack per scale graph, pooled and
//! classified by a shared linear head, class scores averaged over scales.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::layer::{
    baseline_gcn_tcn_forward, tgn_layer_forward, BaselineLayerVars, Norm, Shortcut, TgnLayerVars,
};
use super::{BlockKind, LayerConfig, ModelConfig};
use crate::error::{Error, Result};
use crate::graphs::{build_adjacency, resolve_scales, select_scale, AdjacencyStack, ScaleDefinition, ScaleName};
use crate::numerics::{NormMode, ParamId, ParamStore, RunningStats, Tape, Tensor, Var};
use crate::skeleton::Layout;

#[derive(Debug, Clone)]
enum BlockIds {
    Tgn {
        weight: ParamId,
        bias: ParamId,
    },
    Baseline {
        gcn_weight: ParamId,
        gcn_bias: ParamId,
        tcn_weight: ParamId,
        tcn_bias: ParamId,
    },
}

#[derive(Debug, Clone)]
struct LayerWeights {
    block: BlockIds,
    projection: Option<(ParamId, ParamId)>,
    /// Affine norm parameters; the baseline block has a second pair.
    norm: Option<(ParamId, ParamId)>,
    tcn_norm: Option<(ParamId, ParamId)>,
}

#[derive(Debug, Clone, Copy)]
struct NormIds {
    gamma: ParamId,
    beta: ParamId,
    stats: usize,
}

#[derive(Debug, Clone)]
struct BranchLayer {
    weights: LayerWeights,
    masks: Option<ParamId>,
    norm: Option<NormIds>,
    /// Second norm of the baseline block.
    tcn_norm: Option<NormIds>,
}

/// One scale's graph and its layer stack.
#[derive(Debug, Clone)]
pub struct Branch {
    pub scale: ScaleDefinition,
    pub stack: AdjacencyStack,
    layers: Vec<BranchLayer>,
}

/// Scores of a forward pass: the fused prediction and each scale's own.
pub struct ForwardOutput<'t> {
    pub scores: Var<'t>,
    pub per_scale: Vec<Var<'t>>,
}

#[derive(Debug, Clone)]
pub struct TgnModel {
    pub config: ModelConfig,
    pub layout: Layout,
    pub params: ParamStore,
    /// Batch-norm running statistics, parallel to `stat_names`.
    pub stats: Vec<RunningStats>,
    pub stat_names: Vec<String>,
    branches: Vec<Branch>,
    classifier: (ParamId, ParamId),
}

struct Builder {
    params: ParamStore,
    stats: Vec<RunningStats>,
    stat_names: Vec<String>,
    rng: ChaCha8Rng,
}

impl Builder {
    fn uniform(&mut self, name: String, shape: Vec<usize>, bound: f64) -> ParamId {
        let n: usize = shape.iter().product();
        let data = (0..n).map(|_| self.rng.random_range(-bound..=bound)).collect();
        let t = Tensor::new(shape, data).expect("positive extents");
        self.params.add(name, t)
    }

    /// He-uniform initialisation for a convolution with the given fan-in.
    fn conv(&mut self, name: String, shape: Vec<usize>, fan_in: usize) -> ParamId {
        self.uniform(name, shape, (6.0 / fan_in as f64).sqrt())
    }

    fn zeros(&mut self, name: String, len: usize) -> ParamId {
        self.params.add(name, Tensor::zeros(vec![len]))
    }

    fn norm(&mut self, prefix: &str, channels: usize) -> (ParamId, ParamId) {
        let gamma = self.params.add(format!("{prefix}.gamma"), Tensor::ones(vec![channels]));
        let beta = self.params.add(format!("{prefix}.beta"), Tensor::zeros(vec![channels]));
        (gamma, beta)
    }

    fn stats(&mut self, name: String, affine: (ParamId, ParamId), channels: usize) -> NormIds {
        self.stats.push(RunningStats::new(channels));
        self.stat_names.push(name);
        NormIds {
            gamma: affine.0,
            beta: affine.1,
            stats: self.stats.len() - 1,
        }
    }

    fn layer_weights(&mut self, prefix: &str, layer: &LayerConfig, config: &ModelConfig, k: usize) -> LayerWeights {
        let block = config.block;
        let (c_in, c_out, t) = (layer.c_in, layer.c_out, layer.temporal_kernel);
        let block = match block {
            BlockKind::Tgn => BlockIds::Tgn {
                weight: self.conv(format!("{prefix}.weight"), vec![k, c_out, c_in, t], k * c_in * t),
                bias: self.zeros(format!("{prefix}.bias"), c_out),
            },
            BlockKind::Baseline => BlockIds::Baseline {
                gcn_weight: self.conv(format!("{prefix}.gcn.weight"), vec![k, c_out, c_in, 1], k * c_in),
                gcn_bias: self.zeros(format!("{prefix}.gcn.bias"), c_out),
                tcn_weight: self.conv(format!("{prefix}.tcn.weight"), vec![c_out, c_out, t], c_out * t),
                tcn_bias: self.zeros(format!("{prefix}.tcn.bias"), c_out),
            },
        };
        let projection = (layer.residual && !layer.preserves_shape()).then(|| {
            (
                self.conv(format!("{prefix}.residual.weight"), vec![c_out, c_in, 1], c_in),
                self.zeros(format!("{prefix}.residual.bias"), c_out),
            )
        });
        let norm = config.batch_norm.then(|| self.norm(&format!("{prefix}.bn"), c_out));
        let tcn_norm = (config.batch_norm && config.block == BlockKind::Baseline)
            .then(|| self.norm(&format!("{prefix}.tcn_bn"), c_out));
        LayerWeights {
            block,
            projection,
            norm,
            tcn_norm,
        }
    }
}

fn make_norm<'t, 'a>(
    tape: &'t Tape,
    params: &ParamStore,
    ids: Option<NormIds>,
    slots: &mut impl Iterator<Item = &'a mut RunningStats>,
    train: bool,
    momentum: f64,
) -> Result<Option<Norm<'t, 'a>>> {
    let Some(ids) = ids else { return Ok(None) };
    let running = slots.next().expect("one slot per norm");
    let mode = if train {
        NormMode::Train { running, momentum }
    } else {
        NormMode::Eval { running }
    };
    Ok(Some(Norm {
        gamma: tape.param(params, ids.gamma)?,
        beta: tape.param(params, ids.beta)?,
        mode,
    }))
}

fn branch_prefix(config: &ModelConfig, scale: &ScaleDefinition, i: usize) -> String {
    if config.share_weights_across_scales {
        format!("layers.{i}")
    } else {
        format!("{}.layers.{i}", scale.name)
    }
}

impl TgnModel {
    /// Build from a config whose layout is builtin.
    pub fn from_config(config: ModelConfig, seed: u64) -> Result<TgnModel> {
        let layout = Layout::builtin(&config.layout)?;
        Self::with_layout(config, layout, seed)
    }

    /// Build on an explicit layout, resolving its shipped scales and the
    /// config's overrides.
    pub fn with_layout(config: ModelConfig, layout: Layout, seed: u64) -> Result<TgnModel> {
        let scales = resolve_scales(&layout, &config.scale_overrides)?;
        Self::new(config, layout, &scales, seed)
    }

    /// Build from explicit scale definitions; `config.scales` picks which of
    /// them are enabled and in which order.
    pub fn new(config: ModelConfig, layout: Layout, scales: &[ScaleDefinition], seed: u64) -> Result<TgnModel> {
        config.validate()?;
        if config.in_channels != layout.channels {
            return Err(Error::config(format!(
                "model expects {} input channels but layout {} has {}",
                config.in_channels, layout.id, layout.channels
            )));
        }
        let mut b = Builder {
            params: ParamStore::new(),
            stats: Vec::new(),
            stat_names: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        };
        let k = config.partition.num_partitions();
        let mut shared: Vec<LayerWeights> = Vec::new();
        let mut branches = Vec::new();
        for name in &config.scales {
            let scale = scales
                .iter()
                .find(|s| s.name == *name)
                .ok_or_else(|| Error::config(format!("scale {name} is not defined for layout {}", layout.id)))?
                .clone();
            scale.validate()?;
            if scale.layout_joints != layout.num_joints() {
                return Err(Error::dim(format!(
                    "scale {name} was defined on {} joints, layout has {}",
                    scale.layout_joints,
                    layout.num_joints()
                )));
            }
            let stack = build_adjacency(&scale.graph_spec(layout.center), config.partition)?;
            let v = scale.len();
            let mut layers = Vec::new();
            for (i, layer) in config.layers.iter().enumerate() {
                let weights = if config.share_weights_across_scales && shared.len() > i {
                    shared[i].clone()
                } else {
                    let w = b.layer_weights(&branch_prefix(&config, &scale, i), layer, &config, k);
                    if config.share_weights_across_scales {
                        shared.push(w.clone());
                    }
                    w
                };
                let own = format!("{}.layers.{i}", scale.name);
                let masks = config
                    .edge_importance
                    .then(|| b.params.add(format!("{own}.mask"), Tensor::ones(vec![k, v, v])));
                // running statistics stay per scale: each branch sees a different joint set
                let norm = weights.norm.map(|a| b.stats(format!("{own}.bn"), a, layer.c_out));
                let tcn_norm = weights.tcn_norm.map(|a| b.stats(format!("{own}.tcn_bn"), a, layer.c_out));
                layers.push(BranchLayer {
                    weights,
                    masks,
                    norm,
                    tcn_norm,
                });
            }
            branches.push(Branch { scale, stack, layers });
        }
        let f = config.feature_channels();
        let classifier = (
            b.uniform("classifier.weight".into(), vec![config.num_classes, f], 1.0 / (f as f64).sqrt()),
            b.zeros("classifier.bias".into(), config.num_classes),
        );
        Ok(TgnModel {
            config,
            layout,
            params: b.params,
            stats: b.stats,
            stat_names: b.stat_names,
            branches,
            classifier,
        })
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn num_params(&self) -> usize {
        self.params.numel()
    }

    fn check_batch(&self, batch: &Tensor) -> Result<()> {
        let s = batch.shape();
        if s.len() != 5 || s[1] != self.config.in_channels || s[3] != self.layout.num_joints() {
            return Err(Error::dim(format!(
                "batch {s:?} should be [N, {}, T, {}, M]",
                self.config.in_channels,
                self.layout.num_joints()
            )));
        }
        Ok(())
    }

    fn layer_forward<'t>(
        &self,
        x: Var<'t>,
        branch: &Branch,
        i: usize,
        train: bool,
        stats: &mut [RunningStats],
    ) -> Result<Var<'t>> {
        let tape = x.tape();
        let p = |id: ParamId| tape.param(&self.params, id);
        let cfg = &self.config.layers[i];
        let bl = &branch.layers[i];
        let momentum = self.config.bn_momentum;

        let norm_ids = [bl.norm, bl.tcn_norm];
        let mut locals: Vec<RunningStats> = norm_ids.iter().flatten().map(|n| stats[n.stats].clone()).collect();
        let mut slots = locals.iter_mut();
        let norm = make_norm(tape, &self.params, bl.norm, &mut slots, train, momentum)?;
        let tcn_norm = make_norm(tape, &self.params, bl.tcn_norm, &mut slots, train, momentum)?;
        let shortcut = match bl.weights.projection {
            Some((w, b)) => Shortcut::Projection {
                weight: p(w)?,
                bias: Some(p(b)?),
                norm: None,
            },
            None if cfg.residual => Shortcut::Identity,
            None => Shortcut::None,
        };
        let masks = bl.masks.map(p).transpose()?;
        let y = match bl.weights.block {
            BlockIds::Tgn { weight, bias } => tgn_layer_forward(
                x,
                &branch.stack,
                cfg,
                TgnLayerVars {
                    weight: p(weight)?,
                    bias: Some(p(bias)?),
                    masks,
                    norm,
                    shortcut,
                    relu: true,
                },
            )?,
            BlockIds::Baseline {
                gcn_weight,
                gcn_bias,
                tcn_weight,
                tcn_bias,
            } => baseline_gcn_tcn_forward(
                x,
                &branch.stack,
                cfg,
                BaselineLayerVars {
                    gcn_weight: p(gcn_weight)?,
                    gcn_bias: Some(p(gcn_bias)?),
                    masks,
                    gcn_norm: norm,
                    tcn_weight: p(tcn_weight)?,
                    tcn_bias: Some(p(tcn_bias)?),
                    tcn_norm,
                    shortcut,
                    relu: true,
                },
            )?,
        };
        if train {
            for (ids, s) in norm_ids.iter().flatten().zip(locals) {
                stats[ids.stats] = s;
            }
        }
        Ok(y)
    }

    fn branch_features<'t>(
        &self,
        x: Var<'t>,
        branch: &Branch,
        train: bool,
        stats: &mut [RunningStats],
    ) -> Result<Var<'t>> {
        let mut h = select_scale(x, &branch.scale)?;
        for i in 0..self.config.layers.len() {
            h = self.layer_forward(h, branch, i, train, stats)?;
        }
        Ok(h)
    }

    fn run<'t>(&self, tape: &'t Tape, batch: &Tensor, train: bool, stats: &mut [RunningStats]) -> Result<ForwardOutput<'t>> {
        self.check_batch(batch)?;
        let x = tape.leaf(batch.fold_persons()?)?;
        self.run_folded(tape, x, batch.shape()[4], train, stats)
    }

    fn run_folded<'t>(
        &self,
        tape: &'t Tape,
        x: Var<'t>,
        persons: usize,
        train: bool,
        stats: &mut [RunningStats],
    ) -> Result<ForwardOutput<'t>> {
        let w = tape.param(&self.params, self.classifier.0)?;
        let b = tape.param(&self.params, self.classifier.1)?;
        let mut per_scale = Vec::with_capacity(self.branches.len());
        for branch in &self.branches {
            let h = self.branch_features(x, branch, train, stats)?;
            let pooled = h.global_avg_pool()?.group_mean(persons)?;
            per_scale.push(pooled.linear(w, Some(b))?);
        }
        let mut total = per_scale[0];
        for s in &per_scale[1..] {
            total = total.add(*s)?;
        }
        let scores = total.scale(1.0 / per_scale.len() as f64)?;
        Ok(ForwardOutput { scores, per_scale })
    }

    /// Training-mode pass on a `[N, C, T, V, M]` batch: batch statistics are
    /// used and the running statistics updated.
    pub fn forward_train<'t>(&mut self, tape: &'t Tape, batch: &Tensor) -> Result<ForwardOutput<'t>> {
        let mut stats = std::mem::take(&mut self.stats);
        let out = self.run(tape, batch, true, &mut stats);
        self.stats = stats;
        out
    }

    /// Inference pass using the running statistics.
    pub fn forward_eval<'t>(&self, tape: &'t Tape, batch: &Tensor) -> Result<ForwardOutput<'t>> {
        let mut stats = self.stats.clone();
        self.run(tape, batch, false, &mut stats)
    }

    /// Inference pass on an input already on the tape, with persons folded
    /// into the batch: `[N*M, C, T, V]`.
    pub fn forward_folded_eval<'t>(&self, tape: &'t Tape, x: Var<'t>, persons: usize) -> Result<ForwardOutput<'t>> {
        let s = x.shape();
        if s.len() != 4 || s[1] != self.config.in_channels || s[3] != self.layout.num_joints() || persons == 0 || s[0] % persons != 0 {
            return Err(Error::dim(format!(
                "folded input {s:?} should be [N*{persons}, {}, T, {}]",
                self.config.in_channels,
                self.layout.num_joints()
            )));
        }
        let mut stats = self.stats.clone();
        self.run_folded(tape, x, persons, false, &mut stats)
    }

    /// `[N, K]` class scores without keeping a tape around.
    pub fn predict(&self, batch: &Tensor) -> Result<Tensor> {
        let tape = Tape::new();
        let out = self.forward_eval(&tape, batch)?;
        Ok((*out.scores.value()).clone())
    }

    /// Eval-mode feature map `[N*M, C, T', V_s]` of one branch before pooling.
    pub fn branch_features_eval<'t>(&self, tape: &'t Tape, batch: &Tensor, branch: usize) -> Result<Var<'t>> {
        self.check_batch(batch)?;
        let b = self
            .branches
            .get(branch)
            .ok_or_else(|| Error::contract(format!("no branch {branch}")))?;
        let x = tape.leaf(batch.fold_persons()?)?;
        let mut stats = self.stats.clone();
        self.branch_features(x, b, false, &mut stats)
    }
}

/// Two layers of width 2 on the toy layout, full and part scales, 3 classes.
pub fn toy_config() -> ModelConfig {
    ModelConfig {
        layout: "toy4".into(),
        in_channels: 2,
        num_classes: 3,
        layers: vec![LayerConfig::new(2, 2), LayerConfig::new(2, 2).residual(true)],
        scales: vec![ScaleName::Full, ScaleName::Part],
        ..ModelConfig::ntu25_default()
    }
}

/// A four-joint layout with two coordinate channels, used for small checks.
/// Joints 1-2-3 form a chain, joint 4 hangs off joint 1; the part scale keeps
/// joints 1, 2 and 4, the core scale joints 1 and 3.
pub fn toy_layout() -> Layout {
    Layout::from_json(
        r#"{
        "id": "toy4", "channels": 2, "confidence_channel": null, "max_persons": 1, "center": 1,
        "joints": [
            {"name": "root", "parent": null, "side": "center"},
            {"name": "mid", "parent": 1, "side": "left"},
            {"name": "tip", "parent": 2, "side": "left"},
            {"name": "side", "parent": 1, "side": "right"}
        ],
        "scales": [
            {"name": "part", "joints": [1, 2, 4], "edges": [[1, 2], [1, 4]]},
            {"name": "core", "joints": [1, 3], "edges": [[1, 3]]}
        ]
    }"#,
    )
    .expect("toy layout is valid")
}
