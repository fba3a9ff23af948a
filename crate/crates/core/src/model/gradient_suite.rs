//! Finite-difference checks of every differentiable operation and of a small
//! multi-scale network.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{toy_config, toy_layout, TgnModel};
use crate::error::Result;
use crate::numerics::{gradcheck, gradcheck_params, NormMode, ParamId, RunningStats, Tape, Tensor, Var, DEFAULT_EPSILON};

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteEntry {
    pub name: String,
    pub max_rel_error: f64,
    pub coordinates: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub entries: Vec<SuiteEntry>,
}

impl SuiteReport {
    pub fn max_rel_error(&self) -> f64 {
        self.entries.iter().map(|e| e.max_rel_error).fold(0.0, f64::max)
    }

    pub fn passes(&self, tolerance: f64) -> bool {
        self.max_rel_error() < tolerance
    }

    pub fn worst(&self) -> Option<&SuiteEntry> {
        self.entries.iter().max_by(|a, b| a.max_rel_error.total_cmp(&b.max_rel_error))
    }
}

fn random(rng: &mut ChaCha8Rng, shape: Vec<usize>) -> Tensor {
    let n = shape.iter().product();
    Tensor::new(shape, (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).expect("shape matches data")
}

/// Values bounded away from zero so ReLU kinks stay outside the probe step.
fn away_from_zero(rng: &mut ChaCha8Rng, shape: Vec<usize>) -> Tensor {
    random(rng, shape).map(|v| if v < 0.0 { v - 0.1 } else { v + 0.1 })
}

/// `sum(y * r)` for a fixed random `r`, turning any output into a scalar.
fn project<'t>(tape: &'t Tape, y: Var<'t>, r: &Tensor) -> Result<Var<'t>> {
    y.mul(tape.leaf(r.clone())?)?.sum()
}

fn probe_for(rng: &mut ChaCha8Rng, shape: &[usize]) -> Tensor {
    random(rng, shape.to_vec())
}

struct Checks {
    rng: ChaCha8Rng,
    entries: Vec<SuiteEntry>,
}

impl Checks {
    /// Check `x -> sum(op(x) * r)` at `point`.
    fn unary(
        &mut self,
        name: &str,
        point: Tensor,
        out_shape: &[usize],
        op: impl for<'t> Fn(&'t Tape, Var<'t>) -> Result<Var<'t>>,
    ) -> Result<()> {
        let r = probe_for(&mut self.rng, out_shape);
        let report = gradcheck(|tape, x| project(tape, op(tape, x)?, &r), &point, DEFAULT_EPSILON)?;
        self.entries.push(SuiteEntry {
            name: name.to_string(),
            max_rel_error: report.max_rel_error,
            coordinates: report.coordinates,
        });
        Ok(())
    }
}

/// Gradchecks of each tape operation with respect to each of its inputs.
pub fn op_gradchecks(seed: u64) -> Result<SuiteReport> {
    let mut c = Checks {
        rng: ChaCha8Rng::seed_from_u64(seed),
        entries: Vec::new(),
    };
    let (n, ch, t, v) = (2, 3, 5, 4);
    let x4 = random(&mut c.rng, vec![n, ch, t, v]);
    let adj = random(&mut c.rng, vec![v, v]);
    let w3 = random(&mut c.rng, vec![2, ch, 3]);
    let bias = random(&mut c.rng, vec![2]);

    {
        let adj = adj.clone();
        c.unary("graph_mix/x", x4.clone(), &[n, ch, t, v], move |tape, x| x.graph_mix(tape.leaf(adj.clone())?))?;
    }
    {
        let x = x4.clone();
        c.unary("graph_mix/adjacency", adj.clone(), &[n, ch, t, v], move |tape, a| {
            tape.leaf(x.clone())?.graph_mix(a)
        })?;
    }
    for stride in [1, 2] {
        let out = [n, 2, (t - 1) / stride + 1, v];
        let (w, b) = (w3.clone(), bias.clone());
        c.unary(&format!("temporal_conv/x/stride{stride}"), x4.clone(), &out, move |tape, x| {
            x.temporal_conv(tape.leaf(w.clone())?, Some(tape.leaf(b.clone())?), stride)
        })?;
        let (x, b) = (x4.clone(), bias.clone());
        c.unary(&format!("temporal_conv/weight/stride{stride}"), w3.clone(), &out, move |tape, w| {
            tape.leaf(x.clone())?.temporal_conv(w, Some(tape.leaf(b.clone())?), stride)
        })?;
        let (x, w) = (x4.clone(), w3.clone());
        c.unary(&format!("temporal_conv/bias/stride{stride}"), bias.clone(), &out, move |tape, b| {
            tape.leaf(x.clone())?.temporal_conv(tape.leaf(w.clone())?, Some(b), stride)
        })?;
    }
    let relu_point = away_from_zero(&mut c.rng, vec![n, ch, t, v]);
    c.unary("relu", relu_point, &[n, ch, t, v], |_, x| x.relu())?;

    let gamma = random(&mut c.rng, vec![ch]).map(|g| g + 1.5);
    let beta = random(&mut c.rng, vec![ch]);
    let running = RunningStats {
        mean: random(&mut c.rng, vec![ch]).data().to_vec(),
        var: random(&mut c.rng, vec![ch]).map(|s| s.abs() + 0.5).data().to_vec(),
    };
    for train in [true, false] {
        let mode = if train { "train" } else { "eval" };
        let (g, b, rs) = (&gamma, &beta, &running);
        {
            let (g, b, rs) = (g.clone(), b.clone(), rs.clone());
            c.unary(&format!("batch_norm/{mode}/x"), x4.clone(), &[n, ch, t, v], move |tape, x| {
                let mut stats = rs.clone();
                let mode = if train {
                    NormMode::Train { running: &mut stats, momentum: 0.1 }
                } else {
                    NormMode::Eval { running: &rs }
                };
                x.batch_norm(tape.leaf(g.clone())?, tape.leaf(b.clone())?, mode)
            })?;
        }
        {
            let (x0, b, rs) = (x4.clone(), b.clone(), rs.clone());
            c.unary(&format!("batch_norm/{mode}/gamma"), g.clone(), &[n, ch, t, v], move |tape, gv| {
                let mut stats = rs.clone();
                let mode = if train {
                    NormMode::Train { running: &mut stats, momentum: 0.1 }
                } else {
                    NormMode::Eval { running: &rs }
                };
                tape.leaf(x0.clone())?.batch_norm(gv, tape.leaf(b.clone())?, mode)
            })?;
        }
        {
            let (x0, g, rs) = (x4.clone(), g.clone(), rs.clone());
            c.unary(&format!("batch_norm/{mode}/beta"), b.clone(), &[n, ch, t, v], move |tape, bv| {
                let mut stats = rs.clone();
                let mode = if train {
                    NormMode::Train { running: &mut stats, momentum: 0.1 }
                } else {
                    NormMode::Eval { running: &rs }
                };
                tape.leaf(x0.clone())?.batch_norm(tape.leaf(g.clone())?, bv, mode)
            })?;
        }
    }

    c.unary("global_avg_pool", x4.clone(), &[n, ch], |_, x| x.global_avg_pool())?;

    let feats = random(&mut c.rng, vec![4, 3]);
    let lw = random(&mut c.rng, vec![5, 3]);
    let lb = random(&mut c.rng, vec![5]);
    {
        let (w, b) = (lw.clone(), lb.clone());
        c.unary("linear/x", feats.clone(), &[4, 5], move |tape, x| {
            x.linear(tape.leaf(w.clone())?, Some(tape.leaf(b.clone())?))
        })?;
        let (x, b) = (feats.clone(), lb.clone());
        c.unary("linear/weight", lw.clone(), &[4, 5], move |tape, w| {
            tape.leaf(x.clone())?.linear(w, Some(tape.leaf(b.clone())?))
        })?;
        let (x, w) = (feats.clone(), lw.clone());
        c.unary("linear/bias", lb.clone(), &[4, 5], move |tape, b| {
            tape.leaf(x.clone())?.linear(tape.leaf(w.clone())?, Some(b))
        })?;
    }

    let other = random(&mut c.rng, vec![n, ch, t, v]);
    {
        let o = other.clone();
        c.unary("add", x4.clone(), &[n, ch, t, v], move |tape, x| x.add(tape.leaf(o.clone())?))?;
        let o = other.clone();
        c.unary("mul", x4.clone(), &[n, ch, t, v], move |tape, x| x.mul(tape.leaf(o.clone())?))?;
    }
    c.unary("scale", x4.clone(), &[n, ch, t, v], |_, x| x.scale(-0.7))?;
    c.unary("select", x4.clone(), &[ch, t, v], |_, x| x.select(1))?;
    c.unary("gather_joints", x4.clone(), &[n, ch, t, 3], |_, x| x.gather_joints(&[3, 0, 3]))?;
    let rows = random(&mut c.rng, vec![6, 3]);
    c.unary("group_mean", rows, &[3, 3], |_, x| x.group_mean(2))?;
    let logits = random(&mut c.rng, vec![3, 4]);
    c.unary("softmax", logits.clone(), &[3, 4], |_, x| x.softmax())?;
    c.unary("cross_entropy", logits, &[1], |_, x| x.cross_entropy(&[0, 3, 1]))?;
    Ok(SuiteReport { entries: c.entries })
}

/// Gradchecks of the two-layer, two-scale toy network: every parameter in
/// both modes, plus the input in eval mode.
pub fn toy_model_gradchecks(seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = TgnModel::with_layout(toy_config(), toy_layout(), seed)?;
    // move the parameters and statistics off their initial values
    for p in model.params.iter_mut() {
        let bump = random(&mut rng, p.value.shape().to_vec());
        p.value = p.value.zip_map(&bump, |a, b| a + 0.3 * b)?;
    }
    for s in &mut model.stats {
        for m in &mut s.mean {
            *m = rng.random_range(-0.5..0.5);
        }
        for v in &mut s.var {
            *v = rng.random_range(0.5..1.5);
        }
    }
    let batch = random(&mut rng, vec![3, 2, 8, 4, 1]);
    let labels = [0, 2, 1];
    let ids: Vec<_> = (0..model.params.len()).map(ParamId).collect();
    let mut entries = Vec::new();
    for train in [false, true] {
        let report = gradcheck_params(
            &model.params,
            &ids,
            |tape, store| {
                let mut m = model.clone();
                m.params = store.clone();
                let out = if train {
                    m.forward_train(tape, &batch)?
                } else {
                    m.forward_eval(tape, &batch)?
                };
                out.scores.cross_entropy(&labels)
            },
            DEFAULT_EPSILON,
        )?;
        entries.push(SuiteEntry {
            name: format!("toy_model/{}/params", if train { "train" } else { "eval" }),
            max_rel_error: report.max_rel_error,
            coordinates: report.coordinates,
        });
    }
    let report = gradcheck(
        |tape, x| model.forward_folded_eval(tape, x, 1)?.scores.cross_entropy(&labels),
        &batch.fold_persons()?,
        DEFAULT_EPSILON,
    )?;
    entries.push(SuiteEntry {
        name: "toy_model/eval/input".into(),
        max_rel_error: report.max_rel_error,
        coordinates: report.coordinates,
    });
    Ok(SuiteReport { entries })
}

/// The operation checks and the toy-network checks for one seed.
pub fn gradient_suite(seed: u64) -> Result<SuiteReport> {
    let mut report = op_gradchecks(seed)?;
    report.entries.extend(toy_model_gradchecks(seed)?.entries);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_for_one_seed() {
        let report = gradient_suite(0).unwrap();
        assert!(report.passes(1e-4), "{:?}", report.worst());
        assert!(report.entries.len() > 20);
    }
}
