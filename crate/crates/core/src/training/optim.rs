use serde::{Deserialize, Serialize};

use super::TrainConfig;
use crate::error::{Error, Result};
use crate::numerics::{ParamStore, Tensor, Var};

/// Mean cross-entropy of `[N, K]` scores against integer labels.
pub fn cross_entropy_loss<'t>(scores: Var<'t>, labels: &[usize]) -> Result<Var<'t>> {
    scores.cross_entropy(labels)
}

/// Momentum buffers, one per parameter, plus the update hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerState {
    pub velocity: Vec<Tensor>,
    pub momentum: f64,
    pub nesterov: bool,
    pub weight_decay: f64,
}

impl OptimizerState {
    pub fn new(params: &ParamStore, momentum: f64, nesterov: bool, weight_decay: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&momentum) {
            return Err(Error::config(format!("momentum {momentum} outside [0, 1)")));
        }
        Ok(OptimizerState {
            velocity: params.iter().map(|p| Tensor::zeros(p.value.shape().to_vec())).collect(),
            momentum,
            nesterov,
            weight_decay,
        })
    }

    pub fn for_config(params: &ParamStore, config: &TrainConfig) -> Result<Self> {
        Self::new(params, config.momentum, config.nesterov, config.weight_decay)
    }
}

/// One SGD step on the stored gradients:
/// `g += wd * w; v = mu * v + g; w -= lr * (g + mu * v)` with Nesterov,
/// `w -= lr * v` without.
pub fn sgd_nesterov_step(params: &mut ParamStore, state: &mut OptimizerState, lr: f64) -> Result<()> {
    if state.velocity.len() != params.len() {
        return Err(Error::contract(format!(
            "optimizer holds {} velocities for {} parameters",
            state.velocity.len(),
            params.len()
        )));
    }
    let (mu, wd) = (state.momentum, state.weight_decay);
    for (p, v) in params.iter_mut().zip(state.velocity.iter_mut()) {
        if p.grad.shape() != v.shape() || p.value.shape() != v.shape() {
            return Err(Error::contract(format!(
                "parameter {}: gradient {:?} and velocity {:?} differ",
                p.name,
                p.grad.shape(),
                v.shape()
            )));
        }
        let w = p.value.data_mut();
        let g = p.grad.data();
        let vel = v.data_mut();
        for i in 0..w.len() {
            let gi = g[i] + wd * w[i];
            vel[i] = mu * vel[i] + gi;
            let step = if state.nesterov { gi + mu * vel[i] } else { vel[i] };
            w[i] -= lr * step;
        }
    }
    Ok(())
}

/// `base_lr * factor^(number of decay epochs <= epoch)`.
pub fn lr_at(epoch: usize, config: &TrainConfig) -> f64 {
    let decays = config.lr_decay_epochs.iter().filter(|&&e| e <= epoch).count();
    config.base_lr * config.lr_decay_factor.powi(decays as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn store(w: f64, g: f64) -> ParamStore {
        let mut s = ParamStore::new();
        let id = s.add("w", Tensor::scalar(w));
        s.get_mut(id).grad = Tensor::scalar(g);
        s
    }

    #[test]
    fn nesterov_hand_case() {
        let mut s = store(1.0, 0.5);
        let mut st = OptimizerState::new(&s, 0.9, true, 0.0).unwrap();
        sgd_nesterov_step(&mut s, &mut st, 0.1).unwrap();
        assert!((st.velocity[0].data()[0] - 0.5).abs() < 1e-15);
        assert!((s.iter().next().unwrap().value.data()[0] - 0.905).abs() < 1e-15);
    }

    #[test]
    fn zero_momentum_is_plain_sgd() {
        let mut s = store(2.0, 0.25);
        let mut st = OptimizerState::new(&s, 0.0, true, 0.0).unwrap();
        sgd_nesterov_step(&mut s, &mut st, 0.4).unwrap();
        assert_eq!(s.iter().next().unwrap().value.data()[0], 2.0 - 0.4 * 0.25);
    }

    #[test]
    fn zero_gradient_keeps_weights() {
        let mut s = store(1.5, 0.0);
        let mut st = OptimizerState::new(&s, 0.9, true, 0.0).unwrap();
        sgd_nesterov_step(&mut s, &mut st, 0.1).unwrap();
        assert_eq!(s.iter().next().unwrap().value.data()[0], 1.5);
    }

    #[test]
    fn schedule_steps() {
        let cfg = TrainConfig::default();
        assert!((lr_at(0, &cfg) - 0.1).abs() < 1e-15);
        assert!((lr_at(30, &cfg) - 0.01).abs() < 1e-15);
        assert!((lr_at(45, &cfg) - 0.001).abs() < 1e-15);
    }

    #[test]
    fn velocity_mismatch_is_contract_error() {
        let mut s = store(1.0, 1.0);
        let mut st = OptimizerState::new(&ParamStore::new(), 0.9, true, 0.0).unwrap();
        assert!(matches!(sgd_nesterov_step(&mut s, &mut st, 0.1), Err(Error::Contract(_))));
    }
}
