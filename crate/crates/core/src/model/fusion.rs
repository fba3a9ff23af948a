use crate::error::{Error, Result};
use crate::numerics::Tensor;

/// Weighted average of equally shaped score tensors, e.g. the joint and bone
/// streams. Weights are normalized to sum to one.
pub fn fuse_scores(score_sets: &[Tensor], weights: &[f64]) -> Result<Tensor> {
    let first = score_sets
        .first()
        .ok_or_else(|| Error::contract("fuse_scores needs at least one score set"))?;
    if weights.len() != score_sets.len() {
        return Err(Error::contract(format!(
            "{} weights for {} score sets",
            weights.len(),
            score_sets.len()
        )));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::contract("fusion weights must be finite and non-negative"));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::contract("fusion weights sum to zero"));
    }
    let mut out = Tensor::zeros(first.shape().to_vec());
    for (s, w) in score_sets.iter().zip(weights) {
        if s.shape() != first.shape() {
            return Err(Error::dim(format!(
                "score sets {:?} and {:?} differ in shape",
                first.shape(),
                s.shape()
            )));
        }
        for (o, x) in out.data_mut().iter_mut().zip(s.data()) {
            *o += w / total * x;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_weights_average() {
        let a = Tensor::from_vec(vec![1.0, 3.0]).unwrap();
        let b = Tensor::from_vec(vec![3.0, 5.0]).unwrap();
        assert_eq!(fuse_scores(&[a, b], &[1.0, 1.0]).unwrap().data(), &[2.0, 4.0]);
    }

    #[test]
    fn empty_and_mismatched_inputs() {
        assert!(matches!(fuse_scores(&[], &[]), Err(Error::Contract(_))));
        let a = Tensor::from_vec(vec![1.0]).unwrap();
        let b = Tensor::from_vec(vec![1.0, 2.0]).unwrap();
        assert!(matches!(fuse_scores(&[a.clone(), b], &[1.0, 1.0]), Err(Error::Dimension(_))));
        assert!(fuse_scores(&[a.clone()], &[0.0]).is_err());
        assert!(fuse_scores(&[a], &[1.0, 1.0]).is_err());
    }
}
