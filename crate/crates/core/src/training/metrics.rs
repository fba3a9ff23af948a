use crate::error::{Error, Result};
use crate::numerics::Tensor;

/// Rank of `label` within a score row: the number of classes ranked ahead of
/// it. Equal scores rank the lower class index first.
pub fn label_rank(row: &[f64], label: usize) -> usize {
    let s = row[label];
    row.iter()
        .enumerate()
        .filter(|&(c, &x)| x > s || (x == s && c < label))
        .count()
}

/// Fraction of rows whose label is among the `k` highest scores.
pub fn topk_accuracy(scores: &Tensor, labels: &[usize], k: usize) -> Result<f64> {
    if scores.ndim() != 2 {
        return Err(Error::dim(format!("scores {:?} should be [N, K]", scores.shape())));
    }
    let (n, classes) = (scores.shape()[0], scores.shape()[1]);
    if labels.len() != n {
        return Err(Error::contract(format!("{} labels for {n} score rows", labels.len())));
    }
    if k == 0 || k > classes {
        return Err(Error::contract(format!("k = {k} outside 1..={classes}")));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= classes) {
        return Err(Error::contract(format!("label {bad} out of range for {classes} classes")));
    }
    let hits = scores
        .data()
        .chunks(classes)
        .zip(labels)
        .filter(|(row, &l)| label_rank(row, l) < k)
        .count();
    Ok(hits as f64 / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_cases() {
        let s = Tensor::new(vec![1, 3], vec![0.1, 0.5, 0.4]).unwrap();
        assert_eq!(topk_accuracy(&s, &[2], 1).unwrap(), 0.0);
        assert_eq!(topk_accuracy(&s, &[2], 2).unwrap(), 1.0);
    }

    #[test]
    fn ties_favour_low_index() {
        let s = Tensor::zeros(vec![1, 4]);
        assert_eq!(topk_accuracy(&s, &[3], 1).unwrap(), 0.0);
        assert_eq!(topk_accuracy(&s, &[0], 1).unwrap(), 1.0);
    }

    #[test]
    fn bad_k() {
        let s = Tensor::zeros(vec![1, 4]);
        assert!(topk_accuracy(&s, &[0], 5).is_err());
        assert!(topk_accuracy(&s, &[0], 0).is_err());
    }
}
