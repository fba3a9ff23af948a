//! Central-difference verification of tape gradients.
//!
//! The error metric per coordinate is `|analytic - numeric| / max(1, |analytic|)`
//! and a check reports the maximum over all coordinates.

use super::{ParamId, ParamStore, Tape, Tensor, Var};
use crate::error::{Error, Result};

pub const DEFAULT_EPSILON: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradcheckReport {
    pub max_rel_error: f64,
    /// Flat index of the worst coordinate.
    pub worst_index: usize,
    pub coordinates: usize,
}

impl GradcheckReport {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.max_rel_error < tolerance
    }

    fn merge(self, other: GradcheckReport) -> GradcheckReport {
        let coordinates = self.coordinates + other.coordinates;
        if other.max_rel_error > self.max_rel_error {
            GradcheckReport {
                coordinates,
                ..other
            }
        } else {
            GradcheckReport { coordinates, ..self }
        }
    }
}

fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(1.0)
}

fn scalar_of(v: Var<'_>) -> Result<f64> {
    v.value()
        .item()
        .map_err(|_| Error::contract(format!("gradcheck needs a scalar function, got shape {:?}", v.shape())))
}

/// Compare an externally supplied gradient against central differences of
/// `value`. Used directly to sanity-check the checker itself.
pub fn compare_gradients(
    analytic: &Tensor,
    value: impl Fn(&Tensor) -> Result<f64>,
    point: &Tensor,
    epsilon: f64,
) -> Result<GradcheckReport> {
    point.expect_same_shape(analytic, "compare_gradients")?;
    let mut report = GradcheckReport {
        max_rel_error: 0.0,
        worst_index: 0,
        coordinates: point.numel(),
    };
    let mut probe = point.clone();
    for i in 0..point.numel() {
        let orig = point.data()[i];
        probe.data_mut()[i] = orig + epsilon;
        let plus = value(&probe)?;
        probe.data_mut()[i] = orig - epsilon;
        let minus = value(&probe)?;
        probe.data_mut()[i] = orig;
        let numeric = (plus - minus) / (2.0 * epsilon);
        let err = relative_error(analytic.data()[i], numeric);
        if err > report.max_rel_error {
            report.max_rel_error = err;
            report.worst_index = i;
        }
    }
    Ok(report)
}

/// Check the tape gradient of a scalar function of one input tensor.
pub fn gradcheck<F>(f: F, point: &Tensor, epsilon: f64) -> Result<GradcheckReport>
where
    F: for<'t> Fn(&'t Tape, Var<'t>) -> Result<Var<'t>>,
{
    let tape = Tape::new();
    let x = tape.leaf(point.clone())?;
    let root = f(&tape, x)?;
    scalar_of(root)?;
    let analytic = tape.backward(root, None)?.wrt(x);
    compare_gradients(
        &analytic,
        |p| {
            let tape = Tape::new();
            let x = tape.leaf(p.clone())?;
            scalar_of(f(&tape, x)?)
        },
        point,
        epsilon,
    )
}

/// Check gradients of a scalar function with respect to stored parameters.
pub fn gradcheck_params<F>(store: &ParamStore, ids: &[ParamId], f: F, epsilon: f64) -> Result<GradcheckReport>
where
    F: for<'t> Fn(&'t Tape, &ParamStore) -> Result<Var<'t>>,
{
    let mut work = store.clone();
    work.zero_grad();
    {
        let tape = Tape::new();
        let root = f(&tape, &work)?;
        scalar_of(root)?;
        tape.backward(root, Some(&mut work))?;
    }
    let mut report = GradcheckReport {
        max_rel_error: 0.0,
        worst_index: 0,
        coordinates: 0,
    };
    for &id in ids {
        let analytic = work.get(id).grad.clone();
        let point = work.get(id).value.clone();
        let sub = compare_gradients(
            &analytic,
            |p| {
                let mut probe = work.clone();
                probe.assign(id, p.clone())?;
                let tape = Tape::new();
                scalar_of(f(&tape, &probe)?)
            },
            &point,
            epsilon,
        )?;
        report = report.merge(sub);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_at_three() {
        let r = gradcheck(|_, x| x.mul(x)?.sum(), &Tensor::scalar(3.0), DEFAULT_EPSILON).unwrap();
        assert!(r.max_rel_error < 1e-8, "{r:?}");
    }

    #[test]
    fn wrong_gradient_is_flagged() {
        let point = Tensor::scalar(3.0);
        // true derivative 6, claimed 12
        let r = compare_gradients(&Tensor::scalar(12.0), |p| Ok(p.data()[0].powi(2)), &point, DEFAULT_EPSILON).unwrap();
        assert!((r.max_rel_error - 0.5).abs() < 1e-6, "{r:?}");
        assert!(!r.passes(1e-4));
    }

    #[test]
    fn vector_valued_function_is_a_contract_error() {
        let err = gradcheck(|_, x| x.scale(2.0), &Tensor::ones(vec![3]), DEFAULT_EPSILON).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }
}
