//! Binary cross-entropy on sigmoid outputs.

use crate::error::NnError;
use crate::tensor::Tensor;

/// Probabilities are clamped to `[BCE_CLAMP, 1 - BCE_CLAMP]` before the log.
pub const BCE_CLAMP: f64 = 1e-7;

/// Mean BCE over every element and its gradient with respect to `p`.
/// Entries that hit the clamp get zero gradient.
pub fn bce_loss(p: &Tensor, targets: &Tensor) -> Result<(f64, Tensor), NnError> {
    if p.shape() != targets.shape() {
        return Err(NnError::Shape {
            context: "bce targets",
            expected: p.shape().to_vec(),
            actual: targets.shape().to_vec(),
        });
    }
    if let Some(&bad) = targets.data().iter().find(|&&t| t != 0.0 && t != 1.0) {
        return Err(NnError::BadTarget(bad));
    }
    let count = p.len() as f64;
    let mut loss = 0.0;
    let mut grad = Tensor::zeros(p.shape());
    for ((g, &pv), &t) in grad.data_mut().iter_mut().zip(p.data()).zip(targets.data()) {
        let q = pv.clamp(BCE_CLAMP, 1.0 - BCE_CLAMP);
        loss -= t * q.ln() + (1.0 - t) * (1.0 - q).ln();
        if q == pv {
            *g = (q - t) / (q * (1.0 - q)) / count;
        }
    }
    Ok((loss / count, grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_prediction_is_near_zero() {
        let t = Tensor::from_vec(&[1, 4], vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let (l, _) = bce_loss(&t, &t).unwrap();
        assert!(l < 1e-6 && l.is_finite());
    }

    #[test]
    fn half_everywhere_is_ln2() {
        let p = Tensor::filled(&[3, 5], 0.5);
        let t = Tensor::from_vec(&[3, 5], (0..15).map(|i| (i % 2) as f64).collect()).unwrap();
        let (l, _) = bce_loss(&p, &t).unwrap();
        assert!((l - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn non_binary_target_is_rejected() {
        let p = Tensor::filled(&[1, 2], 0.5);
        let t = Tensor::from_vec(&[1, 2], vec![0.0, 0.3]).unwrap();
        assert!(matches!(bce_loss(&p, &t), Err(NnError::BadTarget(_))));
    }
}
