//! Softmax cross-entropy and sigmoid binary cross-entropy on logits.

use crate::error::{Error, Result};
use crate::layers::LossKind;
use crate::layers::ops::sigmoid_scalar;
use crate::layers::FeatureMap;

/// What a single prediction is scored against.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    /// Class index, applied at every spatial position.
    Class(usize),
    /// Per-element probabilities, same layout as the prediction.
    Map(FeatureMap),
}

/// Loss of one prediction and its gradient with respect to the logits.
///
/// Softmax CE is averaged over spatial positions, sigmoid BCE over all
/// elements.
pub fn loss_eval(logits: &FeatureMap, target: &Target, kind: LossKind) -> Result<(f64, FeatureMap)> {
    let mut grad = logits.zeros_like();
    match (kind, target) {
        (LossKind::SoftmaxCe, Target::Class(t)) => {
            let ch = logits.channels;
            if *t >= ch {
                return Err(Error::ShapeMismatch(format!("class {t} with {ch} logits")));
            }
            let n = logits.data.len() / ch.max(1);
            let mut loss = 0.0;
            for p in 0..n {
                let m = (0..ch).map(|c| logits.data[c * n + p]).fold(f64::NEG_INFINITY, f64::max);
                let z: f64 = (0..ch).map(|c| (logits.data[c * n + p] - m).exp()).sum();
                loss += z.ln() + m - logits.data[t * n + p];
                for c in 0..ch {
                    let prob = (logits.data[c * n + p] - m).exp() / z;
                    grad.data[c * n + p] = (prob - if c == *t { 1.0 } else { 0.0 }) / n as f64;
                }
            }
            Ok((loss / n as f64, grad))
        }
        (LossKind::SigmoidBce, Target::Map(t)) => {
            if t.data.len() != logits.data.len() {
                return Err(Error::ShapeMismatch(format!("target has {} values, prediction {}", t.data.len(), logits.data.len())));
            }
            let n = logits.data.len() as f64;
            let mut loss = 0.0;
            for ((g, &z), &y) in grad.data.iter_mut().zip(&logits.data).zip(&t.data) {
                loss += z.max(0.0) - z * y + (-z.abs()).exp().ln_1p();
                *g = (sigmoid_scalar(z) - y) / n;
            }
            Ok((loss / n, grad))
        }
        _ => Err(Error::ShapeMismatch(format!("target type does not fit {kind:?}"))),
    }
}

/// Mean loss over a batch; gradients are scaled by `1 / batch`.
pub fn batch_loss(logits: &[FeatureMap], targets: &[&Target], kind: LossKind) -> Result<(f64, Vec<FeatureMap>)> {
    if logits.len() != targets.len() || logits.is_empty() {
        return Err(Error::ShapeMismatch(format!("{} predictions, {} targets", logits.len(), targets.len())));
    }
    let b = logits.len() as f64;
    let mut total = 0.0;
    let mut grads = Vec::with_capacity(logits.len());
    for (l, t) in logits.iter().zip(targets) {
        let (v, mut g) = loss_eval(l, t, kind)?;
        total += v;
        g.data.iter_mut().for_each(|x| *x /= b);
        grads.push(g);
    }
    Ok((total / b, grads))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_two_cases() {
        let z = FeatureMap::from_planar(2, &[1, 1], vec![0.0, 0.0]).unwrap();
        let (l, _) = loss_eval(&z, &Target::Class(0), LossKind::SoftmaxCe).unwrap();
        assert!((l - 2f64.ln()).abs() < 1e-15);
        let z = FeatureMap::from_planar(1, &[1, 1], vec![0.0]).unwrap();
        let t = FeatureMap::from_planar(1, &[1, 1], vec![0.5]).unwrap();
        let (l, _) = loss_eval(&z, &Target::Map(t), LossKind::SigmoidBce).unwrap();
        assert!((l - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn gradients_match_differences() {
        let z = FeatureMap::from_planar(3, &[2, 1], vec![0.3, -1.2, 2.0, 0.1, -0.4, 0.9]).unwrap();
        let t = FeatureMap::from_planar(3, &[2, 1], vec![0.1, 0.9, 0.0, 1.0, 0.5, 0.2]).unwrap();
        for (kind, target) in [(LossKind::SoftmaxCe, Target::Class(1)), (LossKind::SigmoidBce, Target::Map(t))] {
            let (_, g) = loss_eval(&z, &target, kind).unwrap();
            for i in 0..z.data.len() {
                let h = 1e-5;
                let mut a = z.clone();
                a.data[i] += h;
                let mut b = z.clone();
                b.data[i] -= h;
                let fd = (loss_eval(&a, &target, kind).unwrap().0 - loss_eval(&b, &target, kind).unwrap().0) / (2.0 * h);
                assert!((fd - g.data[i]).abs() / g.data[i].abs().max(1e-6) < 1e-8, "{kind:?} {i}");
            }
        }
    }

    #[test]
    fn mismatches() {
        let z = FeatureMap::from_planar(2, &[1, 1], vec![0.0, 0.0]).unwrap();
        assert!(loss_eval(&z, &Target::Class(2), LossKind::SoftmaxCe).is_err());
        let t = FeatureMap::zeros(1, &[1, 1]);
        assert!(matches!(loss_eval(&z, &Target::Map(t), LossKind::SigmoidBce), Err(Error::ShapeMismatch(_))));
    }
}
