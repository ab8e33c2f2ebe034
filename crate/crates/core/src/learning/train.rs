//! Plain minibatch SGD and evaluation helpers.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::backward::backward;
use super::datasets::Split;
use super::loss::{batch_loss, Target};
use crate::error::{Error, Result};
use crate::layers::{FeatureMap, LossKind, Network};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    pub lr: f64,
    pub epochs: usize,
    pub batch: usize,
    pub seed: u64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions { lr: 0.05, epochs: 5, batch: 16, seed: 0 }
    }
}

/// One SGD step on a batch; returns the batch loss before the update.
pub fn sgd_step(net: &mut Network, inputs: &[FeatureMap], targets: &[&Target], kind: LossKind, lr: f64) -> Result<f64> {
    let cache = net.forward_logits(inputs)?;
    let (loss, d_out) = batch_loss(&cache.outputs, targets, kind)?;
    if !loss.is_finite() {
        return Ok(loss);
    }
    let (grads, _) = backward(net, &cache, &d_out)?;
    let params = net.parameters();
    for ((key, value), (gkey, g)) in params.into_iter().zip(grads.entries) {
        debug_assert_eq!(key, gkey);
        if lr == 0.0 {
            continue;
        }
        let updated: Vec<f64> = value.iter().zip(&g).map(|(p, d)| p - lr * d).collect();
        net.set_parameter(key, &updated)?;
    }
    Ok(loss)
}

/// Trains `net` in place and returns the mean loss of every epoch.
pub fn sgd_train(net: &mut Network, data: &Split, kind: LossKind, opts: TrainOptions) -> Result<Vec<f64>> {
    if opts.lr.is_nan() || opts.lr < 0.0 || data.is_empty() || opts.batch == 0 {
        return Err(Error::InvalidArgument("need lr >= 0, a non-empty dataset and batch > 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut curve = Vec::with_capacity(opts.epochs);
    for epoch in 0..opts.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(opts.batch) {
            let inputs: Vec<FeatureMap> = chunk.iter().map(|&i| data.inputs[i].clone()).collect();
            let targets: Vec<&Target> = chunk.iter().map(|&i| &data.targets[i]).collect();
            let loss = sgd_step(net, &inputs, &targets, kind, opts.lr)?;
            if !loss.is_finite() {
                return Err(Error::DivergenceDetected { epoch, loss });
            }
            total += loss * chunk.len() as f64;
        }
        curve.push(total / data.len() as f64);
    }
    Ok(curve)
}

/// Logits for every input, evaluated in batches of `batch`.
pub fn predict_logits(net: &Network, inputs: &[FeatureMap], batch: usize) -> Result<Vec<FeatureMap>> {
    let mut out = Vec::with_capacity(inputs.len());
    for chunk in inputs.chunks(batch.max(1)) {
        out.extend(net.forward_range(chunk, net.logits_end(), false)?.outputs);
    }
    Ok(out)
}

/// Mean loss over a split.
pub fn evaluate_loss(net: &Network, data: &Split, kind: LossKind, batch: usize) -> Result<f64> {
    let logits = predict_logits(net, &data.inputs, batch)?;
    let targets: Vec<&Target> = data.targets.iter().collect();
    Ok(batch_loss(&logits, &targets, kind)?.0)
}

fn argmax(v: &[f64]) -> usize {
    v.iter().enumerate().fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &x)| if x > bv { (i, x) } else { (bi, bv) }).0
}

/// Fraction of samples whose spatially averaged logits pick the target class.
pub fn accuracy(net: &Network, data: &Split, batch: usize) -> Result<f64> {
    let logits = predict_logits(net, &data.inputs, batch)?;
    let mut hits = 0usize;
    for (l, t) in logits.iter().zip(&data.targets) {
        let Target::Class(c) = t else {
            return Err(Error::ShapeMismatch("accuracy needs class targets".into()));
        };
        let n = l.data.len() / l.channels;
        let scores: Vec<f64> = (0..l.channels).map(|ch| l.data[ch * n..(ch + 1) * n].iter().sum()).collect();
        hits += usize::from(argmax(&scores) == *c);
    }
    Ok(hits as f64 / data.len() as f64)
}

/// Fraction of samples whose heatmap maximum lies within `radius` pixels of
/// the target maximum.
pub fn detection_rate(net: &Network, data: &Split, radius: f64, batch: usize) -> Result<f64> {
    let logits = predict_logits(net, &data.inputs, batch)?;
    let mut hits = 0usize;
    for (l, t) in logits.iter().zip(&data.targets) {
        let Target::Map(t) = t else {
            return Err(Error::ShapeMismatch("detection needs heatmap targets".into()));
        };
        let w = *l.spatial_shape.last().unwrap_or(&1);
        let (p, q) = (argmax(&l.data), argmax(&t.data));
        let d = (((p / w) as f64 - (q / w) as f64).powi(2) + ((p % w) as f64 - (q % w) as f64).powi(2)).sqrt();
        hits += usize::from(d <= radius);
    }
    Ok(hits as f64 / data.len() as f64)
}
