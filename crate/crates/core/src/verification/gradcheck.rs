//! Central finite differences against the analytic backward pass.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde_json::json;
use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeMap;
use std::hash::{Hash, Hasher};

use super::report::{Criterion, VerificationReport};
use crate::error::Result;
use crate::layers::stack::sample_positions;
use crate::layers::SplineLayer;
use crate::splines::cardinal::support_radius;
use crate::splines::kernel::relative_log;
use crate::layers::{ops, ArchitectureConfig, FeatureMap, ForwardCache, Layer, Network, ParamClass, ParamKey, ProjectMode};
use crate::learning::backward;

#[derive(Debug, Clone, PartialEq)]
pub struct GradcheckOptions {
    pub probes: usize,
    pub step: f64,
    pub tolerance: f64,
    pub batch: usize,
    /// Overrides the config's input shape.
    pub input_shape: Option<Vec<usize>>,
}

impl Default for GradcheckOptions {
    fn default() -> Self {
        GradcheckOptions { probes: 100, step: 1e-4, tolerance: 1e-4, batch: 2, input_shape: None }
    }
}

/// `|a - n| / max(|a|, |n|, 1e-6)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

/// One probed parameter entry.
#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub key: ParamKey,
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
}

/// Accepted probes plus those whose difference quotient crossed a branch
/// of a piecewise-linear layer.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProbeSet {
    pub probes: Vec<Probe>,
    pub straddling: Vec<Probe>,
    /// Every parameter class the network exposes.
    pub classes: Vec<ParamClass>,
}

/// Polynomial piece of a cardinal B-spline of degree `n` containing `u`.
fn piece(n: usize, u: f64) -> i64 {
    let r = support_radius(n);
    if u.abs() >= r {
        i64::MIN
    } else {
        (u + r).floor() as i64
    }
}

/// Pieces of every spatial and `H` basis function at every sampled point of
/// a deformable layer. Cubic splines are C2, so their knots do not spoil
/// central differences and are not recorded.
fn knot_signature(l: &SplineLayer, hs: &mut DefaultHasher) -> Result<()> {
    let k = &l.kernel;
    if k.degree >= 3 {
        return Ok(());
    }
    let positions = sample_positions(&l.sample_shape, l.basis().spatial_step)?;
    for h in &l.grid.elements {
        let hinv = h.inverse()?;
        for x in &positions {
            let p = hinv.act_on_rd(x)?;
            for c in &k.spatial_centers {
                for (a, b) in p.iter().zip(c) {
                    piece(k.degree, (a - b) / k.s_x).hash(hs);
                }
            }
        }
        if let Some(centers) = &k.h_centers {
            for ht in &l.grid.elements {
                let rel = hinv.product(ht)?;
                for c in centers {
                    if let Some(v) = relative_log(c, &rel, f64::INFINITY)? {
                        piece(k.degree, v[0] / k.s_h).hash(hs);
                    }
                }
            }
        }
    }
    Ok(())
}

/// Hash of every branch taken in the forward pass: ReLU signs, the winners
/// of max pooling and max projection, and the spline pieces of deformable
/// layers.
fn branch_signature(net: &Network, cache: &ForwardCache) -> u64 {
    let mut hs = DefaultHasher::new();
    for layer in &net.layers {
        if let Layer::Spline(l) = layer {
            if l.deformable {
                knot_signature(l, &mut hs).expect("layer sampled in the forward pass");
            }
        }
    }
    for (layer, inputs) in net.layers.iter().zip(&cache.layer_inputs) {
        for f in inputs {
            match layer {
                Layer::Relu => f.data.iter().for_each(|v| (*v > 0.0).hash(&mut hs)),
                Layer::Maxpool(s) => ops::pool_argmax(f, *s).expect("cached pass succeeded").0.hash(&mut hs),
                Layer::Project(ProjectMode::Max) => {
                    let n = f.spatial_len();
                    for c in 0..f.channels {
                        for p in 0..n {
                            let mut best = 0;
                            for h in 1..f.h_size {
                                if f.slice(c, h)[p] > f.slice(c, best)[p] {
                                    best = h;
                                }
                            }
                            best.hash(&mut hs);
                        }
                    }
                }
                _ => {}
            }
        }
    }
    hs.finish()
}

fn objective(net: &Network, batch: &[FeatureMap], weights: &[Vec<f64>]) -> Result<(f64, u64)> {
    let cache = net.forward_range(batch, net.layers.len(), true)?;
    let value = cache.outputs.iter().zip(weights).map(|(o, w)| o.data.iter().zip(w).map(|(a, b)| a * b).sum::<f64>()).sum();
    Ok((value, branch_signature(net, &cache)))
}

/// Probes every parameter class of `config` (all spline layers deformable)
/// on random inputs with the scalar objective `sum r * output`.
pub fn gradcheck_probes(config: &ArchitectureConfig, seed: u64, opts: &GradcheckOptions) -> Result<ProbeSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut net = Network::new(config, seed)?;
    net.make_deformable();
    let shape = opts.input_shape.clone().or_else(|| config.input_shape.clone()).unwrap_or_else(|| vec![16, 16]);
    let batch: Vec<FeatureMap> = (0..opts.batch.max(1))
        .map(|_| {
            let n = config.input_channels * shape.iter().product::<usize>();
            FeatureMap::from_planar(config.input_channels, &shape, (0..n).map(|_| StandardNormal.sample(&mut rng)).collect())
        })
        .collect::<Result<_>>()?;
    let cache = net.forward_range(&batch, net.layers.len(), true)?;
    let weights: Vec<Vec<f64>> = cache.outputs.iter().map(|o| (0..o.data.len()).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let d_out: Vec<FeatureMap> = cache
        .outputs
        .iter()
        .zip(&weights)
        .map(|(o, w)| FeatureMap { data: w.clone(), ..o.clone() })
        .collect();
    let (grads, _) = backward(&net, &cache, &d_out)?;

    // round-robin over tensors so every class is probed
    let params = net.parameters();
    let mut queues: Vec<Vec<usize>> = params
        .iter()
        .map(|(_, v)| {
            let mut idx: Vec<usize> = (0..v.len()).collect();
            idx.shuffle(&mut rng);
            idx
        })
        .collect();
    let sig = branch_signature(&net, &cache);
    let mut set = ProbeSet::default();
    set.classes = params.iter().map(|(k, _)| k.class).collect();
    set.classes.sort_unstable();
    set.classes.dedup();
    let mut t = 0;
    let nq = queues.len();
    while set.probes.len() < opts.probes && queues.iter().any(|q| !q.is_empty()) {
        let pi = t % nq;
        t += 1;
        let Some(i) = queues[pi].pop() else { continue };
        let (key, base) = &params[pi];
        let mut v = base.clone();
        v[i] = base[i] + opts.step;
        net.set_parameter(*key, &v)?;
        let (up, sig_up) = objective(&net, &batch, &weights)?;
        v[i] = base[i] - opts.step;
        net.set_parameter(*key, &v)?;
        let (down, sig_down) = objective(&net, &batch, &weights)?;
        net.set_parameter(*key, base)?;
        let probe = Probe { key: *key, index: i, analytic: grads.entries[pi].1[i], numeric: (up - down) / (2.0 * opts.step) };
        if sig_up == sig && sig_down == sig {
            set.probes.push(probe);
        } else {
            set.straddling.push(probe);
        }
    }
    Ok(set)
}

pub fn gradcheck(config: &ArchitectureConfig, seed: u64, opts: &GradcheckOptions) -> Result<VerificationReport> {
    let set = gradcheck_probes(config, seed, opts)?;
    let probes = &set.probes;
    let max_abs = probes.iter().map(|p| (p.analytic - p.numeric).abs()).fold(0.0, f64::max);
    let mut max_rel = probes.iter().map(|p| relative_error(p.analytic, p.numeric)).fold(0.0, f64::max);
    let mut per_class: BTreeMap<&str, usize> = BTreeMap::new();
    for c in &set.classes {
        per_class.insert(c.name(), 0);
    }
    for p in probes {
        *per_class.entry(p.key.class.name()).or_default() += 1;
    }
    // an unprobed class counts as unbounded error
    let uncovered: Vec<&str> = per_class.iter().filter(|(_, &n)| n == 0).map(|(c, _)| *c).collect();
    let meta = json!({
        "config": config.name,
        "seed": seed,
        "step": opts.step,
        "batch": opts.batch,
        "input_shape": opts.input_shape,
        "probes": probes.len(),
        "straddling_skipped": set.straddling.len(),
        "accepted_per_class": per_class,
        "uncovered_classes": uncovered,
    });
    if !uncovered.is_empty() || probes.is_empty() {
        max_rel = f64::INFINITY;
    }
    Ok(VerificationReport::new("gradcheck", max_abs, max_rel, opts.tolerance, Criterion::Rel, meta))
}
