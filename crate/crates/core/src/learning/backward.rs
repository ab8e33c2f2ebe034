//! Reverse-mode pass through a [`Network`] from a [`ForwardCache`].

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::layers::ops;
use crate::layers::{FeatureMap, ForwardCache, Layer, Network, ParamClass, ParamKey, SampledKernelStack};

/// Gradients keyed and shaped exactly like [`Network::parameters`].
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterGradients {
    pub entries: Vec<(ParamKey, Vec<f64>)>,
}

impl ParameterGradients {
    pub fn get(&self, key: ParamKey) -> Option<&[f64]> {
        self.entries.iter().find(|(k, _)| *k == key).map(|(_, v)| v.as_slice())
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().flat_map(|(_, v)| v.iter()).fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scale(&mut self, s: f64) {
        self.entries.iter_mut().for_each(|(_, v)| v.iter_mut().for_each(|x| *x *= s));
    }
}

fn check_cache(net: &Network, cache: &ForwardCache, d_output: &[FeatureMap]) -> Result<()> {
    let n = cache.upto;
    if n > net.layers.len() || cache.layer_inputs.len() != n || cache.stacks.len() != n || cache.norms.len() != n {
        return Err(Error::CacheMismatch(format!("cache covers {} layers, network has {}", cache.layer_inputs.len(), net.layers.len())));
    }
    if d_output.len() != cache.outputs.len() {
        return Err(Error::CacheMismatch(format!("{} output gradients for a batch of {}", d_output.len(), cache.outputs.len())));
    }
    for (d, o) in d_output.iter().zip(&cache.outputs) {
        if d.data.len() != o.data.len() || d.channels != o.channels || d.spatial_shape != o.spatial_shape {
            return Err(Error::CacheMismatch("output gradient shape differs from cached output".into()));
        }
    }
    for (i, layer) in net.layers[..n].iter().enumerate() {
        let spline = matches!(layer, Layer::Spline(_));
        if spline != cache.stacks[i].is_some() || matches!(layer, Layer::Norm { .. }) != cache.norms[i].is_some() {
            return Err(Error::CacheMismatch(format!("layer {i} does not match the cached pass")));
        }
    }
    Ok(())
}

fn sum_stacks(parts: Vec<SampledKernelStack>) -> Option<SampledKernelStack> {
    let mut it = parts.into_iter();
    let mut acc = it.next()?;
    for p in it {
        acc.data.iter_mut().zip(&p.data).for_each(|(a, b)| *a += b);
    }
    Some(acc)
}

fn sum_vecs(parts: impl Iterator<Item = Vec<f64>>, len: usize) -> Vec<f64> {
    let mut acc = vec![0.0; len];
    for p in parts {
        acc.iter_mut().zip(&p).for_each(|(a, b)| *a += b);
    }
    acc
}

/// Exact adjoint of the cached forward pass: parameter gradients and the
/// gradient with respect to every batch input.
pub fn backward(net: &Network, cache: &ForwardCache, d_output: &[FeatureMap]) -> Result<(ParameterGradients, Vec<FeatureMap>)> {
    check_cache(net, cache, d_output)?;
    let mut grads: BTreeMap<ParamKey, Vec<f64>> = BTreeMap::new();
    let mut d: Vec<FeatureMap> = d_output.to_vec();
    for i in (0..cache.upto).rev() {
        let inputs = &cache.layer_inputs[i];
        let key = |class| ParamKey { layer: i, class };
        let per_sample = |f: &dyn Fn(&FeatureMap, &FeatureMap) -> Result<FeatureMap>| -> Result<Vec<FeatureMap>> {
            inputs.iter().zip(&d).map(|(x, g)| f(x, g)).collect()
        };
        d = match &net.layers[i] {
            Layer::Spline(l) => {
                let stack = cache.stacks[i].as_ref().expect("checked");
                let parts: Vec<(FeatureMap, SampledKernelStack)> =
                    inputs.par_iter().zip(d.par_iter()).map(|(x, g)| l.backward(x, stack, g)).collect::<Result<_>>()?;
                let (dins, dstacks): (Vec<_>, Vec<_>) = parts.into_iter().unzip();
                if let Some(ds) = sum_stacks(dstacks) {
                    let (dc, dx, da) = l.basis().backward(&l.kernel, &ds)?;
                    grads.insert(key(ParamClass::Coefficients), dc);
                    if l.deformable {
                        grads.insert(key(ParamClass::SpatialCenters), dx);
                        if l.kernel.h_centers.is_some() && l.kernel.group.algebra_dim() == 1 {
                            grads.insert(key(ParamClass::HCenters), da);
                        }
                    }
                }
                dins
            }
            Layer::Project(m) => per_sample(&|x, g| ops::project_h_backward(x, *m, g))?,
            Layer::Relu => per_sample(&|x, g| Ok(ops::relu_backward(x, g)))?,
            Layer::Bias(b) => {
                grads.insert(key(ParamClass::Bias), sum_vecs(d.iter().map(ops::bias_backward), b.len()));
                d
            }
            Layer::Norm { gamma, .. } => {
                let nc = cache.norms[i].as_ref().expect("checked");
                let (dins, dg, db) = ops::normalize_backward(inputs, gamma, nc, &d);
                grads.insert(key(ParamClass::NormScale), dg);
                grads.insert(key(ParamClass::NormShift), db);
                dins
            }
            Layer::Maxpool(s) => per_sample(&|x, g| ops::maxpool_backward(x, *s, g))?,
            Layer::Upsample(s) => per_sample(&|x, g| ops::upsample_backward(x, *s, g))?,
            Layer::Conv1x1 { w, .. } => {
                let parts: Vec<(FeatureMap, Vec<f64>)> = inputs.iter().zip(&d).map(|(x, g)| ops::conv1x1_backward(x, w, g)).collect();
                let (dins, dws): (Vec<_>, Vec<_>) = parts.into_iter().unzip();
                grads.insert(key(ParamClass::Weights), sum_vecs(dws.into_iter(), w.len()));
                dins
            }
            Layer::Softmax => per_sample(&|x, g| Ok(ops::softmax_backward(&ops::softmax(x), g)))?,
            Layer::Sigmoid => per_sample(&|x, g| Ok(ops::sigmoid_backward(&ops::sigmoid(x), g)))?,
        };
    }
    let entries = net
        .parameters()
        .into_iter()
        .map(|(k, v)| {
            let g = grads.remove(&k).unwrap_or_else(|| vec![0.0; v.len()]);
            (k, g)
        })
        .collect();
    Ok((ParameterGradients { entries }, d))
}
