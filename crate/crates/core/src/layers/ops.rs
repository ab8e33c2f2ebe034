//! Projection over `H` and the pointwise, pooling and channel-mixing layers,
//! each with its adjoint.

use serde::{Deserialize, Serialize};

use super::feature_map::FeatureMap;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectMode {
    Integral,
    Mean,
    Max,
}

fn planar_like(f: &FeatureMap) -> FeatureMap {
    let mut out = FeatureMap::zeros(f.channels, &f.spatial_shape);
    out.spatial_step = f.spatial_step;
    out
}

/// Haar-weighted integral, weighted mean, or maximum over the `H` axis.
pub fn project_h(f: &FeatureMap, mode: ProjectMode) -> Result<FeatureMap> {
    let grid = f.grid.as_ref().ok_or(Error::NotLifted)?;
    let mut out = planar_like(f);
    let n = f.spatial_len();
    let total = grid.total_weight();
    for c in 0..f.channels {
        let dst = &mut out.data[c * n..(c + 1) * n];
        match mode {
            ProjectMode::Integral | ProjectMode::Mean => {
                let norm = if mode == ProjectMode::Mean { 1.0 / total } else { 1.0 };
                for h in 0..f.h_size {
                    let w = grid.weights[h] * norm;
                    for (d, v) in dst.iter_mut().zip(f.slice(c, h)) {
                        *d += w * v;
                    }
                }
            }
            ProjectMode::Max => {
                dst.copy_from_slice(f.slice(c, 0));
                for h in 1..f.h_size {
                    for (d, v) in dst.iter_mut().zip(f.slice(c, h)) {
                        if *v > *d {
                            *d = *v;
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Adjoint of [`project_h`]; max mode routes to the first maximizer.
pub fn project_h_backward(f: &FeatureMap, mode: ProjectMode, dout: &FeatureMap) -> Result<FeatureMap> {
    let grid = f.grid.as_ref().ok_or(Error::NotLifted)?;
    let mut din = f.zeros_like();
    let n = f.spatial_len();
    let total = grid.total_weight();
    for c in 0..f.channels {
        let g = &dout.data[c * n..(c + 1) * n];
        match mode {
            ProjectMode::Integral | ProjectMode::Mean => {
                let norm = if mode == ProjectMode::Mean { 1.0 / total } else { 1.0 };
                for h in 0..f.h_size {
                    let w = grid.weights[h] * norm;
                    for (d, v) in din.slice_mut(c, h).iter_mut().zip(g) {
                        *d = w * v;
                    }
                }
            }
            ProjectMode::Max => {
                for x in 0..n {
                    let mut best = 0;
                    for h in 1..f.h_size {
                        if f.slice(c, h)[x] > f.slice(c, best)[x] {
                            best = h;
                        }
                    }
                    din.slice_mut(c, best)[x] = g[x];
                }
            }
        }
    }
    Ok(din)
}

pub fn relu(f: &FeatureMap) -> FeatureMap {
    let mut out = f.clone();
    out.data.iter_mut().for_each(|v| *v = v.max(0.0));
    out
}

pub fn relu_backward(f: &FeatureMap, dout: &FeatureMap) -> FeatureMap {
    let mut din = dout.clone();
    for (d, x) in din.data.iter_mut().zip(&f.data) {
        if *x <= 0.0 {
            *d = 0.0;
        }
    }
    din
}

/// Adds `b[c]` to every entry of channel `c`.
pub fn add_bias(f: &FeatureMap, b: &[f64]) -> Result<FeatureMap> {
    if b.len() != f.channels {
        return Err(Error::ChannelMismatch { expected: b.len(), got: f.channels });
    }
    let mut out = f.clone();
    let block = f.h_slices() * f.spatial_len();
    for (c, chunk) in out.data.chunks_mut(block).enumerate() {
        chunk.iter_mut().for_each(|v| *v += b[c]);
    }
    Ok(out)
}

pub fn bias_backward(dout: &FeatureMap) -> Vec<f64> {
    let block = dout.h_slices() * dout.spatial_len();
    dout.data.chunks(block).map(|c| c.iter().sum()).collect()
}

/// `out[o, h, x] = sum_c w[o][c] f[c, h, x]`.
pub fn conv1x1(f: &FeatureMap, w: &[f64], out_channels: usize) -> Result<FeatureMap> {
    if w.len() != out_channels * f.channels {
        return Err(Error::ChannelMismatch { expected: w.len() / out_channels.max(1), got: f.channels });
    }
    let block = f.h_slices() * f.spatial_len();
    let mut out = FeatureMap { channels: out_channels, data: vec![0.0; out_channels * block], ..f.clone() };
    for o in 0..out_channels {
        let dst = &mut out.data[o * block..(o + 1) * block];
        for c in 0..f.channels {
            let wv = w[o * f.channels + c];
            for (d, v) in dst.iter_mut().zip(&f.data[c * block..(c + 1) * block]) {
                *d += wv * v;
            }
        }
    }
    Ok(out)
}

/// Adjoints of [`conv1x1`]: `(d_input, d_w)`.
pub fn conv1x1_backward(f: &FeatureMap, w: &[f64], dout: &FeatureMap) -> (FeatureMap, Vec<f64>) {
    let block = f.h_slices() * f.spatial_len();
    let mut din = f.zeros_like();
    let mut dw = vec![0.0; w.len()];
    for o in 0..dout.channels {
        let g = &dout.data[o * block..(o + 1) * block];
        for c in 0..f.channels {
            let x = &f.data[c * block..(c + 1) * block];
            dw[o * f.channels + c] = g.iter().zip(x).map(|(a, b)| a * b).sum();
            let wv = w[o * f.channels + c];
            for (d, v) in din.data[c * block..(c + 1) * block].iter_mut().zip(g) {
                *d += wv * v;
            }
        }
    }
    (din, dw)
}

fn pooled_shape(shape: &[usize], size: usize) -> Result<Vec<usize>> {
    if size == 0 || shape.iter().any(|&s| s < size) {
        return Err(Error::ShapeUnderflow { input: shape.to_vec(), kernel: vec![size; shape.len()] });
    }
    Ok(shape.iter().map(|s| s / size).collect())
}

/// Index of each pooled output's maximizer in the input slice.
pub(crate) fn pool_argmax(f: &FeatureMap, size: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    let out_shape = pooled_shape(&f.spatial_shape, size)?;
    let ind = super::feature_map::dims3(&f.spatial_shape)?;
    let outd = super::feature_map::dims3(&out_shape)?;
    let rank = f.spatial_shape.len();
    let sz = |a: usize| if a + rank >= 3 { size } else { 1 };
    let mut arg = Vec::with_capacity(f.channels * f.h_slices() * out_shape.iter().product::<usize>());
    for c in 0..f.channels {
        for h in 0..f.h_slices() {
            let src = f.slice(c, h);
            for z in 0..outd[0] {
                for y in 0..outd[1] {
                    for x in 0..outd[2] {
                        let mut best = usize::MAX;
                        let mut bv = f64::NEG_INFINITY;
                        for dz in 0..sz(0) {
                            for dy in 0..sz(1) {
                                for dx in 0..sz(2) {
                                    let i = ((z * sz(0) + dz) * ind[1] + y * sz(1) + dy) * ind[2] + x * sz(2) + dx;
                                    if best == usize::MAX || src[i] > bv {
                                        best = i;
                                        bv = src[i];
                                    }
                                }
                            }
                        }
                        arg.push(best);
                    }
                }
            }
        }
    }
    Ok((arg, out_shape))
}

/// Non-overlapping spatial max pooling by `size` along every spatial axis.
pub fn maxpool(f: &FeatureMap, size: usize) -> Result<FeatureMap> {
    let (arg, out_shape) = pool_argmax(f, size)?;
    let mut out = FeatureMap { spatial_shape: out_shape, data: Vec::with_capacity(arg.len()), ..f.clone() };
    let per = out.spatial_len();
    for (k, &i) in arg.iter().enumerate() {
        let slice = k / per;
        out.data.push(f.data[slice * f.spatial_len() + i]);
    }
    Ok(out)
}

pub fn maxpool_backward(f: &FeatureMap, size: usize, dout: &FeatureMap) -> Result<FeatureMap> {
    let (arg, out_shape) = pool_argmax(f, size)?;
    let per: usize = out_shape.iter().product();
    let mut din = f.zeros_like();
    for (k, &i) in arg.iter().enumerate() {
        let slice = k / per;
        din.data[slice * f.spatial_len() + i] += dout.data[k];
    }
    Ok(din)
}

fn upsample_index(f: &FeatureMap, factor: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    if factor == 0 {
        return Err(Error::InvalidArgument("upsample factor must be positive".into()));
    }
    let out_shape: Vec<usize> = f.spatial_shape.iter().map(|s| s * factor).collect();
    let ind = super::feature_map::dims3(&f.spatial_shape)?;
    let outd = super::feature_map::dims3(&out_shape)?;
    let rank = f.spatial_shape.len();
    let fac = |a: usize| if a + rank >= 3 { factor } else { 1 };
    let mut idx = Vec::with_capacity(out_shape.iter().product());
    for z in 0..outd[0] {
        for y in 0..outd[1] {
            for x in 0..outd[2] {
                idx.push(((z / fac(0)) * ind[1] + y / fac(1)) * ind[2] + x / fac(2));
            }
        }
    }
    Ok((idx, out_shape))
}

/// Nearest-neighbour upsampling by `factor` along every spatial axis.
pub fn upsample(f: &FeatureMap, factor: usize) -> Result<FeatureMap> {
    let (idx, out_shape) = upsample_index(f, factor)?;
    let mut out = FeatureMap { spatial_shape: out_shape, data: Vec::new(), ..f.clone() };
    for s in 0..f.channels * f.h_slices() {
        let src = &f.data[s * f.spatial_len()..(s + 1) * f.spatial_len()];
        out.data.extend(idx.iter().map(|&i| src[i]));
    }
    Ok(out)
}

pub fn upsample_backward(f: &FeatureMap, factor: usize, dout: &FeatureMap) -> Result<FeatureMap> {
    let (idx, _) = upsample_index(f, factor)?;
    let mut din = f.zeros_like();
    let n_in = f.spatial_len();
    for s in 0..f.channels * f.h_slices() {
        let g = &dout.data[s * idx.len()..(s + 1) * idx.len()];
        let dst = &mut din.data[s * n_in..(s + 1) * n_in];
        for (&i, v) in idx.iter().zip(g) {
            dst[i] += v;
        }
    }
    Ok(din)
}

/// Softmax over channels at every `(h, x)`.
pub fn softmax(f: &FeatureMap) -> FeatureMap {
    let block = f.h_slices() * f.spatial_len();
    let mut out = f.clone();
    for p in 0..block {
        let m = (0..f.channels).map(|c| f.data[c * block + p]).fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = (0..f.channels).map(|c| (f.data[c * block + p] - m).exp()).sum();
        for c in 0..f.channels {
            out.data[c * block + p] = (f.data[c * block + p] - m).exp() / z;
        }
    }
    out
}

/// Adjoint of [`softmax`] given its output `y`.
pub fn softmax_backward(y: &FeatureMap, dout: &FeatureMap) -> FeatureMap {
    let block = y.h_slices() * y.spatial_len();
    let mut din = y.zeros_like();
    for p in 0..block {
        let dot: f64 = (0..y.channels).map(|c| y.data[c * block + p] * dout.data[c * block + p]).sum();
        for c in 0..y.channels {
            din.data[c * block + p] = y.data[c * block + p] * (dout.data[c * block + p] - dot);
        }
    }
    din
}

pub fn sigmoid_scalar(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn sigmoid(f: &FeatureMap) -> FeatureMap {
    let mut out = f.clone();
    out.data.iter_mut().for_each(|v| *v = sigmoid_scalar(*v));
    out
}

/// Adjoint of [`sigmoid`] given its output `y`.
pub fn sigmoid_backward(y: &FeatureMap, dout: &FeatureMap) -> FeatureMap {
    let mut din = dout.clone();
    for (d, s) in din.data.iter_mut().zip(&y.data) {
        *d *= s * (1.0 - s);
    }
    din
}

/// Per-channel statistics shared by the forward and backward pass of [`normalize`].
#[derive(Debug, Clone)]
pub struct NormCache {
    pub mean: Vec<f64>,
    pub inv_std: Vec<f64>,
}

/// Standardizes each channel over batch, `H` and space, then applies `gamma`, `beta`.
pub fn normalize(batch: &[FeatureMap], gamma: &[f64], beta: &[f64], eps: f64) -> Result<(Vec<FeatureMap>, NormCache)> {
    let ch = gamma.len();
    if batch.iter().any(|f| f.channels != ch) || beta.len() != ch {
        return Err(Error::ChannelMismatch { expected: ch, got: batch.first().map_or(0, |f| f.channels) });
    }
    let mut mean = vec![0.0; ch];
    let mut var = vec![0.0; ch];
    let mut count = 0usize;
    for f in batch {
        let block = f.h_slices() * f.spatial_len();
        count += block;
        for c in 0..ch {
            mean[c] += f.data[c * block..(c + 1) * block].iter().sum::<f64>();
        }
    }
    let cnt = count.max(1) as f64;
    mean.iter_mut().for_each(|m| *m /= cnt);
    for f in batch {
        let block = f.h_slices() * f.spatial_len();
        for c in 0..ch {
            var[c] += f.data[c * block..(c + 1) * block].iter().map(|v| (v - mean[c]).powi(2)).sum::<f64>();
        }
    }
    let inv_std: Vec<f64> = var.iter().map(|v| 1.0 / (v / cnt + eps).sqrt()).collect();
    let outs = batch
        .iter()
        .map(|f| {
            let block = f.h_slices() * f.spatial_len();
            let mut o = f.clone();
            for c in 0..ch {
                for v in &mut o.data[c * block..(c + 1) * block] {
                    *v = gamma[c] * (*v - mean[c]) * inv_std[c] + beta[c];
                }
            }
            o
        })
        .collect();
    Ok((outs, NormCache { mean, inv_std }))
}

/// Adjoints of [`normalize`]: `(d_inputs, d_gamma, d_beta)`.
pub fn normalize_backward(
    batch: &[FeatureMap],
    gamma: &[f64],
    cache: &NormCache,
    dout: &[FeatureMap],
) -> (Vec<FeatureMap>, Vec<f64>, Vec<f64>) {
    let ch = gamma.len();
    let mut dgamma = vec![0.0; ch];
    let mut dbeta = vec![0.0; ch];
    let mut count = 0usize;
    for (f, g) in batch.iter().zip(dout) {
        let block = f.h_slices() * f.spatial_len();
        count += block;
        for c in 0..ch {
            for (x, d) in f.data[c * block..(c + 1) * block].iter().zip(&g.data[c * block..(c + 1) * block]) {
                let xhat = (x - cache.mean[c]) * cache.inv_std[c];
                dgamma[c] += d * xhat;
                dbeta[c] += d;
            }
        }
    }
    let cnt = count.max(1) as f64;
    let dins = batch
        .iter()
        .zip(dout)
        .map(|(f, g)| {
            let block = f.h_slices() * f.spatial_len();
            let mut din = f.zeros_like();
            for c in 0..ch {
                let k = gamma[c] * cache.inv_std[c];
                for ((o, x), d) in din.data[c * block..(c + 1) * block]
                    .iter_mut()
                    .zip(&f.data[c * block..(c + 1) * block])
                    .zip(&g.data[c * block..(c + 1) * block])
                {
                    let xhat = (x - cache.mean[c]) * cache.inv_std[c];
                    *o = k * (d - dbeta[c] / cnt - xhat * dgamma[c] / cnt);
                }
            }
            din
        })
        .collect();
    (dins, dgamma, dbeta)
}
