//! Lifting and group correlations as direct sums.
//!
//! All three loops (forward, adjoint in the input, adjoint in the kernel) walk
//! the kernel taps in the same order and reduce to contiguous row updates.

use serde::{Deserialize, Serialize};

use super::feature_map::FeatureMap;
use super::stack::{SampledKernelStack, StackMode};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Padding {
    #[default]
    Valid,
    Zero,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Geometry {
    pub inp: [usize; 3],
    pub out: [usize; 3],
    pub k: [usize; 3],
    pub pad: [usize; 3],
}

impl Geometry {
    pub fn new(inp: [usize; 3], k: [usize; 3], padding: Padding, spatial_rank: usize) -> Result<Self> {
        let mut out = [0; 3];
        let mut pad = [0; 3];
        for a in 0..3 {
            match padding {
                Padding::Valid => {
                    if inp[a] < k[a] {
                        return Err(Error::ShapeUnderflow {
                            input: inp[3 - spatial_rank..].to_vec(),
                            kernel: k[3 - spatial_rank..].to_vec(),
                        });
                    }
                    out[a] = inp[a] - k[a] + 1;
                }
                Padding::Zero => {
                    out[a] = inp[a];
                    pad[a] = k[a] / 2;
                }
            }
        }
        Ok(Geometry { inp, out, k, pad })
    }

    /// Output index range whose input index `o + tap - pad` is in bounds.
    #[inline]
    fn range(&self, axis: usize, tap: usize) -> (usize, usize) {
        let lo = self.pad[axis].saturating_sub(tap);
        let hi = (self.inp[axis] + self.pad[axis]).saturating_sub(tap).min(self.out[axis]);
        (lo, hi.max(lo))
    }

    pub fn out_shape(&self, rank: usize) -> Vec<usize> {
        self.out[3 - rank..].to_vec()
    }
}

/// Operands of one correlation: input `[c][ih][space]`, kernels
/// `[oh][o][c][ih][taps]` and output `[o][oh][space]`.
pub(crate) struct Plan<'a> {
    pub geo: Geometry,
    pub in_c: usize,
    pub in_h: usize,
    pub out_c: usize,
    pub out_h: usize,
    /// Per input slot factor (Haar weight times `step^d`).
    pub scale: &'a [f64],
    /// Reachable taps per `[oh][ih]` kernel slice.
    pub support: Option<&'a [Vec<usize>]>,
}

impl Plan<'_> {
    fn klen(&self) -> usize {
        self.geo.k.iter().product()
    }

    fn in_len(&self) -> usize {
        self.geo.inp.iter().product()
    }

    fn out_len(&self) -> usize {
        self.geo.out.iter().product()
    }

    /// Calls `f(out_offset, in_offset, len)` for every row touched by tap `(kz, ky, kx)`.
    #[inline]
    fn rows(&self, kz: usize, ky: usize, kx: usize, mut f: impl FnMut(usize, usize, usize)) {
        let g = &self.geo;
        let (z0, z1) = g.range(0, kz);
        let (y0, y1) = g.range(1, ky);
        let (x0, x1) = g.range(2, kx);
        if x1 <= x0 {
            return;
        }
        for z in z0..z1 {
            let iz = z + kz - g.pad[0];
            for y in y0..y1 {
                let iy = y + ky - g.pad[1];
                let o = (z * g.out[1] + y) * g.out[2] + x0;
                let i = (iz * g.inp[1] + iy) * g.inp[2] + x0 + kx - g.pad[2];
                f(o, i, x1 - x0);
            }
        }
    }

    pub fn forward(&self, input: &[f64], kernels: &[f64], out: &mut [f64]) {
        let (kl, il, ol) = (self.klen(), self.in_len(), self.out_len());
        let [_, ky_n, kx_n] = self.geo.k;
        for oh in 0..self.out_h {
            for o in 0..self.out_c {
                let dst = &mut out[(o * self.out_h + oh) * ol..(o * self.out_h + oh + 1) * ol];
                for c in 0..self.in_c {
                    for ih in 0..self.in_h {
                        let src = &input[(c * self.in_h + ih) * il..(c * self.in_h + ih + 1) * il];
                        let kb = (((oh * self.out_c + o) * self.in_c + c) * self.in_h + ih) * kl;
                        let taps = &kernels[kb..kb + kl];
                        let s = self.scale[ih];
                        for (t, &kv) in taps.iter().enumerate() {
                            if kv == 0.0 {
                                continue;
                            }
                            let w = kv * s;
                            let (kz, ky, kx) = (t / (ky_n * kx_n), (t / kx_n) % ky_n, t % kx_n);
                            self.rows(kz, ky, kx, |od, is, n| {
                                for (d, v) in dst[od..od + n].iter_mut().zip(&src[is..is + n]) {
                                    *d += w * v;
                                }
                            });
                        }
                    }
                }
            }
        }
    }

    /// Adjoint in the input: `d_input += K^T d_out`.
    pub fn backward_input(&self, dout: &[f64], kernels: &[f64], din: &mut [f64]) {
        let (kl, il, ol) = (self.klen(), self.in_len(), self.out_len());
        let [_, ky_n, kx_n] = self.geo.k;
        for c in 0..self.in_c {
            for ih in 0..self.in_h {
                let dst = &mut din[(c * self.in_h + ih) * il..(c * self.in_h + ih + 1) * il];
                let s = self.scale[ih];
                for oh in 0..self.out_h {
                    for o in 0..self.out_c {
                        let src = &dout[(o * self.out_h + oh) * ol..(o * self.out_h + oh + 1) * ol];
                        let kb = (((oh * self.out_c + o) * self.in_c + c) * self.in_h + ih) * kl;
                        for (t, &kv) in kernels[kb..kb + kl].iter().enumerate() {
                            if kv == 0.0 {
                                continue;
                            }
                            let w = kv * s;
                            let (kz, ky, kx) = (t / (ky_n * kx_n), (t / kx_n) % ky_n, t % kx_n);
                            self.rows(kz, ky, kx, |od, is, n| {
                                for (d, v) in dst[is..is + n].iter_mut().zip(&src[od..od + n]) {
                                    *d += w * v;
                                }
                            });
                        }
                    }
                }
            }
        }
    }

    /// Adjoint in the kernels: `d_kernels += d_out (x) input`.
    pub fn backward_kernels(&self, dout: &[f64], input: &[f64], dk: &mut [f64]) {
        let (kl, il, ol) = (self.klen(), self.in_len(), self.out_len());
        let [_, ky_n, kx_n] = self.geo.k;
        for oh in 0..self.out_h {
            for o in 0..self.out_c {
                let go = &dout[(o * self.out_h + oh) * ol..(o * self.out_h + oh + 1) * ol];
                if go.iter().all(|&v| v == 0.0) {
                    continue;
                }
                for c in 0..self.in_c {
                    for ih in 0..self.in_h {
                        let src = &input[(c * self.in_h + ih) * il..(c * self.in_h + ih + 1) * il];
                        let kb = (((oh * self.out_c + o) * self.in_c + c) * self.in_h + ih) * kl;
                        let s = self.scale[ih];
                        let all: Vec<usize>;
                        let taps = match self.support {
                            Some(sup) => &sup[oh * self.in_h + ih][..],
                            None => {
                                all = (0..kl).collect();
                                &all[..]
                            }
                        };
                        for &t in taps {
                            let (kz, ky, kx) = (t / (ky_n * kx_n), (t / kx_n) % ky_n, t % kx_n);
                            let mut acc = 0.0;
                            self.rows(kz, ky, kx, |od, is, n| {
                                acc += go[od..od + n].iter().zip(&src[is..is + n]).map(|(a, b)| a * b).sum::<f64>();
                            });
                            dk[kb + t] += s * acc;
                        }
                    }
                }
            }
        }
    }
}

fn check_step(f: &FeatureMap, stack: &SampledKernelStack) -> Result<()> {
    if (f.spatial_step - stack.spatial_step).abs() > 1e-12 * f.spatial_step.abs().max(1.0) {
        return Err(Error::InvalidKernel(format!(
            "kernel sampled at step {} but map has step {}",
            stack.spatial_step, f.spatial_step
        )));
    }
    if f.spatial_shape.len() != stack.spatial_shape.len() {
        return Err(Error::DimensionMismatch { expected: stack.spatial_shape.len(), got: f.spatial_shape.len() });
    }
    Ok(())
}

fn lift_plan<'a>(f: &FeatureMap, stack: &'a SampledKernelStack, padding: Padding, scale: &'a [f64]) -> Result<Plan<'a>> {
    if stack.mode != StackMode::Lifting {
        return Err(Error::InvalidKernel("lift_correlate needs a lifting stack".into()));
    }
    if f.is_lifted() {
        return Err(Error::ShapeMismatch("lift_correlate expects a planar input".into()));
    }
    if f.channels != stack.in_channels {
        return Err(Error::ChannelMismatch { expected: stack.in_channels, got: f.channels });
    }
    check_step(f, stack)?;
    let geo = Geometry::new(f.dims3(), stack.kshape, padding, f.spatial_shape.len())?;
    Ok(Plan { geo, in_c: f.channels, in_h: 1, out_c: stack.out_channels, out_h: stack.n_h, scale, support: stack.support.as_deref().map(|v| &v[..]) })
}

fn group_plan<'a>(f: &FeatureMap, stack: &'a SampledKernelStack, padding: Padding, scale: &'a [f64]) -> Result<Plan<'a>> {
    if stack.mode != StackMode::Group {
        return Err(Error::InvalidKernel("group_correlate needs a group stack".into()));
    }
    match &f.grid {
        None => return Err(Error::NotLifted),
        Some(g) if *g != stack.grid => return Err(Error::GridMismatch),
        _ => {}
    }
    if f.channels != stack.in_channels {
        return Err(Error::ChannelMismatch { expected: stack.in_channels, got: f.channels });
    }
    check_step(f, stack)?;
    let geo = Geometry::new(f.dims3(), stack.kshape, padding, f.spatial_shape.len())?;
    Ok(Plan { geo, in_c: f.channels, in_h: f.h_size, out_c: stack.out_channels, out_h: stack.n_h, scale, support: stack.support.as_deref().map(|v| &v[..]) })
}

fn lift_scale(f: &FeatureMap) -> Vec<f64> {
    vec![f.spatial_step.powi(f.spatial_shape.len() as i32)]
}

fn group_scale(f: &FeatureMap, stack: &SampledKernelStack) -> Vec<f64> {
    let v = f.spatial_step.powi(f.spatial_shape.len() as i32);
    stack.grid.weights.iter().map(|w| w * v).collect()
}

fn lifted_output(stack: &SampledKernelStack, plan: &Plan, f: &FeatureMap) -> FeatureMap {
    let shape = plan.geo.out_shape(f.spatial_shape.len());
    let mut out = FeatureMap::zeros_lifted(stack.out_channels, &stack.grid, &shape);
    out.spatial_step = f.spatial_step;
    out
}

/// `out[o, h, x] = sum_c sum_xt k_h[o, c, xt] f[c, x + xt] step^d`.
pub fn lift_correlate(f: &FeatureMap, stack: &SampledKernelStack, padding: Padding) -> Result<FeatureMap> {
    let scale = lift_scale(f);
    let plan = lift_plan(f, stack, padding, &scale)?;
    let mut out = lifted_output(stack, &plan, f);
    plan.forward(&f.data, &stack.data, &mut out.data);
    Ok(out)
}

/// `out[o, h, x] = sum_c sum_ht w_ht sum_xt K_h[o, c, ht, xt] F[c, ht, x + xt] step^d`.
pub fn group_correlate(f: &FeatureMap, stack: &SampledKernelStack, padding: Padding) -> Result<FeatureMap> {
    let scale = group_scale(f, stack);
    let plan = group_plan(f, stack, padding, &scale)?;
    let mut out = lifted_output(stack, &plan, f);
    plan.forward(&f.data, &stack.data, &mut out.data);
    Ok(out)
}

/// Adjoints of [`lift_correlate`]: `(d_input, d_stack)`.
pub fn lift_correlate_backward(
    f: &FeatureMap,
    stack: &SampledKernelStack,
    padding: Padding,
    dout: &FeatureMap,
) -> Result<(FeatureMap, SampledKernelStack)> {
    let scale = lift_scale(f);
    let plan = lift_plan(f, stack, padding, &scale)?;
    adjoints(&plan, f, stack, dout)
}

/// Adjoints of [`group_correlate`]: `(d_input, d_stack)`.
pub fn group_correlate_backward(
    f: &FeatureMap,
    stack: &SampledKernelStack,
    padding: Padding,
    dout: &FeatureMap,
) -> Result<(FeatureMap, SampledKernelStack)> {
    let scale = group_scale(f, stack);
    let plan = group_plan(f, stack, padding, &scale)?;
    adjoints(&plan, f, stack, dout)
}

fn adjoints(plan: &Plan, f: &FeatureMap, stack: &SampledKernelStack, dout: &FeatureMap) -> Result<(FeatureMap, SampledKernelStack)> {
    if dout.data.len() != plan.out_c * plan.out_h * plan.out_len() {
        return Err(Error::CacheMismatch("output gradient has the wrong size".into()));
    }
    let mut din = f.zeros_like();
    plan.backward_input(&dout.data, &stack.data, &mut din.data);
    let mut dk = stack.zeros_like();
    plan.backward_kernels(&dout.data, &f.data, &mut dk.data);
    Ok((din, dk))
}
