//! Analytic sampling of transformed spline kernels.
//!
//! A stack is linear in the coefficients, `stack = basis x c`, so the sampled
//! basis is kept separately ([`KernelBasis`]) and reused for assembling the
//! stack and for its adjoints.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lie_groups::GroupElement;
use crate::splines::cardinal::{b1, db1};
use crate::splines::kernel::h_basis_value;
use crate::splines::{GroupGrid, SplineKernel};

use super::feature_map::dims3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StackMode {
    Lifting,
    Group,
}

#[derive(Debug, Clone, Copy)]
struct SpatialEntry {
    center: usize,
    value: f64,
    grad: [f64; 3],
}

/// Sparse spatial basis of one transform: nonzero `B((h^-1 x - x_j)/s_x)` per
/// sample position.
#[derive(Debug, Clone)]
struct SparseRows {
    start: Vec<usize>,
    entries: Vec<SpatialEntry>,
}

/// Sampled basis of a kernel under every transform of a grid.
#[derive(Debug, Clone)]
pub struct KernelBasis {
    pub mode: StackMode,
    pub n_h: usize,
    pub n_ht: usize,
    pub kshape: [usize; 3],
    pub spatial_shape: Vec<usize>,
    pub spatial_step: f64,
    n_spatial: usize,
    n_hc: usize,
    dim: usize,
    inv_det: Vec<f64>,
    spatial: Vec<SparseRows>,
    /// `[h][ht][q]`
    h_vals: Vec<f64>,
    /// derivative of `h_vals` in the algebra coordinate of center `q`
    h_grads: Vec<f64>,
    support: Arc<Vec<Vec<usize>>>,
}

/// Kernel values `[h][out][in][ht][k_z][k_y][k_x]` for every grid transform.
#[derive(Debug, Clone)]
pub struct SampledKernelStack {
    pub mode: StackMode,
    pub out_channels: usize,
    pub in_channels: usize,
    pub n_h: usize,
    pub n_ht: usize,
    pub kshape: [usize; 3],
    pub spatial_shape: Vec<usize>,
    pub grid: GroupGrid,
    pub spatial_step: f64,
    pub data: Vec<f64>,
    /// Taps of each `[h][ht]` slice the spline basis can reach; `None` means all.
    pub support: Option<Arc<Vec<Vec<usize>>>>,
}

impl SampledKernelStack {
    pub fn kernel_len(&self) -> usize {
        self.kshape.iter().product()
    }

    /// Index of `[h][o][c][ht][0]`.
    #[inline]
    pub fn offset(&self, h: usize, o: usize, c: usize, ht: usize) -> usize {
        (((h * self.out_channels + o) * self.in_channels + c) * self.n_ht + ht) * self.kernel_len()
    }

    pub fn zeros_like(&self) -> Self {
        SampledKernelStack { data: vec![0.0; self.data.len()], ..self.clone() }
    }
}

/// Sample positions of a kernel array in physical units, `(index - center) * step`.
pub fn sample_positions(spatial_shape: &[usize], step: f64) -> Result<Vec<Vec<f64>>> {
    let d = spatial_shape.len();
    let k3 = dims3(spatial_shape)?;
    if spatial_shape.iter().any(|&k| k % 2 == 0) {
        return Err(Error::InvalidKernel(format!("sample shape {spatial_shape:?} must be odd per axis")));
    }
    let mut out = Vec::with_capacity(k3.iter().product());
    for z in 0..k3[0] {
        for y in 0..k3[1] {
            for x in 0..k3[2] {
                let idx = [z, y, x];
                let p: Vec<f64> = (3 - d..3).map(|a| (idx[a] as f64 - (k3[a] / 2) as f64) * step).collect();
                out.push(p);
            }
        }
    }
    Ok(out)
}

impl KernelBasis {
    pub fn new(kernel: &SplineKernel, grid: &GroupGrid, spatial_shape: &[usize], spatial_step: f64, mode: StackMode) -> Result<Self> {
        if kernel.group != grid.kind {
            return Err(Error::GroupMismatch(kernel.group, grid.kind));
        }
        if spatial_shape.len() != kernel.dim {
            return Err(Error::DimensionMismatch { expected: kernel.dim, got: spatial_shape.len() });
        }
        match (mode, &kernel.h_centers) {
            (StackMode::Lifting, Some(_)) => {
                return Err(Error::InvalidKernel("lifting kernels are planar (no H centers)".into()))
            }
            (StackMode::Group, None) => return Err(Error::InvalidKernel("group kernels need H centers".into())),
            _ => {}
        }
        let positions = sample_positions(spatial_shape, spatial_step)?;
        let n = kernel.degree;
        let d = kernel.dim;
        let n_h = grid.len();
        let n_ht = if mode == StackMode::Group { grid.len() } else { 1 };
        let n_hc = kernel.h_count();
        let one_d = kernel.group.algebra_dim() == 1;

        let mut inv_det = Vec::with_capacity(n_h);
        let mut spatial = Vec::with_capacity(n_h);
        let mut h_vals = vec![0.0; n_h * n_ht * n_hc];
        let mut h_grads = vec![0.0; n_h * n_ht * n_hc];
        for (i, h) in grid.elements.iter().enumerate() {
            inv_det.push(1.0 / h.det_action(d));
            let hinv = h.inverse()?;
            let mut start = vec![0];
            let mut entries = Vec::new();
            for p in &positions {
                let y = hinv.act_on_rd(p)?;
                for (j, c) in kernel.spatial_centers.iter().enumerate() {
                    let mut u = [0.0; 3];
                    let mut inside = true;
                    for a in 0..d {
                        u[a] = (y[a] - c[a]) / kernel.s_x;
                        if b1(n, u[a]) == 0.0 && db1(n, u[a]) == 0.0 {
                            inside = false;
                            break;
                        }
                    }
                    if !inside {
                        continue;
                    }
                    let value: f64 = (0..d).map(|a| b1(n, u[a])).product();
                    let mut grad = [0.0; 3];
                    for (k, g) in grad.iter_mut().enumerate().take(d) {
                        let mut prod = -db1(n, u[k]) / kernel.s_x;
                        for (a, ua) in u.iter().enumerate().take(d) {
                            if a != k {
                                prod *= b1(n, *ua);
                            }
                        }
                        *g = prod;
                    }
                    entries.push(SpatialEntry { center: j, value, grad });
                }
                start.push(entries.len());
            }
            spatial.push(SparseRows { start, entries });

            match &kernel.h_centers {
                None => {
                    h_vals[i] = 1.0;
                }
                Some(cs) => {
                    for (t, ht) in grid.elements.iter().enumerate() {
                        for (q, c) in cs.iter().enumerate() {
                            let moved = h.product(c)?;
                            let at = (i * n_ht + t) * n_hc + q;
                            h_vals[at] = h_basis_value(n, &moved, ht, kernel.s_h)?;
                            if one_d {
                                let a = crate::splines::kernel::relative_log(&moved, ht, f64::INFINITY)?
                                    .expect("1-D log")[0];
                                h_grads[at] = -db1(n, a / kernel.s_h) / kernel.s_h;
                            }
                        }
                    }
                }
            }
        }
        let klen = positions.len();
        let mut support = Vec::with_capacity(n_h * n_ht);
        for (i, rows) in spatial.iter().enumerate() {
            for t in 0..n_ht {
                let at = (i * n_ht + t) * n_hc;
                let live = (at..at + n_hc).any(|q| h_vals[q] != 0.0 || h_grads[q] != 0.0);
                support.push(if live { (0..klen).filter(|&p| rows.start[p + 1] > rows.start[p]).collect() } else { Vec::new() });
            }
        }
        Ok(KernelBasis {
            support: Arc::new(support),
            mode,
            n_h,
            n_ht,
            kshape: dims3(spatial_shape)?,
            spatial_shape: spatial_shape.to_vec(),
            spatial_step,
            n_spatial: kernel.spatial_centers.len(),
            n_hc,
            dim: d,
            inv_det,
            spatial,
            h_vals,
            h_grads,
        })
    }

    fn check_kernel(&self, kernel: &SplineKernel) -> Result<()> {
        if kernel.spatial_centers.len() != self.n_spatial || kernel.h_count() != self.n_hc {
            return Err(Error::InvalidKernel("kernel does not match its sampled basis".into()));
        }
        Ok(())
    }

    /// `M[j][ht] = sum_q c[o,c,j,q] HB[h][ht][q]`.
    fn mix(&self, kernel: &SplineKernel, h: usize, o: usize, c: usize, m: &mut [f64]) {
        let base = kernel.coeff_index(o, c, 0);
        let q_n = self.n_hc;
        for j in 0..self.n_spatial {
            for t in 0..self.n_ht {
                let hv = &self.h_vals[(h * self.n_ht + t) * q_n..(h * self.n_ht + t + 1) * q_n];
                let cf = &kernel.coefficients[base + j * q_n..base + (j + 1) * q_n];
                m[j * self.n_ht + t] = hv.iter().zip(cf).map(|(a, b)| a * b).sum();
            }
        }
    }

    /// Assembles the kernel stack for the current coefficients.
    pub fn assemble(&self, kernel: &SplineKernel, grid: &GroupGrid) -> Result<SampledKernelStack> {
        self.check_kernel(kernel)?;
        let klen: usize = self.kshape.iter().product();
        let mut st = SampledKernelStack {
            mode: self.mode,
            out_channels: kernel.out_channels,
            in_channels: kernel.in_channels,
            n_h: self.n_h,
            n_ht: self.n_ht,
            kshape: self.kshape,
            spatial_shape: self.spatial_shape.clone(),
            grid: grid.clone(),
            spatial_step: self.spatial_step,
            data: vec![0.0; self.n_h * kernel.out_channels * kernel.in_channels * self.n_ht * klen],
            support: Some(Arc::clone(&self.support)),
        };
        let mut m = vec![0.0; self.n_spatial * self.n_ht];
        for h in 0..self.n_h {
            let rows = &self.spatial[h];
            let scale = self.inv_det[h];
            for o in 0..kernel.out_channels {
                for c in 0..kernel.in_channels {
                    self.mix(kernel, h, o, c, &mut m);
                    let off = st.offset(h, o, c, 0);
                    let block = &mut st.data[off..off + self.n_ht * klen];
                    for pos in 0..klen {
                        for e in &rows.entries[rows.start[pos]..rows.start[pos + 1]] {
                            let v = scale * e.value;
                            for t in 0..self.n_ht {
                                block[t * klen + pos] += v * m[e.center * self.n_ht + t];
                            }
                        }
                    }
                }
            }
        }
        Ok(st)
    }

    /// Pulls a stack gradient back to coefficient, spatial-center and
    /// H-center gradients. Spatial center gradients are `[j][axis]`.
    pub fn backward(&self, kernel: &SplineKernel, dstack: &SampledKernelStack) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        self.check_kernel(kernel)?;
        let klen: usize = self.kshape.iter().product();
        let q_n = self.n_hc;
        let mut dc = vec![0.0; kernel.coefficients.len()];
        let mut dx = vec![0.0; self.n_spatial * self.dim];
        let mut da = vec![0.0; q_n];
        let mut m = vec![0.0; self.n_spatial * self.n_ht];
        let mut g = vec![0.0; self.n_spatial * self.n_ht];
        for h in 0..self.n_h {
            let rows = &self.spatial[h];
            let scale = self.inv_det[h];
            for o in 0..kernel.out_channels {
                for c in 0..kernel.in_channels {
                    let off = dstack.offset(h, o, c, 0);
                    let block = &dstack.data[off..off + self.n_ht * klen];
                    if block.iter().all(|&v| v == 0.0) {
                        continue;
                    }
                    self.mix(kernel, h, o, c, &mut m);
                    g.iter_mut().for_each(|v| *v = 0.0);
                    for pos in 0..klen {
                        for e in &rows.entries[rows.start[pos]..rows.start[pos + 1]] {
                            let mut along = 0.0;
                            for t in 0..self.n_ht {
                                let ds = block[t * klen + pos];
                                g[e.center * self.n_ht + t] += e.value * ds;
                                along += ds * m[e.center * self.n_ht + t];
                            }
                            for a in 0..self.dim {
                                dx[e.center * self.dim + a] += scale * along * e.grad[a];
                            }
                        }
                    }
                    let base = kernel.coeff_index(o, c, 0);
                    for j in 0..self.n_spatial {
                        for t in 0..self.n_ht {
                            let gj = scale * g[j * self.n_ht + t];
                            if gj == 0.0 {
                                continue;
                            }
                            let at = (h * self.n_ht + t) * q_n;
                            for q in 0..q_n {
                                dc[base + j * q_n + q] += gj * self.h_vals[at + q];
                                da[q] += gj * kernel.coefficients[base + j * q_n + q] * self.h_grads[at + q];
                            }
                        }
                    }
                }
            }
        }
        Ok((dc, dx, da))
    }
}

/// Samples `(1/|det h|) k(h^-1 x, h^-1 ht)` for every `h` in `grid` (and every
/// `ht` in group mode) at the points of a kernel array of `spatial_shape`.
pub fn sample_transformed_kernels(
    kernel: &SplineKernel,
    grid: &GroupGrid,
    spatial_shape: &[usize],
    mode: StackMode,
) -> Result<SampledKernelStack> {
    sample_transformed_kernels_with_step(kernel, grid, spatial_shape, 1.0, mode)
}

/// [`sample_transformed_kernels`] for a spatial grid of spacing `step`.
pub fn sample_transformed_kernels_with_step(
    kernel: &SplineKernel,
    grid: &GroupGrid,
    spatial_shape: &[usize],
    step: f64,
    mode: StackMode,
) -> Result<SampledKernelStack> {
    KernelBasis::new(kernel, grid, spatial_shape, step, mode)?.assemble(kernel, grid)
}

/// Algebra coordinate of a 1-D group element (`theta` wrapped, or `ln s`).
pub fn algebra_coordinate(h: &GroupElement) -> Result<f64> {
    Ok(h.log()?.components()[0])
}
