//! Equivariance errors `|| L_g Phi(f) - Phi(L_g f) || / || Phi(L_g f) ||`.
//!
//! The exact mode applies a network to sampled maps with `g` on the grid.
//! The convergence mode samples an analytic input at two resolutions of a
//! fixed physical domain and reports both errors and their ratio.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::report::{Criterion, VerificationReport};
use crate::error::{Error, Result};
use crate::layers::{
    apply_representation, group_correlate, lift_correlate, project_h, sample_transformed_kernels_with_step, FeatureMap,
    GroupChoice, Network, Padding, ProjectMode, StackMode,
};
use crate::lie_groups::{AffineElement, GroupElement};
use crate::splines::{build_h_grid, build_spatial_centers, GroupGrid, HLayout, SplineKernel};

fn relative_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

/// Exact-mode check of a whole network on one input.
pub fn equivariance_error(net: &Network, g: &AffineElement, f: &FeatureMap, tolerance: f64) -> Result<VerificationReport> {
    let out = net.forward(std::slice::from_ref(f))?.remove(0);
    let moved = net.forward(&[apply_representation(f, g)?])?.remove(0);
    let expected = apply_representation(&out, g)?;
    let rel = relative_l2(&expected.data, &moved.data);
    let abs = expected.max_abs_diff(&moved)?;
    let meta = json!({ "mode": "exact", "translation": g.x, "h": format!("{:?}", g.h), "shape": f.spatial_shape });
    Ok(VerificationReport::new("equivariance", abs, rel, tolerance, Criterion::Rel, meta))
}

/// Analytic anisotropic Gaussian `exp(-sum_a ((R^T (x - mu))_a / sigma_a)^2 / 2)`
/// in physical coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianInput {
    pub center: [f64; 2],
    pub sigma: [f64; 2],
    pub angle: f64,
}

impl GaussianInput {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let (s, c) = self.angle.sin_cos();
        let (dx, dy) = (x[0] - self.center[0], x[1] - self.center[1]);
        let (u, v) = (c * dx + s * dy, -s * dx + c * dy);
        (-0.5 * ((u / self.sigma[0]).powi(2) + (v / self.sigma[1]).powi(2))).exp()
    }
}

/// Lifting layer, optional slot-wise group layer and optional projection
/// with seeded random coefficients, defined in physical units.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceSetup {
    pub group: GroupChoice,
    pub n_h: usize,
    pub s_grid: f64,
    pub degree: usize,
    pub kernel_size: usize,
    pub s_x: f64,
    pub channels: usize,
    /// Adds a group correlation whose `H` part is a single hat at the
    /// identity, so it mixes channels and space within each slot.
    pub group_layer: bool,
    pub project: Option<ProjectMode>,
    /// Half-width of the square physical domain.
    pub extent: f64,
    pub seed: u64,
}

struct Pipeline {
    grid: GroupGrid,
    lift: SplineKernel,
    gconv: Option<SplineKernel>,
    project: Option<ProjectMode>,
}

impl Pipeline {
    fn new(setup: &ConvergenceSetup) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(setup.seed);
        let kind = setup.group.kind();
        let (grid, centers) = build_h_grid(kind, setup.n_h, setup.s_grid, HLayout::Localized { n_k: 1 })?;
        let sc = build_spatial_centers(setup.kernel_size, 2, None)?.into_iter().map(|c| c.iter().map(|v| v * setup.s_x).collect()).collect();
        let mut lift = SplineKernel::new(setup.degree, kind, 2, sc, None, setup.s_x, 1.0, 1, setup.channels)?;
        lift.randomize(&mut rng, 1.0);
        let gconv = if setup.group_layer {
            let sc = build_spatial_centers(setup.kernel_size, 2, None)?.into_iter().map(|c| c.iter().map(|v| v * setup.s_x).collect()).collect();
            let mut k = SplineKernel::new(1, kind, 2, sc, Some(centers), setup.s_x, setup.s_grid, setup.channels, setup.channels)?;
            k.randomize(&mut rng, 1.0);
            Some(k)
        } else {
            None
        };
        Ok(Pipeline { grid, lift, gconv, project: setup.project })
    }

    fn kernel_shape(&self, k: &SplineKernel, step: f64) -> Vec<usize> {
        let max_scale = self
            .grid
            .elements
            .iter()
            .map(|e| if let GroupElement::ScalePos(s) = e { *s } else { 1.0 })
            .fold(1.0, f64::max);
        let half = (k.spatial_reach() * max_scale / step - 1e-9).ceil() as usize;
        vec![2 * half + 1; 2]
    }

    fn apply(&self, f: &FeatureMap) -> Result<FeatureMap> {
        let step = f.spatial_step;
        let ls = sample_transformed_kernels_with_step(&self.lift, &self.grid, &self.kernel_shape(&self.lift, step), step, StackMode::Lifting)?;
        let mut out = lift_correlate(f, &ls, Padding::Zero)?;
        if let Some(k) = &self.gconv {
            let gs = sample_transformed_kernels_with_step(k, &self.grid, &self.kernel_shape(k, step), step, StackMode::Group)?;
            out = group_correlate(&out, &gs, Padding::Zero)?;
        }
        if let Some(m) = self.project {
            out = project_h(&out, m)?;
        }
        Ok(out)
    }
}

fn sample(input: &dyn Fn(&[f64]) -> f64, n: usize, extent: f64) -> FeatureMap {
    let step = 2.0 * extent / (n as f64 - 1.0);
    let mid = (n as f64 - 1.0) / 2.0;
    let data = (0..n * n)
        .map(|i| input(&[((i / n) as f64 - mid) * step, ((i % n) as f64 - mid) * step]))
        .collect();
    FeatureMap::from_planar(1, &[n, n], data).expect("sized").with_step(step)
}

/// Relative error at one resolution, skipping `H` slots shifted in from
/// outside a non-periodic grid.
fn error_at(p: &Pipeline, input: &dyn Fn(&[f64]) -> f64, h: &GroupElement, n: usize, extent: f64) -> Result<f64> {
    let hinv = h.inverse()?;
    let moved_input = |x: &[f64]| input(&hinv.act_on_rd(x).expect("2-D point"));
    let out = p.apply(&sample(input, n, extent))?;
    let moved = p.apply(&sample(&moved_input, n, extent))?;
    let g = AffineElement::new(vec![0.0, 0.0], h.clone())?;
    let expected = apply_representation(&out, &g)?;
    let valid: Vec<usize> = match &out.grid {
        Some(grid) if !grid.is_periodic() => {
            let shift = grid.slot_shift(h)?;
            (0..out.h_size).filter(|&i| i as isize - shift >= 0 && ((i as isize - shift) as usize) < out.h_size).collect()
        }
        _ => (0..out.h_slices()).collect(),
    };
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for c in 0..out.channels {
        for &i in &valid {
            a.extend_from_slice(expected.slice(c, i));
            b.extend_from_slice(moved.slice(c, i));
        }
    }
    Ok(relative_l2(&a, &b))
}

/// Convergence-mode check: the error at `resolutions.1` must be at most
/// `tolerance` and at most `ratio_bound` times the error at `resolutions.0`.
///
/// `max_abs_error` is the fine-resolution error; `max_rel_error` is the
/// larger of `fine / tolerance` and `ratio / ratio_bound`, held to 1.
pub fn equivariance_convergence(
    setup: &ConvergenceSetup,
    h: &GroupElement,
    input: &GaussianInput,
    resolutions: (usize, usize),
    tolerance: f64,
    ratio_bound: f64,
) -> Result<VerificationReport> {
    if h.kind() != setup.group.kind() {
        return Err(Error::GroupMismatch(setup.group.kind(), h.kind()));
    }
    let p = Pipeline::new(setup)?;
    let f = |x: &[f64]| input.eval(x);
    let coarse = error_at(&p, &f, h, resolutions.0, setup.extent)?;
    let fine = error_at(&p, &f, h, resolutions.1, setup.extent)?;
    let ratio = if coarse == 0.0 { 0.0 } else { fine / coarse };
    let meta = json!({
        "mode": "convergence",
        "h": format!("{h:?}"),
        "resolutions": [resolutions.0, resolutions.1],
        "errors": [coarse, fine],
        "ratio": ratio,
        "tolerance": tolerance,
        "ratio_bound": ratio_bound,
    });
    let score = (fine / tolerance).max(ratio / ratio_bound);
    Ok(VerificationReport::new("equivariance_convergence", fine, score, 1.0, Criterion::Rel, meta))
}
