//! Named groups of checks with the instance parameters used by the command
//! line and the acceptance run.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::error::{Error, Result};
use crate::layers::{ArchitectureConfig, FeatureMap, GroupChoice, Network, ProjectMode};
use crate::lie_groups::{AffineElement, GroupElement};

/// One selectable suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    All,
    Pou,
    Equivariance,
    ScaleSpace,
    Gauge,
    Sphere,
    Gradcheck,
}

impl Suite {
    pub const NAMES: [&'static str; 7] = ["all", "pou", "equivariance", "scale-space", "gauge", "sphere", "gradcheck"];

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "all" => Suite::All,
            "pou" => Suite::Pou,
            "equivariance" => Suite::Equivariance,
            "scale-space" => Suite::ScaleSpace,
            "gauge" => Suite::Gauge,
            "sphere" => Suite::Sphere,
            "gradcheck" => Suite::Gradcheck,
            _ => return None,
        })
    }
}

/// Lifting, group correlation and integral projection on SE(2) with four
/// rotations, 3x3 kernels and zero padding.
pub const SE2_PIPELINE: &str = r#"[
    {"type": "lift", "group": "so2", "n_h": 4, "out_channels": 2, "kernel_size": 3, "padding": "zero"},
    {"type": "gconv", "out_channels": 2, "kernel_size": 3, "padding": "zero"},
    {"type": "project", "mode": "integral"}
]"#;

/// 9x9 map that is nonzero on its central 3x3 block, so one-pixel shifts
/// keep every intermediate support inside the array.
pub fn central_input(rng: &mut ChaCha8Rng) -> FeatureMap {
    let mut f = FeatureMap::zeros(1, &[9, 9]);
    for y in 3..6 {
        for x in 3..6 {
            f.data[y * 9 + x] = rng.random_range(-1.0..1.0);
        }
    }
    f
}

pub fn pou_checks(seed: u64) -> Result<Vec<VerificationReport>> {
    let mut out = Vec::new();
    for n in 1..=3 {
        out.push(partition_of_unity_deviation(PouCase::So2 { n_centers: 8 }, n, TAU / 8.0, 1000, seed)?);
    }
    out.push(partition_of_unity_deviation(PouCase::ScaleInterval { n_centers: 10 }, 1, 0.5 * 2f64.ln(), 1000, seed)?);
    out.push(partition_of_unity_deviation(PouCase::Sphere { n_centers: 50 }, 2, (4.0 * PI / 50.0).sqrt(), 1000, seed)?);
    Ok(out)
}

/// Exact quarter-turn and shift checks of [`SE2_PIPELINE`].
pub fn exact_equivariance_checks(seed: u64) -> Result<Vec<VerificationReport>> {
    let net = Network::new(&ArchitectureConfig::from_json(SE2_PIPELINE)?, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = central_input(&mut rng);
    let mut out = Vec::new();
    for k in 0..4 {
        for t in [[0.0, 0.0], [1.0, 0.0], [0.0, -1.0], [-1.0, 1.0]] {
            let g = AffineElement::new(t.to_vec(), GroupElement::so2(k as f64 * FRAC_PI_2))?;
            out.push(equivariance_error(&net, &g, &f, 1e-9)?);
        }
    }
    Ok(out)
}

pub fn convergence_setup(group: GroupChoice, seed: u64) -> ConvergenceSetup {
    match group {
        GroupChoice::Scale => ConvergenceSetup {
            group,
            n_h: 4,
            s_grid: 0.5 * 2f64.ln(),
            degree: 2,
            kernel_size: 3,
            s_x: 0.5,
            channels: 2,
            group_layer: true,
            project: None,
            extent: 8.0,
            seed,
        },
        GroupChoice::So2 => ConvergenceSetup {
            group,
            n_h: 8,
            s_grid: TAU / 8.0,
            degree: 2,
            kernel_size: 3,
            s_x: 0.5,
            channels: 2,
            group_layer: false,
            project: Some(ProjectMode::Mean),
            extent: 4.0,
            seed,
        },
    }
}

/// Refinement checks: scaling by 2 on the four-scale grid and an off-grid
/// rotation by `pi / 7`.
pub fn convergence_checks(seed: u64) -> Result<Vec<VerificationReport>> {
    let input = GaussianInput { center: [0.3, -0.2], sigma: [1.0, 0.7], angle: 0.4 };
    Ok(vec![
        equivariance_convergence(&convergence_setup(GroupChoice::Scale, seed), &GroupElement::ScalePos(2.0), &input, (33, 65), 1e-2, 0.6)?,
        equivariance_convergence(&convergence_setup(GroupChoice::So2, seed), &GroupElement::so2(PI / 7.0), &input, (33, 65), 0.1, 0.6)?,
    ])
}

/// `count` random 16x16 instances with 3x3 coefficients at `s = 2`, `n = 1`.
pub fn scale_space_checks(count: usize, seed: u64) -> Result<Vec<VerificationReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let f = FeatureMap::from_planar(1, &[16, 16], (0..256).map(|_| rng.random_range(-1.0..1.0)).collect())?;
            let c: Vec<f64> = (0..9).map(|_| rng.random_range(-1.0..1.0)).collect();
            scale_space_equivalence_error(&f, &c, 3, 2, 1, 1e-8)
        })
        .collect()
}

/// Random localized kernel with three centers on 32 rotations.
pub fn gauge_checks(seed: u64) -> Result<Vec<VerificationReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = TAU / 32.0;
    let f: Vec<f64> = (0..32).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut out = Vec::new();
    for degree in 1..=3 {
        let k = AngularKernel { degree, s_h: s, centers: vec![-s, 0.0, s], coefficients: (0..3).map(|_| rng.random_range(-1.0..1.0)).collect() };
        out.push(gauge_equivalence_error(&k, &f, 1e-8)?);
    }
    Ok(out)
}

pub fn sphere_checks(sizes: &[usize], seed: u64) -> Result<Vec<VerificationReport>> {
    Ok(vec![sphere_reconstruction_error(Texture::BandLimited, sizes, &SphereFitOptions::default(), seed)?.0])
}

/// Gradient checks of both shipped desk presets. The PCam net sees a batch
/// of four so its normalization statistics stay well conditioned; the
/// CelebA net runs at 16x16 to bound the cost of its scale stacks.
pub fn gradcheck_checks(seed: u64) -> Result<Vec<VerificationReport>> {
    let pcam = ArchitectureConfig::preset("pcam_desk").ok_or_else(|| Error::InvalidArgument("missing preset".into()))?;
    let celeba = ArchitectureConfig::preset("celeba_desk").ok_or_else(|| Error::InvalidArgument("missing preset".into()))?;
    Ok(vec![
        gradcheck(&pcam, seed, &GradcheckOptions { batch: 4, input_shape: Some(vec![24, 24]), ..Default::default() })?,
        gradcheck(&celeba, seed, &GradcheckOptions { batch: 1, input_shape: Some(vec![12, 12]), ..Default::default() })?,
    ])
}

pub fn run_suite(suite: Suite, seed: u64) -> Result<Vec<VerificationReport>> {
    let mut out = Vec::new();
    let all = suite == Suite::All;
    if all || suite == Suite::Pou {
        out.extend(pou_checks(seed)?);
    }
    if all || suite == Suite::Equivariance {
        out.extend(exact_equivariance_checks(seed)?);
        out.extend(convergence_checks(seed)?);
    }
    if all || suite == Suite::ScaleSpace {
        out.extend(scale_space_checks(10, seed)?);
    }
    if all || suite == Suite::Gauge {
        out.extend(gauge_checks(seed)?);
    }
    if all || suite == Suite::Sphere {
        out.extend(sphere_checks(&[50, 500, 5000], seed)?);
    }
    if all || suite == Suite::Gradcheck {
        out.extend(gradcheck_checks(seed)?);
    }
    Ok(out)
}
