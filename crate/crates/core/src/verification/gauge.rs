//! Group correlation on SO(2) against its algebra form: with `K` supported
//! where `Exp` is a diffeomorphism, `int_H K(h^-1 g) F(g) dg` equals
//! `int K(Exp v) F(h Exp v) dv` over the algebra segment.

use std::f64::consts::PI;

use serde_json::json;

use super::report::{Criterion, VerificationReport};
use crate::error::{Error, Result};
use crate::layers::{group_correlate, sample_transformed_kernels, FeatureMap, Padding, StackMode};
use crate::lie_groups::{wrap_angle, GroupElement, GroupKind};
use crate::splines::cardinal::{b1, support_radius};
use crate::splines::{build_h_grid, HLayout, SplineKernel};

/// Localized kernel on SO(2): centers (angles) and coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularKernel {
    pub degree: usize,
    pub s_h: f64,
    pub centers: Vec<f64>,
    pub coefficients: Vec<f64>,
}

impl AngularKernel {
    /// Largest `|v|` at which some basis function is nonzero.
    pub fn support_radius(&self) -> f64 {
        self.centers.iter().map(|c| wrap_angle(*c).abs()).fold(0.0, f64::max) + support_radius(self.degree) * self.s_h
    }
}

/// Both sides at every grid point of `N_h = f.len()` equally spaced angles.
pub fn gauge_sides(kernel: &AngularKernel, f: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let radius = kernel.support_radius();
    if radius >= PI {
        return Err(Error::SupportTooLarge { radius, bound: PI });
    }
    if kernel.centers.len() != kernel.coefficients.len() || f.is_empty() {
        return Err(Error::InvalidArgument("centers, coefficients and F must be non-empty and matched".into()));
    }
    let n_h = f.len();
    let spacing = 2.0 * PI / n_h as f64;
    let (grid, _) = build_h_grid(GroupKind::So2, n_h, spacing, HLayout::GlobalUniform)?;

    // left: a group correlation with a one-point spatial kernel
    let centers: Vec<GroupElement> = kernel.centers.iter().map(|&a| GroupElement::so2(a)).collect();
    let mut k = SplineKernel::new(kernel.degree, GroupKind::So2, 2, vec![vec![0.0, 0.0]], Some(centers), 1.0, kernel.s_h, 1, 1)?;
    k.coefficients.copy_from_slice(&kernel.coefficients);
    let stack = sample_transformed_kernels(&k, &grid, &[1, 1], StackMode::Group)?;
    let input = FeatureMap::from_lifted(1, &grid, &[1, 1], f.to_vec())?;
    let spatial = b1(kernel.degree, 0.0).powi(2);
    let left: Vec<f64> = group_correlate(&input, &stack, Padding::Valid)?.data.iter().map(|v| v / spatial).collect();

    // right: quadrature over v in (-radius, radius) at the grid offsets
    let kvec = |v: f64| -> f64 {
        kernel.centers.iter().zip(&kernel.coefficients).map(|(c, a)| a * b1(kernel.degree, (v - c) / kernel.s_h)).sum()
    };
    let m = (radius / spacing).ceil() as i64;
    let right = (0..n_h as i64)
        .map(|i| {
            (-m..=m)
                .map(|j| {
                    let v = j as f64 * spacing;
                    spacing * kvec(v) * f[(i + j).rem_euclid(n_h as i64) as usize]
                })
                .sum()
        })
        .collect();
    Ok((left, right))
}

pub fn gauge_equivalence_error(kernel: &AngularKernel, f: &[f64], tolerance: f64) -> Result<VerificationReport> {
    let (left, right) = gauge_sides(kernel, f)?;
    let max_abs = left.iter().zip(&right).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let scale = right.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let meta = json!({ "n_h": f.len(), "degree": kernel.degree, "s_h": kernel.s_h, "n_k": kernel.centers.len() });
    Ok(VerificationReport::new("gauge_equivalence", max_abs, max_abs / scale, tolerance, Criterion::Abs, meta))
}
