//! The scale-space identity: lifting correlation with a spline kernel at
//! scale `s` equals a dilated correlation of its coefficients with the
//! scale-space lifting `f_s = B_s * f`, `B_s(x) = s^-d B(x / s)`.
//!
//! The left side runs through the layer stack; the right side is two plain
//! loops over zero-extended arrays.

use serde_json::json;

use super::report::{Criterion, VerificationReport};
use crate::error::{Error, Result};
use crate::layers::{lift_correlate, sample_transformed_kernels, FeatureMap, Padding, StackMode};
use crate::lie_groups::{GroupElement, GroupKind};
use crate::splines::cardinal::{b1, support_radius};
use crate::splines::{build_spatial_centers, GroupGrid, SplineKernel};

fn at(f: &FeatureMap, y: i64, x: i64) -> f64 {
    let (h, w) = (f.spatial_shape[0] as i64, f.spatial_shape[1] as i64);
    if y < 0 || x < 0 || y >= h || x >= w {
        0.0
    } else {
        f.data[(y * w + x) as usize]
    }
}

/// Both sides of the identity on a planar 2-D `f` for a `k x k`
/// coefficient map `c` (row-major), integer scale `s` and degree `n`.
pub fn scale_space_sides(f: &FeatureMap, c: &[f64], k: usize, s: usize, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if f.spatial_shape.len() != 2 || f.channels != 1 || f.is_lifted() {
        return Err(Error::ShapeMismatch("expected a single-channel planar 2-D map".into()));
    }
    if c.len() != k * k || k % 2 == 0 || s == 0 {
        return Err(Error::InvalidArgument("need an odd k x k coefficient map and s >= 1".into()));
    }
    let sf = s as f64;
    let reach = ((k / 2) as f64 + support_radius(n)) * sf;
    let size = 2 * (reach - 1e-9).ceil() as usize + 1;

    // left: spline kernel lifted over the one-element grid {s}
    let centers = build_spatial_centers(k, 2, None)?;
    let mut kernel = SplineKernel::new(n, GroupKind::ScalePos, 2, centers, None, 1.0, 1.0, 1, 1)?;
    kernel.coefficients.copy_from_slice(c);
    let grid = GroupGrid::new(GroupKind::ScalePos, vec![GroupElement::ScalePos(sf)], vec![1.0], 1.0)?;
    let stack = sample_transformed_kernels(&kernel, &grid, &[size, size], StackMode::Lifting)?;
    let left = lift_correlate(f, &stack, Padding::Zero)?.data;

    // right: f_s = B_s * f on the window needed, then the dilated sum
    let r = (support_radius(n) * sf - 1e-9).ceil() as i64;
    let norm = 1.0 / (sf * sf);
    let blur = |y: i64, x: i64| -> f64 {
        let mut acc = 0.0;
        for dy in -r..=r {
            for dx in -r..=r {
                let w = b1(n, dy as f64 / sf) * b1(n, dx as f64 / sf);
                if w != 0.0 {
                    acc += norm * w * at(f, y + dy, x + dx);
                }
            }
        }
        acc
    };
    let (h, w) = (f.spatial_shape[0] as i64, f.spatial_shape[1] as i64);
    let half = (k / 2) as i64;
    let mut right = vec![0.0; (h * w) as usize];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for j in 0..k as i64 {
                for i in 0..k as i64 {
                    let cj = c[(j * k as i64 + i) as usize];
                    if cj != 0.0 {
                        acc += cj * blur(y + s as i64 * (j - half), x + s as i64 * (i - half));
                    }
                }
            }
            right[(y * w + x) as usize] = acc;
        }
    }
    Ok((left, right))
}

pub fn scale_space_equivalence_error(f: &FeatureMap, c: &[f64], k: usize, s: usize, n: usize, tolerance: f64) -> Result<VerificationReport> {
    let (left, right) = scale_space_sides(f, c, k, s, n)?;
    let max_abs = left.iter().zip(&right).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let scale = right.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let meta = json!({ "shape": f.spatial_shape, "k": k, "s": s, "degree": n });
    Ok(VerificationReport::new("scale_space_equivalence", max_abs, max_abs / scale, tolerance, Criterion::Abs, meta))
}
