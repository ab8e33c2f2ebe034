//! Naive reference implementations shared by the integration tests.
#![allow(dead_code)]

use gspline::layers::{FeatureMap, Padding};
use gspline::lie_groups::GroupElement;
use gspline::splines::{GroupGrid, SplineKernel};

/// Seven-deep loop evaluating the lifting correlation straight from the
/// spline definition (2-D inputs, unit spatial step).
pub fn naive_lift(kernel: &SplineKernel, grid: &GroupGrid, f: &FeatureMap, k: usize, padding: Padding) -> Vec<f64> {
    let (ny, nx) = (f.spatial_shape[0] as i64, f.spatial_shape[1] as i64);
    let r = (k / 2) as i64;
    let (oy, ox, pad) = match padding {
        Padding::Valid => (ny - k as i64 + 1, nx - k as i64 + 1, 0),
        Padding::Zero => (ny, nx, r),
    };
    let nh = grid.len();
    let mut out = vec![0.0; kernel.out_channels * nh * (oy * ox) as usize];
    for o in 0..kernel.out_channels {
        for (hi, h) in grid.elements.iter().enumerate() {
            let hinv = h.inverse().unwrap();
            let det = h.det_action(2);
            for y in 0..oy {
                for x in 0..ox {
                    let mut acc = 0.0;
                    for c in 0..kernel.in_channels {
                        for ky in 0..k as i64 {
                            for kx in 0..k as i64 {
                                let (iy, ix) = (y + ky - pad, x + kx - pad);
                                if iy < 0 || ix < 0 || iy >= ny || ix >= nx {
                                    continue;
                                }
                                let p = hinv.act_on_rd(&[(ky - r) as f64, (kx - r) as f64]).unwrap();
                                let kv = kernel.eval(&p, &kernel.group.identity(), o, c).unwrap() / det;
                                acc += kv * f.data[(c as i64 * ny * nx + iy * nx + ix) as usize];
                            }
                        }
                    }
                    out[((o * nh + hi) as i64 * oy * ox + y * ox + x) as usize] = acc;
                }
            }
        }
    }
    out
}

/// Naive group correlation with Haar weights, evaluated from the spline.
pub fn naive_group(kernel: &SplineKernel, grid: &GroupGrid, f: &FeatureMap, k: usize, padding: Padding) -> Vec<f64> {
    let (ny, nx) = (f.spatial_shape[0] as i64, f.spatial_shape[1] as i64);
    let r = (k / 2) as i64;
    let (oy, ox, pad) = match padding {
        Padding::Valid => (ny - k as i64 + 1, nx - k as i64 + 1, 0),
        Padding::Zero => (ny, nx, r),
    };
    let nh = grid.len();
    let mut out = vec![0.0; kernel.out_channels * nh * (oy * ox) as usize];
    for o in 0..kernel.out_channels {
        for (hi, h) in grid.elements.iter().enumerate() {
            let hinv = h.inverse().unwrap();
            let det = h.det_action(2);
            for y in 0..oy {
                for x in 0..ox {
                    let mut acc = 0.0;
                    for c in 0..kernel.in_channels {
                        for (ti, ht) in grid.elements.iter().enumerate() {
                            let rel: GroupElement = hinv.product(ht).unwrap();
                            for ky in 0..k as i64 {
                                for kx in 0..k as i64 {
                                    let (iy, ix) = (y + ky - pad, x + kx - pad);
                                    if iy < 0 || ix < 0 || iy >= ny || ix >= nx {
                                        continue;
                                    }
                                    let p = hinv.act_on_rd(&[(ky - r) as f64, (kx - r) as f64]).unwrap();
                                    let kv = kernel.eval(&p, &rel, o, c).unwrap() / det;
                                    let fv = f.data[(((c * nh + ti) as i64) * ny * nx + iy * nx + ix) as usize];
                                    acc += grid.weights[ti] * kv * fv;
                                }
                            }
                        }
                    }
                    out[((o * nh + hi) as i64 * oy * ox + y * ox + x) as usize] = acc;
                }
            }
        }
    }
    out
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Nodes and weights of 3-point Gauss-Legendre quadrature on `[-1, 1]`.
const GL3: [(f64, f64); 3] = [(-0.774_596_669_241_483_4, 5.0 / 9.0), (0.0, 8.0 / 9.0), (0.774_596_669_241_483_4, 5.0 / 9.0)];

/// `B^n(x)` as `n` numerical convolutions of the unit box,
/// `B^n(x) = int_{x-1/2}^{x+1/2} B^{n-1}(t) dt`. Each integral is split at
/// the knots of `B^{n-1}` and done by Gauss-Legendre quadrature, which is
/// exact on the polynomial pieces up to roundoff. The box is `[-1/2, 1/2)`.
pub fn convolved_box(n: usize, x: f64) -> f64 {
    if n == 0 {
        return if (-0.5..0.5).contains(&x) { 1.0 } else { 0.0 };
    }
    let half = (n as f64) / 2.0;
    let (a, b) = (x - 0.5, x + 0.5);
    let mut cuts = vec![a];
    let mut k = -half;
    while k <= half {
        if k > a && k < b {
            cuts.push(k);
        }
        k += 1.0;
    }
    cuts.push(b);
    let mut sum = 0.0;
    for w in cuts.windows(2) {
        let (m, r) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
        for (t, wt) in GL3 {
            sum += wt * r * convolved_box(n - 1, m + r * t);
        }
    }
    sum
}
