//! Least-squares spline reconstruction of a color texture on the sphere.
//!
//! Centers come from a repulsion grid of `N` points with basis scale
//! `s_h` proportional to `sqrt(4 pi / N)`. Coefficients solve the ridge-regularized normal
//! equations by Jacobi-preconditioned conjugate gradients.

use std::f64::consts::PI;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::report::{Criterion, VerificationReport};
use crate::error::{Error, Result};
use crate::lie_groups::{GroupElement, GroupKind};
use crate::splines::build_repulsion_grid;
use crate::splines::cardinal::{check_degree, support_radius};
use crate::splines::kernel::h_basis_value;

/// Deterministic smooth textures `S^2 -> R^3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Texture {
    Constant,
    /// Polynomial in `(x, y, z)` of degree at most 4 per channel.
    BandLimited,
}

impl Texture {
    pub fn eval(self, p: &Vector3<f64>) -> [f64; 3] {
        let (x, y, z) = (p.x, p.y, p.z);
        match self {
            Texture::Constant => [0.25, 0.5, 0.75],
            Texture::BandLimited => [
                0.5 + 0.3 * x - 0.2 * y * z + 0.4 * x * x * y - 0.3 * z.powi(4),
                0.4 + 0.25 * z + 0.35 * x * y - 0.2 * y.powi(3) + 0.3 * x * z * z * y,
                0.6 - 0.3 * y + 0.2 * x * z + 0.25 * (x * x - y * y) * z - 0.15 * x.powi(4),
            ],
        }
    }
}

/// Fit parameters shared by every `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereFitOptions {
    pub degree: usize,
    /// Training points per center.
    pub oversampling: usize,
    pub held_out: usize,
    pub ridge: f64,
    pub repulsion_iterations: usize,
    pub repulsion_step: f64,
    /// `s_h` in units of `sqrt(4 pi / N)`.
    pub scale_factor: f64,
    /// Relative residual at which conjugate gradients stop.
    pub cg_tolerance: f64,
}

impl Default for SphereFitOptions {
    fn default() -> Self {
        SphereFitOptions { degree: 3, oversampling: 4, held_out: 2000, ridge: 1e-8, repulsion_iterations: 40, repulsion_step: 0.3, scale_factor: 2.0, cg_tolerance: 1e-6 }
    }
}

/// Outcome of one fit.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereFit {
    pub n_centers: usize,
    pub s_h: f64,
    pub train_rms: f64,
    pub rms: f64,
    pub cg_iterations: usize,
}

fn uniform_points(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vector3<f64>> {
    (0..n)
        .map(|_| {
            let z: f64 = rng.random_range(-1.0..1.0);
            let phi: f64 = rng.random_range(-PI..PI);
            let r = (1.0 - z * z).sqrt();
            Vector3::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}

/// Sparse design rows `(center, value)` for each point.
fn design(centers: &[GroupElement], cvec: &[Vector3<f64>], n: usize, s_h: f64, pts: &[Vector3<f64>]) -> Result<Vec<Vec<(usize, f64)>>> {
    let reach = (support_radius(n) * s_h * 2f64.sqrt()).min(PI);
    let min_dot = reach.cos() - 1e-12;
    pts.iter()
        .map(|p| {
            let h = GroupElement::sphere_from_vector(p);
            let mut row = Vec::new();
            for (i, (c, v)) in centers.iter().zip(cvec).enumerate() {
                if v.dot(p) < min_dot {
                    continue;
                }
                let b = h_basis_value(n, c, &h, s_h)?;
                if b != 0.0 {
                    row.push((i, b));
                }
            }
            Ok(row)
        })
        .collect()
}

/// Normal operator `x -> A^T A x + ridge x` of a sparse design `A`.
struct Normal<'a> {
    rows: &'a [Vec<(usize, f64)>],
    n: usize,
    ridge: f64,
}

impl Normal<'_> {
    fn mul(&self, x: &[f64], y: &mut [f64]) {
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi = self.ridge * xi;
        }
        for row in self.rows {
            let ax: f64 = row.iter().map(|&(i, b)| b * x[i]).sum();
            for &(i, b) in row {
                y[i] += b * ax;
            }
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![self.ridge; self.n];
        for row in self.rows {
            for &(i, b) in row {
                d[i] += b * b;
            }
        }
        d
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Preconditioned CG; returns the solution and the iteration count.
fn conjugate_gradient(a: &Normal, b: &[f64], tol: f64, max_iter: usize) -> Result<(Vec<f64>, usize)> {
    let n = b.len();
    let inv_diag: Vec<f64> = a.diagonal().iter().map(|d| 1.0 / d).collect();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        return Ok((x, 0));
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 0..max_iter {
        if dot(&r, &r).sqrt() <= tol * b_norm {
            return Ok((x, it));
        }
        a.mul(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::SingularFit(format!("normal matrix not positive definite (p^T A p = {pap})")));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let rel = dot(&r, &r).sqrt() / b_norm;
    if rel <= tol.sqrt() {
        Ok((x, max_iter))
    } else {
        Err(Error::SingularFit(format!("conjugate gradients stalled at relative residual {rel:e}")))
    }
}

fn rms(rows: &[Vec<(usize, f64)>], coef: &[Vec<f64>; 3], pts: &[Vector3<f64>], texture: Texture) -> f64 {
    let mut sum = 0.0;
    for (row, p) in rows.iter().zip(pts) {
        let t = texture.eval(p);
        for ch in 0..3 {
            let v: f64 = row.iter().map(|&(i, b)| b * coef[ch][i]).sum();
            sum += (v - t[ch]).powi(2);
        }
    }
    (sum / (3 * pts.len()) as f64).sqrt()
}

/// Fits `texture` with `n_centers` sphere splines.
pub fn fit_sphere_texture(texture: Texture, n_centers: usize, opts: &SphereFitOptions, seed: u64) -> Result<SphereFit> {
    check_degree(opts.degree)?;
    if n_centers < 2 || opts.oversampling == 0 || opts.held_out == 0 {
        return Err(Error::InvalidArgument("sphere fit needs N >= 2 and nonempty point sets".into()));
    }
    let centers = build_repulsion_grid(GroupKind::Sphere2, n_centers, opts.repulsion_iterations, opts.repulsion_step, seed)?;
    let cvec: Vec<Vector3<f64>> = centers.iter().map(|c| c.sphere_vector().expect("sphere point")).collect();
    let s_h = opts.scale_factor * (4.0 * PI / n_centers as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let train = uniform_points(opts.oversampling * n_centers, &mut rng);
    let held = uniform_points(opts.held_out, &mut rng);
    let rows = design(&centers, &cvec, opts.degree, s_h, &train)?;
    let a = Normal { rows: &rows, n: n_centers, ridge: opts.ridge };
    let mut coef: [Vec<f64>; 3] = Default::default();
    let mut iterations = 0;
    for (ch, c) in coef.iter_mut().enumerate() {
        let mut rhs = vec![0.0; n_centers];
        for (row, p) in rows.iter().zip(&train) {
            let t = texture.eval(p)[ch];
            for &(i, b) in row {
                rhs[i] += b * t;
            }
        }
        let (x, it) = conjugate_gradient(&a, &rhs, opts.cg_tolerance, 20 * n_centers)?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularFit("non-finite coefficients".into()));
        }
        *c = x;
        iterations = iterations.max(it);
    }
    let train_rms = rms(&rows, &coef, &train, texture);
    let held_rows = design(&centers, &cvec, opts.degree, s_h, &held)?;
    let held_rms = rms(&held_rows, &coef, &held, texture);
    Ok(SphereFit { n_centers, s_h, train_rms, rms: held_rms, cg_iterations: iterations })
}

/// Fits every size in `sizes` and checks that the held-out RMS strictly
/// decreases. `max_rel_error` is the largest ratio of consecutive errors.
pub fn sphere_reconstruction_error(texture: Texture, sizes: &[usize], opts: &SphereFitOptions, seed: u64) -> Result<(VerificationReport, Vec<SphereFit>)> {
    let fits = sizes.iter().map(|&n| fit_sphere_texture(texture, n, opts, seed)).collect::<Result<Vec<_>>>()?;
    let worst_ratio = fits.windows(2).map(|w| w[1].rms / w[0].rms).fold(0.0, f64::max);
    let last = fits.last().map_or(0.0, |f| f.rms);
    let meta = json!({
        "texture": format!("{texture:?}"),
        "sizes": sizes,
        "rms": fits.iter().map(|f| f.rms).collect::<Vec<_>>(),
        "train_rms": fits.iter().map(|f| f.train_rms).collect::<Vec<_>>(),
        "degree": opts.degree,
        "seed": seed,
    });
    let tol = 1.0 - f64::EPSILON;
    Ok((VerificationReport::new("sphere_reconstruction", last, worst_ratio, tol, Criterion::Rel, meta), fits))
}
