//! Spline kernels on `R^d x H`: tensor products of a spatial cardinal B-spline
//! basis and a B-spline basis on `H` built through the logarithmic map.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::cardinal::{b1, check_degree, db1, support_radius};
use crate::error::{Error, Result};
use crate::lie_groups::{so3, sphere, wrap_angle, GroupElement, GroupKind};

/// `Log(h_i^{-1} h)` as up to three algebra coefficients. Returns `None`
/// when `h` is certainly farther from `h_i` than `cutoff` (so the basis
/// function vanishes and the logarithm need not exist).
pub fn relative_log(center: &GroupElement, h: &GroupElement, cutoff: f64) -> Result<Option<[f64; 3]>> {
    match (center, h) {
        (GroupElement::So2(a), GroupElement::So2(b)) => Ok(Some([wrap_angle(b - a), 0.0, 0.0])),
        (GroupElement::ScalePos(a), GroupElement::ScalePos(b)) => Ok(Some([(b / a).ln(), 0.0, 0.0])),
        (GroupElement::Trans(a), GroupElement::Trans(b)) => {
            let mut out = [0.0; 3];
            for (k, (x, y)) in a.iter().zip(b).enumerate().take(3) {
                out[k] = y - x;
            }
            Ok(Some(out))
        }
        (GroupElement::So3(a), GroupElement::So3(b)) => {
            let rel = a.transpose() * b;
            let (angle, _) = so3::angle_axis(&rel);
            if angle > cutoff {
                return Ok(None);
            }
            let v = so3::log(&rel)?;
            Ok(Some([v.x, v.y, v.z]))
        }
        (GroupElement::Sphere2 { beta, gamma }, GroupElement::Sphere2 { .. }) => {
            let p = h.sphere_vector().expect("sphere element");
            let c = sphere::point(*beta, *gamma);
            if c.dot(&p).clamp(-1.0, 1.0).acos() > cutoff {
                return Ok(None);
            }
            let v = sphere::relative_log((*beta, *gamma), &p)?;
            Ok(Some([v[0], v[1], 0.0]))
        }
        _ => Err(Error::GroupMismatch(center.kind(), h.kind())),
    }
}

/// `B^{m,n}(Log(h_i^{-1} h) / s_h)` for one center.
pub fn h_basis_value(n: usize, center: &GroupElement, h: &GroupElement, s_h: f64) -> Result<f64> {
    let m = center.kind().algebra_dim().min(3);
    let cutoff = support_radius(n) * s_h * (m as f64).sqrt() + 1e-12;
    Ok(match relative_log(center, h, cutoff)? {
        None => 0.0,
        Some(a) => a[..m].iter().map(|&v| b1(n, v / s_h)).product(),
    })
}

/// `sum_i c_i B^{m,n}(Log(h_i^{-1} h) / s_h)`.
pub fn eval_spline_h(n: usize, centers: &[GroupElement], s_h: f64, coefficients: &[f64], h: &GroupElement) -> Result<f64> {
    check_degree(n)?;
    if centers.len() != coefficients.len() {
        return Err(Error::DimensionMismatch { expected: centers.len(), got: coefficients.len() });
    }
    let mut acc = 0.0;
    for (c, w) in centers.iter().zip(coefficients) {
        acc += w * h_basis_value(n, c, h, s_h)?;
    }
    Ok(acc)
}

/// Trainable kernel `sum_i c_i B((x - x_i)/s_x) B(Log(h_i^{-1} h)/s_h)`.
///
/// Coefficients are stored `[out][in][center]` with
/// `center = spatial_index * h_count + h_index`. Without `h_centers` the
/// `H` factor is the constant 1 (a planar kernel, as used by lifting layers).
#[derive(Debug, Clone)]
pub struct SplineKernel {
    pub degree: usize,
    pub group: GroupKind,
    pub dim: usize,
    pub spatial_centers: Vec<Vec<f64>>,
    pub h_centers: Option<Vec<GroupElement>>,
    pub s_x: f64,
    pub s_h: f64,
    pub in_channels: usize,
    pub out_channels: usize,
    pub coefficients: Vec<f64>,
}

impl SplineKernel {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        degree: usize,
        group: GroupKind,
        dim: usize,
        spatial_centers: Vec<Vec<f64>>,
        h_centers: Option<Vec<GroupElement>>,
        s_x: f64,
        s_h: f64,
        in_channels: usize,
        out_channels: usize,
    ) -> Result<Self> {
        check_degree(degree)?;
        if !(s_x > 0.0) || !(s_h > 0.0) {
            return Err(Error::InvalidKernel(format!("scales must be positive (s_x={s_x}, s_h={s_h})")));
        }
        if spatial_centers.is_empty() || in_channels == 0 || out_channels == 0 {
            return Err(Error::InvalidKernel("empty kernel".into()));
        }
        if let Some(x) = spatial_centers.iter().find(|x| x.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: x.len() });
        }
        if let Some(hc) = &h_centers {
            if hc.is_empty() {
                return Err(Error::InvalidKernel("empty H-center list".into()));
            }
            if let Some(e) = hc.iter().find(|e| e.kind() != group) {
                return Err(Error::GroupMismatch(group, e.kind()));
            }
        }
        let mut k = SplineKernel {
            degree,
            group,
            dim,
            spatial_centers,
            h_centers,
            s_x,
            s_h,
            in_channels,
            out_channels,
            coefficients: Vec::new(),
        };
        k.coefficients = vec![0.0; k.coefficient_len()];
        Ok(k)
    }

    pub fn h_count(&self) -> usize {
        self.h_centers.as_ref().map_or(1, |c| c.len())
    }

    pub fn center_count(&self) -> usize {
        self.spatial_centers.len() * self.h_count()
    }

    pub fn coefficient_len(&self) -> usize {
        self.out_channels * self.in_channels * self.center_count()
    }

    #[inline]
    pub fn coeff_index(&self, out: usize, inp: usize, center: usize) -> usize {
        (out * self.in_channels + inp) * self.center_count() + center
    }

    /// Fills coefficients with `N(0, std^2)` draws.
    pub fn randomize<R: Rng>(&mut self, rng: &mut R, std: f64) {
        let normal = Normal::new(0.0, std).expect("finite std");
        for c in &mut self.coefficients {
            *c = normal.sample(rng);
        }
    }

    /// `||x - x_i||_inf` bound beyond which every spatial basis vanishes.
    pub fn spatial_reach(&self) -> f64 {
        let r = support_radius(self.degree) * self.s_x;
        self.spatial_centers
            .iter()
            .map(|c| c.iter().fold(0.0f64, |m, v| m.max(v.abs())))
            .fold(0.0, f64::max)
            + r
    }

    /// `B^{d,n}((x - x_j)/s_x)` for every spatial center `j`.
    pub fn spatial_basis(&self, x: &[f64]) -> Vec<f64> {
        self.spatial_centers
            .iter()
            .map(|c| c.iter().zip(x).map(|(ci, xi)| b1(self.degree, (xi - ci) / self.s_x)).product())
            .collect()
    }

    /// Gradient of each spatial basis function with respect to its center.
    pub fn spatial_basis_center_grad(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let n = self.degree;
        self.spatial_centers
            .iter()
            .map(|c| {
                let u: Vec<f64> = c.iter().zip(x).map(|(ci, xi)| (xi - ci) / self.s_x).collect();
                (0..self.dim)
                    .map(|k| {
                        let mut p = -db1(n, u[k]) / self.s_x;
                        for (j, &uj) in u.iter().enumerate() {
                            if j != k {
                                p *= b1(n, uj);
                            }
                        }
                        p
                    })
                    .collect()
            })
            .collect()
    }

    /// `B^{m,n}(Log(h_k^{-1} h)/s_h)` for every `H` center `k`.
    pub fn h_basis(&self, h: &GroupElement) -> Result<Vec<f64>> {
        match &self.h_centers {
            None => Ok(vec![1.0]),
            Some(cs) => cs.iter().map(|c| h_basis_value(self.degree, c, h, self.s_h)).collect(),
        }
    }

    /// Derivative of each `H` basis function with respect to the algebra
    /// coordinate of its center; only defined for one-dimensional `H`.
    pub fn h_basis_center_grad(&self, h: &GroupElement) -> Result<Vec<f64>> {
        let Some(cs) = &self.h_centers else {
            return Ok(vec![0.0]);
        };
        if self.group.algebra_dim() != 1 {
            return Err(Error::InvalidKernel("deformable H centers need a 1-D group".into()));
        }
        cs.iter()
            .map(|c| {
                let a = relative_log(c, h, f64::INFINITY)?.expect("1-D log")[0];
                Ok(-db1(self.degree, a / self.s_h) / self.s_h)
            })
            .collect()
    }

    /// `sum_i c_i B((x - x_i)/s_x) B(Log(h_i^{-1} h)/s_h)` for one channel pair.
    pub fn eval(&self, x: &[f64], h: &GroupElement, out: usize, inp: usize) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        if h.kind() != self.group {
            return Err(Error::GroupMismatch(self.group, h.kind()));
        }
        if out >= self.out_channels || inp >= self.in_channels {
            return Err(Error::ChannelMismatch { expected: self.in_channels, got: inp });
        }
        let sb = self.spatial_basis(x);
        let hb = self.h_basis(h)?;
        let k = hb.len();
        let base = self.coeff_index(out, inp, 0);
        let mut acc = 0.0;
        for (j, s) in sb.iter().enumerate() {
            if *s == 0.0 {
                continue;
            }
            for (q, hv) in hb.iter().enumerate() {
                acc += self.coefficients[base + j * k + q] * s * hv;
            }
        }
        Ok(acc)
    }
}

/// Free-function form of [`SplineKernel::eval`].
pub fn eval_spline_g(kernel: &SplineKernel, x: &[f64], h: &GroupElement, out: usize, inp: usize) -> Result<f64> {
    kernel.eval(x, h, out, inp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::splines::grid::build_spatial_centers;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn so2_single_center() {
        let v = eval_spline_h(1, &[GroupElement::so2(0.0)], PI / 2.0, &[1.0], &GroupElement::so2(PI / 4.0)).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn separable_hat() {
        let mut k = SplineKernel::new(
            1,
            GroupKind::So2,
            2,
            vec![vec![0.0, 0.0]],
            Some(vec![GroupElement::so2(0.0)]),
            1.0,
            1.0,
            1,
            1,
        )
        .unwrap();
        k.coefficients[0] = 1.0;
        let e = GroupElement::so2(0.0);
        assert!((k.eval(&[0.5, 0.0], &e, 0, 0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(k.eval(&[1.5, 0.0], &e, 0, 0).unwrap(), 0.0);
    }

    #[test]
    fn brute_force_5x5() {
        let centers = build_spatial_centers(5, 2, None).unwrap();
        let hc: Vec<_> = (0..4).map(|i| GroupElement::so2(i as f64 * PI / 2.0)).collect();
        let mut k = SplineKernel::new(2, GroupKind::So2, 2, centers.clone(), Some(hc.clone()), 1.0, PI / 2.0, 2, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        k.randomize(&mut rng, 1.0);
        for (x, th) in [([0.3, -1.2], 0.4), ([2.2, 1.9], 5.0), ([-0.5, 0.5], 3.2)] {
            let h = GroupElement::so2(th);
            for o in 0..3 {
                for c in 0..2 {
                    let mut naive = 0.0;
                    for (j, xc) in centers.iter().enumerate() {
                        for (q, hq) in hc.iter().enumerate() {
                            let u = [(x[0] - xc[0]) / 1.0, (x[1] - xc[1]) / 1.0];
                            let a = wrap_angle(th - hq.log().unwrap().components()[0]) / (PI / 2.0);
                            let coeff = k.coefficients[((o * 2 + c) * 25 + j) * 4 + q];
                            naive += coeff * b1(2, u[0]) * b1(2, u[1]) * b1(2, a);
                        }
                    }
                    assert!((naive - k.eval(&x, &h, o, c).unwrap()).abs() < 1e-12);
                }
            }
        }
    }
}
