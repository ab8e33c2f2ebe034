//! Approximately uniform center sets on the sphere and on SO(3) from a
//! repulsion model: descent on `sum_{i != j} d(h_i, h_j)^{-2}`.
//!
//! Rotations are handled as unit quaternions with `q ~ -q`, so both cases
//! are point clouds on a unit sphere in `R^3` or `R^4`.

use nalgebra::{Matrix3, Rotation3, UnitQuaternion, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::lie_groups::{GroupElement, GroupKind};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Metric {
    Sphere,
    Rotation,
}

/// Geodesic distance between two points of the cloud.
#[inline]
fn distance<const K: usize>(metric: Metric, p: &[f64; K], q: &[f64; K]) -> f64 {
    let u: f64 = (0..K).map(|k| p[k] * q[k]).sum();
    let s2: f64 = (0..K).map(|k| (q[k] - u * p[k]).powi(2)).sum();
    match metric {
        Metric::Sphere => s2.sqrt().atan2(u),
        // the closer of q and -q; the angle doubles
        Metric::Rotation => 2.0 * s2.sqrt().atan2(u.abs()),
    }
}

fn energy<const K: usize>(metric: Metric, pts: &[[f64; K]]) -> f64 {
    let mut e = 0.0;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            let d = distance(metric, &pts[i], &pts[j]);
            e += 1.0 / (d * d).max(1e-300);
        }
    }
    2.0 * e
}

fn min_distance<const K: usize>(metric: Metric, pts: &[[f64; K]]) -> f64 {
    let mut m = f64::INFINITY;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            m = m.min(distance(metric, &pts[i], &pts[j]));
        }
    }
    m
}

/// Descent directions `-grad_i / |grad_i|` projected to each tangent space.
fn directions<const K: usize>(metric: Metric, pts: &[[f64; K]]) -> Vec<[f64; K]> {
    let n = pts.len();
    let mut g = vec![[0.0; K]; n];
    for i in 0..n {
        let p = pts[i];
        let mut gi = [0.0; K];
        for j in (i + 1)..n {
            let q = &pts[j];
            let u: f64 = (0..K).map(|k| p[k] * q[k]).sum();
            let mut s2 = 0.0;
            for k in 0..K {
                let t = q[k] - u * p[k];
                s2 += t * t;
            }
            let s = s2.sqrt();
            if s == 0.0 {
                continue;
            }
            let (d, sign, scale) = match metric {
                Metric::Sphere => (s.atan2(u), 1.0, 1.0),
                Metric::Rotation => (2.0 * s.atan2(u.abs()), u.signum(), 2.0),
            };
            // dE/dp_i = sum_j -2 d^-3 dd/dp_i, with dd/dp_i = -scale t_ij
            let w = sign * 2.0 * scale / (d * d * d).max(1e-300) / s;
            let gj = &mut g[j];
            for k in 0..K {
                gi[k] -= w * (q[k] - u * p[k]);
                gj[k] -= w * (p[k] - u * q[k]);
            }
        }
        for k in 0..K {
            g[i][k] += gi[k];
        }
    }
    for v in &mut g {
        let nrm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if nrm > 0.0 {
            for a in v.iter_mut() {
                *a /= nrm;
            }
        }
    }
    g
}

fn step_points<const K: usize>(pts: &[[f64; K]], dirs: &[[f64; K]], len: f64) -> Vec<[f64; K]> {
    pts.iter()
        .zip(dirs)
        .map(|(p, d)| {
            let (s, c) = len.sin_cos();
            let mut out = [0.0; K];
            for k in 0..K {
                out[k] = p[k] * c + d[k] * s;
            }
            let nrm = out.iter().map(|a| a * a).sum::<f64>().sqrt();
            for a in &mut out {
                *a /= nrm;
            }
            out
        })
        .collect()
}

fn random_unit<const K: usize>(n: usize, seed: u64) -> Vec<[f64; K]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| loop {
            let mut v = [0.0; K];
            for a in &mut v {
                *a = StandardNormal.sample(&mut rng);
            }
            let nrm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if nrm > 1e-8 {
                for a in &mut v {
                    *a /= nrm;
                }
                break v;
            }
        })
        .collect()
}

/// Repulsion descent with backtracking. `step` is the initial geodesic
/// displacement per point relative to the ideal spacing.
fn repel<const K: usize>(metric: Metric, n: usize, iterations: usize, step: f64, seed: u64) -> Vec<[f64; K]> {
    let init = random_unit::<K>(n, seed);
    let spacing = match metric {
        Metric::Sphere => (4.0 * std::f64::consts::PI / n as f64).sqrt(),
        Metric::Rotation => (8.0 * std::f64::consts::PI.powi(2) / n as f64).cbrt(),
    };
    let max_len = step * spacing;
    let mut len = max_len;
    let mut pts = init.clone();
    let mut e = energy(metric, &pts);
    for _ in 0..iterations {
        let dirs = directions(metric, &pts);
        let mut accepted = false;
        for _ in 0..30 {
            let trial = step_points(&pts, &dirs, len);
            let et = energy(metric, &trial);
            if et < e {
                pts = trial;
                e = et;
                accepted = true;
                len = (len * 1.5).min(max_len);
                break;
            }
            len *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if min_distance(metric, &pts) < min_distance(metric, &init) {
        return init;
    }
    pts
}

/// Repulsion point set on the unit sphere.
pub fn repulsion_sphere_points(n: usize, iterations: usize, step: f64, seed: u64) -> Vec<Vector3<f64>> {
    repel::<3>(Metric::Sphere, n, iterations, step, seed)
        .into_iter()
        .map(|p| Vector3::new(p[0], p[1], p[2]))
        .collect()
}

/// Repulsion center list on `SO3` or `Sphere2`.
pub fn build_repulsion_grid(kind: GroupKind, n: usize, iterations: usize, step: f64, seed: u64) -> Result<Vec<GroupElement>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("repulsion grid needs N >= 2, got {n}")));
    }
    match kind {
        GroupKind::Sphere2 => Ok(repulsion_sphere_points(n, iterations, step, seed)
            .iter()
            .map(GroupElement::sphere_from_vector)
            .collect()),
        GroupKind::So3 => Ok(repel::<4>(Metric::Rotation, n, iterations, step, seed)
            .into_iter()
            .map(|q| {
                let uq = UnitQuaternion::from_quaternion(nalgebra::Quaternion::new(q[0], q[1], q[2], q[3]));
                let m: Matrix3<f64> = Rotation3::from(uq).into_inner();
                GroupElement::So3(m)
            })
            .collect()),
        other => Err(Error::InvalidArgument(format!("repulsion grids are defined for SO3 and Sphere2, not {other:?}"))),
    }
}

/// Smallest pairwise geodesic distance of a center list.
pub fn min_pairwise_distance(centers: &[GroupElement]) -> f64 {
    let mut m = f64::INFINITY;
    for i in 0..centers.len() {
        for j in (i + 1)..centers.len() {
            let d = match (&centers[i], &centers[j]) {
                (GroupElement::So3(a), GroupElement::So3(b)) => crate::lie_groups::so3::angle_axis(&(a.transpose() * b)).0,
                (a, b) => {
                    let p = a.sphere_vector().unwrap_or_else(Vector3::z);
                    let q = b.sphere_vector().unwrap_or_else(Vector3::z);
                    p.cross(&q).norm().atan2(p.dot(&q))
                }
            };
            m = m.min(d);
        }
    }
    m
}
