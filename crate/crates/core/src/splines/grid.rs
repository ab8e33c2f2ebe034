//! Discretizations `H_d` of `H` with Haar quadrature weights, and the center
//! layouts used by kernels on `H` and on `R^d`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::lie_groups::{GroupElement, GroupKind};

/// Sampling grid `H_d` with one quadrature weight per element.
#[derive(Debug, Clone)]
pub struct GroupGrid {
    pub kind: GroupKind,
    pub elements: Vec<GroupElement>,
    pub weights: Vec<f64>,
    /// Nominal spacing between neighbours in algebra units.
    pub spacing: f64,
}

impl PartialEq for GroupGrid {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.elements.len() == other.elements.len()
            && self.elements.iter().zip(&other.elements).all(|(a, b)| a.approx_eq(b, 1e-12))
            && self.weights.iter().zip(&other.weights).all(|(a, b)| (a - b).abs() <= 1e-12)
    }
}

impl GroupGrid {
    pub fn new(kind: GroupKind, elements: Vec<GroupElement>, weights: Vec<f64>, spacing: f64) -> Result<Self> {
        if elements.len() != weights.len() || elements.is_empty() {
            return Err(Error::InvalidSpacing(format!(
                "{} elements but {} weights",
                elements.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::InvalidSpacing("weights must be positive".into()));
        }
        if let Some(e) = elements.iter().find(|e| e.kind() != kind) {
            return Err(Error::GroupMismatch(kind, e.kind()));
        }
        Ok(GroupGrid { kind, elements, weights, spacing })
    }

    /// The one-element grid `{e}` with unit weight.
    pub fn trivial(kind: GroupKind) -> Self {
        GroupGrid { kind, elements: vec![kind.identity()], weights: vec![1.0], spacing: 1.0 }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// True when the grid tiles a compact 1-D group, so shifts along it wrap.
    pub fn is_periodic(&self) -> bool {
        self.kind == GroupKind::So2 && (self.spacing * self.len() as f64 - 2.0 * PI).abs() < 1e-9
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Index of `h` in the grid, if present.
    pub fn index_of(&self, h: &GroupElement, tol: f64) -> Option<usize> {
        self.elements.iter().position(|e| e.approx_eq(h, tol))
    }

    /// Signed slot offset `k` with `h_d[i] h = h_d[i + k]`, for the 1-D groups.
    pub fn slot_shift(&self, h: &GroupElement) -> Result<isize> {
        match (self.kind, h) {
            (GroupKind::So2, GroupElement::So2(_)) | (GroupKind::ScalePos, GroupElement::ScalePos(_)) => {
                let a = h.log()?.components()[0] / self.spacing;
                let k = a.round();
                if (a - k).abs() > 1e-9 {
                    return Err(Error::OffGridElement(format!("{h:?}")));
                }
                Ok(k as isize)
            }
            _ if self.len() == 1 => {
                if h.approx_eq(&self.kind.identity(), 1e-12) {
                    Ok(0)
                } else {
                    Err(Error::OffGridElement(format!("{h:?}")))
                }
            }
            _ => Err(Error::OffGridElement(format!("{h:?}"))),
        }
    }
}

/// Placement of the kernel's centers on `H`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HLayout {
    /// One center per grid element.
    GlobalUniform,
    /// `N_k` centers `Exp(i s A)` around the identity.
    Localized { n_k: usize },
    /// `N_k` centers spaced `stride` grid steps apart, basis scale unchanged.
    Atrous { n_k: usize, stride: usize },
}

/// Builds `H_d` and the kernel centers for `layout`. The basis scale of the
/// returned centers is the grid spacing.
pub fn build_h_grid(
    kind: GroupKind,
    n_h: usize,
    s_grid: f64,
    layout: HLayout,
) -> Result<(GroupGrid, Vec<GroupElement>)> {
    if n_h == 0 {
        return Err(Error::InvalidSpacing("N_h must be at least 1".into()));
    }
    if !(s_grid > 0.0) || !s_grid.is_finite() {
        return Err(Error::InvalidSpacing(format!("spacing {s_grid} must be positive")));
    }
    let at = |a: f64| -> GroupElement {
        match kind {
            GroupKind::So2 => GroupElement::so2(a),
            _ => GroupElement::ScalePos(a.exp()),
        }
    };
    let grid = match kind {
        GroupKind::So2 => {
            if (s_grid * n_h as f64 - 2.0 * PI).abs() > 1e-9 {
                return Err(Error::InvalidSpacing(format!(
                    "{n_h} steps of {s_grid} do not tile SO(2)"
                )));
            }
            GroupGrid {
                kind,
                elements: (0..n_h).map(|i| at(i as f64 * s_grid)).collect(),
                weights: vec![s_grid; n_h],
                spacing: s_grid,
            }
        }
        GroupKind::ScalePos => GroupGrid {
            kind,
            elements: (0..n_h).map(|i| at(i as f64 * s_grid)).collect(),
            weights: vec![s_grid; n_h],
            spacing: s_grid,
        },
        other => {
            return Err(Error::InvalidSpacing(format!(
                "{other:?} has no uniform 1-D grid; use a repulsion grid"
            )))
        }
    };
    let symmetric = |n_k: usize, step: f64| -> Vec<GroupElement> {
        let r = (n_k / 2) as i64;
        (-r..=r).map(|i| at(i as f64 * step)).collect()
    };
    let centers = match layout {
        HLayout::GlobalUniform => grid.elements.clone(),
        HLayout::Localized { n_k } => symmetric(n_k.max(1), s_grid),
        HLayout::Atrous { n_k, stride } => {
            if stride == 0 {
                return Err(Error::InvalidSpacing("atrous stride must be positive".into()));
            }
            symmetric(n_k.max(1), s_grid * stride as f64)
        }
    };
    Ok((grid, centers))
}

/// Integer-offset centers of a `k^dim` block around 0, optionally restricted to
/// the disk `||x|| <= r`.
pub fn build_spatial_centers(k: usize, dim: usize, disk_radius: Option<f64>) -> Result<Vec<Vec<f64>>> {
    if k % 2 == 0 {
        return Err(Error::InvalidKernel(format!("kernel size {k} must be odd")));
    }
    let r = (k / 2) as i64;
    let mut out = Vec::new();
    let total = k.pow(dim as u32);
    for flat in 0..total {
        let mut rem = flat;
        let mut x = vec![0.0; dim];
        for axis in (0..dim).rev() {
            x[axis] = (rem % k) as f64 - r as f64;
            rem /= k;
        }
        if let Some(rad) = disk_radius {
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > rad + 1e-12 {
                continue;
            }
        }
        out.push(x);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn so2_global() {
        let (g, c) = build_h_grid(GroupKind::So2, 4, PI / 2.0, HLayout::GlobalUniform).unwrap();
        let want = [0.0, PI / 2.0, PI, 1.5 * PI];
        for (e, w) in g.elements.iter().zip(want) {
            assert!(e.approx_eq(&GroupElement::so2(w), 1e-15));
        }
        assert!(g.weights.iter().all(|&w| (w - PI / 2.0).abs() < 1e-15));
        assert_eq!(c.len(), 4);
        assert!(g.is_periodic());
        assert!(matches!(
            build_h_grid(GroupKind::So2, 4, 1.0, HLayout::GlobalUniform),
            Err(Error::InvalidSpacing(_))
        ));
    }

    #[test]
    fn scale_grid() {
        let s = 0.5 * 2f64.ln();
        let (g, _) = build_h_grid(GroupKind::ScalePos, 4, s, HLayout::GlobalUniform).unwrap();
        let want = [1.0, 2f64.sqrt(), 2.0, 2.0 * 2f64.sqrt()];
        for (e, w) in g.elements.iter().zip(want) {
            assert!(e.approx_eq(&GroupElement::ScalePos(w), 1e-14));
        }
        for i in 0..3 {
            let d = g.elements[i].distance(&g.elements[i + 1]).unwrap();
            assert!((d - s).abs() < 1e-9);
        }
        assert_eq!(g.slot_shift(&GroupElement::ScalePos(2.0)).unwrap(), 2);
        assert!(g.slot_shift(&GroupElement::ScalePos(1.5)).is_err());
    }

    #[test]
    fn localized_and_atrous() {
        let s = 2.0 * PI / 16.0;
        let (_, c) = build_h_grid(GroupKind::So2, 16, s, HLayout::Localized { n_k: 3 }).unwrap();
        for (e, w) in c.iter().zip([-s, 0.0, s]) {
            assert!(e.approx_eq(&GroupElement::so2(w), 1e-14));
        }
        let (_, c) = build_h_grid(GroupKind::So2, 16, s, HLayout::Atrous { n_k: 3, stride: 2 }).unwrap();
        assert!(c[2].approx_eq(&GroupElement::so2(2.0 * s), 1e-14));
    }

    #[test]
    fn spatial_centers() {
        assert_eq!(build_spatial_centers(5, 2, Some(5f64.sqrt())).unwrap().len(), 21);
        assert_eq!(build_spatial_centers(1, 2, None).unwrap(), vec![vec![0.0, 0.0]]);
        assert_eq!(build_spatial_centers(3, 2, None).unwrap().len(), 9);
        let masked = build_spatial_centers(7, 2, Some(2.5)).unwrap();
        assert!(masked.iter().all(|x| x[0].hypot(x[1]) <= 2.5));
    }
}
