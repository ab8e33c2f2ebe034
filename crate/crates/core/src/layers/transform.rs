//! Left-regular representation `(L_g f)(x) = f(g^-1 x)` on sampled feature
//! maps, used to test equivariance.
//!
//! Spatial coordinates are pixel offsets from the array center. Off-grid
//! sample points are interpolated multilinearly with zeros outside; sample
//! points within 1e-9 of a grid point are read exactly.

use super::feature_map::{dims3, FeatureMap};
use crate::error::{Error, Result};
use crate::lie_groups::AffineElement;

const SNAP: f64 = 1e-9;

fn snap(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() < SNAP {
        r
    } else {
        v
    }
}

/// Multilinear read of `src` (shape `d3`) at fractional index `p` (z, y, x).
fn sample(src: &[f64], d3: [usize; 3], p: [f64; 3]) -> f64 {
    let mut base = [0i64; 3];
    let mut frac = [0.0; 3];
    for a in 0..3 {
        let f = p[a].floor();
        base[a] = f as i64;
        frac[a] = p[a] - f;
    }
    let mut acc = 0.0;
    for corner in 0..8 {
        let mut w = 1.0;
        let mut idx = [0i64; 3];
        let mut skip = false;
        for a in 0..3 {
            let bit = (corner >> a) & 1;
            let fw = if bit == 1 { frac[a] } else { 1.0 - frac[a] };
            if fw == 0.0 {
                skip = true;
                break;
            }
            w *= fw;
            idx[a] = base[a] + bit as i64;
            if idx[a] < 0 || idx[a] >= d3[a] as i64 {
                skip = true;
                break;
            }
        }
        if skip {
            continue;
        }
        acc += w * src[((idx[0] as usize) * d3[1] + idx[1] as usize) * d3[2] + idx[2] as usize];
    }
    acc
}

/// `L_g` applied to a planar or lifted feature map.
pub fn apply_representation(f: &FeatureMap, g: &AffineElement) -> Result<FeatureMap> {
    let rank = f.spatial_shape.len();
    if g.x.len() != rank {
        return Err(Error::DimensionMismatch { expected: rank, got: g.x.len() });
    }
    let shift = match &f.grid {
        None => 0,
        Some(grid) => {
            if g.h.kind() != grid.kind {
                return Err(Error::GroupMismatch(grid.kind, g.h.kind()));
            }
            grid.slot_shift(&g.h)?
        }
    };
    let hinv = g.h.inverse()?;
    let d3 = dims3(&f.spatial_shape)?;
    let center: Vec<f64> = f.spatial_shape.iter().map(|&n| (n as f64 - 1.0) * 0.5).collect();

    // source index for every output position
    let n = f.spatial_len();
    let mut src_pos = Vec::with_capacity(n);
    for z in 0..d3[0] {
        for y in 0..d3[1] {
            for x in 0..d3[2] {
                let idx = [z, y, x];
                let rel: Vec<f64> = (0..rank).map(|a| idx[3 - rank + a] as f64 - center[a] - g.x[a]).collect();
                let back = hinv.act_on_rd(&rel)?;
                let mut p = [0.0; 3];
                for a in 0..rank {
                    p[3 - rank + a] = snap(back[a] + center[a]);
                }
                src_pos.push(p);
            }
        }
    }

    let mut out = f.zeros_like();
    let hs = f.h_slices();
    let periodic = f.grid.as_ref().is_some_and(|g| g.is_periodic());
    for c in 0..f.channels {
        for i in 0..hs {
            let j = i as isize - shift;
            let j = if periodic {
                j.rem_euclid(hs as isize)
            } else if j < 0 || j >= hs as isize {
                continue;
            } else {
                j
            } as usize;
            let src = f.slice(c, j).to_vec();
            let dst = out.slice_mut(c, i);
            for (d, p) in dst.iter_mut().zip(&src_pos) {
                *d = sample(&src, d3, *p);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie_groups::{GroupElement, GroupKind};
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn quarter_turn_is_permutation() {
        let data: Vec<f64> = (0..9).map(|v| v as f64).collect();
        let f = FeatureMap::from_planar(1, &[3, 3], data).unwrap();
        let g = AffineElement::new(vec![0.0, 0.0], GroupElement::so2(FRAC_PI_2)).unwrap();
        let r = apply_representation(&f, &g).unwrap();
        // index (row, col) acts as (x0, x1); rotating by +90 sends (1, 0) to (0, 1)
        let mut want = vec![0.0; 9];
        for i in 0..3 {
            for j in 0..3 {
                let (a, b) = (i as f64 - 1.0, j as f64 - 1.0);
                // source = R^-1 (a, b) = (b, -a)
                let (si, sj) = ((b + 1.0) as usize, (-a + 1.0) as usize);
                want[i * 3 + j] = f.data[si * 3 + sj];
            }
        }
        assert_eq!(r.data, want);
        let e = AffineElement::identity(GroupKind::So2, 2);
        assert_eq!(apply_representation(&f, &e).unwrap(), f);
    }
}
