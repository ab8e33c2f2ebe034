//! Closed-form cardinal B-splines of degree 0 to 3 and their derivatives.

use crate::error::{Error, Result};

pub const MAX_DEGREE: usize = 3;

pub fn check_degree(n: usize) -> Result<()> {
    if n > MAX_DEGREE {
        Err(Error::UnsupportedDegree(n))
    } else {
        Ok(())
    }
}

/// Half-width of the support of `B^n`.
pub fn support_radius(n: usize) -> f64 {
    (n as f64 + 1.0) * 0.5
}

/// One-dimensional `B^n(x)`. Degrees above 3 evaluate to 0; callers validate
/// the degree up front with [`check_degree`].
#[inline]
pub fn b1(n: usize, x: f64) -> f64 {
    let a = x.abs();
    match n {
        0 => {
            if (-0.5..0.5).contains(&x) {
                1.0
            } else {
                0.0
            }
        }
        1 => (1.0 - a).max(0.0),
        2 => {
            if a < 0.5 {
                0.75 - a * a
            } else if a < 1.5 {
                let t = 1.5 - a;
                0.5 * t * t
            } else {
                0.0
            }
        }
        3 => {
            if a < 1.0 {
                2.0 / 3.0 - a * a + 0.5 * a * a * a
            } else if a < 2.0 {
                let t = 2.0 - a;
                t * t * t / 6.0
            } else {
                0.0
            }
        }
        _ => 0.0,
    }
}

/// Derivative of [`b1`]; 0 at the knots where it jumps.
#[inline]
pub fn db1(n: usize, x: f64) -> f64 {
    let a = x.abs();
    let sg = if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    };
    match n {
        1 => {
            if a < 1.0 && a > 0.0 {
                -sg
            } else {
                0.0
            }
        }
        2 => {
            if a < 0.5 {
                -2.0 * x
            } else if a < 1.5 {
                -sg * (1.5 - a)
            } else {
                0.0
            }
        }
        3 => {
            if a < 1.0 {
                sg * (-2.0 * a + 1.5 * a * a)
            } else if a < 2.0 {
                let t = 2.0 - a;
                -sg * 0.5 * t * t
            } else {
                0.0
            }
        }
        _ => 0.0,
    }
}

/// Tensor-product cardinal B-spline `B^n(x_0) B^n(x_1) ...`.
pub fn cardinal_bspline(n: usize, x: &[f64]) -> Result<f64> {
    check_degree(n)?;
    Ok(x.iter().map(|&v| b1(n, v)).product())
}

/// Gradient of [`cardinal_bspline`] with respect to `x`.
pub fn cardinal_bspline_grad(n: usize, x: &[f64]) -> Result<Vec<f64>> {
    check_degree(n)?;
    let vals: Vec<f64> = x.iter().map(|&v| b1(n, v)).collect();
    Ok((0..x.len())
        .map(|k| {
            (0..x.len())
                .map(|j| if j == k { db1(n, x[j]) } else { vals[j] })
                .product()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_values() {
        assert_eq!(b1(1, 0.0), 1.0);
        assert_eq!(b1(1, 0.5), 0.5);
        assert_eq!(b1(1, 1.0), 0.0);
        assert_eq!(b1(0, 0.49), 1.0);
        assert_eq!(b1(0, 0.51), 0.0);
        assert_eq!(b1(2, 0.0), 0.75);
        assert!((b1(3, 0.0) - 2.0 / 3.0).abs() < 1e-15);
        assert!(matches!(cardinal_bspline(4, &[0.0]), Err(Error::UnsupportedDegree(4))));
    }

    #[test]
    fn derivatives_match_differences() {
        for n in 1..=3 {
            for i in 0..400 {
                let x = -2.3 + i as f64 * 0.01173;
                let h = 1e-6;
                let fd = (b1(n, x + h) - b1(n, x - h)) / (2.0 * h);
                assert!((fd - db1(n, x)).abs() < 1e-6, "n={n} x={x}");
            }
        }
        assert_eq!(db1(1, 0.0), 0.0);
        assert_eq!(db1(1, 1.0), 0.0);
    }

    #[test]
    fn tensor_gradient() {
        let x = [0.3, -0.7];
        let g = cardinal_bspline_grad(2, &x).unwrap();
        let h = 1e-6;
        let f = |a: f64, b: f64| cardinal_bspline(2, &[a, b]).unwrap();
        assert!((g[0] - (f(0.3 + h, -0.7) - f(0.3 - h, -0.7)) / (2.0 * h)).abs() < 1e-8);
        assert!((g[1] - (f(0.3, -0.7 + h) - f(0.3, -0.7 - h)) / (2.0 * h)).abs() < 1e-8);
    }
}
