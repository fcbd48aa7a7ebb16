//! Globally adaptive Gauss-Kronrod (7/15) quadrature and its tensor-product
//! extension to the hollow box `{Delta <= |theta_i| <= pi}`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for XGK[1], XGK[3], XGK[5] and the center.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub(crate) struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rel: 1e-6,
            abs: 0.0,
            max_intervals: 2000,
        }
    }
}

fn gk15<F: FnMut(f64) -> Result<f64>>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx)? + f(c + dx)?;
        kronrod += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    Ok((kronrod * h, ((kronrod - gauss) * h).abs()))
}

/// Integral of `f` over `[a, b]` with its error estimate.
pub(crate) fn integrate<F: FnMut(f64) -> Result<f64>>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<(f64, f64)> {
    if b <= a {
        return Ok((0.0, 0.0));
    }
    let (v, e) = gk15(&mut f, a, b)?;
    let mut parts: Vec<(f64, f64, f64, f64)> = alloc::vec![(a, b, v, e)];
    let mut total = v;
    let mut err = e;
    while err > tol.abs.max(tol.rel * total.abs()) {
        if parts.len() >= tol.max_intervals {
            return Err(Error::QuadratureNonConvergence {
                estimate: total,
                error_estimate: err,
            });
        }
        let worst = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap();
        let (lo, hi, v0, e0) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid)?;
        let (v2, e2) = gk15(&mut f, mid, hi)?;
        total += v1 + v2 - v0;
        err += e1 + e2 - e0;
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
    // re-add from scratch to shed the drift of the running updates
    let total = parts.iter().map(|p| p.2).sum();
    let err = parts.iter().map(|p| p.3).sum();
    Ok((total, err))
}

/// `int_{Delta <= |theta_1| <= pi} ... int_{Delta <= |theta_d| <= pi} f(theta) dtheta`.
///
/// Each axis is split into its negative and positive pieces and integrated
/// adaptively; inner axes get a tighter tolerance so their noise does not
/// stall the outer refinement.
pub(crate) fn hollow_box<F: FnMut(&[f64]) -> Result<f64>>(
    f: &mut F,
    d: usize,
    delta: f64,
    tol: Tolerance,
) -> Result<f64> {
    if delta >= PI {
        return Ok(0.0);
    }
    let mut point = alloc::vec![0.0; d];
    nested(f, &mut point, 0, delta, tol)
}

fn nested<F: FnMut(&[f64]) -> Result<f64>>(
    f: &mut F,
    point: &mut Vec<f64>,
    axis: usize,
    delta: f64,
    tol: Tolerance,
) -> Result<f64> {
    let d = point.len();
    let inner_tol = Tolerance {
        rel: tol.rel * 1e-2,
        ..tol
    };
    let mut total = 0.0;
    for (lo, hi) in [(-PI, -delta), (delta, PI)] {
        let (v, _) = integrate(
            |t| {
                point[axis] = t;
                if axis + 1 == d {
                    f(point)
                } else {
                    nested(f, point, axis + 1, delta, inner_tol)
                }
            },
            lo,
            hi,
            tol,
        )?;
        total += v;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let (v, _) = integrate(|x| Ok(x * x * x - 2.0 * x), 0.0, 2.0, Tolerance::default()).unwrap();
        assert!((v - 0.0).abs() < 1e-14);
        let (v, _) = integrate(|x| Ok(x.powi(6)), -1.0, 1.0, Tolerance::default()).unwrap();
        assert!((v - 2.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn singular_integrand() {
        // int_{1e-3}^{pi} 1/(8 sin^2(t/2)) dt = (cot(5e-4) - cot(pi/2)) / 4
        let tol = Tolerance {
            rel: 1e-10,
            ..Tolerance::default()
        };
        let (v, _) = integrate(
            |t| {
                let s = libm::sin(0.5 * t);
                Ok(1.0 / (8.0 * s * s))
            },
            1e-3,
            PI,
            tol,
        )
        .unwrap();
        let want = 0.25 / libm::tan(5e-4);
        assert!((v - want).abs() < 1e-9 * want);
    }

    #[test]
    fn hollow_box_area() {
        let mut one = |_: &[f64]| Ok(1.0);
        let v = hollow_box(&mut one, 2, 1.0, Tolerance::default()).unwrap();
        let side = 2.0 * (PI - 1.0);
        assert!((v - side * side).abs() < 1e-12);
        assert_eq!(hollow_box(&mut one, 1, PI, Tolerance::default()).unwrap(), 0.0);
    }

    #[test]
    fn budget_exhaustion_reports() {
        let tol = Tolerance {
            rel: 1e-14,
            abs: 0.0,
            max_intervals: 4,
        };
        let r = integrate(|x| Ok(1.0 / x.sqrt()), 1e-12, 1.0, tol);
        assert!(matches!(r, Err(Error::QuadratureNonConvergence { .. })));
    }
}
