//! Singularity order of the density at the origin, the scaling law it
//! implies, and exponents fitted to computed variances.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::models::ModelSpec;
use crate::spectral::{h2_density, ReportOptions, VarianceReport};

/// Asymptotic growth of `V_N` in the lattice side `L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Law {
    /// `V_N ~ L^exponent`.
    Power {
        exponent: f64,
    },
    Logarithmic,
    Bounded,
}

impl Law {
    /// The exponent of `N = L^d`; zero for logarithmic and bounded laws.
    pub fn exponent_in_n(&self, d: usize) -> f64 {
        match self {
            Law::Power { exponent } => exponent / d as f64,
            Law::Logarithmic | Law::Bounded => 0.0,
        }
    }

    pub fn describe(&self) -> alloc::string::String {
        match self {
            Law::Power { exponent } => alloc::format!("L^{exponent:.2}"),
            Law::Logarithmic => "log L".into(),
            Law::Bounded => "bounded".into(),
        }
    }
}

/// `L^(r-d)` for `d < r`, `log L` for `d = r` (within 0.1), bounded for `d > r`.
pub fn predicted_scaling(r: f64, d: usize) -> Result<Law> {
    if !(r >= 0.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "singularity order must be non-negative, got {r}"
        )));
    }
    let d = d as f64;
    Ok(if (r - d).abs() <= 0.1 {
        Law::Logarithmic
    } else if d < r {
        Law::Power { exponent: r - d }
    } else {
        Law::Bounded
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    /// Root mean square of the residuals.
    pub residual_rms: f64,
}

/// Ordinary least squares `y = intercept + slope * x`.
pub fn ols(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidArgument("x and y lengths differ".into()));
    }
    let n = xs.len();
    if n < 2 {
        return Err(Error::InsufficientSamples { needed: 2, found: n });
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("x values are all equal".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    let slope_stderr = if n > 2 { libm::sqrt(sse / (nf - 2.0) / sxx) } else { 0.0 };
    Ok(LinearFit {
        slope,
        intercept,
        slope_stderr,
        residual_rms: libm::sqrt(sse / nf),
    })
}

/// Two-sided 95% quantile of Student's t.
pub fn t_quantile_975(dof: usize) -> f64 {
    const TABLE: [f64; 30] = [
        12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228, 2.201, 2.179, 2.160, 2.145, 2.131,
        2.120, 2.110, 2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042,
    ];
    match dof {
        0 => f64::INFINITY,
        1..=30 => TABLE[dof - 1],
        _ => {
            // Cornish-Fisher expansion around the normal quantile
            let z = 1.959_963_984_540_054;
            let v = dof as f64;
            z + (z * z * z + z) / (4.0 * v) + (5.0 * libm::pow(z, 5.0) + 16.0 * z * z * z + 3.0 * z) / (96.0 * v * v)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingularityEstimate {
    /// Negated slope of `log p` against `log |theta|`.
    pub r: f64,
    pub residual_rms: f64,
    /// Same fit along the diagonal ray, for `d >= 2`.
    pub cross_ray_r: Option<f64>,
}

/// Fits `p(theta) ~ |theta|^-r` on `samples` log-spaced points of the first
/// coordinate ray with `theta_min <= |theta| <= theta_max`.
pub fn estimate_singularity_order(
    model: &ModelSpec,
    theta_min: f64,
    theta_max: f64,
    samples: usize,
) -> Result<SingularityEstimate> {
    if !(theta_min > 0.0 && theta_min < theta_max && theta_max <= PI / 4.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "need 0 < theta_min < theta_max <= pi/4, got [{theta_min}, {theta_max}]"
        )));
    }
    if samples < 3 {
        return Err(Error::InsufficientSamples {
            needed: 3,
            found: samples,
        });
    }
    let d = model.dim();
    let ray = |dir: &[f64]| -> Result<LinearFit> {
        let ratio = libm::log(theta_max / theta_min);
        let mut xs = Vec::with_capacity(samples);
        let mut ys = Vec::with_capacity(samples);
        for i in 0..samples {
            let t = theta_min * libm::exp(ratio * i as f64 / (samples - 1) as f64);
            let theta: Vec<f64> = dir.iter().map(|u| u * t).collect();
            let p = h2_density(model, &theta)?.p_hat;
            xs.push(libm::log(t));
            ys.push(libm::log(p));
        }
        ols(&xs, &ys)
    };
    let mut axis = alloc::vec![0.0; d];
    axis[0] = 1.0;
    let fit = ray(&axis)?;
    let cross_ray_r = if d >= 2 {
        let u = 1.0 / libm::sqrt(d as f64);
        Some(-ray(&alloc::vec![u; d])?.slope)
    } else {
        None
    };
    Ok(SingularityEstimate {
        r: -fit.slope,
        residual_rms: fit.residual_rms,
        cross_ray_r,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitKind {
    Power,
    Logarithmic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentFit {
    /// Slope of `log V_N` against `log N`.
    pub slope: f64,
    /// 95% confidence half-width of `slope`.
    pub half_width: f64,
    /// `V_N` against `ln N`.
    pub log_fit: LinearFit,
    /// Relative rms misfit of the power law.
    pub power_residual: f64,
    /// Relative rms misfit of the logarithmic law.
    pub log_residual: f64,
    pub preferred: FitKind,
}

/// Log-log least squares on `(N, V_N)` pairs, with a competing `V_N = a + b ln N` fit.
pub fn empirical_exponent(reports: &[VarianceReport]) -> Result<ExponentFit> {
    if reports.len() < 4 {
        return Err(Error::InsufficientSamples {
            needed: 4,
            found: reports.len(),
        });
    }
    let d = reports[0].d;
    if let Some(r) = reports.iter().find(|r| r.d != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: r.d,
        });
    }
    let n_min = reports.iter().map(|r| r.n).min().unwrap() as f64;
    let n_max = reports.iter().map(|r| r.n).max().unwrap() as f64;
    if n_max < 8.0 * n_min {
        return Err(Error::InvalidArgument(
            "reports must span at least a factor of 8 in N".into(),
        ));
    }
    if let Some(r) = reports.iter().find(|r| !(r.v_exact > 0.0)) {
        return Err(Error::InvalidArgument(alloc::format!(
            "variance at L = {} is not positive",
            r.l
        )));
    }
    let ln_n: Vec<f64> = reports.iter().map(|r| libm::log(r.n as f64)).collect();
    let ln_v: Vec<f64> = reports.iter().map(|r| libm::log(r.v_exact)).collect();
    let v: Vec<f64> = reports.iter().map(|r| r.v_exact).collect();
    let power = ols(&ln_n, &ln_v)?;
    let log_fit = ols(&ln_n, &v)?;
    let k = reports.len() as f64;
    let log_residual = libm::sqrt(
        ln_n.iter()
            .zip(&v)
            .map(|(x, y)| {
                let rel = (y - log_fit.intercept - log_fit.slope * x) / y;
                rel * rel
            })
            .sum::<f64>()
            / k,
    );
    Ok(ExponentFit {
        slope: power.slope,
        half_width: t_quantile_975(reports.len() - 2) * power.slope_stderr,
        log_fit,
        power_residual: power.residual_rms,
        log_residual,
        preferred: if log_residual < power.residual_rms {
            FitKind::Logarithmic
        } else {
            FitKind::Power
        },
    })
}

/// `max / min` of `V_N / ln N` over the reports; 1 means perfectly logarithmic.
pub fn log_ratio_spread(reports: &[VarianceReport]) -> f64 {
    let ratios = reports.iter().map(|r| r.v_exact / libm::log(r.n as f64));
    let (lo, hi) = ratios.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
    hi / lo
}

/// Default window for [`estimate_singularity_order`].
pub const THETA_WINDOW: (f64, f64, usize) = (1e-3, 1e-1, 32);

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub r_estimate: SingularityEstimate,
    pub beta: f64,
    pub predicted_law: Law,
    pub empirical: ExponentFit,
    /// `(N, V_N)`.
    pub samples: Vec<(usize, f64)>,
}

impl ScalingFit {
    /// The exponent of `N` the estimated singularity order predicts.
    pub fn predicted_exponent(&self, d: usize) -> f64 {
        self.predicted_law.exponent_in_n(d)
    }
}

/// Singularity order, predicted law and fitted exponent over the given sizes.
pub fn scaling_fit(model: &ModelSpec, sizes: &[usize]) -> Result<ScalingFit> {
    let (lo, hi, k) = THETA_WINDOW;
    let r = estimate_singularity_order(model, lo, hi, k)?;
    let reports = sizes
        .iter()
        .map(|&l| VarianceReport::compute(model, l, ReportOptions::default()))
        .collect::<Result<Vec<_>>>()?;
    let empirical = empirical_exponent(&reports)?;
    Ok(ScalingFit {
        predicted_law: predicted_scaling(r.r.max(0.0), model.dim())?,
        r_estimate: r,
        beta: model.beta(),
        empirical,
        samples: reports.iter().map(|r| (r.n, r.v_exact)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::standard_consensus_array;
    use crate::models::{dapi_model, lookahead_model};

    #[test]
    fn laws() {
        assert_eq!(predicted_scaling(2.0, 1).unwrap(), Law::Power { exponent: 1.0 });
        assert_eq!(predicted_scaling(4.0, 4).unwrap(), Law::Logarithmic);
        assert_eq!(predicted_scaling(0.0, 3).unwrap(), Law::Bounded);
        assert_eq!(predicted_scaling(4.05, 4).unwrap(), Law::Logarithmic);
        assert!(predicted_scaling(-1.0, 1).is_err());
        assert_eq!(Law::Power { exponent: 2.0 }.exponent_in_n(2), 1.0);
    }

    #[test]
    fn ols_recovers_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        let f = ols(&xs, &ys).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-15 && (f.intercept - 1.0).abs() < 1e-15);
        assert!(f.slope_stderr < 1e-15);
    }

    #[test]
    fn t_table_tail() {
        assert!((t_quantile_975(2) - 4.303).abs() < 1e-12);
        assert!((t_quantile_975(60) - 2.000).abs() < 2e-3);
        assert!((t_quantile_975(1000) - 1.962).abs() < 1e-3);
    }

    #[test]
    fn singularity_orders() {
        let cons = ModelSpec::consensus_static(standard_consensus_array(1, 1.0).unwrap()).unwrap();
        let r = estimate_singularity_order(&cons, 1e-3, 1e-1, 16).unwrap().r;
        assert!((r - 2.0).abs() < 0.05, "{r}");
        let veh = lookahead_model(1.0, 1.0, 1.0, 1.0, 0.0).unwrap();
        let r = estimate_singularity_order(&veh, 1e-3, 1e-1, 16).unwrap().r;
        assert!((r - 4.0).abs() < 0.05, "{r}");
        let dapi = dapi_model(1.0, 1.0, 1.0, 1.0).unwrap();
        let r = estimate_singularity_order(&dapi, 1e-3, 1e-1, 16).unwrap().r;
        assert!(r.abs() < 0.05, "{r}");
        assert!(estimate_singularity_order(&cons, 0.1, 1.0, 16).is_err());
    }

    #[test]
    fn consensus_exponent() {
        let cons = ModelSpec::consensus_static(standard_consensus_array(1, 1.0).unwrap()).unwrap();
        let fit = scaling_fit(&cons, &[64, 128, 256, 512]).unwrap();
        assert!((fit.empirical.slope - 1.0).abs() < 0.05);
        match fit.predicted_law {
            Law::Power { exponent } => assert!((exponent - 1.0).abs() < 0.05),
            other => panic!("unexpected law {other:?}"),
        }
    }
}
