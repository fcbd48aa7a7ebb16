//! Gramians, H2-norm densities, per-site variance and its integral bounds.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{torus_indices, MultiIndex};
use crate::models::{ModelKind, ModelSpec, Role, StateSpaceSymbol, Symbols};
use crate::quadrature::{self, Tolerance};
use crate::small::{solve_lyapunov, SymbolMatrix};
use crate::sum::Neumaier;

pub use crate::dense::{brute_force_variance, DENSE_BUDGET};

/// Lattice side from which the integral sandwich is checked and reported.
pub const SANDWICH_MIN_L: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct DensitySample {
    pub theta: Vec<f64>,
    pub p_hat: f64,
}

/// Solves `A* P + P A = -C* C` for the observability Gramian.
///
/// Fails with [`Error::NotHurwitz`] unless every eigenvalue of `A` has a
/// real part safely below zero at working precision.
pub fn solve_gramian(symbol: &StateSpaceSymbol) -> Result<SymbolMatrix> {
    let a = &symbol.a_hat;
    let m = a.dim();
    let lead = a.rightmost_eigenvalue();
    if !(lead.re < -64.0 * f64::EPSILON * (1.0 + a.max_norm())) {
        return Err(Error::NotHurwitz {
            theta: symbol.theta.clone(),
            eigenvalue: lead,
        });
    }
    let mut q = SymbolMatrix::zeros(m);
    for i in 0..m {
        for j in 0..m {
            q.set(i, j, Complex64::new(symbol.c_hat[i] * symbol.c_hat[j], 0.0));
        }
    }
    let p = solve_lyapunov(a, &q).ok_or_else(|| Error::NotHurwitz {
        theta: symbol.theta.clone(),
        eigenvalue: lead,
    })?;
    let residual = a.adjoint().mul(&p).add(&p.mul(a)).add(&q).max_norm();
    if residual > 1e-10 * (1.0 + p.max_norm()) {
        return Err(Error::IllConditioned {
            theta: symbol.theta.clone(),
            residual,
        });
    }
    Ok(p)
}

fn density_of(model: &ModelSpec, symbol: &StateSpaceSymbol) -> Result<f64> {
    let p = solve_gramian(symbol)?;
    let w = symbol.dim() - 1;
    Ok(coordinate_factor(model) * p.get(w, w).re)
}

fn coordinate_factor(model: &ModelSpec) -> f64 {
    if model.kind().is_vehicular() {
        model.dim() as f64
    } else {
        1.0
    }
}

fn require_nonzero(theta: &[f64]) -> Result<()> {
    if theta.iter().all(|&t| t == 0.0) {
        return Err(Error::InvalidArgument("the density is not defined at theta = 0".into()));
    }
    Ok(())
}

/// `p(theta)`: the disturbance-channel entry of the Gramian, times `d` for
/// vehicular models.
pub fn h2_density(model: &ModelSpec, theta: &[f64]) -> Result<DensitySample> {
    require_nonzero(theta)?;
    let symbol = model.assemble_symbol(theta)?;
    Ok(DensitySample {
        theta: theta.to_vec(),
        p_hat: density_of(model, &symbol)?,
    })
}

/// The density from the template's closed-form expression.
pub fn closed_form_density(model: &ModelSpec, theta: &[f64]) -> Result<DensitySample> {
    require_nonzero(theta)?;
    let s = model.symbols_at(theta)?;
    Ok(DensitySample {
        theta: theta.to_vec(),
        p_hat: closed_form(model, &s)?,
    })
}

fn closed_form(model: &ModelSpec, s: &Symbols) -> Result<f64> {
    let d = model.dim() as f64;
    match model.kind() {
        ModelKind::ConsensusStatic => Ok(-1.0 / (2.0 * s.f.re)),
        ModelKind::ConsensusDynamic => {
            if !model.array(Role::F).is_symmetric() {
                return Err(Error::Unsupported("dynamic consensus with asymmetric F"));
            }
            Ok(-1.0 / (2.0 * s.f.re + 2.0 * phi_consensus(s.a, s.b, s.f.re)))
        }
        ModelKind::VehicularStatic => {
            if !model.is_symmetric() {
                return Err(Error::Unsupported("asymmetric vehicular feedback"));
            }
            Ok(d / (2.0 * s.f.re * s.g.re))
        }
        ModelKind::VehicularDynamic => {
            if !model.is_symmetric() {
                return Err(Error::Unsupported("asymmetric vehicular feedback"));
            }
            let (a, b, c, f, g) = (s.a.re, s.b.re, s.c.re, s.f.re, s.g.re);
            let phi = if b == 0.0 && c == 0.0 {
                // the memory state is never excited
                0.0
            } else {
                let den = b - a * f + a * a * (a + g);
                if den == 0.0 {
                    return Err(Error::Unsupported("degenerate memory coupling"));
                }
                (b * b + b * (a * c + c * g - a * f - a * g * g - a * a * g) - c * f * a * (a + g)) / den
            };
            Ok(d / (2.0 * f * g + 2.0 * phi))
        }
    }
}

/// Memory-state correction of the dynamic consensus density, valid for
/// complex `a`, `b` and real `f`. Reduces to the familiar real-coefficient
/// form when `Im b = 0` or `Im a = 0`.
fn phi_consensus(a: Complex64, b: Complex64, f: f64) -> f64 {
    if b.re == 0.0 && b.im == 0.0 {
        return 0.0;
    }
    let (ar, ai, br, bi) = (a.re, a.im, b.re, b.im);
    let num = ar * ai * bi + ar * ar * br + ar * br * f + bi * bi;
    let den = ai * ai * ar + ai * bi + ar * ar * ar + 2.0 * ar * ar * f - ar * br + ar * f * f - br * f;
    -num / den
}

/// `V_N = (1/N) sum_{n != 0} p(2 pi n / L)`, sampled through the DFT symbols.
pub fn per_site_variance(model: &ModelSpec, l: usize) -> Result<f64> {
    let d = model.dim();
    let n_sites = l
        .checked_pow(d as u32)
        .ok_or_else(|| Error::InvalidArgument("lattice too large".into()))?;
    if l < model.min_lattice() {
        return Err(Error::LatticeTooSmall {
            l,
            q: model.support_radius(),
            min: model.min_lattice(),
        });
    }
    let mut acc = Neumaier::new();
    for n in torus_indices(d, l) {
        if n.is_zero() {
            continue;
        }
        let symbol = model.assemble_wavenumber(&n, l)?;
        let p = density_of(model, &symbol).map_err(|e| unstable_at(e, &n, l))?;
        acc.add(p);
    }
    Ok(acc.value() / n_sites as f64)
}

fn unstable_at(e: Error, n: &MultiIndex, l: usize) -> Error {
    match e {
        Error::NotHurwitz { eigenvalue, .. } => Error::UnstableWavenumber {
            l,
            wavenumber: n.coords().to_vec(),
            eigenvalue,
        },
        other => other,
    }
}

/// `S(Delta)`: the density integrated over `Delta <= |theta_i| <= pi`.
pub fn hollow_box_integral(model: &ModelSpec, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument("delta must be positive".into()));
    }
    let mut f = |t: &[f64]| -> Result<f64> {
        let symbol = model.assemble_symbol(t)?;
        density_of(model, &symbol)
    };
    quadrature::hollow_box(&mut f, model.dim(), delta, Tolerance::default())
}

/// `(S(4 pi / L), S(2 pi / L))`.
pub fn integral_bounds(model: &ModelSpec, l: usize) -> Result<(f64, f64)> {
    if l < model.min_lattice() {
        return Err(Error::LatticeTooSmall {
            l,
            q: model.support_radius(),
            min: model.min_lattice(),
        });
    }
    let lf = l as f64;
    Ok((
        hollow_box_integral(model, 4.0 * PI / lf)?,
        hollow_box_integral(model, 2.0 * PI / lf)?,
    ))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ReportOptions {
    pub bounds: bool,
    pub oracle: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarianceReport {
    pub d: usize,
    pub l: usize,
    pub n: usize,
    pub v_exact: f64,
    pub s_lower: Option<f64>,
    pub s_upper: Option<f64>,
    /// Dense oracle value, when requested and within [`DENSE_BUDGET`].
    pub v_oracle: Option<f64>,
}

impl VarianceReport {
    pub fn compute(model: &ModelSpec, l: usize, opts: ReportOptions) -> Result<Self> {
        let v_exact = per_site_variance(model, l)?;
        let (s_lower, s_upper) = if opts.bounds {
            let (lo, hi) = integral_bounds(model, l)?;
            (Some(lo), Some(hi))
        } else {
            (None, None)
        };
        let v_oracle = if opts.oracle {
            match brute_force_variance(model, l) {
                Ok(v) => Some(v),
                Err(Error::BudgetExceeded { .. }) => None,
                Err(e) => return Err(e),
            }
        } else {
            None
        };
        Ok(VarianceReport {
            d: model.dim(),
            l,
            n: l.pow(model.dim() as u32),
            v_exact,
            s_lower,
            s_upper,
            v_oracle,
        })
    }

    /// `s_lower <= v_exact <= s_upper`, reported only from [`SANDWICH_MIN_L`] on.
    pub fn sandwich_holds(&self) -> Option<bool> {
        if self.l < SANDWICH_MIN_L {
            return None;
        }
        match (self.s_lower, self.s_upper) {
            (Some(lo), Some(hi)) => Some(lo <= self.v_exact && self.v_exact <= hi),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlEffort {
    /// Steady-state `E[u_k^2]` of `u = z + F x`.
    pub effort: f64,
    /// `(1/2N)(||f_hat||_1 + ||b_hat / (a_hat + f_hat)||_1)`.
    pub l1_form: f64,
    /// `||f||_inf / 2`.
    pub bound_f: f64,
    /// `sqrt((||a||_inf / 4)^2 + ||b||_inf / (4 (2q)^d)) - ||a||_inf / 4`.
    pub bound_ab: f64,
}

impl ControlEffort {
    pub fn satisfies_bounds(&self) -> bool {
        let slack = 1e-12 * self.effort.abs().max(1.0);
        self.effort + slack >= self.bound_f && self.effort + slack >= self.bound_ab
    }
}

/// Control effort of symmetric dynamic consensus on `Z_L^d`.
///
/// Per wavenumber the variance of `u` is `(b - f (f + a)) / (2 (a + f))`.
/// With `f, b <= 0` and `a + f < 0` this is the `l1` form stored alongside.
pub fn control_effort(model: &ModelSpec, l: usize) -> Result<ControlEffort> {
    if model.kind() != ModelKind::ConsensusDynamic {
        return Err(Error::NotApplicable("control effort is defined for dynamic consensus"));
    }
    for role in [Role::A, Role::B, Role::F] {
        if !model.array(role).is_symmetric() {
            return Err(Error::AssumptionViolated {
                role,
                property: "symmetric",
            });
        }
    }
    if l < model.min_lattice() {
        return Err(Error::LatticeTooSmall {
            l,
            q: model.support_radius(),
            min: model.min_lattice(),
        });
    }
    let d = model.dim();
    let n_sites = l.pow(d as u32);
    let mut effort = Neumaier::new();
    let mut l1 = Neumaier::new();
    for n in torus_indices(d, l) {
        if n.is_zero() {
            continue;
        }
        let s = model.symbols_dft(&n, l)?;
        let (a, b, f) = (s.a.re, s.b.re, s.f.re);
        // with b = 0 the memory state is never excited and only f matters
        let stable = if b == 0.0 { f < 0.0 } else { a * f - b > 0.0 };
        if !(a + f < 0.0 && stable) {
            let symbol = model.assemble_wavenumber(&n, l)?;
            return Err(Error::UnstableWavenumber {
                l,
                wavenumber: n.coords().to_vec(),
                eigenvalue: symbol.a_hat.rightmost_eigenvalue(),
            });
        }
        effort.add((b - f * (f + a)) / (2.0 * (a + f)));
        l1.add(f.abs() + (b / (a + f)).abs());
    }
    let nf = n_sites as f64;
    let a_inf = model.array(Role::A).max_abs();
    let b_inf = model.array(Role::B).max_abs();
    let q = model.support_radius().max(1) as f64;
    let bound_ab =
        libm::sqrt((a_inf / 4.0) * (a_inf / 4.0) + b_inf / (4.0 * libm::pow(2.0 * q, d as f64))) - a_inf / 4.0;
    Ok(ControlEffort {
        effort: effort.value() / nf,
        l1_form: l1.value() / (2.0 * nf),
        bound_f: model.array(Role::F).max_abs() / 2.0,
        bound_ab,
    })
}
