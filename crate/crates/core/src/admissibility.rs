//! Stability of the per-frequency symbols, necessary structural conditions
//! for dynamic feedback, and critical lattice sizes.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{canonical, torus_indices, MultiIndex};
use crate::models::{ModelKind, ModelSpec, Role, VelocityFeedback};
use crate::small::HURWITZ_MARGIN;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Admissible,
    Inadmissible,
    NecessaryConditionsFail,
}

/// What a verdict rests on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// Eigenvalues on a finite frequency grid: evidence, not proof.
    Grid,
    /// Structural conditions that every admissible law must meet.
    NecessaryConditions,
    /// Exact wavenumber sampling on the listed lattice sizes.
    LatticeScan,
}

/// Conditions a verdict can cite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    /// Dynamic consensus: memory coupling `B` symmetric.
    SymmetricCoupling,
    /// Dynamic consensus: `A` has nonzero entry sum.
    AbsoluteConsensusMemory,
    /// Dynamic consensus: neither of the two above.
    ConsensusCoupling,
    /// Vehicular: `B = 0` with `A != 0`.
    NoPositionIntegral,
    /// Vehicular: `A` has nonzero entry sum.
    AbsoluteVehicularMemory,
    /// Vehicular: neither of the two above.
    VehicularCoupling,
    /// Symbol Hurwitz at every nonzero frequency.
    HurwitzOffOrigin,
}

impl Condition {
    /// Citation string used in reports.
    pub fn citation(self) -> &'static str {
        match self {
            Condition::SymmetricCoupling => "Theorem 3a",
            Condition::AbsoluteConsensusMemory => "Theorem 3b",
            Condition::ConsensusCoupling => "Theorem 3",
            Condition::NoPositionIntegral => "Theorem 4a",
            Condition::AbsoluteVehicularMemory => "Theorem 4b",
            Condition::VehicularCoupling => "Theorem 4",
            Condition::HurwitzOffOrigin => "Corollary 1",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub theta: Vec<f64>,
    /// `(n, L)` when the witness is a lattice wavenumber.
    pub wavenumber: Option<(MultiIndex, usize)>,
    pub eigenvalue: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridEvidence {
    pub points: usize,
    /// Uniform spacing of the grid.
    pub resolution: f64,
    /// Smallest nonzero `|theta_i|` sampled.
    pub smallest_theta: f64,
    /// Points whose rightmost eigenvalue lies within the margin of the axis.
    pub marginal_points: usize,
    pub max_real_part: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityVerdict {
    pub verdict: Verdict,
    pub basis: Basis,
    pub witness: Option<Witness>,
    pub failed_condition: Option<Condition>,
    pub passed_condition: Option<Condition>,
    pub l_crit: Option<usize>,
    pub evidence: Option<GridEvidence>,
}

impl AdmissibilityVerdict {
    fn new(verdict: Verdict, basis: Basis) -> Self {
        AdmissibilityVerdict {
            verdict,
            basis,
            witness: None,
            failed_condition: None,
            passed_condition: None,
            l_crit: None,
            evidence: None,
        }
    }

    pub fn is_admissible(&self) -> bool {
        self.verdict == Verdict::Admissible
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridConfig {
    /// Uniform points per axis over `[-pi, pi]`.
    pub points_per_dim: usize,
    /// Largest lattice side the grid should speak for; the densified
    /// small-frequency points reach down to `pi / l_max`.
    pub l_max: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            points_per_dim: 1024,
            l_max: 4096,
        }
    }
}

/// Nonnegative half of the per-axis grid, zero excluded, ascending.
fn axis_points(cfg: &GridConfig) -> Vec<f64> {
    let half = (cfg.points_per_dim / 2).max(1);
    let mut pts: Vec<f64> = (1..=half).map(|k| PI * k as f64 / half as f64).collect();
    let lo = PI / cfg.l_max.max(1) as f64;
    let hi = 0.5_f64.min(PI * 0.999);
    if lo < hi {
        let k = (cfg.points_per_dim / 4).max(8);
        let ratio = libm::log(hi / lo);
        for i in 0..k {
            pts.push(lo * libm::exp(ratio * i as f64 / (k - 1) as f64));
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Eigenvalue sweep of the symbol over a grid of nonzero frequencies.
///
/// An unstable point makes the verdict conclusive. Otherwise the model is
/// reported admissible on the evidence of the grid.
pub fn hurwitz_grid_check(model: &ModelSpec, cfg: &GridConfig) -> AdmissibilityVerdict {
    let d = model.dim();
    let half = axis_points(cfg);
    let mut axis: Vec<f64> = half.iter().rev().map(|t| -t).collect();
    axis.push(0.0);
    axis.extend(half.iter().copied());
    let zero_at = half.len();

    let mut worst: Option<(Vec<f64>, Complex64)> = None;
    let mut points = 0;
    let mut marginal = 0;
    let mut max_re = f64::NEG_INFINITY;
    let total = axis.len().pow(d as u32);
    let mut theta = alloc::vec![0.0; d];
    for lin in 0..total {
        let mut rest = lin;
        let mut idx = alloc::vec![0usize; d];
        for slot in idx.iter_mut() {
            *slot = rest % axis.len();
            rest /= axis.len();
        }
        // theta and -theta share eigenvalues up to conjugation
        match idx.iter().find(|&&i| i != zero_at) {
            Some(&i) if i > zero_at => {}
            _ => continue,
        }
        for (t, &i) in theta.iter_mut().zip(&idx) {
            *t = axis[i];
        }
        points += 1;
        let symbol = model
            .assemble_symbol(&theta)
            .expect("dimension matches by construction");
        let lead = symbol.a_hat.rightmost_eigenvalue();
        max_re = max_re.max(lead.re);
        if lead.re > HURWITZ_MARGIN {
            if worst.as_ref().is_none_or(|w| lead.re > w.1.re) {
                worst = Some((theta.clone(), lead));
            }
        } else if lead.re > -HURWITZ_MARGIN {
            marginal += 1;
        }
    }
    let evidence = GridEvidence {
        points,
        resolution: 2.0 * PI / cfg.points_per_dim.max(1) as f64,
        smallest_theta: half.first().copied().unwrap_or(PI),
        marginal_points: marginal,
        max_real_part: max_re,
    };
    match worst {
        Some((theta, eigenvalue)) => {
            let mut v = AdmissibilityVerdict::new(Verdict::Inadmissible, Basis::Grid);
            v.witness = Some(Witness {
                theta,
                wavenumber: None,
                eigenvalue,
            });
            v.failed_condition = Some(Condition::HurwitzOffOrigin);
            v.evidence = Some(evidence);
            v
        }
        None => {
            let mut v = AdmissibilityVerdict::new(Verdict::Admissible, Basis::Grid);
            v.passed_condition = Some(Condition::HurwitzOffOrigin);
            v.evidence = Some(evidence);
            v
        }
    }
}

/// Routh-Hurwitz test for `m3 s^3 + m2 s^2 + m1 s + m0`.
pub fn routh_hurwitz_cubic(m3: f64, m2: f64, m1: f64, m0: f64) -> bool {
    m3 > 0.0 && m2 > 0.0 && m1 > 0.0 && m0 > 0.0 && m2 * m1 > m3 * m0
}

/// Necessary conditions for dynamic consensus: `B` symmetric, or `A` with
/// absolute feedback.
pub fn necessary_conditions_consensus(model: &ModelSpec) -> Result<AdmissibilityVerdict> {
    if model.kind() != ModelKind::ConsensusDynamic {
        return Err(Error::NotApplicable("condition applies to dynamic consensus models"));
    }
    let passed = if model.array(Role::B).is_symmetric() {
        Some(Condition::SymmetricCoupling)
    } else if !model.array(Role::A).is_relative() {
        Some(Condition::AbsoluteConsensusMemory)
    } else {
        None
    };
    Ok(structural(passed, Condition::ConsensusCoupling))
}

/// Necessary conditions for dynamic vehicular control with relative
/// velocity feedback: `B = 0` with `A != 0`, or `A` with absolute feedback.
pub fn necessary_conditions_vehicular(model: &ModelSpec) -> Result<AdmissibilityVerdict> {
    if model.kind() != ModelKind::VehicularDynamic {
        return Err(Error::NotApplicable("condition applies to dynamic vehicular models"));
    }
    if model.velocity_feedback() == VelocityFeedback::Absolute {
        return Err(Error::NotApplicable(
            "condition assumes relative velocity feedback in G and C",
        ));
    }
    let a = model.array(Role::A);
    let passed = if model.array(Role::B).is_zero() && !a.is_zero() {
        Some(Condition::NoPositionIntegral)
    } else if !a.is_relative() {
        Some(Condition::AbsoluteVehicularMemory)
    } else {
        None
    };
    Ok(structural(passed, Condition::VehicularCoupling))
}

fn structural(passed: Option<Condition>, failure: Condition) -> AdmissibilityVerdict {
    match passed {
        Some(c) => {
            let mut v = AdmissibilityVerdict::new(Verdict::Admissible, Basis::NecessaryConditions);
            v.passed_condition = Some(c);
            v
        }
        None => {
            let mut v = AdmissibilityVerdict::new(Verdict::NecessaryConditionsFail, Basis::NecessaryConditions);
            v.failed_condition = Some(failure);
            v
        }
    }
}

/// First unstable wavenumber on `Z_L^d`, if any.
pub fn unstable_wavenumber(model: &ModelSpec, l: usize) -> Result<Option<Witness>> {
    let d = model.dim();
    let mut worst: Option<Witness> = None;
    for n in torus_indices(d, l) {
        // n and -n give conjugate symbols
        match n.coords().iter().find(|&&c| c != 0) {
            Some(&c) if c > 0 || canonical(-c, l) == c => {}
            _ => continue,
        }
        let symbol = model.assemble_wavenumber(&n, l)?;
        let lead = symbol.a_hat.rightmost_eigenvalue();
        if lead.re > HURWITZ_MARGIN && worst.as_ref().is_none_or(|w| lead.re > w.eigenvalue.re) {
            worst = Some(Witness {
                theta: n.to_theta(l),
                wavenumber: Some((n.clone(), l)),
                eigenvalue: lead,
            });
        }
    }
    Ok(worst)
}

/// Smallest `L <= l_max` with an unstable wavenumber, and its witness.
pub fn find_critical_l(model: &ModelSpec, l_max: usize) -> Option<(usize, Witness)> {
    (model.min_lattice().max(2)..=l_max).find_map(|l| unstable_wavenumber(model, l).ok().flatten().map(|w| (l, w)))
}

/// Every `L <= l_max` at which the model is unstable. Instability at one
/// size says nothing about larger ones, so the whole range is scanned.
pub fn unstable_lattice_sizes(model: &ModelSpec, l_max: usize) -> Vec<usize> {
    (model.min_lattice().max(2)..=l_max)
        .filter(|&l| matches!(unstable_wavenumber(model, l), Ok(Some(_))))
        .collect()
}

/// Necessary conditions where they apply, then the grid sweep, then a
/// search for the critical lattice size if anything failed.
pub fn assess(model: &ModelSpec, cfg: &GridConfig) -> AdmissibilityVerdict {
    let structural = match model.kind() {
        ModelKind::ConsensusDynamic => necessary_conditions_consensus(model).ok(),
        ModelKind::VehicularDynamic if model.velocity_feedback() == VelocityFeedback::Relative => {
            necessary_conditions_vehicular(model).ok()
        }
        _ => None,
    };
    let grid = hurwitz_grid_check(model, cfg);
    let mut verdict = match structural {
        Some(s) if s.verdict == Verdict::NecessaryConditionsFail => AdmissibilityVerdict {
            witness: grid.witness.clone(),
            evidence: grid.evidence,
            ..s
        },
        Some(s) => AdmissibilityVerdict {
            passed_condition: s.passed_condition,
            ..grid
        },
        None => grid,
    };
    if !verdict.is_admissible() {
        if let Some((l, w)) = find_critical_l(model, cfg.l_max) {
            // an exact wavenumber is more useful than a grid point
            verdict.l_crit = Some(l);
            verdict.witness = Some(w);
        }
    }
    verdict
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{standard_consensus_array, LocalArray};
    use crate::models::dapi_model;

    fn skew_coupling_violation() -> ModelSpec {
        ModelSpec::consensus_dynamic(
            LocalArray::zero(1),
            LocalArray::from_1d(&[(0, -1.0), (1, 1.0)]).unwrap(),
            standard_consensus_array(1, 1.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn routh_examples() {
        assert!(routh_hurwitz_cubic(1.0, 3.0, 3.0, 1.0));
        assert!(!routh_hurwitz_cubic(1.0, 1.0, 1.0, 1.0));
        // DAPI unit gains at pi: a = -4, g = -1, f = -4, c = -1, b = 0
        let (a, g, f, c, b) = (-4.0, -1.0, -4.0, -1.0, 0.0);
        assert!(routh_hurwitz_cubic(1.0, -(a + g), a * g - f - c, a * f - b));
    }

    #[test]
    fn grid_examples() {
        let cfg = GridConfig {
            points_per_dim: 256,
            l_max: 512,
        };
        let cons = ModelSpec::consensus_static(standard_consensus_array(1, 1.0).unwrap()).unwrap();
        assert!(hurwitz_grid_check(&cons, &cfg).is_admissible());
        assert!(hurwitz_grid_check(&dapi_model(1.0, 1.0, 1.0, 1.0).unwrap(), &cfg).is_admissible());
        let bad = hurwitz_grid_check(&skew_coupling_violation(), &cfg);
        assert_eq!(bad.verdict, Verdict::Inadmissible);
        let w = bad.witness.unwrap();
        assert!(w.eigenvalue.re > 0.0);
    }

    #[test]
    fn structural_conditions() {
        let f = standard_consensus_array(1, 1.0).unwrap();
        let sym = ModelSpec::consensus_dynamic(f.clone(), f.clone(), f.clone()).unwrap();
        assert_eq!(
            necessary_conditions_consensus(&sym).unwrap().passed_condition,
            Some(Condition::SymmetricCoupling)
        );
        let asym_b = LocalArray::from_1d(&[(0, -1.0), (1, 1.0)]).unwrap();
        let abs_a = ModelSpec::consensus_dynamic(LocalArray::scalar(1, -1.0), asym_b, f.clone()).unwrap();
        assert_eq!(
            necessary_conditions_consensus(&abs_a).unwrap().passed_condition,
            Some(Condition::AbsoluteConsensusMemory)
        );
        let v = necessary_conditions_consensus(&skew_coupling_violation()).unwrap();
        assert_eq!(v.verdict, Verdict::NecessaryConditionsFail);
        assert_eq!(v.failed_condition.unwrap().citation(), "Theorem 3");

        let z = LocalArray::zero(1);
        let ok = ModelSpec::vehicular_dynamic(f.clone(), z.clone(), f.clone(), f.clone(), f.clone()).unwrap();
        assert_eq!(
            necessary_conditions_vehicular(&ok).unwrap().passed_condition,
            Some(Condition::NoPositionIntegral)
        );
        let bad = ModelSpec::vehicular_dynamic(f.clone(), f.clone(), z.clone(), f.clone(), f.clone()).unwrap();
        assert_eq!(
            necessary_conditions_vehicular(&bad).unwrap().failed_condition,
            Some(Condition::VehicularCoupling)
        );
        let abs = ModelSpec::vehicular_dynamic(LocalArray::scalar(1, -1.0), f.clone(), z, f.clone(), f).unwrap();
        assert_eq!(
            necessary_conditions_vehicular(&abs).unwrap().passed_condition,
            Some(Condition::AbsoluteVehicularMemory)
        );
        assert!(necessary_conditions_vehicular(&dapi_model(1.0, 1.0, 1.0, 1.0).unwrap()).is_err());
    }

    #[test]
    fn critical_sizes() {
        let (l, w) = find_critical_l(&skew_coupling_violation(), 4096).unwrap();
        assert!(l >= 3);
        assert!(w.eigenvalue.re > HURWITZ_MARGIN);
        assert!(find_critical_l(&dapi_model(1.0, 1.0, 1.0, 1.0).unwrap(), 512).is_none());
        let cons = ModelSpec::consensus_static(standard_consensus_array(1, 1.0).unwrap()).unwrap();
        assert!(find_critical_l(&cons, 256).is_none());
    }
}
