//! One function per subcommand. Each returns in-memory tables or records;
//! writing them out is the caller's business.

use std::f64::consts::PI;

use coherence_core::admissibility::{assess, AdmissibilityVerdict, Basis, GridConfig, Verdict};
use coherence_core::scaling::{scaling_fit, FitKind};
use coherence_core::simulator::{output_variance, simulate, SimConfig, Topology, Trace};
use coherence_core::spectral::{control_effort, h2_density, ReportOptions, VarianceReport};
use coherence_core::{Error as CoreError, ModelSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::{num, opt, Table};

/// Sorted, duplicate-free lattice sides, each large enough for the model.
pub fn lattice_sizes(model: &ModelSpec, ls: &[usize]) -> Result<Vec<usize>> {
    let mut out = ls.to_vec();
    out.sort_unstable();
    out.dedup();
    if let Some(&l) = out.first() {
        if l < model.min_lattice() {
            return Err(CoreError::LatticeTooSmall {
                l,
                q: model.support_radius(),
                min: model.min_lattice(),
            }
            .into());
        }
    }
    Ok(out)
}

/// Per-axis grid points `pi (2i - n) / n` for `i = 1..=n`: symmetric about
/// zero, ending at `pi`, and containing zero when `n` is even.
pub fn axis_grid(n: usize) -> Vec<f64> {
    (1..=n).map(|i| PI * (2.0 * i as f64 - n as f64) / n as f64).collect()
}

/// `(theta_1..theta_d, p_hat, status)` on the tensor grid. The origin is
/// skipped. Points where the symbol is not Hurwitz keep an empty `p_hat`
/// and say so in `status`.
pub fn cmd_density(model: &ModelSpec, grid: usize) -> Table {
    let d = model.dim();
    let mut header: Vec<String> = (1..=d).map(|i| format!("theta_{i}")).collect();
    header.extend(["p_hat".into(), "status".into()]);
    let mut table = Table::new(header);
    if grid == 0 {
        return table;
    }
    let axis = axis_grid(grid);
    let total = grid.pow(d as u32);
    let rows: Vec<Option<Vec<String>>> = (0..total)
        .into_par_iter()
        .map(|idx| {
            // axis 0 varies fastest
            let theta: Vec<f64> = (0..d).map(|i| axis[idx / grid.pow(i as u32) % grid]).collect();
            if theta.iter().all(|&t| t == 0.0) {
                return None;
            }
            let (p, status) = match h2_density(model, &theta) {
                Ok(s) => (num(s.p_hat), "ok".to_string()),
                Err(CoreError::NotHurwitz { .. }) => (String::new(), "not_hurwitz".to_string()),
                Err(e) => (String::new(), format!("error: {e}")),
            };
            let mut row: Vec<String> = theta.iter().map(|&t| num(t)).collect();
            row.extend([p, status]);
            Some(row)
        })
        .collect();
    for r in rows.into_iter().flatten() {
        table.push(r);
    }
    table
}

pub const VARIANCE_HEADER: [&str; 6] = ["L", "N", "v_exact", "s_lower", "s_upper", "v_oracle"];

pub fn variance_reports(model: &ModelSpec, ls: &[usize], oracle: bool) -> Result<Vec<VarianceReport>> {
    let ls = lattice_sizes(model, ls)?;
    let opts = ReportOptions { bounds: true, oracle };
    let reports: coherence_core::Result<Vec<_>> = ls
        .par_iter()
        .map(|&l| VarianceReport::compute(model, l, opts))
        .collect();
    Ok(reports?)
}

/// `(L, N, v_exact, s_lower, s_upper, v_oracle)`; the oracle column is empty
/// unless requested and the dense problem fits the budget.
pub fn cmd_variance(model: &ModelSpec, ls: &[usize], oracle: bool) -> Result<Table> {
    let mut table = Table::new(VARIANCE_HEADER);
    for r in variance_reports(model, ls, oracle)? {
        table.push(vec![
            r.l.to_string(),
            r.n.to_string(),
            num(r.v_exact),
            opt(r.s_lower),
            opt(r.s_upper),
            opt(r.v_oracle),
        ]);
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub theta: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wavenumber: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<usize>,
    pub eigenvalue_re: f64,
    pub eigenvalue_im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceRecord {
    pub points: usize,
    pub resolution: f64,
    pub smallest_theta: f64,
    pub marginal_points: usize,
    pub max_real_part: f64,
}

/// Serialized admissibility verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub verdict: String,
    pub basis: String,
    /// The failed condition's citation if any, else the passed one's.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub citation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failed_condition: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub passed_condition: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_crit: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evidence: Option<EvidenceRecord>,
}

impl VerdictRecord {
    pub fn from_verdict(v: &AdmissibilityVerdict) -> Self {
        let verdict = match v.verdict {
            Verdict::Admissible => "admissible",
            Verdict::Inadmissible => "inadmissible",
            Verdict::NecessaryConditionsFail => "necessary_conditions_fail",
        };
        let basis = match v.basis {
            Basis::Grid => "grid",
            Basis::NecessaryConditions => "necessary_conditions",
            Basis::LatticeScan => "lattice_scan",
        };
        VerdictRecord {
            verdict: verdict.into(),
            basis: basis.into(),
            citation: v
                .failed_condition
                .or(v.passed_condition)
                .map(|c| c.citation().to_string()),
            failed_condition: v.failed_condition.map(|c| format!("{c:?}")),
            passed_condition: v.passed_condition.map(|c| format!("{c:?}")),
            l_crit: v.l_crit,
            witness: v.witness.as_ref().map(|w| WitnessRecord {
                theta: w.theta.clone(),
                wavenumber: w.wavenumber.as_ref().map(|(n, _)| n.coords().to_vec()),
                lattice: w.wavenumber.as_ref().map(|(_, l)| *l),
                eigenvalue_re: w.eigenvalue.re,
                eigenvalue_im: w.eigenvalue.im,
            }),
            evidence: v.evidence.map(|e| EvidenceRecord {
                points: e.points,
                resolution: e.resolution,
                smallest_theta: e.smallest_theta,
                marginal_points: e.marginal_points,
                max_real_part: e.max_real_part,
            }),
        }
    }

    pub fn is_admissible(&self) -> bool {
        self.verdict == "admissible"
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("verdict records serialize")
    }
}

pub fn cmd_admissible(model: &ModelSpec, grid: usize, l_max: usize) -> VerdictRecord {
    let cfg = GridConfig {
        points_per_dim: grid,
        l_max,
    };
    VerdictRecord::from_verdict(&assess(model, &cfg))
}

pub const SCALING_HEADER: [&str; 10] = [
    "model_id",
    "d",
    "r_hat",
    "beta",
    "predicted",
    "slope",
    "half_width",
    "law",
    "preferred_fit",
    "cross_ray_r",
];

/// One fit row plus the `(L, N, v_exact)` samples behind it.
pub fn cmd_scaling(model_id: &str, model: &ModelSpec, ls: &[usize]) -> Result<(Table, Table)> {
    let ls = lattice_sizes(model, ls)?;
    let fit = scaling_fit(model, &ls)?;
    let d = model.dim();
    let mut table = Table::new(SCALING_HEADER);
    table.push(vec![
        model_id.to_string(),
        d.to_string(),
        num(fit.r_estimate.r),
        num(fit.beta),
        num(fit.predicted_exponent(d)),
        num(fit.empirical.slope),
        num(fit.empirical.half_width),
        fit.predicted_law.describe(),
        match fit.empirical.preferred {
            FitKind::Power => "power".into(),
            FitKind::Logarithmic => "logarithmic".into(),
        },
        opt(fit.r_estimate.cross_ray_r),
    ]);
    let mut samples = Table::new(["L", "N", "v_exact"]);
    for (l, (n, v)) in ls.iter().zip(&fit.samples) {
        samples.push(vec![l.to_string(), n.to_string(), num(*v)]);
    }
    Ok((table, samples))
}

/// Optional overrides of [`SimConfig`] defaults, as read from files and flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimParams {
    pub topology: Option<String>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub warmup: Option<f64>,
    pub noise_intensity: Option<f64>,
    pub trajectories: Option<usize>,
    pub delta_x: Option<f64>,
    pub record_stride: Option<usize>,
}

pub fn parse_topology(s: &str) -> Result<Topology> {
    match s {
        "ring" => Ok(Topology::Ring),
        "string" => Ok(Topology::String),
        other => Err(Error::Config(format!("topology must be ring or string, got {other:?}"))),
    }
}

pub fn topology_name(t: Topology) -> &'static str {
    match t {
        Topology::Ring => "ring",
        Topology::String => "string",
    }
}

impl SimParams {
    /// Fills a config for lattice side `l`. Without an explicit warmup the
    /// statistics window is the last 5% of the horizon.
    pub fn config(&self, l: usize, seed: u64) -> Result<SimConfig> {
        let base = SimConfig::default();
        let t_end = self.t_end.unwrap_or(base.t_end);
        Ok(SimConfig {
            l,
            topology: self
                .topology
                .as_deref()
                .map(parse_topology)
                .transpose()?
                .unwrap_or(base.topology),
            dt: self.dt.unwrap_or(base.dt),
            t_end,
            warmup: self.warmup.unwrap_or(0.95 * t_end),
            noise_intensity: self.noise_intensity.unwrap_or(base.noise_intensity),
            seed,
            trajectories: self.trajectories.unwrap_or(base.trajectories),
            delta_x: self.delta_x.unwrap_or(base.delta_x),
            record_stride: self.record_stride.or(base.record_stride),
            initial_offset: 0.0,
        })
    }
}

pub const SUMMARY_HEADER: [&str; 5] = ["N", "topology", "v_hat", "stderr", "trajectories"];

#[derive(Debug, Clone)]
pub struct SimulationOutput {
    pub l: usize,
    /// `(N, topology, v_hat, stderr, trajectories)`.
    pub summary_row: Vec<String>,
    /// `(t, site, y)` of the first trajectory, when a stride was set.
    pub trace: Option<Table>,
    /// `(t, site, position)` with the reference spacing added back.
    pub positions: Option<Table>,
}

pub fn cmd_simulate(model: &ModelSpec, ls: &[usize], params: &SimParams, seed: u64) -> Result<Vec<SimulationOutput>> {
    let ls = lattice_sizes(model, ls)?;
    let mut out = Vec::with_capacity(ls.len());
    for l in ls {
        let cfg = params.config(l, seed)?;
        let trace = simulate(model, &cfg)?;
        let est = output_variance(&trace)?;
        let summary_row = vec![
            l.to_string(),
            topology_name(cfg.topology).into(),
            num(est.mean),
            opt(est.stderr),
            est.trajectories.to_string(),
        ];
        let (trace_table, positions) = if cfg.record_stride.is_some() {
            (Some(trace_table(&trace, false)), Some(trace_table(&trace, true)))
        } else {
            (None, None)
        };
        out.push(SimulationOutput {
            l,
            summary_row,
            trace: trace_table,
            positions,
        });
    }
    Ok(out)
}

fn trace_table(trace: &Trace, positions: bool) -> Table {
    let (rows, last) = if positions {
        (trace.positions(), "position")
    } else {
        (trace.recorded.clone(), "y")
    };
    let mut table = Table::new(["t", "site", last]);
    for (t, ys) in rows {
        for (k, y) in ys.iter().enumerate() {
            table.push(vec![num(t), k.to_string(), num(*y)]);
        }
    }
    table
}

pub const EFFORT_HEADER: [&str; 6] = ["L", "effort", "l1_form", "bound_f", "bound_ab", "satisfies_bounds"];

pub fn cmd_effort(model: &ModelSpec, ls: &[usize]) -> Result<Table> {
    let mut table = Table::new(EFFORT_HEADER);
    for l in lattice_sizes(model, ls)? {
        let e = control_effort(model, l)?;
        table.push(vec![
            l.to_string(),
            num(e.effort),
            num(e.l1_form),
            num(e.bound_f),
            num(e.bound_ab),
            e.satisfies_bounds().to_string(),
        ]);
    }
    Ok(table)
}
