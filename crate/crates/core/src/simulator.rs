//! Euler-Maruyama Monte Carlo of the closed loop on a ring or an open string.
//!
//! Every state block is re-centred to zero mean after each step. All the
//! operators map constant vectors to constant vectors, so the mean never
//! feeds back into the fluctuations and the deviation-from-average output is
//! unchanged; re-centring just keeps the marginal average mode from
//! drifting off to large values and eating precision.

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::lattice::{canonical, LocalArray, MultiIndex};
use crate::models::{ModelKind, ModelSpec, Role};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    Ring,
    /// Open chain: couplings that would wrap around are dropped.
    String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub l: usize,
    pub topology: Topology,
    pub dt: f64,
    pub t_end: f64,
    /// Statistics use only samples with `t > warmup`.
    pub warmup: f64,
    /// Variance rate of the per-site disturbance.
    pub noise_intensity: f64,
    pub seed: u64,
    pub trajectories: usize,
    /// Reference spacing, used only when exporting positions.
    pub delta_x: f64,
    /// Keep every `k`-th post-warmup output vector of the first trajectory.
    pub record_stride: Option<usize>,
    /// Constant added to every initial position. The output never sees it.
    pub initial_offset: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            l: 20,
            topology: Topology::Ring,
            dt: 0.1,
            t_end: 2e4,
            warmup: 0.95 * 2e4,
            noise_intensity: 1.0,
            seed: 0,
            trajectories: 4,
            delta_x: 2.0,
            record_stride: None,
            initial_offset: 0.0,
        }
    }
}

impl SimConfig {
    fn steps(&self) -> (usize, usize) {
        let total = libm::round(self.t_end / self.dt) as usize;
        let warm = libm::round(self.warmup / self.dt) as usize;
        (total, warm.min(total))
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::NonPositive {
                name: "dt",
                value: self.dt,
            });
        }
        if !(self.warmup >= 0.0 && self.warmup < self.t_end) {
            return Err(Error::InvalidArgument(alloc::format!(
                "warmup {} must lie in [0, t_end = {})",
                self.warmup,
                self.t_end
            )));
        }
        if !(self.noise_intensity >= 0.0) {
            return Err(Error::InvalidArgument("noise intensity must be non-negative".into()));
        }
        if self.trajectories == 0 {
            return Err(Error::InvalidArgument("need at least one trajectory".into()));
        }
        if self.record_stride == Some(0) {
            return Err(Error::InvalidArgument("record stride must be positive".into()));
        }
        Ok(())
    }
}

/// Running sums for one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryStats {
    /// Post-warmup samples per site.
    pub samples: u64,
    pub sum_y: Vec<f64>,
    pub sum_y2: Vec<f64>,
}

impl TrajectoryStats {
    /// Time- and site-averaged `y^2`.
    pub fn mean_square(&self) -> f64 {
        if self.samples == 0 {
            return 0.0;
        }
        self.sum_y2.iter().sum::<f64>() / (self.samples as f64 * self.sum_y2.len() as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub config: SimConfig,
    pub trajectories: Vec<TrajectoryStats>,
    /// `(t, y)` snapshots of the first trajectory when a stride was set.
    pub recorded: Vec<(f64, Vec<f64>)>,
}

impl Trace {
    /// Recorded outputs with the reference offsets `k * delta_x` added back.
    pub fn positions(&self) -> Vec<(f64, Vec<f64>)> {
        let dx = self.config.delta_x;
        self.recorded
            .iter()
            .map(|(t, y)| (*t, y.iter().enumerate().map(|(k, v)| v + k as f64 * dx).collect()))
            .collect()
    }
}

// Sparse rows of one block operator.
#[derive(Debug, Clone)]
struct Stencil {
    start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl Stencil {
    fn build(array: &LocalArray, l: usize, topology: Topology) -> Self {
        let li = l as i64;
        let mut start = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for k in 0..li {
            let mut diag = 0.0;
            let mut row: Vec<(usize, f64)> = Vec::new();
            for (off, a) in array.entries() {
                // h_k = sum_o a_o x_{k - o}
                let src = k - off.coords()[0];
                if (0..li).contains(&src) || topology == Topology::Ring {
                    let src = src.rem_euclid(li) as usize;
                    if src == k as usize {
                        diag += a;
                    } else {
                        row.push((src, *a));
                    }
                } else {
                    // keep the row sum
                    diag += a;
                }
            }
            if diag != 0.0 {
                row.push((k as usize, diag));
            }
            row.sort_by_key(|e| e.0);
            for (c, v) in row {
                cols.push(c);
                vals.push(v);
            }
            start.push(cols.len());
        }
        Stencil { start, cols, vals }
    }

    fn apply_add(&self, x: &[f64], out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for idx in self.start[k]..self.start[k + 1] {
                acc += self.vals[idx] * x[self.cols[idx]];
            }
            *o += acc;
        }
    }
}

enum Block {
    Zero,
    Identity,
    Conv(Stencil),
}

struct System {
    n: usize,
    blocks: Vec<Vec<Block>>,
    position: usize,
}

impl System {
    fn new(model: &ModelSpec, l: usize, topology: Topology) -> Self {
        let conv = |r: Role| {
            let a = model.array(r);
            if a.is_zero() {
                Block::Zero
            } else {
                Block::Conv(Stencil::build(a, l, topology))
            }
        };
        use Block::{Identity, Zero};
        let blocks = match model.kind() {
            ModelKind::ConsensusStatic => vec![vec![conv(Role::F)]],
            ModelKind::ConsensusDynamic => vec![vec![conv(Role::A), conv(Role::B)], vec![Identity, conv(Role::F)]],
            ModelKind::VehicularStatic => vec![vec![Zero, Identity], vec![conv(Role::F), conv(Role::G)]],
            ModelKind::VehicularDynamic => vec![
                vec![conv(Role::A), conv(Role::B), conv(Role::C)],
                vec![Zero, Zero, Identity],
                vec![Identity, conv(Role::F), conv(Role::G)],
            ],
        };
        System {
            n: l,
            blocks,
            position: model.kind().position_index(),
        }
    }

    fn drift(&self, state: &[Vec<f64>], out: &mut [Vec<f64>]) {
        for (i, row) in self.blocks.iter().enumerate() {
            let o = &mut out[i];
            o.iter_mut().for_each(|v| *v = 0.0);
            for (j, block) in row.iter().enumerate() {
                match block {
                    Block::Zero => {}
                    Block::Identity => {
                        for (a, b) in o.iter_mut().zip(&state[j]) {
                            *a += b;
                        }
                    }
                    Block::Conv(s) => s.apply_add(&state[j], o),
                }
            }
        }
    }
}

fn recenter(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
}

/// Refuses step sizes for which `I + dt A_n` is not a contraction at some
/// nonzero wavenumber of the ring.
pub fn check_step(model: &ModelSpec, l: usize, dt: f64) -> Result<()> {
    for n in 1..l as i64 {
        let n = canonical(n, l);
        let symbol = model.assemble_wavenumber(&MultiIndex::new([n]), l)?;
        let radius = symbol
            .a_hat
            .eigenvalues()
            .into_iter()
            .map(|mu| (num_complex::Complex64::new(1.0, 0.0) + mu * dt).norm())
            .fold(0.0, f64::max);
        if !(radius < 1.0) {
            return Err(Error::StepTooLarge {
                dt,
                radius,
                wavenumber: n,
            });
        }
    }
    Ok(())
}

// Accumulated stats plus recorded (time, state) snapshots.
type TrajectoryOutput = (TrajectoryStats, Vec<(f64, Vec<f64>)>);

fn run_trajectory(model: &ModelSpec, system: &System, config: &SimConfig, index: usize) -> TrajectoryOutput {
    let n = system.n;
    let m = model.kind().state_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index as u64);
    let mut state = vec![vec![0.0; n]; m];
    state[system.position]
        .iter_mut()
        .for_each(|x| *x = config.initial_offset);
    for s in state.iter_mut() {
        recenter(s);
    }
    let mut deriv = vec![vec![0.0; n]; m];
    let (total, warm) = config.steps();
    let amp = libm::sqrt(config.dt * config.noise_intensity);
    let mut stats = TrajectoryStats {
        samples: 0,
        sum_y: vec![0.0; n],
        sum_y2: vec![0.0; n],
    };
    let mut recorded = Vec::new();
    for step in 1..=total {
        system.drift(&state, &mut deriv);
        for (s, d) in state.iter_mut().zip(&deriv) {
            for (x, dx) in s.iter_mut().zip(d) {
                *x += config.dt * dx;
            }
        }
        if amp > 0.0 {
            for x in state[m - 1].iter_mut() {
                let xi: f64 = StandardNormal.sample(&mut rng);
                *x += amp * xi;
            }
        }
        for s in state.iter_mut() {
            recenter(s);
        }
        if step > warm {
            let y = &state[system.position];
            for k in 0..n {
                stats.sum_y[k] += y[k];
                stats.sum_y2[k] += y[k] * y[k];
            }
            stats.samples += 1;
            if index == 0 {
                if let Some(stride) = config.record_stride {
                    if (step - warm) % stride == 0 {
                        recorded.push((step as f64 * config.dt, y.clone()));
                    }
                }
            }
        }
    }
    (stats, recorded)
}

/// Runs `config.trajectories` independent realizations.
///
/// Trajectory `i` draws from ChaCha8 seeded with `config.seed` on stream
/// `i`, so results do not depend on how trajectories are scheduled.
pub fn simulate(model: &ModelSpec, config: &SimConfig) -> Result<Trace> {
    config.validate()?;
    if model.dim() != 1 {
        return Err(Error::NotApplicable("the simulator handles one-dimensional lattices"));
    }
    if config.l < model.min_lattice() {
        return Err(Error::LatticeTooSmall {
            l: config.l,
            q: model.support_radius(),
            min: model.min_lattice(),
        });
    }
    check_step(model, config.l, config.dt)?;
    let system = System::new(model, config.l, config.topology);
    let runs = run_all(model, &system, config);
    let mut recorded = Vec::new();
    let mut trajectories = Vec::with_capacity(runs.len());
    for (i, (stats, rec)) in runs.into_iter().enumerate() {
        if i == 0 {
            recorded = rec;
        }
        trajectories.push(stats);
    }
    Ok(Trace {
        config: config.clone(),
        trajectories,
        recorded,
    })
}

#[cfg(feature = "parallel")]
fn run_all(model: &ModelSpec, system: &System, config: &SimConfig) -> Vec<TrajectoryOutput> {
    use rayon::prelude::*;
    (0..config.trajectories)
        .into_par_iter()
        .map(|i| run_trajectory(model, system, config, i))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn run_all(model: &ModelSpec, system: &System, config: &SimConfig) -> Vec<TrajectoryOutput> {
    (0..config.trajectories)
        .map(|i| run_trajectory(model, system, config, i))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceEstimate {
    pub mean: f64,
    /// Standard error across trajectories; absent with a single trajectory.
    pub stderr: Option<f64>,
    pub trajectories: usize,
}

/// Minimum post-warmup samples per site for [`output_variance`].
pub const MIN_SAMPLES: u64 = 10_000;

/// Time- and site-averaged `E[y^2]`, replicated over trajectories.
pub fn output_variance(trace: &Trace) -> Result<VarianceEstimate> {
    let samples = trace.trajectories.iter().map(|t| t.samples).min().unwrap_or(0);
    if samples < MIN_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: MIN_SAMPLES as usize,
            found: samples as usize,
        });
    }
    let per: Vec<f64> = trace.trajectories.iter().map(TrajectoryStats::mean_square).collect();
    let k = per.len() as f64;
    let mean = per.iter().sum::<f64>() / k;
    let stderr = if per.len() > 1 {
        let var = per.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0);
        Some(libm::sqrt(var / k))
    } else {
        None
    };
    Ok(VarianceEstimate {
        mean,
        stderr,
        trajectories: per.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddingComparison {
    pub string: VarianceEstimate,
    pub ring: VarianceEstimate,
}

impl EmbeddingComparison {
    /// Combined standard error of the difference.
    pub fn combined_stderr(&self) -> f64 {
        let s = self.string.stderr.unwrap_or(0.0);
        let r = self.ring.stderr.unwrap_or(0.0);
        libm::sqrt(s * s + r * r)
    }

    /// `v_string >= v_ring - 2 SE`.
    pub fn string_at_least_ring(&self) -> bool {
        self.string.mean >= self.ring.mean - 2.0 * self.combined_stderr()
    }
}

/// Simulates the same model and seeds on both topologies.
pub fn string_embedding_compare(model: &ModelSpec, l: usize, config: &SimConfig) -> Result<EmbeddingComparison> {
    let mut cfg = config.clone();
    cfg.l = l;
    cfg.topology = Topology::String;
    let string = output_variance(&simulate(model, &cfg)?)?;
    cfg.topology = Topology::Ring;
    let ring = output_variance(&simulate(model, &cfg)?)?;
    Ok(EmbeddingComparison { string, ring })
}
