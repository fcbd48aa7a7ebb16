//! Experiment configs: named models plus a list of command runs, all
//! writing into one output directory.
//!
//! ```toml
//! seed = 1
//!
//! [models.platoon]
//! kind = "vehicular_static"
//! dim = 1
//! arrays.F = { entries = [{ offset = [-1], value = 1.0 }, { offset = [0], value = -2.0 }, { offset = [1], value = 1.0 }] }
//! arrays.G = { file = "g.toml" }
//!
//! [[experiment]]
//! id = "platoon_variance"
//! command = "variance"
//! model = "platoon"
//! L = [16, 32, 64]
//! oracle = true
//!
//! [[experiment]]
//! id = "platoon_string"
//! command = "simulate"
//! model = "platoon"
//! L = [20, 50]
//! sim = { topology = "string", trajectories = 8 }
//! ```
//!
//! A `model` value that is not a key of `[models]` is read as a path to a
//! model file, relative to the config file.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use coherence_core::ModelSpec;
use serde::Deserialize;

use crate::commands::{
    cmd_admissible, cmd_density, cmd_effort, cmd_scaling, cmd_simulate, cmd_variance, SimParams, SUMMARY_HEADER,
};
use crate::error::{Error, Result};
use crate::format::{load_model, parse, read, ModelDoc};
use crate::table::{write_with_stamp, Table};

pub const DEFAULT_GRID: usize = 1024;
pub const DEFAULT_L_MAX: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Density,
    Variance,
    Admissible,
    Scaling,
    Simulate,
    Effort,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Density,
        Command::Variance,
        Command::Admissible,
        Command::Scaling,
        Command::Simulate,
        Command::Effort,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Density => "density",
            Command::Variance => "variance",
            Command::Admissible => "admissible",
            Command::Scaling => "scaling",
            Command::Simulate => "simulate",
            Command::Effort => "effort",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }

    fn needs_sizes(self) -> bool {
        !matches!(self, Command::Density | Command::Admissible)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDoc {
    #[serde(default)]
    description: Option<String>,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    models: BTreeMap<String, ModelDoc>,
    #[serde(rename = "experiment", default)]
    experiments: Vec<ExperimentDoc>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentDoc {
    id: String,
    command: String,
    model: String,
    #[serde(rename = "L", default)]
    l: Vec<usize>,
    grid: Option<usize>,
    l_max: Option<usize>,
    #[serde(default)]
    oracle: bool,
    seed: Option<u64>,
    #[serde(default)]
    sim: SimParams,
}

/// One validated command run.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub id: String,
    pub command: Command,
    pub model_id: String,
    pub model: ModelSpec,
    pub sizes: Vec<usize>,
    pub grid: usize,
    pub l_max: usize,
    pub oracle: bool,
    pub seed: u64,
    pub sim: SimParams,
}

impl Experiment {
    /// An experiment with default grid settings and no lattice sizes.
    pub fn new(id: impl Into<String>, command: Command, model_id: impl Into<String>, model: ModelSpec) -> Self {
        Experiment {
            id: id.into(),
            command,
            model_id: model_id.into(),
            model,
            sizes: Vec::new(),
            grid: DEFAULT_GRID,
            l_max: DEFAULT_L_MAX,
            oracle: false,
            seed: 0,
            sim: SimParams::default(),
        }
    }

    /// Checks the lattice sizes against the model and the topology name.
    pub fn validate(&self) -> Result<()> {
        if self.command.needs_sizes() && self.sizes.is_empty() {
            return Err(Error::Config(format!(
                "{}: {} needs at least one L",
                self.id, self.command
            )));
        }
        let min = self.model.min_lattice();
        if let Some(&l) = self.sizes.iter().find(|&&l| l < min) {
            return Err(Error::Config(format!(
                "{}: L = {l} does not exceed twice the support radius {} (need L >= {min})",
                self.id,
                self.model.support_radius()
            )));
        }
        if let Some(topology) = &self.sim.topology {
            crate::commands::parse_topology(topology)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub description: Option<String>,
    pub experiments: Vec<Experiment>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = read(path)?;
        Self::parse(path, &text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Parses config text. `origin` names the source in errors and `base`
    /// anchors relative model and array paths.
    pub fn parse(origin: &Path, text: &str, base: &Path) -> Result<Self> {
        let doc: ConfigDoc = parse(origin, text)?;
        let mut models = BTreeMap::new();
        for (name, m) in &doc.models {
            let model = m
                .to_model(base)
                .map_err(|e| Error::Config(format!("model {name}: {e}")))?;
            models.insert(name.clone(), model);
        }
        let mut experiments = Vec::with_capacity(doc.experiments.len());
        let mut ids = std::collections::BTreeSet::new();
        for e in doc.experiments {
            if !ids.insert(e.id.clone()) {
                return Err(Error::Config(format!("duplicate experiment id {:?}", e.id)));
            }
            let command = Command::from_name(&e.command)
                .ok_or_else(|| Error::Config(format!("{}: unknown command {:?}", e.id, e.command)))?;
            let model = match models.get(&e.model) {
                Some(m) => m.clone(),
                None => {
                    let path = base.join(&e.model);
                    if !path.is_file() {
                        return Err(Error::Config(format!(
                            "{}: model {:?} is neither a [models] entry nor an existing file",
                            e.id, e.model
                        )));
                    }
                    load_model(&path)?
                }
            };
            let exp = Experiment {
                id: e.id,
                command,
                model_id: e.model,
                model,
                sizes: e.l,
                grid: e.grid.unwrap_or(DEFAULT_GRID),
                l_max: e.l_max.unwrap_or(DEFAULT_L_MAX),
                oracle: e.oracle,
                seed: e.seed.unwrap_or(doc.seed),
                sim: e.sim,
            };
            exp.validate()?;
            experiments.push(exp);
        }
        Ok(ExperimentConfig {
            description: doc.description,
            experiments,
        })
    }

    pub fn preset(name: &str) -> Result<Self> {
        let (_, text) = PRESETS
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| Error::Config(format!("unknown preset {name:?}, expected one of {:?}", preset_names())))?;
        Self::parse(&PathBuf::from(format!("preset:{name}")), text, Path::new("."))
    }
}

/// Named configs for the reference figures and the scaling table.
pub const PRESETS: [(&str, &str); 4] = [
    ("fig6_static", include_str!("../presets/fig6_static.toml")),
    ("fig6_dynamic", include_str!("../presets/fig6_dynamic.toml")),
    ("fig7", include_str!("../presets/fig7.toml")),
    ("theorem1_table", include_str!("../presets/theorem1_table.toml")),
];

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

/// What one experiment produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub id: String,
    pub files: Vec<PathBuf>,
    /// Set when the run must end with a nonzero exit status.
    pub failure: Option<String>,
}

/// Runs one experiment and writes its files into `out`.
pub fn execute(exp: &Experiment, out: &Path) -> Result<Outcome> {
    let mut files = Vec::new();
    let mut failure = None;
    let mut write = |name: String, table: &Table| -> Result<()> {
        let path = out.join(name);
        table.write(&path)?;
        files.push(path);
        Ok(())
    };
    match exp.command {
        Command::Density => write(format!("{}.csv", exp.id), &cmd_density(&exp.model, exp.grid))?,
        Command::Variance => write(
            format!("{}.csv", exp.id),
            &cmd_variance(&exp.model, &exp.sizes, exp.oracle)?,
        )?,
        Command::Effort => write(format!("{}.csv", exp.id), &cmd_effort(&exp.model, &exp.sizes)?)?,
        Command::Scaling => {
            let (fit, samples) = cmd_scaling(&exp.model_id, &exp.model, &exp.sizes)?;
            write(format!("{}.csv", exp.id), &fit)?;
            write(format!("{}_samples.csv", exp.id), &samples)?;
        }
        Command::Simulate => {
            let runs = cmd_simulate(&exp.model, &exp.sizes, &exp.sim, exp.seed)?;
            let mut summary = Table::new(SUMMARY_HEADER);
            for run in &runs {
                summary.push(run.summary_row.clone());
                if let Some(t) = &run.trace {
                    write(format!("{}_trace_L{}.csv", exp.id, run.l), t)?;
                }
                if let Some(t) = &run.positions {
                    write(format!("{}_positions_L{}.csv", exp.id, run.l), t)?;
                }
            }
            write(format!("{}_summary.csv", exp.id), &summary)?;
        }
        Command::Admissible => {
            let record = cmd_admissible(&exp.model, exp.grid, exp.l_max);
            let path = out.join(format!("{}.toml", exp.id));
            write_with_stamp(&path, &record.to_toml())?;
            files.push(path);
            if !record.is_admissible() {
                failure = Some(format!(
                    "{}: {}{}",
                    exp.id,
                    record.verdict,
                    record
                        .citation
                        .as_deref()
                        .map(|c| format!(" ({c})"))
                        .unwrap_or_default()
                ));
            }
        }
    }
    Ok(Outcome {
        id: exp.id.clone(),
        files,
        failure,
    })
}
