//! TOML documents for arrays and models.
//!
//! An array lists its dimension and sparse entries:
//!
//! ```toml
//! dim = 1
//! entries = [
//!     { offset = [-1], value = 1.0 },
//!     { offset = [0], value = -2.0 },
//!     { offset = [1], value = 1.0 },
//! ]
//! ```
//!
//! A model names its kind and dimension and gives each array inline or as a
//! path to an array document:
//!
//! ```toml
//! kind = "vehicular_static"
//! dim = 1
//! velocity_feedback = "relative"
//!
//! [arrays]
//! F = { entries = [{ offset = [-1], value = 1.0 }, { offset = [0], value = -2.0 }, { offset = [1], value = 1.0 }] }
//! G = { file = "g.toml" }
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use coherence_core::models::Operators;
use coherence_core::{LocalArray, ModelKind, ModelSpec, MultiIndex, Role, VelocityFeedback};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryDoc {
    pub offset: Vec<i64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayDoc {
    /// Optional inside a model document, where the model's `dim` applies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    pub entries: Vec<EntryDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ArraySource {
    Inline(ArrayDoc),
    File { file: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDoc {
    pub kind: String,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity_feedback: Option<String>,
    /// `false` skips the sign, sum and symmetry assumptions.
    #[serde(default = "yes", skip_serializing_if = "is_true")]
    pub checked: bool,
    pub arrays: BTreeMap<String, ArraySource>,
}

fn yes() -> bool {
    true
}

fn is_true(b: &bool) -> bool {
    *b
}

impl ArrayDoc {
    pub fn from_array(a: &LocalArray) -> Self {
        ArrayDoc {
            dim: Some(a.dim()),
            entries: a
                .entries()
                .iter()
                .map(|(k, v)| EntryDoc {
                    offset: k.coords().to_vec(),
                    value: *v,
                })
                .collect(),
        }
    }

    /// Builds the array, taking the dimension from the document or, failing
    /// that, from `dim`.
    pub fn to_array(&self, dim: Option<usize>) -> Result<LocalArray> {
        let d = match (self.dim, dim) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::Format(format!("array has dim {a} but the model has dim {b}")))
            }
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => return Err(Error::Format("array document needs a dim".into())),
        };
        if d == 0 {
            return Err(Error::Format("dim must be at least 1".into()));
        }
        for e in &self.entries {
            if e.offset.len() != d {
                return Err(Error::Format(format!(
                    "offset {:?} does not have {d} coordinates",
                    e.offset
                )));
            }
        }
        let entries = self
            .entries
            .iter()
            .map(|e| (MultiIndex::new(e.offset.clone()), e.value));
        Ok(LocalArray::new(d, entries)?)
    }
}

pub fn role_from_name(s: &str) -> Option<Role> {
    Role::ALL.into_iter().find(|r| r.to_string() == s)
}

fn velocity_name(v: VelocityFeedback) -> &'static str {
    match v {
        VelocityFeedback::Relative => "relative",
        VelocityFeedback::Absolute => "absolute",
    }
}

impl ModelDoc {
    pub fn from_model(model: &ModelSpec) -> Self {
        ModelDoc {
            kind: model.kind().name().to_string(),
            dim: model.dim(),
            velocity_feedback: model
                .kind()
                .is_vehicular()
                .then(|| velocity_name(model.velocity_feedback()).to_string()),
            checked: model.is_checked(),
            arrays: model
                .used_arrays()
                .map(|(r, a)| {
                    let mut doc = ArrayDoc::from_array(a);
                    doc.dim = None;
                    (r.to_string(), ArraySource::Inline(doc))
                })
                .collect(),
        }
    }

    /// Builds the model. Array file paths are resolved against `base`.
    pub fn to_model(&self, base: &Path) -> Result<ModelSpec> {
        let kind = ModelKind::from_name(&self.kind).ok_or_else(|| {
            let known: Vec<&str> = ModelKind::ALL.iter().map(|k| k.name()).collect();
            Error::Format(format!("unknown kind {:?}, expected one of {known:?}", self.kind))
        })?;
        let mut ops = Operators::default();
        for (name, source) in &self.arrays {
            let role = role_from_name(name)
                .ok_or_else(|| Error::Format(format!("unknown array {name:?}, expected A, B, C, F or G")))?;
            if !kind.required().contains(&role) {
                return Err(Error::Format(format!("array {name} is not used by {}", kind.name())));
            }
            let array = match source {
                ArraySource::Inline(doc) => doc.to_array(Some(self.dim))?,
                ArraySource::File { file } => load_array(&base.join(file))?.to_array(Some(self.dim))?,
            };
            ops.set(role, array);
        }
        let velocity = match self.velocity_feedback.as_deref() {
            None => None,
            Some("relative") => Some(VelocityFeedback::Relative),
            Some("absolute") => Some(VelocityFeedback::Absolute),
            Some(other) => {
                return Err(Error::Format(format!(
                    "velocity_feedback must be \"relative\" or \"absolute\", got {other:?}"
                )))
            }
        };
        if self.checked {
            Ok(ModelSpec::from_parts(kind, ops, velocity)?)
        } else {
            Ok(ModelSpec::unchecked(kind, ops)?)
        }
    }
}

pub fn load_array(path: &Path) -> Result<ArrayDoc> {
    parse(path, &read(path)?)
}

pub fn load_model(path: &Path) -> Result<ModelSpec> {
    let doc: ModelDoc = parse(path, &read(path)?)?;
    doc.to_model(path.parent().unwrap_or(Path::new(".")))
}

pub fn model_to_toml(model: &ModelSpec) -> String {
    toml::to_string(&ModelDoc::from_model(model)).expect("model documents serialize")
}

pub fn array_to_toml(array: &LocalArray) -> String {
    toml::to_string(&ArrayDoc::from_array(array)).expect("array documents serialize")
}

pub(crate) fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn parse<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<T> {
    toml::from_str(text).map_err(|source| Error::Toml {
        path: path.to_path_buf(),
        source,
    })
}
