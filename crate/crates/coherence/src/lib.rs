//! File formats, experiment configs, presets and CSV output around
//! `coherence-core`. The `coherence` binary is a thin shell over this crate.

pub mod commands;
pub mod error;
pub mod experiment;
pub mod format;
pub mod table;

pub use error::{Error, Result};
