//! Online handwriting analysis for fatigue studies.
//!
//! The crate covers the whole pipeline: a text format for pen-tablet
//! recordings ([`ink`]), kinematic, pressure and entropy features
//! ([`features`]), paired Wilcoxon testing across assessment sets
//! ([`stats`]), the study protocol and recovery summaries ([`protocol`]),
//! a deterministic synthetic-ink generator ([`synth`]) and table rendering
//! ([`report`]).

pub mod error;
pub mod features;
pub mod ink;
pub mod protocol;
pub mod report;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
