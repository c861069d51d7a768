//! Multimodal sample preparation: image tiling, token budgeting, audio
//! features, video frame schedules, text metrics and manifest curation.

pub mod audio;
pub mod cli;
pub mod config;
pub mod curation;
pub mod error;
pub mod image;
pub mod layout;
pub mod manifest;
pub mod metrics;
pub mod video;

pub use config::{Normalization, PipelineConfig};
pub use error::{Error, Result};
pub use manifest::{FilterVerdict, Language, MediaKind, MediaRef, SampleRecord, Scenario};
