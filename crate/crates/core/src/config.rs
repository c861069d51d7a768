use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How text is canonicalized before exact-duplicate comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// Byte-exact comparison.
    None,
    /// Collapse whitespace runs and trim.
    Whitespace,
    /// NFC, lowercase, whitespace collapse and full-width digit folding.
    #[default]
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Records whose WER/CER is strictly greater than this are dropped.
    pub wer_threshold: f64,
    pub s2tt_similarity_threshold: f64,
    pub dedup_normalization: Normalization,
    pub cluster_jaccard_threshold: f64,
    /// Character shingle width used by near-duplicate clustering.
    pub shingle_n: usize,
    pub max_slices: u32,
    pub cell_size: u32,
    pub video_fps: f64,
    pub video_frame_cap: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            wer_threshold: 0.3,
            s2tt_similarity_threshold: 0.5,
            dedup_normalization: Normalization::Full,
            cluster_jaccard_threshold: 0.8,
            shingle_n: 3,
            max_slices: 9,
            cell_size: 448,
            video_fps: 1.0,
            video_frame_cap: 128,
        }
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: PipelineConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.wer_threshold > 0.0 && self.wer_threshold <= 1.0) {
            problems.push(format!("wer_threshold {} not in (0, 1]", self.wer_threshold));
        }
        if !(0.0..=1.0).contains(&self.s2tt_similarity_threshold) {
            problems.push(format!(
                "s2tt_similarity_threshold {} not in [0, 1]",
                self.s2tt_similarity_threshold
            ));
        }
        if !(self.cluster_jaccard_threshold > 0.0 && self.cluster_jaccard_threshold <= 1.0) {
            problems.push(format!(
                "cluster_jaccard_threshold {} not in (0, 1]",
                self.cluster_jaccard_threshold
            ));
        }
        if self.shingle_n == 0 {
            problems.push("shingle_n must be >= 1".to_string());
        }
        if !(1..=9).contains(&self.max_slices) {
            problems.push(format!("max_slices {} not in 1..=9", self.max_slices));
        }
        if self.cell_size == 0 {
            problems.push("cell_size must be > 0".to_string());
        }
        if !(self.video_fps > 0.0 && self.video_fps.is_finite()) {
            problems.push(format!("video_fps {} must be > 0", self.video_fps));
        }
        if self.video_frame_cap == 0 {
            problems.push("video_frame_cap must be >= 1".to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }
}
