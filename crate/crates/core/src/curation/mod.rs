//! Staged filtering over manifests: exact dedup, near-duplicate
//! clustering, then transcript/translation consistency checks.

mod cluster;
mod dedup;
mod filters;
mod report;
mod stats;

pub use cluster::{
    cluster_prune, cluster_prune_with, cluster_roots, Banding, ClusterAssignment, MinHasher,
    MINHASH_SEED, NUM_PERM,
};
pub use dedup::dedup_exact;
pub use filters::{
    asr_decision, filter_asr, filter_consistency, filter_s2tt, s2tt_decision, Decision,
    SIMILARITY_N,
};
pub use report::{FilterReport, Histogram};
pub use stats::{render_table, stats, StatsRow};

use crate::config::PipelineConfig;
use crate::error::Error;
use crate::manifest::SampleRecord;

/// Records a stage kept and dropped, both in input order.
#[derive(Debug, Clone)]
pub struct StageOutput {
    pub kept: Vec<SampleRecord>,
    pub dropped: Vec<SampleRecord>,
    pub report: FilterReport,
}

impl Default for StageOutput {
    fn default() -> Self {
        StageOutput {
            kept: Vec::new(),
            dropped: Vec::new(),
            report: FilterReport::new("", 0),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub kept: Vec<SampleRecord>,
    /// Dropped records grouped by stage, each group in input order.
    pub dropped: Vec<SampleRecord>,
    pub reports: Vec<FilterReport>,
}

/// A stage failed; reports of the stages that completed are attached.
#[derive(Debug)]
pub struct PipelineFailure {
    pub error: Error,
    pub reports: Vec<FilterReport>,
}

impl std::fmt::Display for PipelineFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (after {} completed stages)", self.error, self.reports.len())
    }
}

impl std::error::Error for PipelineFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

/// dedup → cluster → consistency.
pub fn run_pipeline(
    records: Vec<SampleRecord>,
    config: &PipelineConfig,
) -> Result<PipelineOutput, PipelineFailure> {
    let mut reports = Vec::with_capacity(3);
    if let Err(error) = config.validate() {
        return Err(PipelineFailure { error, reports });
    }
    let mut dropped = Vec::new();

    let dedup = dedup_exact(records, config.dedup_normalization);
    reports.push(dedup.report);
    dropped.extend(dedup.dropped);

    let clustered = match cluster_prune(dedup.kept, config.cluster_jaccard_threshold, config.shingle_n) {
        Ok((out, _)) => out,
        Err(error) => return Err(PipelineFailure { error, reports }),
    };
    reports.push(clustered.report);
    dropped.extend(clustered.dropped);

    let checked = match filter_consistency(
        clustered.kept,
        config.wer_threshold,
        config.s2tt_similarity_threshold,
    ) {
        Ok(out) => out,
        Err(error) => return Err(PipelineFailure { error, reports }),
    };
    reports.push(checked.report);
    dropped.extend(checked.dropped);

    Ok(PipelineOutput { kept: checked.kept, dropped, reports })
}
