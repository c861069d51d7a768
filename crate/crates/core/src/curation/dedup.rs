use std::collections::HashSet;

use rayon::prelude::*;

use super::{FilterReport, StageOutput};
use crate::config::Normalization;
use crate::manifest::{FilterVerdict, SampleRecord};
use crate::metrics::normalize_with;

pub const STAGE: &str = "dedup";
pub const REASON: &str = "exact-duplicate";

/// Keeps the first record for each normalized text; later copies are
/// dropped.
pub fn dedup_exact(records: Vec<SampleRecord>, mode: Normalization) -> StageOutput {
    let keys: Vec<String> = records
        .par_iter()
        .map(|r| normalize_with(&r.text, mode))
        .collect();
    let mut report = FilterReport::new(STAGE, records.len());
    let mut seen = HashSet::with_capacity(records.len());
    let mut out = StageOutput::default();
    for (mut record, key) in records.into_iter().zip(keys) {
        if seen.insert(key) {
            report.kept += 1;
            out.kept.push(record);
        } else {
            report.record_drop(REASON);
            record.verdict = Some(FilterVerdict::new(false, STAGE, REASON, Some(1.0)));
            out.dropped.push(record);
        }
    }
    out.report = report;
    out
}
