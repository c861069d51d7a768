use rayon::prelude::*;

use super::{FilterReport, StageOutput};
use crate::error::{Error, Result};
use crate::manifest::{FilterVerdict, SampleRecord, Scenario};
use crate::metrics::{cer, ngram_cosine, wer};

pub const ASR_STAGE: &str = "asr";
pub const S2TT_STAGE: &str = "s2tt";
pub const CONSISTENCY_STAGE: &str = "consistency";
/// Character n-gram width for translation similarity.
pub const SIMILARITY_N: usize = 3;

/// Result of checking a single record.
#[derive(Debug, Clone, PartialEq)]
pub enum Decision {
    /// Scenario not covered by this check; record passes unchanged.
    PassThrough,
    Keep { verdict: FilterVerdict },
    Drop { reason: &'static str, verdict: FilterVerdict },
}

impl Decision {
    fn metric(&self) -> Option<(&str, f64)> {
        let v = match self {
            Decision::PassThrough => return None,
            Decision::Keep { verdict } | Decision::Drop { verdict, .. } => verdict,
        };
        Some((v.metric_name.as_deref()?, v.metric_value?))
    }
}

/// Transcript consistency: WER for English, CER for Chinese; dropped only
/// when the rate is strictly greater than `threshold`.
pub fn asr_decision(record: &SampleRecord, threshold: f64) -> Decision {
    if record.scenario != Scenario::ASR {
        return Decision::PassThrough;
    }
    let (name, metric): (&str, fn(&str, &str) -> Result<_>) = if record.language.is_character_scored() {
        ("cer", cer)
    } else {
        ("wer", wer)
    };
    let Some(hyp) = &record.hypothesis else {
        return Decision::Drop {
            reason: "no-hypothesis",
            verdict: FilterVerdict::new(false, ASR_STAGE, name, None),
        };
    };
    match metric(&record.text, hyp) {
        Err(_) => Decision::Drop {
            reason: "empty-reference",
            verdict: FilterVerdict::new(false, ASR_STAGE, name, None),
        },
        Ok(summary) if summary.rate > threshold => Decision::Drop {
            reason: if name == "cer" { "cer-above-threshold" } else { "wer-above-threshold" },
            verdict: FilterVerdict::new(false, ASR_STAGE, name, Some(summary.rate)),
        },
        Ok(summary) => Decision::Keep {
            verdict: FilterVerdict::new(true, ASR_STAGE, name, Some(summary.rate)),
        },
    }
}

/// Translation consistency: character-trigram cosine between the reference
/// translation (`text`) and the machine translation; kept when at or above
/// `threshold`.
pub fn s2tt_decision(record: &SampleRecord, threshold: f64) -> Decision {
    if record.scenario != Scenario::S2TT {
        return Decision::PassThrough;
    }
    let Some(mt) = &record.translation else {
        return Decision::Drop {
            reason: "no-translation",
            verdict: FilterVerdict::new(false, S2TT_STAGE, "similarity", None),
        };
    };
    match ngram_cosine(&record.text, mt, SIMILARITY_N) {
        Err(_) => Decision::Drop {
            reason: "empty-text",
            verdict: FilterVerdict::new(false, S2TT_STAGE, "similarity", None),
        },
        Ok(sim) if sim >= threshold => Decision::Keep {
            verdict: FilterVerdict::new(true, S2TT_STAGE, "similarity", Some(sim)),
        },
        Ok(sim) => Decision::Drop {
            reason: "similarity-below-threshold",
            verdict: FilterVerdict::new(false, S2TT_STAGE, "similarity", Some(sim)),
        },
    }
}

fn check_unit(name: &str, value: f64, lo_open: bool) -> Result<()> {
    let ok = if lo_open { value > 0.0 } else { value >= 0.0 } && value <= 1.0;
    if ok {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} threshold {value} out of range")))
    }
}

/// Applies `decide` to every record (in parallel) and folds the outcomes
/// back in input order.
fn apply<F>(stage: &str, records: Vec<SampleRecord>, decide: F) -> StageOutput
where
    F: Fn(&SampleRecord) -> Decision + Sync + Send,
{
    let decisions: Vec<Decision> = records.par_iter().map(decide).collect();
    let mut report = FilterReport::new(stage, records.len());
    let mut out = StageOutput::default();
    for (mut record, decision) in records.into_iter().zip(decisions) {
        if let Some((name, value)) = decision.metric() {
            report.record_metric(name, value);
        }
        match decision {
            Decision::PassThrough => {
                report.kept += 1;
                report.passthrough += 1;
                out.kept.push(record);
            }
            Decision::Keep { verdict } => {
                report.kept += 1;
                record.verdict = Some(verdict);
                out.kept.push(record);
            }
            Decision::Drop { reason, verdict } => {
                report.record_drop(reason);
                record.verdict = Some(verdict);
                out.dropped.push(record);
            }
        }
    }
    out.report = report;
    out
}

pub fn filter_asr(records: Vec<SampleRecord>, threshold: f64) -> Result<StageOutput> {
    check_unit("wer", threshold, true)?;
    Ok(apply(ASR_STAGE, records, |r| asr_decision(r, threshold)))
}

pub fn filter_s2tt(records: Vec<SampleRecord>, threshold: f64) -> Result<StageOutput> {
    check_unit("similarity", threshold, false)?;
    Ok(apply(S2TT_STAGE, records, |r| s2tt_decision(r, threshold)))
}

/// ASR records through the transcript check, S2TT records through the
/// translation check, everything else untouched; one combined report.
pub fn filter_consistency(
    records: Vec<SampleRecord>,
    wer_threshold: f64,
    similarity_threshold: f64,
) -> Result<StageOutput> {
    check_unit("wer", wer_threshold, true)?;
    check_unit("similarity", similarity_threshold, false)?;
    Ok(apply(CONSISTENCY_STAGE, records, |r| match r.scenario {
        Scenario::ASR => asr_decision(r, wer_threshold),
        Scenario::S2TT => s2tt_decision(r, similarity_threshold),
        _ => Decision::PassThrough,
    }))
}
