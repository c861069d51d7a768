use std::collections::BTreeMap;

use serde::Serialize;

/// Equal-width buckets over [lo, hi]; the top bucket is closed. Values
/// above `hi` land in `overflow`, values below `lo` in `underflow`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<usize>,
    pub underflow: usize,
    pub overflow: usize,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, buckets: usize) -> Self {
        Histogram {
            lo,
            hi,
            counts: vec![0; buckets],
            underflow: 0,
            overflow: 0,
        }
    }

    /// Ten buckets over [0, 1].
    pub fn unit() -> Self {
        Self::new(0.0, 1.0, 10)
    }

    pub fn add(&mut self, value: f64) {
        if value < self.lo {
            self.underflow += 1;
        } else if value > self.hi {
            self.overflow += 1;
        } else {
            let n = self.counts.len();
            let idx = ((value - self.lo) / (self.hi - self.lo) * n as f64) as usize;
            self.counts[idx.min(n - 1)] += 1;
        }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum::<usize>() + self.underflow + self.overflow
    }
}

/// Counts and metric distribution for one filtering stage.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterReport {
    pub stage: String,
    pub input_count: usize,
    pub kept: usize,
    pub dropped: usize,
    /// Kept records the stage did not evaluate (other scenarios).
    pub passthrough: usize,
    pub drop_reasons: BTreeMap<String, usize>,
    pub metric_histograms: BTreeMap<String, Histogram>,
}

impl FilterReport {
    pub fn new(stage: &str, input_count: usize) -> Self {
        FilterReport {
            stage: stage.to_string(),
            input_count,
            kept: 0,
            dropped: 0,
            passthrough: 0,
            drop_reasons: BTreeMap::new(),
            metric_histograms: BTreeMap::new(),
        }
    }

    pub fn record_drop(&mut self, reason: &str) {
        self.dropped += 1;
        *self.drop_reasons.entry(reason.to_string()).or_insert(0) += 1;
    }

    pub fn record_metric(&mut self, metric: &str, value: f64) {
        self.metric_histograms
            .entry(metric.to_string())
            .or_insert_with(Histogram::unit)
            .add(value);
    }

    /// kept + dropped = input and the reasons account for every drop.
    pub fn is_consistent(&self) -> bool {
        self.kept + self.dropped == self.input_count
            && self.drop_reasons.values().sum::<usize>() == self.dropped
            && self.passthrough <= self.kept
    }
}
