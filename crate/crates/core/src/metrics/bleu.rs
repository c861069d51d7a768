use std::collections::HashMap;
use std::hash::Hash;

use crate::error::{Error, Result};

/// Clipped n-gram match statistics aggregated over a corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BleuStats {
    pub matches: Vec<usize>,
    pub totals: Vec<usize>,
    pub ref_len: usize,
    pub hyp_len: usize,
}

impl BleuStats {
    fn new(max_n: usize) -> Self {
        BleuStats {
            matches: vec![0; max_n],
            totals: vec![0; max_n],
            ref_len: 0,
            hyp_len: 0,
        }
    }

    fn add<T: Eq + Hash>(&mut self, reference: &[T], hypothesis: &[T]) {
        self.ref_len += reference.len();
        self.hyp_len += hypothesis.len();
        for n in 1..=self.matches.len() {
            let ref_counts = ngram_counts(reference, n);
            let hyp_counts = ngram_counts(hypothesis, n);
            self.totals[n - 1] += hypothesis.len().saturating_sub(n - 1);
            self.matches[n - 1] += hyp_counts
                .iter()
                .map(|(g, &c)| c.min(ref_counts.get(g).copied().unwrap_or(0)))
                .sum::<usize>();
        }
    }

    /// Geometric mean of the precisions times the brevity penalty.
    pub fn score(&self) -> f64 {
        if self.hyp_len == 0 || self.matches.contains(&0) {
            return 0.0;
        }
        let max_n = self.matches.len() as f64;
        let log_precision: f64 = self
            .matches
            .iter()
            .zip(&self.totals)
            .map(|(&m, &t)| (m as f64 / t as f64).ln())
            .sum::<f64>()
            / max_n;
        let brevity = (1.0 - self.ref_len as f64 / self.hyp_len as f64).min(0.0);
        (log_precision + brevity).exp()
    }
}

fn ngram_counts<T: Eq + Hash>(tokens: &[T], n: usize) -> HashMap<&[T], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

pub fn bleu_stats<T: Eq + Hash>(
    references: &[Vec<T>],
    hypotheses: &[Vec<T>],
    max_n: usize,
) -> Result<BleuStats> {
    if references.len() != hypotheses.len() {
        return Err(Error::domain(format!(
            "bleu: {} references but {} hypotheses",
            references.len(),
            hypotheses.len()
        )));
    }
    if references.is_empty() {
        return Err(Error::domain("bleu: empty corpus"));
    }
    if max_n == 0 {
        return Err(Error::domain("bleu: max_n must be >= 1"));
    }
    let mut stats = BleuStats::new(max_n);
    for (r, h) in references.iter().zip(hypotheses) {
        stats.add(r, h);
    }
    Ok(stats)
}

/// Corpus BLEU with a single reference per hypothesis and no smoothing.
pub fn bleu<T: Eq + Hash>(
    references: &[Vec<T>],
    hypotheses: &[Vec<T>],
    max_n: usize,
) -> Result<f64> {
    Ok(bleu_stats(references, hypotheses, max_n)?.score())
}
