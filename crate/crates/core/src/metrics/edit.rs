use serde::Serialize;

use super::normalize::normalize;
use crate::error::{Error, Result};

/// Decomposition of a minimum edit alignment between reference and hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EditSummary {
    pub substitutions: usize,
    pub insertions: usize,
    pub deletions: usize,
    pub ref_len: usize,
    pub rate: f64,
}

impl EditSummary {
    pub fn edits(&self) -> usize {
        self.substitutions + self.insertions + self.deletions
    }
}

/// Counts of each edit kind in one optimal alignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EditCounts {
    pub substitutions: usize,
    pub insertions: usize,
    pub deletions: usize,
}

impl EditCounts {
    pub fn total(&self) -> usize {
        self.substitutions + self.insertions + self.deletions
    }
}

/// Unit-cost Levenshtein alignment of two token sequences.
///
/// When several alignments are optimal the backtrace prefers, at every step,
/// a diagonal move (match or substitution), then a deletion, then an
/// insertion, so the decomposition is deterministic.
pub fn align<T: PartialEq>(reference: &[T], hypothesis: &[T]) -> EditCounts {
    let n = reference.len();
    let m = hypothesis.len();
    let width = m + 1;
    let mut cost = vec![0u32; (n + 1) * width];
    for (j, c) in cost[..width].iter_mut().enumerate() {
        *c = j as u32;
    }
    for i in 1..=n {
        cost[i * width] = i as u32;
        for j in 1..=m {
            let diag = cost[(i - 1) * width + j - 1]
                + u32::from(reference[i - 1] != hypothesis[j - 1]);
            let del = cost[(i - 1) * width + j] + 1;
            let ins = cost[i * width + j - 1] + 1;
            cost[i * width + j] = diag.min(del).min(ins);
        }
    }

    let mut counts = EditCounts::default();
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = cost[i * width + j];
        if i > 0 && j > 0 {
            let mismatch = reference[i - 1] != hypothesis[j - 1];
            if cost[(i - 1) * width + j - 1] + u32::from(mismatch) == here {
                if mismatch {
                    counts.substitutions += 1;
                }
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && cost[(i - 1) * width + j] + 1 == here {
            counts.deletions += 1;
            i -= 1;
        } else {
            counts.insertions += 1;
            j -= 1;
        }
    }
    counts
}

fn summarize(counts: EditCounts, ref_len: usize) -> EditSummary {
    EditSummary {
        substitutions: counts.substitutions,
        insertions: counts.insertions,
        deletions: counts.deletions,
        ref_len,
        rate: counts.total() as f64 / ref_len as f64,
    }
}

/// Word error rate over whitespace tokens of the normalized texts.
pub fn wer(reference: &str, hypothesis: &str) -> Result<EditSummary> {
    let r = normalize(reference);
    let h = normalize(hypothesis);
    let r_tokens: Vec<&str> = r.split_whitespace().collect();
    let h_tokens: Vec<&str> = h.split_whitespace().collect();
    if r_tokens.is_empty() {
        return Err(Error::domain("wer: reference has no tokens"));
    }
    Ok(summarize(align(&r_tokens, &h_tokens), r_tokens.len()))
}

/// Character error rate over Unicode scalar values, whitespace removed.
pub fn cer(reference: &str, hypothesis: &str) -> Result<EditSummary> {
    let chars = |s: &str| -> Vec<char> {
        normalize(s).chars().filter(|c| !c.is_whitespace()).collect()
    };
    let r = chars(reference);
    let h = chars(hypothesis);
    if r.is_empty() {
        return Err(Error::domain("cer: reference is empty after normalization"));
    }
    Ok(summarize(align(&r, &h), r.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_is_zero() {
        let s = wer("a b c", "a b c").unwrap();
        assert_eq!(s.edits(), 0);
        assert_eq!(s.rate, 0.0);
    }

    #[test]
    fn one_sub_one_ins() {
        let s = wer("a b c", "a x c d").unwrap();
        assert_eq!((s.substitutions, s.insertions, s.deletions), (1, 1, 0));
        assert!((s.rate - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn empty_hypothesis_deletes_everything() {
        let s = wer("a b c", "").unwrap();
        assert_eq!(s.deletions, 3);
        assert_eq!(s.rate, 1.0);
    }

    #[test]
    fn empty_reference_is_domain_error() {
        assert!(wer("   ", "a").is_err());
        assert!(cer("", "a").is_err());
    }

    #[test]
    fn cer_single_substitution_in_chinese() {
        let s = cer("今天天气", "今天天汽").unwrap();
        assert_eq!(s.substitutions, 1);
        assert_eq!(s.rate, 0.25);
    }

    #[test]
    fn cer_insertion() {
        let s = cer("abc", "abcd").unwrap();
        assert_eq!(s.insertions, 1);
        assert!((s.rate - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(cer("今天 天气", "今天天气").unwrap().rate, 0.0);
    }

    #[test]
    fn ties_prefer_substitution() {
        // "a b" -> "b a": two substitutions and one delete+insert pair are
        // both cost 2; the diagonal preference picks substitutions.
        let c = align(&["a", "b"], &["b", "a"]);
        assert_eq!(c, EditCounts { substitutions: 2, insertions: 0, deletions: 0 });
    }

    #[test]
    fn normalization_applies() {
        assert_eq!(wer("Hello   World", "hello world").unwrap().rate, 0.0);
    }
}
