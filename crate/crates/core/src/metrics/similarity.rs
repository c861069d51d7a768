use std::collections::{BTreeSet, HashMap};

use super::normalize::normalize;
use crate::error::{Error, Result};

const BEGIN: char = '\u{2}';
const END: char = '\u{3}';

/// Character n-gram term frequencies of `^text$`, where `^`/`$` are
/// distinct boundary markers.
pub fn padded_ngram_counts(text: &str, n: usize) -> HashMap<String, usize> {
    let mut chars = vec![BEGIN];
    chars.extend(normalize(text).chars());
    chars.push(END);
    let mut counts = HashMap::new();
    if chars.len() >= n {
        for window in chars.windows(n) {
            *counts.entry(window.iter().collect::<String>()).or_insert(0) += 1;
        }
    }
    counts
}

/// Cosine similarity of boundary-padded character n-gram frequency vectors.
pub fn ngram_cosine(a: &str, b: &str, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("ngram_cosine: n must be >= 1"));
    }
    let va = padded_ngram_counts(a, n);
    let vb = padded_ngram_counts(b, n);
    if va.is_empty() && vb.is_empty() {
        return Err(Error::domain(format!(
            "ngram_cosine: both inputs shorter than n={n} after padding"
        )));
    }
    if va.is_empty() || vb.is_empty() {
        return Ok(0.0);
    }
    let (small, large) = if va.len() <= vb.len() { (&va, &vb) } else { (&vb, &va) };
    let dot: usize = small
        .iter()
        .filter_map(|(g, &c)| large.get(g).map(|&d| c * d))
        .sum();
    let norm = |v: &HashMap<String, usize>| v.values().map(|&c| (c * c) as u128).sum::<u128>();
    // one sqrt of the product keeps identical vectors at exactly 1.0
    let cos = dot as f64 / ((norm(&va) * norm(&vb)) as f64).sqrt();
    Ok(cos.clamp(0.0, 1.0))
}

/// Set of character n-grams (no boundary padding) of the normalized text.
pub fn shingles(text: &str, n: usize) -> BTreeSet<String> {
    let chars: Vec<char> = normalize(text).chars().collect();
    if n == 0 || chars.len() < n {
        return BTreeSet::new();
    }
    chars.windows(n).map(|w| w.iter().collect()).collect()
}

/// Jaccard index of two sorted, deduplicated shingle lists.
pub fn jaccard_sorted<T: Ord>(a: &[T], b: &[T]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let (mut i, mut j, mut inter) = (0, 0, 0usize);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                inter += 1;
                i += 1;
                j += 1;
            }
        }
    }
    inter as f64 / (a.len() + b.len() - inter) as f64
}

/// |A∩B| / |A∪B| over character n-gram sets.
///
/// Two empty sets compare as 1.0 only when the normalized inputs are equal.
pub fn jaccard_shingles(a: &str, b: &str, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("jaccard_shingles: n must be >= 1"));
    }
    let sa: Vec<String> = shingles(a, n).into_iter().collect();
    let sb: Vec<String> = shingles(b, n).into_iter().collect();
    if sa.is_empty() && sb.is_empty() {
        return if normalize(a) == normalize(b) {
            Ok(1.0)
        } else {
            Err(Error::domain(format!(
                "jaccard_shingles: both inputs shorter than n={n}"
            )))
        };
    }
    Ok(jaccard_sorted(&sa, &sb))
}
