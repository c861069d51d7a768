//! Near-duplicate clustering: MinHash signatures and LSH banding propose
//! candidate pairs, exact shingle Jaccard decides merges.

use std::collections::{HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{FilterReport, StageOutput};
use crate::error::{Error, Result};
use crate::manifest::{FilterVerdict, SampleRecord};
use crate::metrics::{jaccard_sorted, normalize, shingles};

pub const STAGE: &str = "cluster";
pub const REASON: &str = "near-duplicate";
pub const NUM_PERM: usize = 128;
pub const MINHASH_SEED: u64 = 0x5EED;

/// Acceptable probability that banding misses a pair sitting exactly at
/// the Jaccard threshold.
const TARGET_MISS: f64 = 1e-6;

const MERSENNE_61: u64 = (1 << 61) - 1;

/// Cluster membership of one record; cluster ids are dense from 0 in
/// order of each cluster's earliest record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClusterAssignment {
    pub sample_id: String,
    pub cluster_id: usize,
    pub representative: bool,
}

/// LSH banding: `bands × rows` must equal the signature length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Banding {
    pub bands: usize,
    pub rows: usize,
}

impl Banding {
    /// Widest bands whose miss probability at `threshold` stays under
    /// 1e-6: P(miss) = (1 − t^rows)^bands.
    pub fn for_threshold(threshold: f64) -> Self {
        let mut best = Banding { bands: NUM_PERM, rows: 1 };
        let mut rows = 1;
        while rows <= NUM_PERM {
            let bands = NUM_PERM / rows;
            let miss = (1.0 - threshold.powi(rows as i32)).powi(bands as i32);
            if miss <= TARGET_MISS {
                best = Banding { bands, rows };
            }
            rows *= 2;
        }
        best
    }

    /// Probability a pair with Jaccard `j` shares at least one band.
    pub fn candidate_probability(&self, j: f64) -> f64 {
        1.0 - (1.0 - j.powi(self.rows as i32)).powi(self.bands as i32)
    }
}

/// Seeded universal hash family h(x) = (a·x + b) mod (2^61 − 1).
pub struct MinHasher {
    coeffs: Vec<(u64, u64)>,
}

impl MinHasher {
    pub fn new(num_perm: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs = (0..num_perm)
            .map(|_| (rng.gen_range(1..MERSENNE_61), rng.gen_range(0..MERSENNE_61)))
            .collect();
        MinHasher { coeffs }
    }

    pub fn signature<S: AsRef<str>>(&self, shingles: &[S]) -> Vec<u64> {
        let hashed: Vec<u64> = shingles.iter().map(|s| fnv1a(s.as_ref().as_bytes()) % MERSENNE_61).collect();
        self.coeffs
            .iter()
            .map(|&(a, b)| {
                hashed
                    .iter()
                    .map(|&x| ((u128::from(a) * u128::from(x) + u128::from(b)) % u128::from(MERSENNE_61)) as u64)
                    .min()
                    .unwrap_or(u64::MAX)
            })
            .collect()
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[x] != root {
            let next = self.parent[x];
            self.parent[x] = root;
            x = next;
        }
        root
    }

    /// The smaller index becomes the root, so roots are cluster minima.
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Connected components of the graph linking texts whose shingle Jaccard
/// is at least `threshold`. Returns the component root (its smallest
/// index) for every text.
pub fn cluster_roots(texts: &[&str], threshold: f64, shingle_n: usize, banding: Banding) -> Vec<usize> {
    let sets: Vec<Vec<String>> = texts
        .par_iter()
        .map(|t| shingles(t, shingle_n).into_iter().collect())
        .collect();
    let mut uf = UnionFind::new(texts.len());

    // Texts too short to shingle only match texts that normalize equal.
    let mut short: HashMap<String, usize> = HashMap::new();
    // Identical shingle sets have Jaccard 1 and merge without LSH.
    let mut by_set: HashMap<&[String], usize> = HashMap::new();
    let mut leaders = Vec::new();
    for (i, set) in sets.iter().enumerate() {
        if set.is_empty() {
            match short.get(&normalize(texts[i])) {
                Some(&first) => uf.union(first, i),
                None => {
                    short.insert(normalize(texts[i]), i);
                }
            }
            continue;
        }
        match by_set.get(set.as_slice()) {
            Some(&first) => uf.union(first, i),
            None => {
                by_set.insert(set.as_slice(), i);
                leaders.push(i);
            }
        }
    }

    let hasher = MinHasher::new(NUM_PERM, MINHASH_SEED);
    let signatures: Vec<Vec<u64>> = leaders
        .par_iter()
        .map(|&i| hasher.signature(&sets[i]))
        .collect();

    let mut candidates: HashSet<(usize, usize)> = HashSet::new();
    for band in 0..banding.bands {
        let mut buckets: HashMap<&[u64], Vec<usize>> = HashMap::new();
        for (slot, sig) in signatures.iter().enumerate() {
            let key = &sig[band * banding.rows..(band + 1) * banding.rows];
            buckets.entry(key).or_default().push(leaders[slot]);
        }
        for members in buckets.values().filter(|m| m.len() > 1) {
            for (x, &a) in members.iter().enumerate() {
                for &b in &members[x + 1..] {
                    candidates.insert((a.min(b), a.max(b)));
                }
            }
        }
    }

    let mut pairs: Vec<(usize, usize)> = candidates.into_iter().collect();
    pairs.sort_unstable();
    let similar: Vec<bool> = pairs
        .par_iter()
        .map(|&(a, b)| jaccard_sorted(&sets[a], &sets[b]) >= threshold)
        .collect();
    for (&(a, b), ok) in pairs.iter().zip(similar) {
        if ok {
            uf.union(a, b);
        }
    }
    (0..texts.len()).map(|i| uf.find(i)).collect()
}

/// Groups near-duplicate records and keeps the earliest of each group.
pub fn cluster_prune(
    records: Vec<SampleRecord>,
    threshold: f64,
    shingle_n: usize,
) -> Result<(StageOutput, Vec<ClusterAssignment>)> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::domain(format!(
            "cluster_prune: threshold {threshold} not in (0, 1]"
        )));
    }
    cluster_prune_with(records, threshold, shingle_n, Banding::for_threshold(threshold))
}

pub fn cluster_prune_with(
    records: Vec<SampleRecord>,
    threshold: f64,
    shingle_n: usize,
    banding: Banding,
) -> Result<(StageOutput, Vec<ClusterAssignment>)> {
    if shingle_n == 0 {
        return Err(Error::domain("cluster_prune: shingle_n must be >= 1"));
    }
    if banding.bands * banding.rows != NUM_PERM {
        return Err(Error::domain(format!(
            "cluster_prune: {}x{} banding does not cover {NUM_PERM} hashes",
            banding.bands, banding.rows
        )));
    }
    let texts: Vec<&str> = records.iter().map(|r| r.text.as_str()).collect();
    let roots = cluster_roots(&texts, threshold, shingle_n, banding);

    let mut cluster_of_root: HashMap<usize, usize> = HashMap::new();
    let mut assignments = Vec::with_capacity(records.len());
    for (i, &root) in roots.iter().enumerate() {
        let next = cluster_of_root.len();
        let cluster_id = *cluster_of_root.entry(root).or_insert(next);
        assignments.push(ClusterAssignment {
            sample_id: records[i].id.clone(),
            cluster_id,
            representative: root == i,
        });
    }

    // Similarity of each dropped record to the record that stands for it.
    let to_rep: Vec<Option<f64>> = roots
        .par_iter()
        .enumerate()
        .map(|(i, &root)| {
            (root != i).then(|| {
                let a: Vec<String> = shingles(texts[i], shingle_n).into_iter().collect();
                let b: Vec<String> = shingles(texts[root], shingle_n).into_iter().collect();
                jaccard_sorted(&a, &b)
            })
        })
        .collect();

    let mut report = FilterReport::new(STAGE, records.len());
    let mut out = StageOutput::default();
    for (mut record, similarity) in records.into_iter().zip(to_rep) {
        match similarity {
            None => {
                report.kept += 1;
                out.kept.push(record);
            }
            Some(j) => {
                report.record_drop(REASON);
                report.record_metric("jaccard", j);
                record.verdict = Some(FilterVerdict::new(false, STAGE, "jaccard", Some(j)));
                out.dropped.push(record);
            }
        }
    }
    out.report = report;
    Ok((out, assignments))
}
