//! Independent oracles and fixture generators shared by the integration
//! test targets. Nothing here calls the code it is used to check.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};

use capypipe::manifest::{Language, MediaRef, SampleRecord, Scenario};
use capypipe::metrics::normalize;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Grid choice by floating-point enumeration of every factorization of the
/// candidate cell counts. Returns (rows, cols, thumbnail).
pub fn brute_force_plan(w: u32, h: u32, max_slices: u32, cell: u32) -> (u32, u32, bool) {
    let area = u64::from(w) * u64::from(h);
    let cell_area = u64::from(cell) * u64::from(cell);
    let ideal = area.div_ceil(cell_area).min(u64::from(max_slices)) as u32;
    if ideal == 1 {
        return (1, 1, false);
    }
    let aspect = f64::from(w) / f64::from(h);
    let mut best: Option<(f64, u32, u32)> = None;
    for count in [ideal - 1, ideal, ideal + 1] {
        if count < 1 || count > max_slices {
            continue;
        }
        for m in 1..=count {
            if count % m != 0 {
                continue;
            }
            let n = count / m;
            let score = -(aspect / (f64::from(n) / f64::from(m))).ln().abs();
            let better = match best {
                None => true,
                Some((s, bm, bn)) => {
                    if score > s + 1e-12 {
                        true
                    } else if (score - s).abs() <= 1e-12 {
                        (m * n, m) < (bm * bn, bm)
                    } else {
                        false
                    }
                }
            };
            if better {
                best = Some((score, m, n));
            }
        }
    }
    let (_, m, n) = best.expect("at least one candidate grid");
    (m, n, m * n > 1)
}

/// Minimum edit cost found by enumerating every monotone matching between
/// positions of `a` and `b`. A matching with k pairs, e of them equal,
/// costs (k − e) substitutions + (|a| − k) deletions + (|b| − k) insertions.
pub fn min_edits_by_matchings<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    fn walk<T: PartialEq>(a: &[T], b: &[T], i0: usize, j0: usize, k: usize, e: usize, best: &mut usize) {
        let cost = a.len() + b.len() - k - e;
        *best = (*best).min(cost);
        for i in i0..a.len() {
            for j in j0..b.len() {
                walk(a, b, i + 1, j + 1, k + 1, e + usize::from(a[i] == b[j]), best);
            }
        }
    }
    let mut best = usize::MAX;
    walk(a, b, 0, 0, 0, 0, &mut best);
    best
}

fn char_shingles(text: &str, n: usize) -> HashSet<String> {
    let chars: Vec<char> = normalize(text).chars().collect();
    if chars.len() < n {
        return HashSet::new();
    }
    chars.windows(n).map(|w| w.iter().collect()).collect()
}

/// Kept flags from all-pairs exact Jaccard: link i–j when J ≥ t (texts too
/// short to shingle link only to texts that normalize identically), keep the
/// smallest index of every connected component.
pub fn brute_force_cluster_keep(texts: &[String], threshold: f64, n: usize) -> Vec<bool> {
    let sets: Vec<HashSet<String>> = texts.iter().map(|t| char_shingles(t, n)).collect();
    let norms: Vec<String> = texts.iter().map(|t| normalize(t)).collect();
    let len = texts.len();
    let mut adj = vec![Vec::new(); len];
    for i in 0..len {
        for j in i + 1..len {
            let linked = if sets[i].is_empty() && sets[j].is_empty() {
                norms[i] == norms[j]
            } else {
                let inter = sets[i].intersection(&sets[j]).count();
                let union = sets[i].len() + sets[j].len() - inter;
                union > 0 && inter as f64 / union as f64 >= threshold
            };
            if linked {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    let mut component = vec![usize::MAX; len];
    for start in 0..len {
        if component[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        component[start] = start;
        while let Some(x) = stack.pop() {
            for &y in &adj[x] {
                if component[y] == usize::MAX {
                    component[y] = start;
                    stack.push(y);
                }
            }
        }
    }
    (0..len).map(|i| component[i] == i).collect()
}

const VOCAB: &[&str] = &[
    "the", "cat", "sat", "on", "mat", "dog", "ran", "far", "away", "from", "home", "blue", "sky",
    "over", "green", "hill", "river", "flows", "past", "old", "mill", "quick", "brown", "fox",
];

pub fn random_sentence(rng: &mut impl Rng, words: std::ops::RangeInclusive<usize>) -> String {
    let n = rng.gen_range(words);
    (0..n).map(|_| *VOCAB.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
}

/// Applies `edits` random character substitutions, insertions or deletions.
pub fn mutate(rng: &mut impl Rng, text: &str, edits: usize) -> String {
    let mut chars: Vec<char> = text.chars().collect();
    let alphabet: Vec<char> = "abcdefghijklmnopqrstuvwxyz ".chars().collect();
    for _ in 0..edits {
        let c = *alphabet.choose(rng).unwrap();
        match rng.gen_range(0..3) {
            0 if !chars.is_empty() => {
                let i = rng.gen_range(0..chars.len());
                chars[i] = c;
            }
            1 if !chars.is_empty() => {
                let i = rng.gen_range(0..chars.len());
                chars.remove(i);
            }
            _ => {
                let i = rng.gen_range(0..=chars.len());
                chars.insert(i, c);
            }
        }
    }
    chars.into_iter().collect()
}

/// Texts mixing fresh sentences, lightly and heavily edited copies, exact
/// copies and strings too short to shingle.
pub fn cluster_fixture(rng: &mut impl Rng, size: usize) -> Vec<String> {
    let mut texts: Vec<String> = Vec::with_capacity(size);
    for _ in 0..size {
        let roll = rng.gen_range(0..100);
        let text = if texts.is_empty() || roll < 30 {
            random_sentence(rng, 3..=10)
        } else if roll < 75 {
            let base = texts.choose(rng).unwrap().clone();
            let edits = rng.gen_range(0..=8);
            mutate(rng, &base, edits)
        } else if roll < 85 {
            texts.choose(rng).unwrap().clone()
        } else {
            ["a", "ab", "A", "b", ""].choose(rng).unwrap().to_string()
        };
        texts.push(text);
    }
    texts
}

fn words_with_errors(rng: &mut impl Rng, reference: &str, rate: f64) -> String {
    reference
        .split_whitespace()
        .map(|w| if rng.gen_bool(rate) { "noise".to_string() } else { w.to_string() })
        .collect::<Vec<_>>()
        .join(" ")
}

const ZH_CHARS: &[char] = &['今', '天', '气', '很', '好', '我', '们', '去', '公', '园', '散', '步', '学', '习'];

/// Deterministic synthetic manifest with every scenario, exact and near
/// duplicates, and hypotheses/translations on both sides of the default
/// thresholds.
pub fn synthetic_manifest(seed: u64, size: usize) -> Vec<SampleRecord> {
    let mut rng = rng(seed);
    let mut out: Vec<SampleRecord> = Vec::with_capacity(size);
    for i in 0..size {
        let id = format!("s{i:06}");
        let roll = rng.gen_range(0..100);
        let record = if roll < 8 && !out.is_empty() {
            let mut copy = out.choose(&mut rng).unwrap().clone();
            copy.id = id;
            if rng.gen_bool(0.5) {
                copy.text = mutate(&mut rng, &copy.text, 2);
            }
            copy
        } else if roll < 40 {
            let text = random_sentence(&mut rng, 5..=20);
            let rate = rng.gen_range(0.0..0.6);
            let hyp = words_with_errors(&mut rng, &text, rate);
            SampleRecord::new(id.clone(), Scenario::ASR, Language::ENG, text)
                .with_media(MediaRef::audio(format!("audio/{id}.wav"), rng.gen_range(1.0..20.0)))
                .with_hypothesis(hyp)
                .with_source(*["LibriTTS", "VCTK"].choose(&mut rng).unwrap())
        } else if roll < 60 {
            let len = rng.gen_range(6..30);
            let text: String = (0..len).map(|_| *ZH_CHARS.choose(&mut rng).unwrap()).collect();
            let hyp: String = text
                .chars()
                .map(|c| if rng.gen_bool(0.2) { *ZH_CHARS.choose(&mut rng).unwrap() } else { c })
                .collect();
            SampleRecord::new(id.clone(), Scenario::ASR, Language::ZH, text)
                .with_media(MediaRef::audio(format!("audio/{id}.wav"), rng.gen_range(1.0..20.0)))
                .with_hypothesis(hyp)
                .with_source(*["Aishell", "FreeST", "Zhvoice"].choose(&mut rng).unwrap())
        } else if roll < 75 {
            let text = random_sentence(&mut rng, 4..=16);
            let mt = if rng.gen_bool(0.7) { mutate(&mut rng, &text, 4) } else { random_sentence(&mut rng, 4..=16) };
            SampleRecord::new(id.clone(), Scenario::S2TT, Language::ZH_ENG, text)
                .with_media(MediaRef::audio(format!("audio/{id}.wav"), rng.gen_range(1.0..20.0)))
                .with_translation(mt)
                .with_source("CoVoST2")
        } else if roll < 90 {
            let (w, h) = (rng.gen_range(64..3000), rng.gen_range(64..3000));
            SampleRecord::new(id.clone(), Scenario::Caption, Language::ENG, random_sentence(&mut rng, 6..=18))
                .with_media(MediaRef::image(format!("img/{id}.ppm"), w, h))
                .with_source("captions")
        } else {
            SampleRecord::new(id.clone(), Scenario::QA, Language::ENG, random_sentence(&mut rng, 4..=12))
                .with_media(MediaRef::video(format!("video/{id}.mp4"), rng.gen_range(1.0..400.0)))
                .with_source("video-qa")
        };
        out.push(record);
    }
    out
}

/// Sorted set helper for readable assertion output.
pub fn sorted<T: Ord + Clone>(items: &[T]) -> BTreeSet<T> {
    items.iter().cloned().collect()
}

/// Canonical 44-byte-header PCM16 WAV, written field by field.
pub fn wav_bytes(samples: &[i16], channels: u16, rate: u32) -> Vec<u8> {
    let data_len = (samples.len() * 2) as u32;
    let mut b = Vec::with_capacity(44 + data_len as usize);
    b.extend_from_slice(b"RIFF");
    b.extend_from_slice(&(36 + data_len).to_le_bytes());
    b.extend_from_slice(b"WAVE");
    b.extend_from_slice(b"fmt ");
    b.extend_from_slice(&16u32.to_le_bytes());
    b.extend_from_slice(&1u16.to_le_bytes());
    b.extend_from_slice(&channels.to_le_bytes());
    b.extend_from_slice(&rate.to_le_bytes());
    b.extend_from_slice(&(rate * u32::from(channels) * 2).to_le_bytes());
    b.extend_from_slice(&(channels * 2).to_le_bytes());
    b.extend_from_slice(&16u16.to_le_bytes());
    b.extend_from_slice(b"data");
    b.extend_from_slice(&data_len.to_le_bytes());
    for s in samples {
        b.extend_from_slice(&s.to_le_bytes());
    }
    b
}

pub fn sine_i16(freq: f64, rate: u32, len: usize, amplitude: f64) -> Vec<i16> {
    (0..len)
        .map(|i| {
            let x = amplitude * (2.0 * std::f64::consts::PI * freq * i as f64 / f64::from(rate)).sin();
            (x * 32767.0).round() as i16
        })
        .collect()
}
