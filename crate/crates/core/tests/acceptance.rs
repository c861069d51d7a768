//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any failed.

mod support;

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use capypipe::audio::{decode_wav, log_mel, profile, resample_16k};
use capypipe::curation::{cluster_prune, filter_asr};
use capypipe::image::{plan_tiles, EmbeddingGrid};
use capypipe::layout::compress_tokens;
use capypipe::manifest::{write_manifest, Language, MediaRef, SampleRecord, Scenario};
use capypipe::metrics::{bleu, cer, wer};
use capypipe::video::schedule;
use rand::Rng;
use rustfft::{num_complex::Complex, FftPlanner};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn within(limit: Duration, elapsed: Duration, what: &str) -> Result<(), String> {
    if elapsed < limit {
        Ok(())
    } else {
        Err(format!("{what} took {elapsed:?}, limit {limit:?}"))
    }
}

fn audio_token_rate() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let start = Instant::now();
    let mut got = Vec::new();
    for (seconds, expected) in [(1usize, 25usize), (10, 250)] {
        let path = dir.path().join(format!("{seconds}s.wav"));
        let samples = support::sine_i16(220.0, 16_000, 16_000 * seconds, 0.3);
        fs::write(&path, support::wav_bytes(&samples, 1, 16_000)).map_err(|e| e.to_string())?;
        let p = profile(&path).map_err(|e| e.to_string())?;
        ensure!(p.n_tokens == expected, "{seconds} s gave {} tokens, expected {expected}", p.n_tokens);
        got.push(p.n_tokens);
    }
    within(Duration::from_secs(1), start.elapsed(), "profiling")?;
    Ok(format!("1 s -> {}, 10 s -> {} tokens in {:?}", got[0], got[1], start.elapsed()))
}

fn visual_compression() -> Outcome {
    for dim in [1usize, 8, 64] {
        let grid = EmbeddingGrid::from_fn(32, 32, dim, |r, c, d| ((r * 131 + c * 17 + d * 7) % 97) as f32 * 0.25)
            .map_err(|e| e.to_string())?;
        let out = compress_tokens(&grid).map_err(|e| e.to_string())?;
        ensure!(
            (out.rows(), out.cols(), out.dim()) == (16, 16, dim),
            "d={dim}: got {}x{}x{}",
            out.rows(),
            out.cols(),
            out.dim()
        );
        ensure!(out.rows() * out.cols() == 256, "token count");
        for r in 0..16 {
            for c in 0..16 {
                for d in 0..dim {
                    let mean = (grid.get(2 * r, 2 * c, d)
                        + grid.get(2 * r, 2 * c + 1, d)
                        + grid.get(2 * r + 1, 2 * c, d)
                        + grid.get(2 * r + 1, 2 * c + 1, d)) as f64
                        / 4.0;
                    let v = f64::from(out.get(r, c, d));
                    ensure!((v - mean).abs() < 1e-5, "d={dim} ({r},{c},{d}): {v} vs block mean {mean}");
                }
            }
        }
    }
    Ok("32x32xd -> 16x16xd (1024 -> 256) for d in {1, 8, 64}".into())
}

fn tiling_regimes() -> Outcome {
    let p = plan_tiles(1344, 1344, 9, 448).map_err(|e| e.to_string())?;
    ensure!((p.grid_rows, p.grid_cols, p.thumbnail) == (3, 3, true), "1344x1344 gave {p:?}");
    let mut rng = support::rng(3);
    for _ in 0..200 {
        let w = rng.gen_range(1..=448 * 4);
        let h = rng.gen_range(1..=(448 * 448 / w).max(1));
        if w * h > 448 * 448 {
            continue;
        }
        let p = plan_tiles(w, h, 9, 448).map_err(|e| e.to_string())?;
        ensure!(p.slices() == 1 && !p.thumbnail, "{w}x{h} (area <= 448^2) was split: {p:?}");
    }
    let start = Instant::now();
    let mut matched = 0;
    for _ in 0..1000 {
        let w = rng.gen_range(1..=4096);
        let h = rng.gen_range(1..=4096);
        let max = rng.gen_range(1..=9);
        let p = plan_tiles(w, h, max, 448).map_err(|e| e.to_string())?;
        let oracle = support::brute_force_plan(w, h, max, 448);
        ensure!(
            (p.grid_rows, p.grid_cols, p.thumbnail) == oracle,
            "({w}, {h}, max {max}): plan {}x{} thumb {} vs brute force {oracle:?}",
            p.grid_rows,
            p.grid_cols,
            p.thumbnail
        );
        matched += 1;
    }
    within(Duration::from_secs(5), start.elapsed(), "1000 brute-force comparisons")?;
    Ok(format!("1344^2 -> 3x3+thumb; small images unsplit; {matched}/1000 brute-force matches in {:?}", start.elapsed()))
}

fn filter_boundary() -> Outcome {
    let words: Vec<String> = (0..1000).map(|i| format!("w{i}")).collect();
    let reference = words.join(" ");
    let with_subs = |k: usize| -> String {
        words
            .iter()
            .enumerate()
            .map(|(i, w)| if i < k { format!("x{i}") } else { w.clone() })
            .collect::<Vec<_>>()
            .join(" ")
    };
    let zh: Vec<char> = (0..1000).map(|i| char::from_u32(0x4E00 + i).unwrap()).collect();
    let zh_ref: String = zh.iter().collect();
    let zh_subs = |k: usize| -> String {
        zh.iter().enumerate().map(|(i, &c)| if i < k { '〇' } else { c }).collect()
    };
    let record = |id: &str, lang: Language, text: &str, hyp: String| {
        SampleRecord::new(id, Scenario::ASR, lang, text)
            .with_media(MediaRef::audio(format!("{id}.wav"), 5.0))
            .with_hypothesis(hyp)
    };
    let records = vec![
        record("eng-300", Language::ENG, &reference, with_subs(300)),
        record("eng-301", Language::ENG, &reference, with_subs(301)),
        record("zh-300", Language::ZH, &zh_ref, zh_subs(300)),
        record("zh-301", Language::ZH, &zh_ref, zh_subs(301)),
    ];
    let out = filter_asr(records, 0.3).map_err(|e| e.to_string())?;
    let kept: Vec<&str> = out.kept.iter().map(|r| r.id.as_str()).collect();
    let dropped: Vec<&str> = out.dropped.iter().map(|r| r.id.as_str()).collect();
    ensure!(kept == ["eng-300", "zh-300"], "kept {kept:?}");
    ensure!(dropped == ["eng-301", "zh-301"], "dropped {dropped:?}");
    for r in &out.kept {
        let v = r.verdict.as_ref().unwrap();
        ensure!(v.metric_value == Some(0.3), "{} rate {:?}", r.id, v.metric_value);
    }
    for r in &out.dropped {
        let v = r.verdict.as_ref().unwrap();
        ensure!(v.metric_value == Some(0.301), "{} rate {:?}", r.id, v.metric_value);
    }
    Ok("WER and CER 0.300 kept, 0.301 dropped".into())
}

fn edit_distance_oracle() -> Outcome {
    fn sequence(rng: &mut impl Rng) -> Vec<u8> {
        let len = rng.gen_range(0..=6);
        (0..len).map(|_| rng.gen_range(0..3u8)).collect()
    }
    let start = Instant::now();
    let mut rng = support::rng(5);
    let mut checked = 0;
    for _ in 0..10_000 {
        let (a, b) = (sequence(&mut rng), sequence(&mut rng));
        let best = support::min_edits_by_matchings(&a, &b);
        let words = |s: &[u8]| s.iter().map(|&x| ["p", "q", "r"][x as usize]).collect::<Vec<_>>().join(" ");
        let chars = |s: &[u8]| s.iter().map(|&x| ['p', 'q', 'r'][x as usize]).collect::<String>();
        for (name, result) in [("wer", wer(&words(&a), &words(&b))), ("cer", cer(&chars(&a), &chars(&b)))] {
            match result {
                Ok(s) => {
                    ensure!(!a.is_empty(), "{name}: empty reference accepted");
                    ensure!(s.edits() == best, "{name} {a:?} vs {b:?}: {} edits, oracle {best}", s.edits());
                    ensure!(s.ref_len == a.len(), "{name} ref_len {}", s.ref_len);
                    ensure!(
                        s.rate == best as f64 / a.len() as f64,
                        "{name} rate {} vs {best}/{}",
                        s.rate,
                        a.len()
                    );
                    ensure!(
                        s.deletions + b.len() == s.insertions + a.len(),
                        "{name} {a:?} vs {b:?}: decomposition {s:?} is not an alignment"
                    );
                }
                Err(_) => ensure!(a.is_empty(), "{name} {a:?} vs {b:?}: unexpected error"),
            }
        }
        checked += 1;
    }
    within(Duration::from_secs(30), start.elapsed(), "oracle comparison")?;
    Ok(format!("{checked} pairs (len <= 6, 3 symbols), zero mismatches in {:?}", start.elapsed()))
}

fn video_cap() -> Outcome {
    let s = schedule(300.0, 1.0, 128).map_err(|e| e.to_string())?;
    ensure!(s.len() == 128, "{} timestamps", s.len());
    ensure!(s.timestamps[0] == 0.5, "first {}", s.timestamps[0]);
    ensure!(s.timestamps[127] == 299.5, "last {}", s.timestamps[127]);
    ensure!(s.timestamps.windows(2).all(|w| w[0] < w[1]), "not increasing");
    Ok("300 s @ 1 fps cap 128 -> 128 frames, 0.5 .. 299.5".into())
}

fn resampler_fidelity() -> Outcome {
    let rate = 48_000u32;
    let input: Vec<f32> = (0..rate as usize * 2)
        .map(|i| (0.5 * (2.0 * std::f64::consts::PI * 440.0 * i as f64 / f64::from(rate)).sin()) as f32)
        .collect();
    let out = resample_16k(&input, rate).map_err(|e| e.to_string())?;
    ensure!(out.len() == 32_000, "{} output samples", out.len());

    let window = &out[8_000..24_000];
    let n = window.len();
    let mut buf: Vec<Complex<f64>> = window
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let hann = 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos();
            Complex::new(f64::from(x) * hann, 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let mags: Vec<f64> = buf[..n / 2].iter().map(|c| c.norm()).collect();
    let k = (1..mags.len() - 1).max_by(|&a, &b| mags[a].total_cmp(&mags[b])).unwrap();
    let (l, c, r) = (mags[k - 1].ln(), mags[k].ln(), mags[k + 1].ln());
    let offset = 0.5 * (l - r) / (l - 2.0 * c + r);
    let peak = (k as f64 + offset) * 16_000.0 / n as f64;
    ensure!((peak - 440.0).abs() <= 2.0, "peak at {peak:.3} Hz");

    let rms = |x: &[f32]| (x.iter().map(|&v| f64::from(v).powi(2)).sum::<f64>() / x.len() as f64).sqrt();
    let (rin, rout) = (rms(&input), rms(&out));
    let rel = (rout - rin).abs() / rin;
    ensure!(rel < 0.01, "rms {rout} vs {rin} ({:.3}%)", rel * 100.0);
    Ok(format!("peak {peak:.3} Hz, rms error {:.4}%", rel * 100.0))
}

fn mel_framing() -> Outcome {
    let tone: Vec<f32> = (0..16_000).map(|i| 0.1 * (i as f32 * 0.3).sin()).collect();
    let m = log_mel(&tone).map_err(|e| e.to_string())?;
    ensure!(m.n_frames == 100, "{} frames", m.n_frames);
    ensure!(m.n_mels == 128, "{} mels", m.n_mels);

    let silence = vec![0.0f32; 16_000];
    let s = log_mel(&silence).map_err(|e| e.to_string())?;
    ensure!(s.n_frames == 100, "silence: {} frames", s.n_frames);
    let first = s.values[0];
    ensure!(s.values.iter().all(|&v| v == first), "silence not uniform");

    // the same check through the WAV reader
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("silence.wav");
    fs::write(&path, support::wav_bytes(&vec![0i16; 16_000], 1, 16_000)).map_err(|e| e.to_string())?;
    let w = decode_wav(&path).map_err(|e| e.to_string())?;
    let m = log_mel(&w.samples).map_err(|e| e.to_string())?;
    ensure!(m.n_frames == 100 && m.values.iter().all(|&v| v == first), "wav silence");
    Ok(format!("16000 samples -> 100 frames; silence uniform at {first}"))
}

fn clustering_exactness() -> Outcome {
    let mut rng = support::rng(9);
    let thresholds = [0.8, 0.5, 0.9, 0.7];
    let mut kept_total = 0;
    for fixture in 0..100 {
        let texts = support::cluster_fixture(&mut rng, 50);
        let t = thresholds[fixture % thresholds.len()];
        let records: Vec<SampleRecord> = texts
            .iter()
            .enumerate()
            .map(|(i, text)| SampleRecord::new(format!("f{fixture}-{i}"), Scenario::QA, Language::ENG, text.as_str()))
            .collect();
        let (out, _) = cluster_prune(records, t, 3).map_err(|e| e.to_string())?;
        let expected: Vec<String> = support::brute_force_cluster_keep(&texts, t, 3)
            .iter()
            .enumerate()
            .filter(|(_, &k)| k)
            .map(|(i, _)| format!("f{fixture}-{i}"))
            .collect();
        let got: Vec<String> = out.kept.iter().map(|r| r.id.clone()).collect();
        ensure!(got == expected, "fixture {fixture} (t={t}): kept {got:?}, brute force {expected:?}");
        kept_total += got.len();
    }
    Ok(format!("100 fixtures x 50 records, zero mismatches ({kept_total} kept in total)"))
}

fn bleu_sanity() -> Outcome {
    let toks = |s: &str| s.split_whitespace().map(str::to_string).collect::<Vec<_>>();
    let corpus = vec![toks("the cat sat on the mat"), toks("a quick brown fox jumps")];
    let same = bleu(&corpus, &corpus, 4).map_err(|e| e.to_string())?;
    ensure!(same == 1.0, "identical corpus {same}");
    let other = vec![toks("x y z w v u"), toks("q r s t o")];
    let none = bleu(&corpus, &other, 4).map_err(|e| e.to_string())?;
    ensure!(none == 0.0, "disjoint corpus {none}");
    // ref "the cat sat on the mat", hyp "the cat sat on mat":
    // precisions 5/5, 3/4, 2/3, 1/2 -> geometric mean (1/4)^(1/4) = sqrt(1/2),
    // brevity penalty exp(1 - 6/5)
    let hand = 0.578_930_067_467_409_8;
    let got = bleu(&[toks("the cat sat on the mat")], &[toks("the cat sat on mat")], 4).map_err(|e| e.to_string())?;
    ensure!((got - hand).abs() < 1e-9, "single pair {got}, hand value {hand}");
    Ok(format!("identical 1.0, disjoint 0.0, single pair {got:.12}"))
}

fn end_to_end_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let manifest = dir.path().join("synthetic.jsonl");
    let records = support::synthetic_manifest(11, 10_000);
    write_manifest(&records, &manifest).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let mut outputs = Vec::new();
    for jobs in [1, 8] {
        let run = dir.path().join(format!("jobs{jobs}"));
        fs::create_dir_all(&run).map_err(|e| e.to_string())?;
        let status = Command::new(env!("CARGO_BIN_EXE_capypipe"))
            .args(["filter", "--jobs", &jobs.to_string(), "--manifest"])
            .arg(&manifest)
            .arg("--out")
            .arg(run.join("kept.jsonl"))
            .arg("--dropped")
            .arg(run.join("dropped.jsonl"))
            .arg("--report")
            .arg(run.join("reports"))
            .env_remove("CAPYPIPE_CONFIG")
            .output()
            .map_err(|e| e.to_string())?;
        ensure!(status.status.success(), "--jobs {jobs}: {}", String::from_utf8_lossy(&status.stderr));
        let mut files = vec![("kept.jsonl".to_string(), run.join("kept.jsonl")), ("dropped.jsonl".into(), run.join("dropped.jsonl"))];
        let mut reports: Vec<_> = fs::read_dir(run.join("reports"))
            .map_err(|e| e.to_string())?
            .map(|e| e.unwrap().path())
            .collect();
        reports.sort();
        for r in reports {
            files.push((r.file_name().unwrap().to_string_lossy().into_owned(), r));
        }
        let contents: Vec<(String, Vec<u8>)> = files
            .into_iter()
            .map(|(name, p)| fs::read(&p).map(|b| (name, b)))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        outputs.push(contents);
    }
    let (a, b) = (&outputs[0], &outputs[1]);
    ensure!(a.len() == 5, "expected kept, dropped and 3 reports, got {}", a.len());
    ensure!(a.len() == b.len(), "file sets differ");
    for ((na, ba), (nb, bb)) in a.iter().zip(b) {
        ensure!(na == nb, "file names {na} vs {nb}");
        ensure!(ba == bb, "{na} differs between --jobs 1 and --jobs 8");
    }
    let lines = |bytes: &[u8]| bytes.iter().filter(|&&c| c == b'\n').count();
    let (kept, dropped) = (lines(&a[0].1), lines(&a[1].1));
    ensure!(kept + dropped == 10_000, "kept {kept} + dropped {dropped} != 10000");
    ensure!(dropped > 0 && kept > 0, "degenerate fixture: kept {kept}, dropped {dropped}");
    Ok(format!("10000 records: {kept} kept, {dropped} dropped, 5 files byte-identical ({:?} for both runs)", start.elapsed()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("audio token rate", audio_token_rate),
        ("visual compression ratio", visual_compression),
        ("tiling regimes", tiling_regimes),
        ("filter boundary", filter_boundary),
        ("edit-distance oracle", edit_distance_oracle),
        ("video cap", video_cap),
        ("resampler fidelity", resampler_fidelity),
        ("mel framing", mel_framing),
        ("clustering exactness", clustering_exactness),
        ("BLEU sanity", bleu_sanity),
        ("end-to-end determinism", end_to_end_determinism),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into());
            Err(format!("panic: {msg}"))
        });
        match result {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
