//! Command-line front end. `dispatch` never exits the process itself; it
//! returns 0 on success, 1 for invalid input or arguments and 2 for I/O
//! failures.

use std::collections::{HashMap, HashSet};
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::audio::{analyze, decode_wav};
use crate::config::{Normalization, PipelineConfig};
use crate::curation::{render_table, run_pipeline, stats};
use crate::error::{Error, Result};
use crate::image::{plan_tiles, resize_geometry, slice_image, PixelImage, TilePlan};
use crate::layout::{
    assemble_layout, audio_budget, image_budget, plan_from_metadata, text_tokens, video_layout,
    TokenKind, TokenLayout,
};
use crate::manifest::{read_manifest, write_records, MediaKind, SampleRecord};
use crate::metrics::{bleu, cer, ngram_cosine, normalize, wer, EditSummary};
use crate::video::schedule;

const AFTER_HELP: &str = "Settings resolve as: command-line flag, then the config file \
(--config or CAPYPIPE_CONFIG), then built-in defaults.\n\
Exit status: 0 success, 1 invalid input, 2 I/O failure.";

#[derive(Debug, Parser)]
#[command(name = "capypipe", version, about = "Multimodal sample planning and manifest curation")]
#[command(after_help = AFTER_HELP)]
struct Cli {
    /// JSON pipeline config file [default: none]
    #[arg(long, global = true, env = "CAPYPIPE_CONFIG", value_name = "PATH")]
    config: Option<PathBuf>,

    /// Worker threads for batch work; 0 uses every logical core
    #[arg(long, global = true, default_value_t = 0, value_name = "N")]
    jobs: usize,

    /// Input manifest (JSON lines) [default: none]
    #[arg(long, global = true, value_name = "PATH")]
    manifest: Option<PathBuf>,

    /// Write data output here instead of standard output [default: stdout]
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Write a JSON summary here; for `filter`, a directory of per-stage reports [default: none]
    #[arg(long, global = true, value_name = "PATH")]
    report: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Choose the slice grid for an image
    #[command(after_help = AFTER_HELP)]
    PlanTiles(PlanTilesArgs),
    /// Count placeholder tokens for media and text
    #[command(after_help = AFTER_HELP)]
    Budget(BudgetArgs),
    /// Decode a WAV file, resample to 16 kHz and compute log-mel features
    #[command(after_help = AFTER_HELP)]
    AudioProfile(AudioProfileArgs),
    /// Frame timestamps for a video of the given duration
    #[command(after_help = AFTER_HELP)]
    VideoSchedule(VideoScheduleArgs),
    /// Score hypotheses against references
    #[command(subcommand)]
    Metrics(MetricsCommand),
    /// Run dedup, near-duplicate clustering and consistency filtering
    #[command(after_help = AFTER_HELP)]
    Filter(FilterArgs),
    /// Sample counts by scenario, language and source
    #[command(after_help = AFTER_HELP)]
    Stats(StatsArgs),
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Upper bound on slices per image [default: 9, or config max_slices]
    #[arg(long, value_name = "N")]
    max_slices: Option<u32>,
    /// Slice edge in pixels [default: 448, or config cell_size]
    #[arg(long, value_name = "PX")]
    cell_size: Option<u32>,
}

#[derive(Debug, Args)]
struct PlanTilesArgs {
    /// Image width in pixels [default: none]
    #[arg(long, value_name = "PX")]
    width: Option<u32>,
    /// Image height in pixels [default: none]
    #[arg(long, value_name = "PX")]
    height: Option<u32>,
    /// Binary PPM (P6) to plan; its size replaces --width/--height [default: none]
    #[arg(long, value_name = "PATH")]
    image: Option<PathBuf>,
    /// With --image, write the slices and thumbnail as PPM files here [default: none]
    #[arg(long, value_name = "DIR", requires = "image")]
    tiles_dir: Option<PathBuf>,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Debug, Args)]
struct BudgetArgs {
    /// Image size as WIDTHxHEIGHT; repeatable [default: none]
    #[arg(long, value_name = "WxH", value_parser = parse_size)]
    image: Vec<(u32, u32)>,
    /// Video duration in seconds; repeatable [default: none]
    #[arg(long, value_name = "SECONDS")]
    video: Vec<f64>,
    /// Audio duration in seconds; repeatable [default: none]
    #[arg(long, value_name = "SECONDS")]
    audio: Vec<f64>,
    /// Text whose words are counted [default: none]
    #[arg(long, value_name = "TEXT")]
    text: Option<String>,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    video_opts: VideoOpts,
}

#[derive(Debug, Args)]
struct VideoOpts {
    /// Sampling rate in frames per second [default: 1, or config video_fps]
    #[arg(long, value_name = "FPS")]
    fps: Option<f64>,
    /// Maximum frames kept [default: 128, or config video_frame_cap]
    #[arg(long, value_name = "N")]
    frame_cap: Option<usize>,
}

#[derive(Debug, Args)]
struct AudioProfileArgs {
    /// PCM16 WAV file [default: none]
    #[arg(long, value_name = "PATH")]
    wav: Option<PathBuf>,
    /// Write the log-mel features of --wav to this file [default: none]
    #[arg(long, value_name = "PATH", requires = "wav")]
    mel_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VideoScheduleArgs {
    /// Video duration in seconds
    #[arg(long, value_name = "SECONDS")]
    duration: f64,
    #[command(flatten)]
    video_opts: VideoOpts,
}

#[derive(Debug, Args)]
struct PairArgs {
    /// Reference TSV: id<TAB>text per line [default: none]
    #[arg(long = "ref", value_name = "PATH", requires = "hyp")]
    reference: Option<PathBuf>,
    /// Hypothesis TSV: id<TAB>text per line [default: none]
    #[arg(long, value_name = "PATH", requires = "reference")]
    hyp: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum MetricsCommand {
    /// Word error rate
    #[command(after_help = AFTER_HELP)]
    Wer(PairArgs),
    /// Character error rate
    #[command(after_help = AFTER_HELP)]
    Cer(PairArgs),
    /// Corpus BLEU, single reference, no smoothing
    #[command(after_help = AFTER_HELP)]
    Bleu {
        #[command(flatten)]
        pair: PairArgs,
        /// Longest n-gram order
        #[arg(long, default_value_t = 4, value_name = "N")]
        max_n: usize,
        /// Score characters instead of whitespace-separated words
        #[arg(long, default_value_t = false)]
        chars: bool,
    },
    /// Character n-gram cosine similarity
    #[command(after_help = AFTER_HELP)]
    Sim {
        #[command(flatten)]
        pair: PairArgs,
        /// n-gram width
        #[arg(long, default_value_t = 3, value_name = "N")]
        n: usize,
    },
}

#[derive(Debug, Args)]
struct FilterArgs {
    /// Dropped records with verdicts [default: <out>.dropped.jsonl, or none when writing to stdout]
    #[arg(long, value_name = "PATH")]
    dropped: Option<PathBuf>,
    /// ASR drop threshold on WER/CER [default: 0.3, or config wer_threshold]
    #[arg(long, value_name = "RATE")]
    wer_threshold: Option<f64>,
    /// S2TT keep threshold on similarity [default: 0.5, or config s2tt_similarity_threshold]
    #[arg(long, value_name = "SIM")]
    similarity_threshold: Option<f64>,
    /// Near-duplicate Jaccard threshold [default: 0.8, or config cluster_jaccard_threshold]
    #[arg(long, value_name = "J")]
    jaccard_threshold: Option<f64>,
    /// Text canonicalization for exact dedup: none, whitespace or full [default: full, or config dedup_normalization]
    #[arg(long, value_name = "MODE", value_parser = parse_normalization)]
    normalization: Option<Normalization>,
}

#[derive(Debug, Args)]
struct StatsArgs {
    /// Print an aligned text table instead of JSON lines
    #[arg(long, default_value_t = false)]
    table: bool,
}

fn parse_size(s: &str) -> std::result::Result<(u32, u32), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WIDTHxHEIGHT, got {s:?}"))?;
    let w = w.trim().parse().map_err(|e| format!("width {w:?}: {e}"))?;
    let h = h.trim().parse().map_err(|e| format!("height {h:?}: {e}"))?;
    Ok((w, h))
}

fn parse_normalization(s: &str) -> std::result::Result<Normalization, String> {
    match s {
        "none" => Ok(Normalization::None),
        "whitespace" => Ok(Normalization::Whitespace),
        "full" => Ok(Normalization::Full),
        _ => Err(format!("expected none, whitespace or full, got {s:?}")),
    }
}

/// Parses `argv` (program name first), runs the command and returns the
/// exit status. Diagnostics go to standard error.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("capypipe: error: {e}");
            if e.is_io() {
                2
            } else {
                1
            }
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut config = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    apply_overrides(&mut config, &cli.command);
    config.validate()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let ctx = Context {
        config,
        manifest: cli.manifest.clone(),
        out: cli.out.clone(),
        report: cli.report.clone(),
    };
    pool.install(|| match &cli.command {
        Command::PlanTiles(a) => plan_tiles_cmd(&ctx, a),
        Command::Budget(a) => budget_cmd(&ctx, a),
        Command::AudioProfile(a) => audio_profile_cmd(&ctx, a),
        Command::VideoSchedule(a) => video_schedule_cmd(&ctx, a),
        Command::Metrics(m) => metrics_cmd(&ctx, m),
        Command::Filter(a) => filter_cmd(&ctx, a),
        Command::Stats(a) => stats_cmd(&ctx, a),
    })
}

fn apply_overrides(config: &mut PipelineConfig, command: &Command) {
    let grid = |config: &mut PipelineConfig, g: &GridArgs| {
        if let Some(v) = g.max_slices {
            config.max_slices = v;
        }
        if let Some(v) = g.cell_size {
            config.cell_size = v;
        }
    };
    let video = |config: &mut PipelineConfig, v: &VideoOpts| {
        if let Some(fps) = v.fps {
            config.video_fps = fps;
        }
        if let Some(cap) = v.frame_cap {
            config.video_frame_cap = cap;
        }
    };
    match command {
        Command::PlanTiles(a) => grid(config, &a.grid),
        Command::Budget(a) => {
            grid(config, &a.grid);
            video(config, &a.video_opts);
        }
        Command::VideoSchedule(a) => video(config, &a.video_opts),
        Command::Filter(a) => {
            if let Some(v) = a.wer_threshold {
                config.wer_threshold = v;
            }
            if let Some(v) = a.similarity_threshold {
                config.s2tt_similarity_threshold = v;
            }
            if let Some(v) = a.jaccard_threshold {
                config.cluster_jaccard_threshold = v;
            }
            if let Some(v) = a.normalization {
                config.dedup_normalization = v;
            }
        }
        _ => {}
    }
}

struct Context {
    config: PipelineConfig,
    manifest: Option<PathBuf>,
    out: Option<PathBuf>,
    report: Option<PathBuf>,
}

impl Context {
    fn open_out(&self) -> Result<Box<dyn Write>> {
        match &self.out {
            Some(path) => {
                let file = File::create(path).map_err(|e| Error::io(path, e))?;
                Ok(Box::new(BufWriter::new(file)))
            }
            None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
        }
    }

    fn out_name(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("<stdout>"))
    }

    fn records(&self) -> Result<Option<Vec<SampleRecord>>> {
        match &self.manifest {
            Some(path) => {
                let records = read_manifest(path)?;
                eprintln!("capypipe: read {} records from {}", records.len(), path.display());
                Ok(Some(records))
            }
            None => Ok(None),
        }
    }

    fn require_records(&self, command: &str) -> Result<Vec<SampleRecord>> {
        self.records()?
            .ok_or_else(|| Error::Config(format!("{command} requires --manifest")))
    }

    /// One JSON value per line.
    fn emit_lines<T: Serialize>(&self, rows: &[T]) -> Result<()> {
        let name = self.out_name();
        let mut out = self.open_out()?;
        for row in rows {
            let line = serde_json::to_string(row).map_err(|e| Error::Format(e.to_string()))?;
            writeln!(out, "{line}").map_err(|e| Error::io(&name, e))?;
        }
        out.flush().map_err(|e| Error::io(&name, e))
    }

    fn emit<T: Serialize>(&self, value: &T) -> Result<()> {
        self.emit_lines(std::slice::from_ref(value))
    }

    fn write_report<T: Serialize>(&self, value: &T) -> Result<()> {
        if let Some(path) = &self.report {
            write_json(path, value)?;
        }
        Ok(())
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Media paths in a manifest are relative to the manifest's directory.
fn resolve(manifest: &Path, media: &str) -> PathBuf {
    let p = Path::new(media);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        manifest.parent().unwrap_or(Path::new("")).join(p)
    }
}

fn plan_json(width: u32, height: u32, plan: &TilePlan) -> Result<Value> {
    let placement = resize_geometry(width, height, plan)?;
    Ok(json!({
        "width": width,
        "height": height,
        "rows": plan.grid_rows,
        "cols": plan.grid_cols,
        "thumbnail": plan.thumbnail,
        "slices": plan.slices(),
        "units": plan.units(),
        "tokens": image_budget(plan).total,
        "cell_size": plan.cell_size,
        "resized_width": plan.resized_width,
        "resized_height": plan.resized_height,
        "scaled_width": placement.scaled_width,
        "scaled_height": placement.scaled_height,
        "pad_x": placement.pad_x,
        "pad_y": placement.pad_y,
    }))
}

fn plan_tiles_cmd(ctx: &Context, a: &PlanTilesArgs) -> Result<()> {
    let (max, cell) = (ctx.config.max_slices, ctx.config.cell_size);
    if let Some(records) = ctx.records()? {
        let mut rows = Vec::new();
        for r in &records {
            for m in r.media.iter().filter(|m| m.kind == MediaKind::Image) {
                let (w, h) = m.width.zip(m.height).ok_or_else(|| {
                    Error::domain(format!("record {:?}: image {:?} has no width/height", r.id, m.path))
                })?;
                let mut v = plan_json(w, h, &plan_tiles(w, h, max, cell)?)?;
                v["id"] = json!(r.id);
                v["path"] = json!(m.path);
                rows.push(v);
            }
        }
        ctx.write_report(&json!({ "images": rows.len() }))?;
        return ctx.emit_lines(&rows);
    }

    let image = match &a.image {
        Some(path) => Some(PixelImage::read_ppm(path)?),
        None => None,
    };
    let (w, h) = match (&image, a.width, a.height) {
        (Some(img), _, _) => (img.width(), img.height()),
        (None, Some(w), Some(h)) => (w, h),
        _ => return Err(Error::Config("plan-tiles needs --width and --height, --image or --manifest".into())),
    };
    let plan = plan_tiles(w, h, max, cell)?;
    if let (Some(img), Some(dir)) = (&image, &a.tiles_dir) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let sliced = slice_image(img, &plan)?;
        for (i, c) in sliced.cells.iter().enumerate() {
            let (r, col) = (i as u32 / plan.grid_cols, i as u32 % plan.grid_cols);
            c.write_ppm(dir.join(format!("cell_{r}_{col}.ppm")))?;
        }
        if let Some(t) = &sliced.thumbnail {
            t.write_ppm(dir.join("thumbnail.ppm"))?;
        }
    }
    let v = plan_json(w, h, &plan)?;
    ctx.write_report(&v)?;
    ctx.emit(&v)
}

#[derive(Serialize)]
struct Breakdown {
    total: usize,
    image: usize,
    video: usize,
    audio: usize,
    text: usize,
    row_breaks: usize,
    separators: usize,
}

impl From<&TokenLayout> for Breakdown {
    fn from(layout: &TokenLayout) -> Self {
        let mut b = Breakdown {
            total: layout.total,
            image: 0,
            video: 0,
            audio: 0,
            text: 0,
            row_breaks: 0,
            separators: 0,
        };
        for s in &layout.segments {
            let slot = match s.kind {
                TokenKind::ImageUnit => &mut b.image,
                TokenKind::VideoFrame => &mut b.video,
                TokenKind::Audio => &mut b.audio,
                TokenKind::Text => &mut b.text,
                TokenKind::RowBreak => &mut b.row_breaks,
                TokenKind::Separator => &mut b.separators,
            };
            *slot += s.count;
        }
        b
    }
}

fn budget_cmd(ctx: &Context, a: &BudgetArgs) -> Result<()> {
    let c = &ctx.config;
    if let Some(records) = ctx.records()? {
        let mut rows = Vec::with_capacity(records.len());
        let mut grand = 0usize;
        for r in &records {
            let layout = assemble_layout(r, &plan_from_metadata(r, c)?)?;
            grand += layout.total;
            let mut v = serde_json::to_value(Breakdown::from(&layout)).map_err(|e| Error::Format(e.to_string()))?;
            v["id"] = json!(r.id);
            rows.push(v);
        }
        ctx.write_report(&json!({ "records": records.len(), "total": grand }))?;
        return ctx.emit_lines(&rows);
    }

    let mut layout = TokenLayout::new();
    for &(w, h) in &a.image {
        layout.extend(image_budget(&plan_tiles(w, h, c.max_slices, c.cell_size)?));
    }
    for &d in &a.video {
        layout.extend(video_layout(&schedule(d, c.video_fps, c.video_frame_cap)?));
    }
    for &d in &a.audio {
        if !(d >= 0.0) || !d.is_finite() {
            return Err(Error::domain(format!("audio duration {d} must be >= 0")));
        }
        layout.push(TokenKind::Audio, audio_budget(d));
    }
    if let Some(t) = &a.text {
        layout.push(TokenKind::Text, text_tokens(t));
    }
    let b = Breakdown::from(&layout);
    ctx.write_report(&b)?;
    ctx.emit(&b)
}

fn audio_profile_cmd(ctx: &Context, a: &AudioProfileArgs) -> Result<()> {
    if let Some(path) = &a.wav {
        let wave = decode_wav(path)?;
        let (profile, mel) = analyze(&wave)?;
        if let Some(mel_path) = &a.mel_out {
            match &mel {
                Some(m) => m.write(mel_path)?,
                None => return Err(Error::domain(format!("{}: no samples, no features", path.display()))),
            }
        }
        ctx.write_report(&profile)?;
        return ctx.emit(&profile);
    }
    let Some(manifest) = &ctx.manifest else {
        return Err(Error::Config("audio-profile needs --wav or --manifest".into()));
    };
    let records = ctx.require_records("audio-profile")?;
    let mut rows = Vec::new();
    for r in &records {
        for m in r.media.iter().filter(|m| m.kind == MediaKind::Audio) {
            let profile = analyze(&decode_wav(resolve(manifest, &m.path))?)?.0;
            let mut v = serde_json::to_value(&profile).map_err(|e| Error::Format(e.to_string()))?;
            v["id"] = json!(r.id);
            v["path"] = json!(m.path);
            rows.push(v);
        }
    }
    ctx.write_report(&json!({ "files": rows.len() }))?;
    ctx.emit_lines(&rows)
}

fn video_schedule_cmd(ctx: &Context, a: &VideoScheduleArgs) -> Result<()> {
    let s = schedule(a.duration, ctx.config.video_fps, ctx.config.video_frame_cap)?;
    let v = json!({
        "duration": a.duration,
        "fps": s.fps,
        "cap": s.cap,
        "frames": s.len(),
        "truncated": s.truncated,
        "tokens": video_layout(&s).total,
        "timestamps": s.timestamps,
    });
    ctx.write_report(&v)?;
    ctx.emit(&v)
}

/// `id<TAB>text` lines; blank lines are skipped.
fn read_tsv(path: &Path) -> Result<Vec<(String, String)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() {
            continue;
        }
        let (id, text) = line.split_once('\t').ok_or_else(|| Error::Parse {
            line: i + 1,
            message: format!("{}: expected id<TAB>text", path.display()),
        })?;
        if let Some(&first) = seen.get(id) {
            return Err(Error::DuplicateId { id: id.to_string(), first, second: i + 1 });
        }
        seen.insert(id.to_string(), i + 1);
        rows.push((id.to_string(), text.to_string()));
    }
    Ok(rows)
}

/// Reference/hypothesis pairs in reference order, from TSV files or from the
/// manifest (`text` against `hypothesis`, or `translation` when
/// `translation` is set).
fn load_pairs(ctx: &Context, pair: &PairArgs, translation: bool) -> Result<Vec<(String, String, String)>> {
    if let (Some(rp), Some(hp)) = (&pair.reference, &pair.hyp) {
        let refs = read_tsv(rp)?;
        let hyps: HashMap<String, String> = read_tsv(hp)?.into_iter().collect();
        let ref_ids: HashSet<&str> = refs.iter().map(|(id, _)| id.as_str()).collect();
        if let Some(extra) = hyps.keys().filter(|k| !ref_ids.contains(k.as_str())).min() {
            return Err(Error::domain(format!("hypothesis id {extra:?} has no reference")));
        }
        return refs
            .into_iter()
            .map(|(id, text)| {
                let hyp = hyps
                    .get(&id)
                    .cloned()
                    .ok_or_else(|| Error::domain(format!("reference id {id:?} has no hypothesis")))?;
                Ok((id, text, hyp))
            })
            .collect();
    }
    let records = ctx
        .records()?
        .ok_or_else(|| Error::Config("metrics needs --ref and --hyp, or --manifest".into()))?;
    Ok(records
        .into_iter()
        .filter_map(|r| {
            let hyp = if translation { r.translation } else { r.hypothesis };
            hyp.map(|h| (r.id, r.text, h))
        })
        .collect())
}

fn edit_row(id: &str, s: &EditSummary) -> Value {
    json!({
        "id": id,
        "rate": s.rate,
        "substitutions": s.substitutions,
        "deletions": s.deletions,
        "insertions": s.insertions,
        "ref_len": s.ref_len,
    })
}

fn metrics_cmd(ctx: &Context, m: &MetricsCommand) -> Result<()> {
    let mut rows = Vec::new();
    let summary = match m {
        MetricsCommand::Wer(pair) | MetricsCommand::Cer(pair) => {
            let (name, f): (&str, fn(&str, &str) -> Result<EditSummary>) = match m {
                MetricsCommand::Wer(_) => ("wer", wer),
                _ => ("cer", cer),
            };
            let (mut edits, mut ref_len) = (0usize, 0usize);
            for (id, r, h) in load_pairs(ctx, pair, false)? {
                let s = f(&r, &h).map_err(|e| Error::domain(format!("{id}: {e}")))?;
                edits += s.edits();
                ref_len += s.ref_len;
                rows.push(edit_row(&id, &s));
            }
            let rate = if ref_len == 0 { 0.0 } else { edits as f64 / ref_len as f64 };
            json!({ "id": null, "metric": name, "pairs": rows.len(), "edits": edits, "ref_len": ref_len, "rate": rate })
        }
        MetricsCommand::Bleu { pair, max_n, chars } => {
            let tokenize = |s: &str| -> Vec<String> {
                let n = normalize(s);
                if *chars {
                    n.chars().filter(|c| !c.is_whitespace()).map(String::from).collect()
                } else {
                    n.split_whitespace().map(String::from).collect()
                }
            };
            let pairs = load_pairs(ctx, pair, true)?;
            let refs: Vec<Vec<String>> = pairs.iter().map(|(_, r, _)| tokenize(r)).collect();
            let hyps: Vec<Vec<String>> = pairs.iter().map(|(_, _, h)| tokenize(h)).collect();
            for (i, (id, _, _)) in pairs.iter().enumerate() {
                let score = bleu(&refs[i..=i], &hyps[i..=i], *max_n)?;
                rows.push(json!({ "id": id, "bleu": score }));
            }
            let corpus = bleu(&refs, &hyps, *max_n)?;
            json!({ "id": null, "metric": "bleu", "pairs": pairs.len(), "max_n": max_n, "bleu": corpus })
        }
        MetricsCommand::Sim { pair, n } => {
            let mut sum = 0.0;
            for (id, r, h) in load_pairs(ctx, pair, true)? {
                let s = ngram_cosine(&r, &h, *n).map_err(|e| Error::domain(format!("{id}: {e}")))?;
                sum += s;
                rows.push(json!({ "id": id, "similarity": s }));
            }
            let mean = if rows.is_empty() { 0.0 } else { sum / rows.len() as f64 };
            json!({ "id": null, "metric": "similarity", "pairs": rows.len(), "n": n, "mean": mean })
        }
    };
    ctx.write_report(&summary)?;
    rows.push(summary);
    ctx.emit_lines(&rows)
}

fn default_dropped_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.dropped.jsonl"))
}

fn filter_cmd(ctx: &Context, a: &FilterArgs) -> Result<()> {
    let records = ctx.require_records("filter")?;
    let total = records.len();
    let out = match run_pipeline(records, &ctx.config) {
        Ok(out) => out,
        Err(failure) => {
            for r in &failure.reports {
                eprintln!("capypipe: stage {} completed before the failure", r.stage);
            }
            return Err(failure.error);
        }
    };

    let name = ctx.out_name();
    let mut w = ctx.open_out()?;
    write_records(&out.kept, &mut w)?;
    w.flush().map_err(|e| Error::io(&name, e))?;

    let dropped_path = a.dropped.clone().or_else(|| ctx.out.as_deref().map(default_dropped_path));
    if let Some(path) = dropped_path {
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut w = BufWriter::new(file);
        write_records(&out.dropped, &mut w)?;
        w.flush().map_err(|e| Error::io(&path, e))?;
    }

    if let Some(dir) = &ctx.report {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (i, r) in out.reports.iter().enumerate() {
            write_json(&dir.join(format!("{:02}_{}.json", i + 1, r.stage)), r)?;
        }
    }
    for r in &out.reports {
        eprintln!(
            "capypipe: {:<12} in {:>8}  kept {:>8}  dropped {:>8}",
            r.stage, r.input_count, r.kept, r.dropped
        );
    }
    eprintln!("capypipe: kept {} of {} records", out.kept.len(), total);
    Ok(())
}

fn stats_cmd(ctx: &Context, a: &StatsArgs) -> Result<()> {
    let records = ctx.require_records("stats")?;
    let rows = stats(&records);
    ctx.write_report(&rows)?;
    if a.table {
        let name = ctx.out_name();
        let mut out = ctx.open_out()?;
        out.write_all(render_table(&rows).as_bytes()).map_err(|e| Error::io(&name, e))?;
        return out.flush().map_err(|e| Error::io(&name, e));
    }
    ctx.emit_lines(&rows)
}
