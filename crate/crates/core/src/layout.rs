//! Exact placeholder-token accounting for images, video frames, audio and
//! text, including 2×2 token compression and row-break markers.

use std::collections::HashMap;

use serde::Serialize;

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::image::{plan_tiles, EmbeddingGrid, TilePlan};
use crate::manifest::{MediaKind, SampleRecord};
use crate::video::{schedule, tolerant_floor, FrameSchedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TokenKind {
    Text,
    ImageUnit,
    VideoFrame,
    Audio,
    RowBreak,
    Separator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Segment {
    pub kind: TokenKind,
    pub count: usize,
}

/// Token geometry of one encoder unit (a slice, thumbnail or video frame).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VisualUnitSpec {
    pub vit_tokens: usize,
    pub compressed_rows: usize,
    pub compressed_cols: usize,
    pub compressed_tokens: usize,
    pub row_breaks: usize,
}

impl VisualUnitSpec {
    /// 32×32 encoder patches compressed 2×2 to a 16×16 grid.
    pub const STANDARD: VisualUnitSpec = VisualUnitSpec {
        vit_tokens: 1024,
        compressed_rows: 16,
        compressed_cols: 16,
        compressed_tokens: 256,
        row_breaks: 16,
    };

    pub fn tokens_per_unit(&self) -> usize {
        self.compressed_tokens + self.row_breaks
    }
}

/// Tokens contributed by one encoder unit: 256 compressed + 16 row breaks.
pub const TOKENS_PER_VISUAL_UNIT: usize = 272;

/// Ordered placeholder segments for one sample.
///
/// A visual unit is recorded as a `ImageUnit`/`VideoFrame` segment of 256
/// followed by a `RowBreak` segment of 16; [`TokenLayout::expand`]
/// interleaves them one break after every row of 16.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TokenLayout {
    pub segments: Vec<Segment>,
    pub total: usize,
}

impl TokenLayout {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a segment; zero counts are skipped.
    pub fn push(&mut self, kind: TokenKind, count: usize) {
        if count > 0 {
            self.segments.push(Segment { kind, count });
            self.total += count;
        }
    }

    pub fn extend(&mut self, other: TokenLayout) {
        for s in other.segments {
            self.push(s.kind, s.count);
        }
    }

    fn push_visual_unit(&mut self, kind: TokenKind) {
        let spec = VisualUnitSpec::STANDARD;
        self.push(kind, spec.compressed_tokens);
        self.push(TokenKind::RowBreak, spec.row_breaks);
    }

    /// Explicit token-by-token sequence.
    pub fn expand(&self) -> Vec<TokenKind> {
        let mut out = Vec::with_capacity(self.total);
        let mut i = 0;
        while i < self.segments.len() {
            let seg = self.segments[i];
            let visual = matches!(seg.kind, TokenKind::ImageUnit | TokenKind::VideoFrame);
            match self.segments.get(i + 1) {
                Some(next)
                    if visual
                        && next.kind == TokenKind::RowBreak
                        && seg.count.is_multiple_of(next.count) =>
                {
                    let cols = seg.count / next.count;
                    for _ in 0..next.count {
                        out.extend(std::iter::repeat_n(seg.kind, cols));
                        out.push(TokenKind::RowBreak);
                    }
                    i += 2;
                }
                _ => {
                    out.extend(std::iter::repeat_n(seg.kind, seg.count));
                    i += 1;
                }
            }
        }
        out
    }
}

/// Averages each 2×2 block per channel, halving both grid dimensions.
pub fn compress_tokens(grid: &EmbeddingGrid) -> Result<EmbeddingGrid> {
    let (rows, cols, dim) = (grid.rows(), grid.cols(), grid.dim());
    if rows % 2 != 0 || cols % 2 != 0 {
        return Err(Error::domain(format!(
            "compress_tokens: grid {rows}x{cols} must have even dimensions"
        )));
    }
    EmbeddingGrid::from_fn(rows / 2, cols / 2, dim, |r, c, d| {
        let sum = f64::from(grid.get(2 * r, 2 * c, d))
            + f64::from(grid.get(2 * r, 2 * c + 1, d))
            + f64::from(grid.get(2 * r + 1, 2 * c, d))
            + f64::from(grid.get(2 * r + 1, 2 * c + 1, d));
        (sum / 4.0) as f32
    })
}

/// Row-major visual tokens with a row break after every row.
pub fn flatten_with_row_breaks(rows: usize, cols: usize) -> Vec<TokenKind> {
    let mut out = Vec::with_capacity(rows * (cols + 1));
    for _ in 0..rows {
        out.extend(std::iter::repeat_n(TokenKind::ImageUnit, cols));
        out.push(TokenKind::RowBreak);
    }
    out
}

/// Recovers (rows, cols) from a flattened sequence, or `None` if the rows
/// are ragged or the sequence is not made of visual tokens and row breaks.
pub fn unflatten(seq: &[TokenKind]) -> Option<(usize, usize)> {
    let mut rows = 0;
    let mut cols = None;
    let mut run = 0;
    for &t in seq {
        match t {
            TokenKind::ImageUnit | TokenKind::VideoFrame => run += 1,
            TokenKind::RowBreak => {
                if run == 0 || cols.is_some_and(|c| c != run) {
                    return None;
                }
                cols = Some(run);
                rows += 1;
                run = 0;
            }
            _ => return None,
        }
    }
    if run != 0 {
        return None;
    }
    cols.map(|c| (rows, c))
}

fn visual_units(kind: TokenKind, units: usize) -> TokenLayout {
    let mut layout = TokenLayout::new();
    for u in 0..units {
        if u > 0 {
            layout.push(TokenKind::Separator, 1);
        }
        layout.push_visual_unit(kind);
    }
    layout
}

/// Slices in row-major order then the thumbnail, one separator between units.
pub fn image_budget(plan: &TilePlan) -> TokenLayout {
    visual_units(TokenKind::ImageUnit, plan.units() as usize)
}

/// Frames under the rate/cap policy, each one unsplit visual unit.
pub fn video_budget(duration: f64, fps: f64, cap: usize) -> Result<TokenLayout> {
    if duration < 0.0 {
        return Err(Error::domain(format!("video_budget: negative duration {duration}")));
    }
    Ok(video_layout(&schedule(duration, fps, cap)?))
}

pub fn video_layout(frames: &FrameSchedule) -> TokenLayout {
    visual_units(TokenKind::VideoFrame, frames.len())
}

/// Audio placeholder count: 100 mel frames per second, halved by the
/// encoder's stride-2 and again by the stride-2 pooling layer.
pub fn audio_budget(duration: f64) -> usize {
    if !(duration > 0.0) {
        return 0;
    }
    let frames = tolerant_floor(duration * 100.0) as usize;
    frames / 2 / 2
}

/// Whitespace word count; a budgeting estimate, not a tokenizer.
pub fn text_tokens(text: &str) -> usize {
    text.split_whitespace().count()
}

/// Per-media input to [`assemble_layout`].
#[derive(Debug, Clone, PartialEq)]
pub enum MediaPlan {
    Image(TilePlan),
    Audio { duration: f64 },
    Video(FrameSchedule),
}

impl From<&crate::audio::AudioProfile> for MediaPlan {
    fn from(p: &crate::audio::AudioProfile) -> Self {
        MediaPlan::Audio { duration: p.duration }
    }
}

/// Media segments in record order followed by the text segment.
pub fn assemble_layout(
    record: &SampleRecord,
    plans: &HashMap<String, MediaPlan>,
) -> Result<TokenLayout> {
    let mut layout = TokenLayout::new();
    for media in &record.media {
        let plan = plans
            .get(&media.path)
            .ok_or_else(|| Error::MissingPlan(media.path.clone()))?;
        match plan {
            MediaPlan::Image(p) => layout.extend(image_budget(p)),
            MediaPlan::Audio { duration } => layout.push(TokenKind::Audio, audio_budget(*duration)),
            MediaPlan::Video(s) => layout.extend(video_layout(s)),
        }
    }
    layout.push(TokenKind::Text, text_tokens(&record.text));
    Ok(layout)
}

/// Plans every media ref from the geometry and durations recorded in the
/// manifest.
pub fn plan_from_metadata(
    record: &SampleRecord,
    config: &PipelineConfig,
) -> Result<HashMap<String, MediaPlan>> {
    let mut plans = HashMap::new();
    for m in &record.media {
        let missing = |what: &str| {
            Error::domain(format!(
                "record {:?}: {:?} ref {:?} has no {what}",
                record.id, m.kind, m.path
            ))
        };
        let plan = match m.kind {
            MediaKind::Image => {
                let (w, h) = m.width.zip(m.height).ok_or_else(|| missing("width/height"))?;
                MediaPlan::Image(plan_tiles(w, h, config.max_slices, config.cell_size)?)
            }
            MediaKind::Audio => MediaPlan::Audio {
                duration: m.duration.ok_or_else(|| missing("duration"))?,
            },
            MediaKind::Video => MediaPlan::Video(schedule(
                m.duration.ok_or_else(|| missing("duration"))?,
                config.video_fps,
                config.video_frame_cap,
            )?),
        };
        plans.insert(m.path.clone(), plan);
    }
    Ok(plans)
}
