//! Sample records and JSONL manifest persistence.
//!
//! A manifest is UTF-8 text with one JSON object per LF-terminated line.
//! Keys the data model does not know about are kept in [`SampleRecord::extra`]
//! and written back after the known keys, in their original order.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

#[allow(clippy::upper_case_acronyms)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scenario {
    ASR,
    S2TT,
    Caption,
    QA,
    CrossModal,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::ASR => "ASR",
            Scenario::S2TT => "S2TT",
            Scenario::Caption => "Caption",
            Scenario::QA => "QA",
            Scenario::CrossModal => "CrossModal",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Scenario::ASR => "Automatic Speech Recognition",
            Scenario::S2TT => "Speech-to-Text Translation",
            Scenario::Caption => "Captioning",
            Scenario::QA => "Question Answering",
            Scenario::CrossModal => "Cross-Modal Instruction",
        }
    }
}

#[allow(non_camel_case_types, clippy::upper_case_acronyms)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Language {
    ZH,
    ENG,
    ZH_ENG,
    ENG_ZH,
}

impl Language {
    pub fn as_str(self) -> &'static str {
        match self {
            Language::ZH => "ZH",
            Language::ENG => "ENG",
            Language::ZH_ENG => "ZH_ENG",
            Language::ENG_ZH => "ENG_ZH",
        }
    }

    /// Whether transcripts in this language are scored per character.
    ///
    /// For a translation pair the source side decides.
    pub fn is_character_scored(self) -> bool {
        matches!(self, Language::ZH | Language::ZH_ENG)
    }

    pub fn is_pair(self) -> bool {
        matches!(self, Language::ZH_ENG | Language::ENG_ZH)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MediaKind {
    Image,
    Video,
    Audio,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MediaRef {
    pub kind: MediaKind,
    pub path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height: Option<u32>,
    /// Seconds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
    /// Hz.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_rate: Option<u32>,
}

impl MediaRef {
    pub fn new(kind: MediaKind, path: impl Into<String>) -> Self {
        MediaRef {
            kind,
            path: path.into(),
            width: None,
            height: None,
            duration: None,
            sample_rate: None,
        }
    }

    pub fn image(path: impl Into<String>, width: u32, height: u32) -> Self {
        MediaRef {
            width: Some(width),
            height: Some(height),
            ..MediaRef::new(MediaKind::Image, path)
        }
    }

    pub fn audio(path: impl Into<String>, duration: f64) -> Self {
        MediaRef {
            duration: Some(duration),
            ..MediaRef::new(MediaKind::Audio, path)
        }
    }

    pub fn video(path: impl Into<String>, duration: f64) -> Self {
        MediaRef {
            duration: Some(duration),
            ..MediaRef::new(MediaKind::Video, path)
        }
    }
}

/// Outcome of a filtering stage for one record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterVerdict {
    pub kept: bool,
    #[serde(default)]
    pub stage: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric_name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric_value: Option<f64>,
}

impl FilterVerdict {
    pub fn new(kept: bool, stage: &str, metric_name: &str, metric_value: Option<f64>) -> Self {
        FilterVerdict {
            kept,
            stage: stage.to_string(),
            metric_name: Some(metric_name.to_string()),
            metric_value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub id: String,
    pub scenario: Scenario,
    pub language: Language,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub media: Vec<MediaRef>,
    pub text: String,
    /// External ASR output used by the consistency filter.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hypothesis: Option<String>,
    /// Machine-translation output used by the similarity filter.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub translation: Option<String>,
    #[serde(default)]
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<FilterVerdict>,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl SampleRecord {
    pub fn new(
        id: impl Into<String>,
        scenario: Scenario,
        language: Language,
        text: impl Into<String>,
    ) -> Self {
        SampleRecord {
            id: id.into(),
            scenario,
            language,
            media: Vec::new(),
            text: text.into(),
            hypothesis: None,
            translation: None,
            source: String::new(),
            verdict: None,
            extra: Map::new(),
        }
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = source.into();
        self
    }

    pub fn with_media(mut self, media: MediaRef) -> Self {
        self.media.push(media);
        self
    }

    pub fn with_hypothesis(mut self, hypothesis: impl Into<String>) -> Self {
        self.hypothesis = Some(hypothesis.into());
        self
    }

    pub fn with_translation(mut self, translation: impl Into<String>) -> Self {
        self.translation = Some(translation.into());
        self
    }
}

/// Lists every type invariant the record breaks. Empty means valid.
pub fn validate(record: &SampleRecord) -> Vec<String> {
    let mut violations = Vec::new();

    if record.id.is_empty() {
        violations.push("id must be non-empty".to_string());
    }

    let audio_refs = record
        .media
        .iter()
        .filter(|m| m.kind == MediaKind::Audio)
        .count();
    if record.scenario == Scenario::ASR && audio_refs != 1 {
        violations.push("ASR requires exactly one audio ref".to_string());
    }
    if record.scenario == Scenario::S2TT && !record.language.is_pair() {
        violations.push(format!(
            "S2TT requires language pair ZH_ENG or ENG_ZH, got {}",
            record.language.as_str()
        ));
    }

    for m in &record.media {
        match m.kind {
            MediaKind::Image => {
                if m.width == Some(0) || m.height == Some(0) {
                    violations.push(format!(
                        "image ref {:?}: width and height must be > 0",
                        m.path
                    ));
                }
            }
            MediaKind::Audio => {
                if let Some(d) = m.duration {
                    if !(d >= 0.0) || !d.is_finite() {
                        violations
                            .push(format!("audio ref {:?}: duration must be >= 0", m.path));
                    }
                }
                if m.sample_rate == Some(0) {
                    violations.push(format!(
                        "audio ref {:?}: sample_rate must be > 0",
                        m.path
                    ));
                }
            }
            MediaKind::Video => {
                if let Some(d) = m.duration {
                    if !(d >= 0.0) || !d.is_finite() {
                        violations
                            .push(format!("video ref {:?}: duration must be >= 0", m.path));
                    }
                }
            }
        }
    }

    if let Some(v) = &record.verdict {
        if !v.kept && (v.stage.is_empty() || v.metric_name.is_none()) {
            violations.push("verdict kept=false requires stage and metric_name".to_string());
        }
    }

    violations
}

/// Parses manifest text. Line numbers in errors are 1-based.
pub fn parse_manifest<R: BufRead>(reader: R) -> Result<Vec<SampleRecord>> {
    let mut records = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: SampleRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        if let Some(&first) = seen.get(&record.id) {
            return Err(Error::DuplicateId {
                id: record.id,
                first,
                second: lineno,
            });
        }
        seen.insert(record.id.clone(), lineno);
        records.push(record);
    }
    Ok(records)
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<SampleRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_manifest(BufReader::new(file))
}

/// Serializes one record as a single JSON line (without the newline).
pub fn to_line(record: &SampleRecord) -> String {
    // Serialization of these types cannot fail: all map keys are strings.
    serde_json::to_string(record).expect("record serializes")
}

/// Writes records to `out`, validating each one first.
pub fn write_records<W: Write>(records: &[SampleRecord], mut out: W) -> Result<()> {
    for record in records {
        let violations = validate(record);
        if !violations.is_empty() {
            return Err(Error::Validation {
                id: record.id.clone(),
                violations,
            });
        }
    }
    let mut buf = Vec::new();
    for record in records {
        buf.extend_from_slice(to_line(record).as_bytes());
        buf.push(b'\n');
    }
    out.write_all(&buf)
        .map_err(|e| Error::io("<manifest output>", e))
}

pub fn write_manifest(records: &[SampleRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    // Validate before touching the filesystem.
    for record in records {
        let violations = validate(record);
        if !violations.is_empty() {
            return Err(Error::Validation {
                id: record.id.clone(),
                violations,
            });
        }
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = BufWriter::new(file);
    for record in records {
        writer
            .write_all(to_line(record).as_bytes())
            .and_then(|_| writer.write_all(b"\n"))
            .map_err(|e| Error::io(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}
