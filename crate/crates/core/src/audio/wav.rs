use std::path::Path;

use crate::error::{Error, Result};

const FORMAT_PCM: u16 = 1;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

/// Decoded mono signal in [−1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub samples: Vec<f32>,
    pub rate: u32,
}

impl Waveform {
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.rate)
    }
}

pub fn decode_wav(path: impl AsRef<Path>) -> Result<Waveform> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_wav_bytes(&bytes).map_err(|e| match e {
        Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
        other => other,
    })
}

struct Fmt {
    format: u16,
    channels: u16,
    rate: u32,
    bits: u16,
}

fn le_u16(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn le_u32(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

/// Parses RIFF/WAVE PCM16 (mono or stereo). Stereo is averaged to mono and
/// samples are scaled by 1/32768.
pub fn decode_wav_bytes(bytes: &[u8]) -> Result<Waveform> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(Error::Format("not a RIFF/WAVE file".into()));
    }
    let mut fmt: Option<Fmt> = None;
    let mut data: Option<&[u8]> = None;
    let mut seen = Vec::new();
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = String::from_utf8_lossy(&bytes[pos..pos + 4]).into_owned();
        let size = le_u32(bytes, pos + 4) as usize;
        let body_start = pos + 8;
        let body_end = body_start.saturating_add(size).min(bytes.len());
        let body = &bytes[body_start..body_end];
        seen.push(format!("{id}({size})"));
        match id.as_str() {
            "fmt " => {
                if body.len() < 16 {
                    return Err(Error::Format(format!("fmt chunk too short ({} bytes)", body.len())));
                }
                let mut format = le_u16(body, 0);
                if format == FORMAT_EXTENSIBLE && body.len() >= 26 {
                    // first two bytes of the subformat GUID carry the format tag
                    format = le_u16(body, 24);
                }
                fmt = Some(Fmt {
                    format,
                    channels: le_u16(body, 2),
                    rate: le_u32(body, 4),
                    bits: le_u16(body, 14),
                });
            }
            "data" => data = Some(body),
            _ => {}
        }
        pos = body_start.saturating_add(size).saturating_add(size & 1);
    }

    let chunks = seen.join(", ");
    let fmt = fmt.ok_or_else(|| Error::Format(format!("missing fmt chunk; chunks: [{chunks}]")))?;
    if fmt.format != FORMAT_PCM {
        return Err(Error::Format(format!(
            "unsupported format tag {:#06x} (only PCM); chunks: [{chunks}]",
            fmt.format
        )));
    }
    if fmt.bits != 16 {
        return Err(Error::Format(format!(
            "unsupported bit depth {} (only 16); chunks: [{chunks}]",
            fmt.bits
        )));
    }
    if !(1..=2).contains(&fmt.channels) {
        return Err(Error::Format(format!(
            "unsupported channel count {}; chunks: [{chunks}]",
            fmt.channels
        )));
    }
    if fmt.rate == 0 {
        return Err(Error::Format(format!("sample rate is zero; chunks: [{chunks}]")));
    }
    let data = data.ok_or_else(|| Error::Format(format!("missing data chunk; chunks: [{chunks}]")))?;

    let frame_bytes = 2 * fmt.channels as usize;
    let samples = data
        .chunks_exact(frame_bytes)
        .map(|frame| {
            let sum: f32 = frame
                .chunks_exact(2)
                .map(|s| f32::from(i16::from_le_bytes([s[0], s[1]])) / 32768.0)
                .sum();
            sum / f32::from(fmt.channels)
        })
        .collect();
    Ok(Waveform { samples, rate: fmt.rate })
}

/// Quantizes [−1, 1] floats to 16-bit PCM.
pub fn quantize_pcm16(x: f32) -> i16 {
    (x * 32768.0).round().clamp(-32768.0, 32767.0) as i16
}

/// Encodes interleaved 16-bit samples as a canonical 44-byte-header WAV.
pub fn encode_wav_pcm16(interleaved: &[i16], channels: u16, rate: u32) -> Vec<u8> {
    let data_len = (interleaved.len() * 2) as u32;
    let block_align = channels * 2;
    let mut out = Vec::with_capacity(44 + data_len as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&FORMAT_PCM.to_le_bytes());
    out.extend_from_slice(&channels.to_le_bytes());
    out.extend_from_slice(&rate.to_le_bytes());
    out.extend_from_slice(&(rate * u32::from(block_align)).to_le_bytes());
    out.extend_from_slice(&block_align.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for s in interleaved {
        out.extend_from_slice(&s.to_le_bytes());
    }
    out
}

pub fn write_wav_pcm16(path: impl AsRef<Path>, interleaved: &[i16], channels: u16, rate: u32) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_wav_pcm16(interleaved, channels, rate)).map_err(|e| Error::io(path, e))
}
