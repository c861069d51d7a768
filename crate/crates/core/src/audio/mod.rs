//! Audio front-end: PCM WAV decoding, resampling to 16 kHz, log-mel
//! features and per-file token accounting.

mod mel;
mod resample;
mod wav;

use std::path::Path;

use serde::Serialize;

pub use mel::{
    frame_count, hz_to_mel, log_mel, mel_centers, mel_filterbank, mel_to_hz, MelSpectrogram, HOP,
    N_FFT, N_MELS,
};
pub use resample::{resample_16k, Resampler, MAX_RATE, MIN_RATE, TARGET_RATE};
pub use wav::{
    decode_wav, decode_wav_bytes, encode_wav_pcm16, quantize_pcm16, write_wav_pcm16, Waveform,
};

use crate::error::Result;
use crate::layout::audio_budget;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AudioProfile {
    pub source_rate: u32,
    /// Seconds.
    pub duration: f64,
    /// Samples after resampling to 16 kHz.
    pub resampled_len: usize,
    pub n_frames: usize,
    pub n_tokens: usize,
    /// RMS level of the 16 kHz signal.
    pub rms: f64,
}

fn rms(samples: &[f32]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    (samples.iter().map(|&s| f64::from(s).powi(2)).sum::<f64>() / samples.len() as f64).sqrt()
}

/// Profiles a decoded waveform and returns its mel features alongside.
pub fn analyze(wave: &Waveform) -> Result<(AudioProfile, Option<MelSpectrogram>)> {
    let resampled = resample_16k(&wave.samples, wave.rate)?;
    let duration = wave.duration();
    let mel = if resampled.is_empty() { None } else { Some(log_mel(&resampled)?) };
    let profile = AudioProfile {
        source_rate: wave.rate,
        duration,
        resampled_len: resampled.len(),
        n_frames: mel.as_ref().map_or(0, |m| m.n_frames),
        n_tokens: audio_budget(duration),
        rms: rms(&resampled),
    };
    Ok((profile, mel))
}

pub fn profile(path: impl AsRef<Path>) -> Result<AudioProfile> {
    Ok(analyze(&decode_wav(path)?)?.0)
}
