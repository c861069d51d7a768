use std::f64::consts::PI;
use std::path::Path;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::image::{decode_tensor, encode_tensor};

pub const SAMPLE_RATE: u32 = 16_000;
pub const N_FFT: usize = 400;
pub const HOP: usize = 160;
pub const N_MELS: usize = 128;
/// Dynamic range kept below the peak, in log10 units.
pub const LOG_RANGE: f64 = 8.0;
const LOG_EPS: f64 = 1e-10;

const MEL_MAGIC: &[u8; 4] = b"MELS";

/// Log-mel features, `n_mels` rows × `n_frames` columns, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MelSpectrogram {
    pub n_mels: usize,
    pub n_frames: usize,
    pub values: Vec<f32>,
}

impl MelSpectrogram {
    pub fn get(&self, mel: usize, frame: usize) -> f32 {
        self.values[mel * self.n_frames + frame]
    }

    /// Mel bin with the largest value in `frame`.
    pub fn argmax_bin(&self, frame: usize) -> usize {
        (0..self.n_mels)
            .max_by(|&a, &b| self.get(a, frame).total_cmp(&self.get(b, frame)))
            .unwrap_or(0)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        encode_tensor(MEL_MAGIC, &[self.n_mels, self.n_frames], &self.values)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let (dims, values) = decode_tensor(MEL_MAGIC, 2, bytes)?;
        Ok(MelSpectrogram { n_mels: dims[0], n_frames: dims[1], values })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }
}

/// Slaney-style mel scale: linear below 1 kHz, logarithmic above.
pub fn hz_to_mel(hz: f64) -> f64 {
    let f_sp = 200.0 / 3.0;
    let min_log_hz = 1000.0;
    let min_log_mel = min_log_hz / f_sp;
    let logstep = 6.4f64.ln() / 27.0;
    if hz >= min_log_hz {
        min_log_mel + (hz / min_log_hz).ln() / logstep
    } else {
        hz / f_sp
    }
}

pub fn mel_to_hz(mel: f64) -> f64 {
    let f_sp = 200.0 / 3.0;
    let min_log_hz = 1000.0;
    let min_log_mel = min_log_hz / f_sp;
    let logstep = 6.4f64.ln() / 27.0;
    if mel >= min_log_mel {
        min_log_hz * (logstep * (mel - min_log_mel)).exp()
    } else {
        f_sp * mel
    }
}

/// Triangular filters with area normalization; `n_mels` rows of
/// `N_FFT/2 + 1` weights.
pub fn mel_filterbank(n_mels: usize, f_max: f64) -> Vec<Vec<f64>> {
    let n_bins = N_FFT / 2 + 1;
    let mel_max = hz_to_mel(f_max);
    let edges: Vec<f64> = (0..n_mels + 2)
        .map(|i| mel_to_hz(mel_max * i as f64 / (n_mels + 1) as f64))
        .collect();
    let bin_hz = |k: usize| k as f64 * f64::from(SAMPLE_RATE) / N_FFT as f64;
    (0..n_mels)
        .map(|m| {
            let (lo, center, hi) = (edges[m], edges[m + 1], edges[m + 2]);
            let norm = 2.0 / (hi - lo);
            (0..n_bins)
                .map(|k| {
                    let f = bin_hz(k);
                    let rising = (f - lo) / (center - lo);
                    let falling = (hi - f) / (hi - center);
                    rising.min(falling).max(0.0) * norm
                })
                .collect()
        })
        .collect()
}

/// Center frequency of each filter.
pub fn mel_centers(n_mels: usize, f_max: f64) -> Vec<f64> {
    let mel_max = hz_to_mel(f_max);
    (1..=n_mels)
        .map(|i| mel_to_hz(mel_max * i as f64 / (n_mels + 1) as f64))
        .collect()
}

/// Mirror index into [0, len) as with reflect padding, repeating the
/// reflection when the pad exceeds the signal.
fn reflect(i: i64, len: usize) -> usize {
    if len == 1 {
        return 0;
    }
    let period = 2 * (len as i64 - 1);
    let m = i.rem_euclid(period);
    (if m < len as i64 { m } else { period - m }) as usize
}

/// Frames produced for `len` samples: ceil(len / hop), at least one.
pub fn frame_count(len: usize) -> usize {
    len.div_ceil(HOP).max(1)
}

/// 128-bin log-mel spectrogram of 16 kHz audio: periodic Hann window of
/// 400, hop 160, reflect padding of 200 on each side, power spectrum,
/// log10 floored 8 below the peak, then (x + 4) / 4.
pub fn log_mel(samples: &[f32]) -> Result<MelSpectrogram> {
    if samples.is_empty() {
        return Err(Error::domain("log_mel: empty input"));
    }
    let n_frames = frame_count(samples.len());
    let pad = (N_FFT / 2) as i64;
    let window: Vec<f64> = (0..N_FFT)
        .map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / N_FFT as f64).cos())
        .collect();
    let filters = mel_filterbank(N_MELS, f64::from(SAMPLE_RATE) / 2.0);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(N_FFT);
    let n_bins = N_FFT / 2 + 1;

    let mut log_spec = vec![0.0f64; N_MELS * n_frames];
    let mut buf = vec![Complex::new(0.0, 0.0); N_FFT];
    let mut power = vec![0.0f64; n_bins];
    for frame in 0..n_frames {
        let start = (frame * HOP) as i64 - pad;
        for (n, slot) in buf.iter_mut().enumerate() {
            let x = f64::from(samples[reflect(start + n as i64, samples.len())]);
            *slot = Complex::new(x * window[n], 0.0);
        }
        fft.process(&mut buf);
        for (p, c) in power.iter_mut().zip(&buf) {
            *p = c.norm_sqr();
        }
        for (m, filter) in filters.iter().enumerate() {
            let e: f64 = filter.iter().zip(&power).map(|(w, p)| w * p).sum();
            log_spec[m * n_frames + frame] = e.max(LOG_EPS).log10();
        }
    }

    let peak = log_spec.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let floor = peak - LOG_RANGE;
    let values = log_spec
        .into_iter()
        .map(|v| ((v.max(floor) + 4.0) / 4.0) as f32)
        .collect();
    Ok(MelSpectrogram { n_mels: N_MELS, n_frames, values })
}
