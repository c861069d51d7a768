use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const TARGET_RATE: u32 = 16_000;
pub const MIN_RATE: u32 = 8_000;
pub const MAX_RATE: u32 = 192_000;

/// Sinc zero crossings on each side of the kernel center.
const ZERO_CROSSINGS: f64 = 32.0;
const KAISER_BETA: f64 = 14.0;
/// Cutoff as a fraction of the lower of the two Nyquist frequencies.
const ROLLOFF: f64 = 0.9;
/// Largest precomputed phase table, in coefficients.
const MAX_TABLE: usize = 1 << 22;

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Modified Bessel function of the first kind, order zero.
fn bessel_i0(x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    while term > sum * 1e-17 {
        term *= (half / k) * (half / k);
        sum += term;
        k += 1.0;
    }
    sum
}

/// Rational polyphase resampler with a Kaiser-windowed sinc kernel.
///
/// Output sample k sits at input position k·M/L. Each of the L phases has
/// its own tap set, normalized to unit sum so constants pass exactly.
/// Reads beyond either end of the input repeat the edge sample.
pub struct Resampler {
    up: u64,
    down: u64,
    /// Taps on each side of the base index.
    reach: i64,
    cutoff: f64,
    half_width: f64,
    i0_beta: f64,
    table: Option<Vec<f64>>,
}

impl Resampler {
    pub fn new(from: u32, to: u32) -> Self {
        let g = gcd(u64::from(from), u64::from(to));
        let (up, down) = (u64::from(to) / g, u64::from(from) / g);
        // cycles per input sample
        let cutoff = ROLLOFF * 0.5 * (f64::from(to) / f64::from(from)).min(1.0);
        let half_width = ZERO_CROSSINGS / (2.0 * cutoff);
        let reach = half_width.ceil() as i64 + 1;
        let mut r = Resampler {
            up,
            down,
            reach,
            cutoff,
            half_width,
            i0_beta: bessel_i0(KAISER_BETA),
            table: None,
        };
        let taps = r.taps_per_phase();
        if (up as usize).saturating_mul(taps) <= MAX_TABLE {
            let mut table = vec![0.0; up as usize * taps];
            for (phase, chunk) in table.chunks_exact_mut(taps).enumerate() {
                r.fill_phase(phase as u64, chunk);
            }
            r.table = Some(table);
        }
        r
    }

    fn taps_per_phase(&self) -> usize {
        (2 * self.reach + 1) as usize
    }

    fn kernel(&self, t: f64) -> f64 {
        if t.abs() >= self.half_width {
            return 0.0;
        }
        let x = 2.0 * self.cutoff * t;
        let sinc = if x == 0.0 { 1.0 } else { (PI * x).sin() / (PI * x) };
        let ratio = t / self.half_width;
        let window = bessel_i0(KAISER_BETA * (1.0 - ratio * ratio).sqrt()) / self.i0_beta;
        sinc * window
    }

    /// Taps for input offsets −reach..=reach around the base index.
    fn fill_phase(&self, phase: u64, out: &mut [f64]) {
        let frac = phase as f64 / self.up as f64;
        let mut sum = 0.0;
        for (slot, j) in out.iter_mut().zip(-self.reach..=self.reach) {
            *slot = self.kernel(frac - j as f64);
            sum += *slot;
        }
        for slot in out.iter_mut() {
            *slot /= sum;
        }
    }

    pub fn output_len(&self, input_len: usize) -> usize {
        let n = input_len as u128 * u128::from(self.up);
        let d = u128::from(self.down);
        ((2 * n + d) / (2 * d)) as usize
    }

    pub fn process(&self, input: &[f32]) -> Vec<f32> {
        if input.is_empty() {
            return Vec::new();
        }
        let last = input.len() as i64 - 1;
        let taps = self.taps_per_phase();
        let mut scratch = vec![0.0; taps];
        (0..self.output_len(input.len()))
            .map(|k| {
                let pos = k as u128 * u128::from(self.down);
                let base = (pos / u128::from(self.up)) as i64;
                let phase = (pos % u128::from(self.up)) as u64;
                let coeffs: &[f64] = match &self.table {
                    Some(t) => &t[phase as usize * taps..(phase as usize + 1) * taps],
                    None => {
                        self.fill_phase(phase, &mut scratch);
                        &scratch
                    }
                };
                let mut acc = 0.0;
                for (c, j) in coeffs.iter().zip(-self.reach..=self.reach) {
                    let idx = (base + j).clamp(0, last) as usize;
                    acc += c * f64::from(input[idx]);
                }
                acc as f32
            })
            .collect()
    }
}

/// Resamples to 16 kHz. Input already at 16 kHz is returned unchanged.
pub fn resample_16k(samples: &[f32], rate: u32) -> Result<Vec<f32>> {
    if !(MIN_RATE..=MAX_RATE).contains(&rate) {
        return Err(Error::domain(format!(
            "resample: rate {rate} Hz outside [{MIN_RATE}, {MAX_RATE}]"
        )));
    }
    if rate == TARGET_RATE {
        return Ok(samples.to_vec());
    }
    Ok(Resampler::new(rate, TARGET_RATE).process(samples))
}
