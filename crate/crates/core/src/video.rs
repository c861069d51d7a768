//! Frame-timestamp schedules under a frames-per-second rate and a frame cap.

use serde::Serialize;

use crate::error::{Error, Result};

/// Absorbs binary representation error when a decimal duration times the
/// rate should land on an integer (e.g. 0.29 s × 100).
const FLOOR_SLACK: f64 = 1e-9;

/// floor(x) tolerant of values a hair below an integer.
pub(crate) fn tolerant_floor(x: f64) -> u64 {
    (x + FLOOR_SLACK).floor().max(0.0) as u64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameSchedule {
    pub timestamps: Vec<f64>,
    pub fps: f64,
    pub cap: usize,
    pub truncated: bool,
}

impl FrameSchedule {
    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }
}

/// Mid-interval timestamps (k + 0.5)/fps for every whole frame period in
/// `duration`, or a single frame at duration/2 for clips shorter than one
/// period. Over the cap, `cap` frames are picked uniformly with both
/// endpoints kept.
pub fn schedule(duration: f64, fps: f64, cap: usize) -> Result<FrameSchedule> {
    if !(duration >= 0.0) || !duration.is_finite() {
        return Err(Error::domain(format!("schedule: duration {duration} must be >= 0")));
    }
    if !(fps > 0.0) || !fps.is_finite() {
        return Err(Error::domain(format!("schedule: fps {fps} must be > 0")));
    }
    if cap == 0 {
        return Err(Error::domain("schedule: cap must be >= 1"));
    }

    let raw = tolerant_floor(duration * fps) as usize;
    if raw == 0 {
        let timestamps = if duration > 0.0 { vec![duration / 2.0] } else { Vec::new() };
        return Ok(FrameSchedule { timestamps, fps, cap, truncated: false });
    }

    let at = |k: usize| (k as f64 + 0.5) / fps;
    if raw <= cap {
        return Ok(FrameSchedule {
            timestamps: (0..raw).map(at).collect(),
            fps,
            cap,
            truncated: false,
        });
    }

    let timestamps = if cap == 1 {
        vec![at(0)]
    } else {
        // round(j·(raw−1)/(cap−1)), half up, in integers
        let (span, steps) = ((raw - 1) as u128, (cap - 1) as u128);
        (0..cap as u128)
            .map(|j| at(((2 * j * span + steps) / (2 * steps)) as usize))
            .collect()
    };
    Ok(FrameSchedule { timestamps, fps, cap, truncated: true })
}
