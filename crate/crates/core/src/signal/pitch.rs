//! Autocorrelation pitch tracker.
//!
//! Each frame's normalised autocorrelation is searched over lags covering
//! 60-500 Hz. The shortest lag whose local peak reaches 85% of the best
//! peak wins (guards against picking a multiple of the period); frames
//! whose best peak stays under the voicing threshold are unvoiced. The
//! raw track is then median filtered over five frames.

use super::{AudioSignal, FrameGrid};

pub const F0_MIN_HZ: f64 = 60.0;
pub const F0_MAX_HZ: f64 = 500.0;
pub const VOICING_THRESHOLD: f64 = 0.3;
const MEDIAN_SPAN: usize = 5;
const OCTAVE_RATIO: f64 = 0.85;

#[derive(Debug, Clone, PartialEq)]
pub struct PitchTrack {
    /// Per-frame F0 in Hz, 0 when unvoiced.
    pub f0_hz: Vec<f64>,
    /// Per-frame period in samples, 0 when unvoiced.
    pub t0_samples: Vec<usize>,
}

impl PitchTrack {
    pub fn from_f0(f0_hz: Vec<f64>, sample_rate: u32) -> Self {
        let t0_samples = f0_hz
            .iter()
            .map(|&f| if f > 0.0 { (sample_rate as f64 / f).round() as usize } else { 0 })
            .collect();
        Self { f0_hz, t0_samples }
    }

    pub fn len(&self) -> usize {
        self.f0_hz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f0_hz.is_empty()
    }

    pub fn voiced_ratio(&self) -> f64 {
        if self.f0_hz.is_empty() {
            return 0.0;
        }
        self.f0_hz.iter().filter(|&&f| f > 0.0).count() as f64 / self.f0_hz.len() as f64
    }

    /// Median F0 over voiced frames, if any.
    pub fn median_voiced_f0(&self) -> Option<f64> {
        let mut v: Vec<f64> = self.f0_hz.iter().copied().filter(|&f| f > 0.0).collect();
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        Some(median_sorted(&v))
    }

    /// Period at the frame nearest to `sample`, falling back to the median
    /// voiced period when that frame is unvoiced.
    pub fn t0_near(&self, sample: usize, grid: FrameGrid) -> Option<usize> {
        if self.is_empty() {
            return None;
        }
        let centre = sample.saturating_sub(grid.frame_len / 2);
        let i = ((centre as f64 / grid.hop as f64).round() as usize).min(self.len() - 1);
        match self.t0_samples[i] {
            0 => self
                .median_voiced_f0()
                .map(|f| (grid.sample_rate as f64 / f).round() as usize),
            t => Some(t),
        }
    }
}

fn median_sorted(v: &[f64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn estimate_f0(signal: &AudioSignal, grid: FrameGrid) -> PitchTrack {
    let x = signal.samples();
    let sr = signal.sample_rate() as f64;
    let n_frames = grid.n_frames(x.len());
    let raw: Vec<f64> = (0..n_frames)
        .map(|i| {
            let start = i * grid.hop;
            frame_f0(&x[start..start + grid.frame_len], sr)
        })
        .collect();
    PitchTrack::from_f0(median_filter(&raw, MEDIAN_SPAN), signal.sample_rate())
}

fn frame_f0(frame: &[f64], sr: f64) -> f64 {
    let len = frame.len();
    let mean = frame.iter().sum::<f64>() / len as f64;
    let x: Vec<f64> = frame.iter().map(|v| v - mean).collect();
    let min_lag = (sr / F0_MAX_HZ).floor() as usize;
    let max_lag = ((sr / F0_MIN_HZ).ceil() as usize).min(len.saturating_sub(2));
    if min_lag + 2 > max_lag {
        return 0.0;
    }

    // prefix sums of x² give each lagged segment energy in O(1)
    let mut energy = vec![0.0; len + 1];
    for (i, v) in x.iter().enumerate() {
        energy[i + 1] = energy[i] + v * v;
    }
    if energy[len] <= 1e-20 {
        return 0.0;
    }

    let r: Vec<f64> = (0..=max_lag + 1)
        .map(|lag| {
            if lag < min_lag.saturating_sub(1) || lag >= len {
                return 0.0;
            }
            let m = len - lag;
            let num: f64 = x[..m].iter().zip(&x[lag..]).map(|(a, b)| a * b).sum();
            let den = (energy[m] * (energy[len] - energy[lag])).sqrt();
            if den > 0.0 {
                num / den
            } else {
                0.0
            }
        })
        .collect();

    let peaks: Vec<usize> = (min_lag.max(1)..=max_lag)
        .filter(|&l| r[l] >= r[l - 1] && r[l] > r[l + 1])
        .collect();
    let best = peaks.iter().map(|&l| r[l]).fold(f64::NEG_INFINITY, f64::max);
    if !(best >= VOICING_THRESHOLD) {
        return 0.0;
    }
    let lag = *peaks
        .iter()
        .find(|&&l| r[l] >= OCTAVE_RATIO * best)
        .expect("best peak is itself a candidate");

    let (a, b, c) = (r[lag - 1], r[lag], r[lag + 1]);
    let denom = a - 2.0 * b + c;
    let shift = if denom.abs() > 1e-12 {
        (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
    } else {
        0.0
    };
    let f0 = sr / (lag as f64 + shift);
    if (F0_MIN_HZ..=F0_MAX_HZ).contains(&f0) {
        f0
    } else {
        0.0
    }
}

fn median_filter(x: &[f64], span: usize) -> Vec<f64> {
    let half = span / 2;
    (0..x.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(x.len());
            let mut w = x[lo..hi].to_vec();
            w.sort_by(f64::total_cmp);
            median_sorted(&w)
        })
        .collect()
}
