//! Glottal closure instants from the linear-prediction residual.
//!
//! The residual is taken from a 4 kHz low-passed copy of the signal, with its
//! polarity set so the largest excursions point down. Candidates are the
//! negative local extrema of the residual inside voiced regions. A Viterbi pass over the candidates of each voiced segment picks
//! the chain that maximises residual strength while keeping every spacing
//! within ±30% of the local pitch period. Each chosen extremum is moved back
//! to the onset of its lobe, since the lobe trails the closure by a few samples.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{AudioSignal, FrameGrid, PitchTrack, F0_MAX_HZ, F0_MIN_HZ};

use super::lpc::lp_residual;

pub const LP_ORDER: usize = 18;
pub const LP_BLOCK_MS: f64 = 25.0;
pub const PERIOD_TOLERANCE: f64 = 0.3;
// weight of the spacing penalty against normalised residual strength
const SPACING_WEIGHT: f64 = 2.0;
// segments shorter than this many voiced frames are ignored
const MIN_SEGMENT_FRAMES: usize = 3;
// furthest the onset refinement may move an instant, in samples
const LEADING_EDGE_MAX: usize = 8;
// aspiration dominates the residual above this
const LOWPASS_HZ: f64 = 4000.0;
const LOWPASS_HALF_TAPS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GciSequence {
    /// Strictly increasing sample indices.
    pub instants: Vec<usize>,
}

impl GciSequence {
    pub fn len(&self) -> usize {
        self.instants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instants.is_empty()
    }

    /// Writes one sample index per line under a `gci_sample` header.
    pub fn write_csv(&self, path: &std::path::Path, provenance: &str) -> Result<()> {
        let mut text = format!("# {provenance}\ngci_sample\n");
        for g in &self.instants {
            text.push_str(&format!("{g}\n"));
        }
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

pub fn min_spacing(sample_rate: u32) -> usize {
    (sample_rate as f64 / F0_MAX_HZ).floor() as usize
}

pub fn max_spacing(sample_rate: u32) -> usize {
    (sample_rate as f64 / F0_MIN_HZ).ceil() as usize - 1
}

/// LP residual of the low-passed signal, sign-normalised so that closures
/// are negative-going.
pub fn polarity_normalised_residual(x: &[f64], sample_rate: u32) -> Vec<f64> {
    let block = (LP_BLOCK_MS * sample_rate as f64 / 1000.0).round() as usize;
    let hop = (sample_rate as f64 / 100.0).round() as usize;
    let smoothed = lowpass(x, LOWPASS_HZ / sample_rate as f64);
    let mut e = lp_residual(&smoothed, LP_ORDER, block, hop);
    // closures are the most extreme residual excursions; make them negative
    let mut sorted = e.clone();
    sorted.sort_by(f64::total_cmp);
    let k = sorted.len() / 500;
    if !sorted.is_empty() && sorted[sorted.len() - 1 - k] > -sorted[k] {
        e.iter_mut().for_each(|v| *v = -*v);
    }
    e
}

/// Zero-phase Hamming-windowed sinc low-pass, cutoff as a fraction of the
/// sample rate.
fn lowpass(x: &[f64], cutoff: f64) -> Vec<f64> {
    let half = LOWPASS_HALF_TAPS as isize;
    let h: Vec<f64> = (-half..=half)
        .map(|m| {
            let sinc = if m == 0 { 2.0 * cutoff } else { (2.0 * PI * cutoff * m as f64).sin() / (PI * m as f64) };
            sinc * (0.54 + 0.46 * (PI * m as f64 / half as f64).cos())
        })
        .collect();
    (0..x.len() as isize)
        .map(|n| {
            h.iter()
                .enumerate()
                .filter_map(|(i, &c)| {
                    let k = n + i as isize - half;
                    (k >= 0 && (k as usize) < x.len()).then(|| c * x[k as usize])
                })
                .sum()
        })
        .collect()
}

/// Voiced sample ranges `[start, end)` from runs of voiced pitch frames.
fn voiced_segments(pitch: &PitchTrack, grid: FrameGrid, n_samples: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < pitch.len() {
        if pitch.f0_hz[i] <= 0.0 {
            i += 1;
            continue;
        }
        let j = (i..pitch.len()).find(|&k| pitch.f0_hz[k] <= 0.0).unwrap_or(pitch.len());
        if j - i >= MIN_SEGMENT_FRAMES {
            let start = i * grid.hop;
            let end = ((j - 1) * grid.hop + grid.frame_len).min(n_samples);
            out.push((start, end));
        }
        i = j;
    }
    out
}

pub fn detect_gci(signal: &AudioSignal, pitch: &PitchTrack, grid: FrameGrid) -> Result<GciSequence> {
    let x = signal.samples();
    let segments = voiced_segments(pitch, grid, x.len());
    if segments.is_empty() {
        return Err(Error::NoVoicedContent);
    }
    let e = polarity_normalised_residual(x, signal.sample_rate());
    let lo_space = min_spacing(signal.sample_rate());
    let hi_space = max_spacing(signal.sample_rate());

    let mut instants = Vec::new();
    for (start, end) in segments {
        let chain = select_chain(&e, start, end, |n| pitch.t0_near(n, grid).unwrap_or(160), lo_space, hi_space);
        for g in chain.into_iter().map(|n| leading_edge(&e, n, start)) {
            if instants.last().is_none_or(|&p| g >= p + lo_space) {
                instants.push(g);
            }
        }
    }
    if instants.is_empty() {
        return Err(Error::NoVoicedContent);
    }
    Ok(GciSequence { instants })
}

/// The residual lobe of a closure peaks a few samples after the instant
/// itself; the first sample below half the lobe depth marks its onset.
fn leading_edge(e: &[f64], n: usize, floor: usize) -> usize {
    let half = 0.5 * e[n];
    let mut i = n;
    while i > floor && n - i < LEADING_EDGE_MAX && e[i - 1] < half {
        i -= 1;
    }
    i
}

fn select_chain(
    e: &[f64],
    start: usize,
    end: usize,
    t0_at: impl Fn(usize) -> usize,
    lo_space: usize,
    hi_space: usize,
) -> Vec<usize> {
    let lo = start.max(1);
    let hi = end.min(e.len().saturating_sub(1));
    if hi <= lo {
        return Vec::new();
    }
    let cands: Vec<usize> = (lo..hi).filter(|&n| e[n] < 0.0 && e[n] <= e[n - 1] && e[n] < e[n + 1]).collect();
    if cands.is_empty() {
        return Vec::new();
    }

    // strength: residual depth relative to the deepest value within one period
    let strength: Vec<f64> = cands
        .iter()
        .map(|&n| {
            let t0 = t0_at(n);
            let a = n.saturating_sub(t0).max(start);
            let b = (n + t0).min(end);
            let local = e[a..b].iter().fold(0.0f64, |m, v| m.max(-v));
            if local > 0.0 {
                -e[n] / local
            } else {
                0.0
            }
        })
        .collect();

    let mut score = vec![f64::NEG_INFINITY; cands.len()];
    let mut back = vec![usize::MAX; cands.len()];
    let mut first = 0;
    for i in 0..cands.len() {
        let n = cands[i];
        let t0 = t0_at(n) as f64;
        let min_d = ((1.0 - PERIOD_TOLERANCE) * t0).floor().max(lo_space as f64) as usize;
        let max_d = ((1.0 + PERIOD_TOLERANCE) * t0).ceil().min(hi_space as f64) as usize;
        // a chain may start at any candidate within one period of the segment start
        if n - start <= max_d {
            score[i] = strength[i];
        }
        while cands[first] + max_d < n {
            first += 1;
        }
        for j in first..i {
            let d = n - cands[j];
            if d < min_d || d > max_d || score[j] == f64::NEG_INFINITY {
                continue;
            }
            let s = score[j] + strength[i] - SPACING_WEIGHT * (d as f64 - t0).abs() / t0;
            if s > score[i] {
                score[i] = s;
                back[i] = j;
            }
        }
    }

    // the chain must end within one period of the segment end
    let best = (0..cands.len())
        .filter(|&i| score[i] > f64::NEG_INFINITY && end - cands[i] <= ((1.0 + PERIOD_TOLERANCE) * t0_at(cands[i]) as f64) as usize)
        .max_by(|&a, &b| score[a].total_cmp(&score[b]));
    let Some(mut i) = best else {
        return Vec::new();
    };
    let mut chain = vec![cands[i]];
    while back[i] != usize::MAX {
        i = back[i];
        chain.push(cands[i]);
    }
    chain.reverse();
    chain
}
