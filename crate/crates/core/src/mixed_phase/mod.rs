//! Glottal closure detection, complex-cepstrum decomposition (CCD) of
//! GCI-centred frames and the T1/T2 glottal time constants.

mod cepstrum;
mod gci;
pub mod lpc;

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{blackman, AudioSignal, FrameGrid, PitchTrack};

pub use cepstrum::{ccd_frame, complex_cepstrum, from_cepstrum, unwrap_phase, CcdParts, ComplexCepstrum};
pub use gci::{detect_gci, max_spacing, min_spacing, polarity_normalised_residual, GciSequence, LP_ORDER, PERIOD_TOLERANCE};

/// Fraction of peak-to-peak amplitude above the cycle-start baseline that
/// marks the opening instant.
pub const OPENING_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CcdConfig {
    /// Analysis window length in pitch periods.
    pub window_periods: f64,
    /// Zero-padding factor before rounding the transform up to a power of two.
    pub padding: usize,
}

impl Default for CcdConfig {
    fn default() -> Self {
        Self { window_periods: 2.0, padding: 8 }
    }
}

impl CcdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.window_periods >= 1.0 && self.window_periods <= 8.0) {
            return Err(Error::InvalidConfig(format!(
                "CCD window of {} periods outside [1, 8]",
                self.window_periods
            )));
        }
        if self.padding == 0 {
            return Err(Error::InvalidConfig("CCD padding must be at least 1".into()));
        }
        Ok(())
    }

    fn n_fft(&self, window_len: usize) -> usize {
        (window_len * self.padding).next_power_of_two()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Landmarks {
    pub t_op: usize,
    pub t_max: usize,
    pub t_min: usize,
    /// Set when no minimum follows the maximum and the global minimum was used.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlottalCycle {
    /// One period of the anticausal component, ending at the closure.
    /// Polarity is fixed so the closure sample is negative.
    pub waveform: Vec<f64>,
    pub t0_samples: usize,
    pub gci: usize,
    pub landmarks: Option<Landmarks>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeConstants {
    pub t1: f64,
    pub t2: f64,
    pub degenerate: bool,
}

#[derive(Debug, Default)]
pub struct CcdOutput {
    pub cycles: Vec<GlottalCycle>,
    /// GCIs whose decomposition failed, with the reason.
    pub skipped: Vec<(usize, Error)>,
}

/// Decomposes the frame around every GCI. The local period comes from the
/// pitch track, falling back to the GCI spacing where the track is unvoiced.
pub fn ccd_decompose(
    signal: &AudioSignal,
    gci: &GciSequence,
    pitch: &PitchTrack,
    grid: FrameGrid,
    config: &CcdConfig,
) -> Result<CcdOutput> {
    config.validate()?;
    if gci.len() < 2 {
        return Err(Error::TooFewGcis { got: gci.len(), needed: 2 });
    }
    let g = &gci.instants;
    let x = signal.samples();
    let results: Vec<(usize, Result<GlottalCycle>)> = (0..g.len())
        .into_par_iter()
        .map(|i| {
            let spacing = if i > 0 { g[i] - g[i - 1] } else { g[1] - g[0] };
            let t0 = pitch.t0_near(g[i], grid).unwrap_or(spacing);
            (g[i], decompose_one(x, g[i], t0, config))
        })
        .collect();
    let mut out = CcdOutput::default();
    for (at, r) in results {
        match r {
            Ok(c) => out.cycles.push(c),
            Err(e) => out.skipped.push((at, e)),
        }
    }
    Ok(out)
}

fn decompose_one(x: &[f64], gci: usize, t0: usize, config: &CcdConfig) -> Result<GlottalCycle> {
    let len = ((config.window_periods * t0 as f64).round() as usize).max(2);
    let w = blackman(len);
    let start = gci as isize - (len / 2) as isize;
    let seg: Vec<f64> = (0..len)
        .map(|i| {
            let idx = start + i as isize;
            if idx >= 0 && (idx as usize) < x.len() {
                x[idx as usize] * w[i]
            } else {
                0.0
            }
        })
        .collect();
    let n_fft = config.n_fft(len);

    // origin at the largest-magnitude sample; earlier samples wrap to the tail
    let origin = seg
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mut buf = vec![0.0; n_fft];
    for (i, &v) in seg.iter().enumerate() {
        buf[(i + n_fft - origin) % n_fft] = v;
    }

    let parts = ccd_frame(&buf, n_fft)?;
    let xa = &parts.anticausal;
    let mut waveform: Vec<f64> = (1..t0).rev().map(|m| xa[n_fft - m]).chain([xa[0]]).collect();
    if waveform.last().is_some_and(|&v| v > 0.0) {
        waveform.iter_mut().for_each(|v| *v = -*v);
    }
    if waveform.iter().any(|v| !v.is_finite()) {
        return Err(Error::UnwrapFailure);
    }
    let mut cycle = GlottalCycle { waveform, t0_samples: t0, gci, landmarks: None };
    cycle.landmarks = find_landmarks(&cycle.waveform).ok();
    Ok(cycle)
}

/// Opening, peak and closure landmarks of one cycle.
pub fn find_landmarks(w: &[f64]) -> Result<Landmarks> {
    if w.len() < 3 {
        return Err(Error::DegenerateCycle("cycle shorter than 3 samples"));
    }
    let (lo, hi) = w.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let p2p = hi - lo;
    if !(p2p > 1e-12 * hi.abs().max(lo.abs())) || !p2p.is_finite() {
        return Err(Error::DegenerateCycle("flat waveform"));
    }
    if w.windows(2).all(|p| p[1] >= p[0]) || w.windows(2).all(|p| p[1] <= p[0]) {
        return Err(Error::DegenerateCycle("monotone waveform"));
    }
    let argmax = |s: &[f64]| s.iter().enumerate().fold(0, |b, (i, &v)| if v > s[b] { i } else { b });
    let argmin = |s: &[f64]| s.iter().enumerate().fold(0, |b, (i, &v)| if v < s[b] { i } else { b });

    let t_max = argmax(w);
    let (t_min, degenerate) = if t_max + 1 < w.len() {
        (t_max + 1 + argmin(&w[t_max + 1..]), false)
    } else {
        (argmin(w), true)
    };
    let threshold = w[0] + OPENING_THRESHOLD * p2p;
    let t_op = (0..=t_max).find(|&i| w[i] > threshold).unwrap_or(t_max);
    Ok(Landmarks { t_op, t_max, t_min, degenerate })
}

/// `T1 = (t_min − t_max)/T0`, `T2 = (t_min − t_op)/T0`, clamped to [0, 1].
pub fn extract_time_constants(cycle: &GlottalCycle) -> Result<TimeConstants> {
    if cycle.t0_samples == 0 || cycle.waveform.len() != cycle.t0_samples {
        return Err(Error::InvalidInput(format!(
            "cycle of {} samples does not match period {}",
            cycle.waveform.len(),
            cycle.t0_samples
        )));
    }
    let l = match cycle.landmarks {
        Some(l) => l,
        None => find_landmarks(&cycle.waveform)?,
    };
    let t0 = cycle.t0_samples as f64;
    let t1 = ((l.t_min as f64 - l.t_max as f64) / t0).clamp(0.0, 1.0);
    let t2 = ((l.t_min as f64 - l.t_op as f64) / t0).clamp(0.0, 1.0);
    Ok(TimeConstants { t1, t2: t2.max(t1), degenerate: l.degenerate })
}

/// Linear interpolation of values known at `times` onto `targets`, holding
/// the end values constant outside the known range.
pub fn interpolate_stream(times: &[f64], values: &[f64], targets: &[f64]) -> Result<Vec<f64>> {
    if times.is_empty() || times.len() != values.len() {
        return Err(Error::EmptyStream);
    }
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
    let t: Vec<f64> = order.iter().map(|&i| times[i]).collect();
    let v: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let last = t.len() - 1;
    Ok(targets
        .iter()
        .map(|&x| {
            if x <= t[0] {
                return v[0];
            }
            if x >= t[last] {
                return v[last];
            }
            let j = t.partition_point(|&ti| ti <= x);
            let (t0, t1) = (t[j - 1], t[j]);
            if t1 == t0 {
                v[j]
            } else {
                v[j - 1] + (v[j] - v[j - 1]) * (x - t0) / (t1 - t0)
            }
        })
        .collect())
}

/// Writes one cycle per line: `gci,t0,v0,v1,...`.
pub fn write_cycles_csv(path: &Path, cycles: &[GlottalCycle], provenance: &str) -> Result<()> {
    let mut text = format!("# {provenance}\ngci,t0,waveform...\n");
    for c in cycles {
        text.push_str(&format!("{},{}", c.gci, c.t0_samples));
        for v in &c.waveform {
            text.push_str(&format!(",{v}"));
        }
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
