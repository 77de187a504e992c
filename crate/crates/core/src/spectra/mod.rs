//! Magnitude and group-delay time-frequency representations.
//!
//! All group-delay variants use the unwrapping-free form
//! `τ(ω) = (X_R·Y_R + X_I·Y_I) / |X(ω)|²` with `Y = DFT(n·x(n))`. Bins whose
//! power falls below [`SPIKE_GUARD`] times the frame maximum are zeroed so
//! every matrix stays finite.

mod export;

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{chirp_dft, fft_in_place, ifft_in_place, rfft_padded, Frame, FrameGrid, PitchTrack};

pub use export::{write_csv, write_pgm, write_png, ExportFormat};

/// Relative power floor below which group delay is forced to zero.
pub const SPIKE_GUARD: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpectrogramKind {
    Fm,
    Smooth,
    ModGd,
    PpGd,
    Cgd,
}

impl SpectrogramKind {
    pub const ALL: [SpectrogramKind; 5] = [Self::Fm, Self::Smooth, Self::ModGd, Self::PpGd, Self::Cgd];

    pub fn name(self) -> &'static str {
        match self {
            Self::Fm => "FM",
            Self::Smooth => "SMOOTH",
            Self::ModGd => "MODGD",
            Self::PpGd => "PPGD",
            Self::Cgd => "CGD",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name().eq_ignore_ascii_case(s))
    }

    /// Magnitude kinds carry `|X|`; the rest carry delays.
    pub fn is_magnitude(self) -> bool {
        matches!(self, Self::Fm | Self::Smooth)
    }
}

impl fmt::Display for SpectrogramKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Frames × non-negative frequency bins.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    pub data: Vec<Vec<f64>>,
    pub kind: SpectrogramKind,
    pub hop_ms: f64,
    pub bin_hz: f64,
}

impl Spectrogram {
    pub fn n_frames(&self) -> usize {
        self.data.len()
    }

    pub fn n_bins(&self) -> usize {
        self.data.first().map_or(0, Vec::len)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_frames(), self.n_bins())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModGdConfig {
    pub alpha: f64,
    pub gamma: f64,
    pub lifter_len: usize,
}

impl Default for ModGdConfig {
    fn default() -> Self {
        Self {
            alpha: 0.4,
            gamma: 0.9,
            lifter_len: 8,
        }
    }
}

impl ModGdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) || !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "ModGD exponents must lie in (0, 1], got alpha={} gamma={}",
                self.alpha, self.gamma
            )));
        }
        if self.lifter_len == 0 {
            return Err(Error::InvalidConfig("lifter length must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CgdConfig {
    pub rho: f64,
}

impl Default for CgdConfig {
    fn default() -> Self {
        Self { rho: 1.12 }
    }
}

impl CgdConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rho > 1.0 && self.rho.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("CGD radius must exceed 1, got {}", self.rho)))
        }
    }
}

/// Spectra of `x(n)` and `n·x(n)`.
struct GdParts {
    x: Vec<Complex64>,
    y: Vec<Complex64>,
}

impl GdParts {
    fn new(x: &[f64], n_fft: usize) -> Result<Self> {
        if x.len() > n_fft {
            return Err(Error::FrameTooLong { len: x.len(), n_fft });
        }
        let ramp: Vec<f64> = x.iter().enumerate().map(|(n, v)| n as f64 * v).collect();
        Ok(Self {
            x: rfft_padded(x, n_fft),
            y: rfft_padded(&ramp, n_fft),
        })
    }

    fn numerator(&self, k: usize) -> f64 {
        self.x[k].re * self.y[k].re + self.x[k].im * self.y[k].im
    }

    fn power(&self, k: usize) -> f64 {
        self.x[k].norm_sqr()
    }

    fn power_floor(&self) -> f64 {
        SPIKE_GUARD * self.x.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max)
    }
}

fn half_len(n_fft: usize) -> usize {
    n_fft / 2 + 1
}

fn guarded_delay(parts: &GdParts, n_bins: usize) -> Vec<f64> {
    let floor = parts.power_floor();
    (0..n_bins)
        .map(|k| {
            let p = parts.power(k);
            if p < floor || p == 0.0 {
                0.0
            } else {
                parts.numerator(k) / p
            }
        })
        .collect()
}

/// Group delay of a frame in samples, over the `n_fft/2 + 1` non-negative bins.
pub fn group_delay_raw(frame: &Frame, n_fft: usize) -> Result<Vec<f64>> {
    if frame.is_zero() {
        return Err(Error::ZeroFrame);
    }
    let parts = GdParts::new(&frame.samples, n_fft)?;
    Ok(guarded_delay(&parts, half_len(n_fft)))
}

pub fn fm_frame(frame: &Frame, n_fft: usize) -> Result<Vec<f64>> {
    if frame.len() > n_fft {
        return Err(Error::FrameTooLong { len: frame.len(), n_fft });
    }
    let spec = rfft_padded(&frame.samples, n_fft);
    Ok(spec[..half_len(n_fft)].iter().map(|v| v.norm()).collect())
}

pub fn modgd_frame(frame: &Frame, cfg: &ModGdConfig, n_fft: usize) -> Result<Vec<f64>> {
    cfg.validate()?;
    if frame.is_zero() {
        return Err(Error::ZeroFrame);
    }
    let parts = GdParts::new(&frame.samples, n_fft)?;
    let floor = parts.power_floor();
    let smooth = cepstral_smooth(&parts.x, cfg.lifter_len, floor.sqrt());
    Ok((0..half_len(n_fft))
        .map(|k| {
            if parts.power(k) < floor {
                return 0.0;
            }
            let tau = parts.numerator(k) / smooth[k].powf(2.0 * cfg.gamma);
            tau.signum() * tau.abs().powf(cfg.alpha)
        })
        .collect())
}

/// Keeps the first `lifter_len` real-cepstrum coefficients of `log|X|`
/// (plus their mirror images) and maps back to a magnitude spectrum.
fn cepstral_smooth(spec: &[Complex64], lifter_len: usize, mag_floor: f64) -> Vec<f64> {
    let n = spec.len();
    let mut buf: Vec<Complex64> = spec
        .iter()
        .map(|v| Complex64::new(v.norm().max(mag_floor).max(f64::MIN_POSITIVE).ln(), 0.0))
        .collect();
    ifft_in_place(&mut buf);
    if lifter_len <= n / 2 {
        for (q, c) in buf.iter_mut().enumerate() {
            let mirror = n - q;
            if q >= lifter_len && mirror >= lifter_len {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }
    fft_in_place(&mut buf);
    buf.iter().map(|v| v.re.exp()).collect()
}

pub fn ppgd_frame(frame: &Frame, n_fft: usize) -> Result<Vec<f64>> {
    if frame.is_zero() {
        return Err(Error::ZeroFrame);
    }
    let parts = GdParts::new(&frame.samples, n_fft)?;
    Ok((0..half_len(n_fft)).map(|k| parts.numerator(k)).collect())
}

/// Zero-phase version of a frame: `IDFT(|X|)`, even-symmetric around n = 0
/// with negative times wrapped to the end of the buffer.
pub fn zero_phase(x: &[f64], n_fft: usize) -> Result<Vec<f64>> {
    if x.len() > n_fft {
        return Err(Error::FrameTooLong { len: x.len(), n_fft });
    }
    let mut buf: Vec<Complex64> = rfft_padded(x, n_fft)
        .iter()
        .map(|v| Complex64::new(v.norm(), 0.0))
        .collect();
    ifft_in_place(&mut buf);
    // enforce exact symmetry; the transform leaves rounding asymmetry
    Ok((0..n_fft)
        .map(|n| 0.5 * (buf[n].re + buf[(n_fft - n) % n_fft].re))
        .collect())
}

/// Signed time of sample `n` in a circular buffer of length `n_fft`.
/// The Nyquist sample is its own mirror image and sits at time zero.
fn signed_time(n: usize, n_fft: usize) -> f64 {
    if n < n_fft / 2 {
        n as f64
    } else if n == n_fft / 2 {
        0.0
    } else {
        n as f64 - n_fft as f64
    }
}

/// Group delay of a circularly stored sequence evaluated on `|z| = rho`.
///
/// The contour weighting is `rho^-n` over buffer positions (see
/// [`chirp_dft`]); the time ramp uses signed times so that an even
/// sequence has exactly zero delay on the unit circle.
pub fn chirp_group_delay(z: &[f64], rho: f64, n_fft: usize) -> Result<Vec<f64>> {
    let a = chirp_dft(z, rho, n_fft)?;
    let ramp: Vec<f64> = z.iter().enumerate().map(|(n, v)| signed_time(n, n_fft) * v).collect();
    let b = chirp_dft(&ramp, rho, n_fft)?;
    let parts = GdParts { x: a.values, y: b.values };
    Ok(guarded_delay(&parts, half_len(n_fft)))
}

pub fn cgd_frame(frame: &Frame, cfg: &CgdConfig, n_fft: usize) -> Result<Vec<f64>> {
    cfg.validate()?;
    if frame.is_zero() {
        return Err(Error::ZeroFrame);
    }
    let z = zero_phase(&frame.samples, n_fft)?;
    chirp_group_delay(&z, cfg.rho, n_fft)
}

/// Runs `per_frame` over all frames in parallel; all-zero frames give zero
/// rows, and a recording made only of zero frames is an error.
fn build<F>(frames: &[Frame], n_fft: usize, kind: SpectrogramKind, hop_ms: f64, per_frame: F) -> Result<Spectrogram>
where
    F: Fn(&Frame) -> Result<Vec<f64>> + Sync,
{
    if frames.is_empty() {
        return Err(Error::TooFewFrames { got: 0, needed: 1 });
    }
    let needs_signal = !matches!(kind, SpectrogramKind::Fm | SpectrogramKind::Smooth);
    if needs_signal && frames.iter().all(Frame::is_zero) {
        return Err(Error::ZeroFrame);
    }
    let data = frames
        .par_iter()
        .map(|f| {
            if needs_signal && f.is_zero() {
                Ok(vec![0.0; half_len(n_fft)])
            } else {
                per_frame(f)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Spectrogram {
        data,
        kind,
        hop_ms,
        bin_hz: crate::signal::ANALYSIS_RATE as f64 / n_fft as f64,
    })
}

const DEFAULT_HOP_MS: f64 = 10.0;

pub fn fm_spectrogram(frames: &[Frame], n_fft: usize) -> Result<Spectrogram> {
    build(frames, n_fft, SpectrogramKind::Fm, DEFAULT_HOP_MS, |f| fm_frame(f, n_fft))
}

pub fn modgd_spectrogram(frames: &[Frame], cfg: &ModGdConfig, n_fft: usize) -> Result<Spectrogram> {
    cfg.validate()?;
    build(frames, n_fft, SpectrogramKind::ModGd, DEFAULT_HOP_MS, |f| modgd_frame(f, cfg, n_fft))
}

pub fn ppgd_spectrogram(frames: &[Frame], n_fft: usize) -> Result<Spectrogram> {
    build(frames, n_fft, SpectrogramKind::PpGd, DEFAULT_HOP_MS, |f| ppgd_frame(f, n_fft))
}

pub fn cgd_spectrogram(frames: &[Frame], cfg: &CgdConfig, n_fft: usize) -> Result<Spectrogram> {
    cfg.validate()?;
    build(frames, n_fft, SpectrogramKind::Cgd, DEFAULT_HOP_MS, |f| cgd_frame(f, cfg, n_fft))
}

/// F0 assumed when a recording has no voiced frame at all.
pub const FALLBACK_F0_HZ: f64 = 100.0;

/// Pitch-adaptive smoothed magnitude spectrogram.
///
/// This is a lightweight stand-in for STRAIGHT analysis, not an
/// implementation of it: the FM spectrogram is convolved with a separable
/// triangular kernel one pitch period wide in time and one F0 wide in
/// frequency. Unvoiced frames borrow the recording's median voiced F0.
pub fn smoothed_spectrogram(frames: &[Frame], pitch: &PitchTrack, n_fft: usize, grid: FrameGrid) -> Result<Spectrogram> {
    let fm = fm_spectrogram(frames, n_fft)?;
    smooth_fm(&fm, pitch, grid)
}

pub fn smooth_fm(fm: &Spectrogram, pitch: &PitchTrack, grid: FrameGrid) -> Result<Spectrogram> {
    if fm.kind != SpectrogramKind::Fm {
        return Err(Error::WrongKind {
            expected: SpectrogramKind::Fm.to_string(),
            got: fm.kind.to_string(),
        });
    }
    if pitch.len() != fm.n_frames() {
        return Err(Error::InvalidInput(format!(
            "pitch track has {} frames, spectrogram has {}",
            pitch.len(),
            fm.n_frames()
        )));
    }
    let fallback = pitch.median_voiced_f0().unwrap_or(FALLBACK_F0_HZ);
    let f0: Vec<f64> = pitch.f0_hz.iter().map(|&f| if f > 0.0 { f } else { fallback }).collect();
    let sr = grid.sample_rate as f64;

    let freq_smoothed: Vec<Vec<f64>> = fm
        .data
        .par_iter()
        .zip(&f0)
        .map(|(row, &f)| {
            let width = (f / fm.bin_hz).ceil().max(1.0) as usize;
            triangular_smooth(row.len(), width, |k| row[k])
        })
        .collect();

    let n_frames = fm.n_frames();
    let n_bins = fm.n_bins();
    let data = (0..n_frames)
        .into_par_iter()
        .map(|t| {
            let period = sr / f0[t];
            let width = (period / grid.hop as f64).ceil().max(1.0) as usize;
            (0..n_bins)
                .map(|k| triangular_at(n_frames, width, t, |i| freq_smoothed[i][k]))
                .collect()
        })
        .collect();

    Ok(Spectrogram {
        data,
        kind: SpectrogramKind::Smooth,
        hop_ms: fm.hop_ms,
        bin_hz: fm.bin_hz,
    })
}

/// Weights `width - |j|` for `|j| < width`, renormalised over the taps
/// that fall inside `[0, len)`.
fn triangular_at(len: usize, width: usize, centre: usize, value: impl Fn(usize) -> f64) -> f64 {
    let lo = centre.saturating_sub(width - 1);
    let hi = (centre + width - 1).min(len - 1);
    let mut acc = 0.0;
    let mut norm = 0.0;
    for i in lo..=hi {
        let w = (width - centre.abs_diff(i)) as f64;
        acc += w * value(i);
        norm += w;
    }
    acc / norm
}

fn triangular_smooth(len: usize, width: usize, value: impl Fn(usize) -> f64) -> Vec<f64> {
    (0..len).map(|k| triangular_at(len, width, k, &value)).collect()
}
