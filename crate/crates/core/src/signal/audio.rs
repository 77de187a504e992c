use std::f64::consts::PI;
use std::path::Path;

use crate::error::{Error, Result};

/// Analysis rate every loaded signal is brought to.
pub const ANALYSIS_RATE: u32 = 16_000;

/// Mono waveform with samples in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct AudioSignal {
    samples: Vec<f64>,
    sample_rate: u32,
    source_id: String,
}

impl AudioSignal {
    pub fn new(samples: Vec<f64>, sample_rate: u32, source_id: impl Into<String>) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidInput("sample rate must be positive".into()));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite sample at index {i}")));
        }
        Ok(Self {
            samples,
            sample_rate,
            source_id: source_id.into(),
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Returns a copy with every sample multiplied by `gain`.
    pub fn scaled(&self, gain: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|s| s * gain).collect(),
            sample_rate: self.sample_rate,
            source_id: self.source_id.clone(),
        }
    }

    /// Resamples to `target` Hz with a Blackman-windowed sinc interpolator.
    pub fn resampled(&self, target: u32) -> Self {
        if target == self.sample_rate {
            return self.clone();
        }
        Self {
            samples: resample_sinc(&self.samples, self.sample_rate, target),
            sample_rate: target,
            source_id: self.source_id.clone(),
        }
    }
}

/// What to do with files whose rate differs from [`ANALYSIS_RATE`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RatePolicy {
    #[default]
    Resample,
    Strict,
}

/// Reads a PCM (8/16/24/32-bit integer) or 32-bit float WAV file.
///
/// Channels are averaged to mono and integer samples are scaled by
/// `2^(bits-1)`, so full-scale values land in `[-1, 1 - 1 LSB]`.
pub fn load_wav(path: impl AsRef<Path>, policy: RatePolicy) -> Result<AudioSignal> {
    let path = path.as_ref();
    let reader = hound::WavReader::open(path).map_err(|e| map_hound(path, e))?;
    let spec = reader.spec();
    let channels = spec.channels.max(1) as usize;

    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| map_hound(path, e))?,
        (hound::SampleFormat::Int, bits @ (8 | 16 | 24 | 32)) => {
            let scale = (1u64 << (bits - 1)) as f64;
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| v as f64 / scale))
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| map_hound(path, e))?
        }
        (fmt, bits) => {
            return Err(Error::UnsupportedEncoding(format!("{fmt:?} at {bits} bits")));
        }
    };

    let mono: Vec<f64> = interleaved
        .chunks(channels)
        .map(|c| c.iter().sum::<f64>() / c.len() as f64)
        .collect();

    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let signal = AudioSignal::new(mono, spec.sample_rate, id)?;
    if signal.sample_rate() == ANALYSIS_RATE {
        return Ok(signal);
    }
    match policy {
        RatePolicy::Strict => Err(Error::RateMismatch {
            found: signal.sample_rate(),
            expected: ANALYSIS_RATE,
        }),
        RatePolicy::Resample => Ok(signal.resampled(ANALYSIS_RATE)),
    }
}

/// Writes a mono 16-bit PCM WAV.
pub fn write_wav(path: impl AsRef<Path>, signal: &AudioSignal) -> Result<()> {
    let path = path.as_ref();
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: signal.sample_rate(),
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(|e| map_hound(path, e))?;
    for &s in signal.samples() {
        let q = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        writer.write_sample(q).map_err(|e| map_hound(path, e))?;
    }
    writer.finalize().map_err(|e| map_hound(path, e))
}

/// Writes a mono 32-bit float WAV (lossless for samples that fit an `f32`).
pub fn write_wav_float(path: impl AsRef<Path>, signal: &AudioSignal) -> Result<()> {
    let path = path.as_ref();
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: signal.sample_rate(),
        bits_per_sample: 32,
        sample_format: hound::SampleFormat::Float,
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(|e| map_hound(path, e))?;
    for &s in signal.samples() {
        writer.write_sample(s as f32).map_err(|e| map_hound(path, e))?;
    }
    writer.finalize().map_err(|e| map_hound(path, e))
}

fn map_hound(path: &Path, e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(io) => Error::io(path, io),
        hound::Error::FormatError(m) => Error::UnsupportedEncoding(m.to_string()),
        hound::Error::Unsupported => Error::UnsupportedEncoding("unsupported WAV variant".into()),
        other => Error::UnsupportedEncoding(other.to_string()),
    }
}

// zero crossings of the prototype sinc on each side
const SINC_HALF_ZEROS: f64 = 24.0;

fn resample_sinc(x: &[f64], from: u32, to: u32) -> Vec<f64> {
    let ratio = to as f64 / from as f64;
    let cutoff = ratio.min(1.0);
    let half = SINC_HALF_ZEROS / cutoff;
    let out_len = (x.len() as f64 * ratio).round() as usize;

    (0..out_len)
        .map(|m| {
            let t = m as f64 / ratio;
            let lo = ((t - half).ceil().max(0.0)) as usize;
            let hi = ((t + half).floor() as usize).min(x.len().saturating_sub(1));
            (lo..=hi)
                .map(|k| {
                    let d = t - k as f64;
                    let arg = cutoff * d;
                    let sinc = if arg.abs() < 1e-12 {
                        1.0
                    } else {
                        (PI * arg).sin() / (PI * arg)
                    };
                    // Blackman taper over [-half, half]
                    let u = (d + half) / (2.0 * half);
                    let w = 0.42 - 0.5 * (2.0 * PI * u).cos() + 0.08 * (4.0 * PI * u).cos();
                    x[k] * cutoff * sinc * w
                })
                .sum()
        })
        .collect()
}
