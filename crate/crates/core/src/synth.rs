//! Synthetic sustained vowels with exact glottal ground truth.
//!
//! Each cycle's excitation is a glottal-flow-derivative pulse whose open
//! phase is maximum-phase by construction: it is the time reverse of
//! `-(1 - c z^-1) · E(z)²`, where `E` is a truncated exponential `a^m`.
//! Every zero of that product lies inside the unit circle (radius `a` or
//! `c`), so the reversed pulse has all its zeros outside. The open phase is
//! followed by a short exponential return phase (minimum-phase), and the
//! pulse train drives a cascade of two-pole formant resonators. Lip
//! radiation is folded into the source, which is why the pulse already has
//! the shape of a flow derivative; aspiration noise is added after the
//! tract and passed through the radiation first difference on its own.

use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{Label, ManifestEntry};
use crate::signal::{write_wav, AudioSignal, ANALYSIS_RATE};

/// Formants of a sustained /a/: (centre Hz, bandwidth Hz).
pub const VOWEL_A: [(f64, f64); 3] = [(700.0, 130.0), (1220.0, 140.0), (2600.0, 160.0)];

// open-phase decay exponent: the truncated exponential falls to e^-6 over
// the open phase
const OPEN_PHASE_DECAY: f64 = 6.0;
// zero of the leaky derivative in the open-phase pulse
const DERIVATIVE_ZERO: f64 = 0.97;
// return-phase time constant as a fraction of the period
const RETURN_PHASE_FRACTION: f64 = 0.01;
const PEAK_LEVEL: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub f0_hz: f64,
    pub duration_s: f64,
    /// Cycle-to-cycle period perturbation, % of T0 (Gaussian σ).
    pub jitter_pct: f64,
    /// Cycle amplitude perturbation, % (Gaussian σ).
    pub shimmer_pct: f64,
    /// Aspiration noise power relative to the voiced output, dB.
    pub noise_db: f64,
    pub open_quotient: f64,
    pub formants: Vec<(f64, f64)>,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            f0_hz: 120.0,
            duration_s: 1.0,
            jitter_pct: 0.0,
            shimmer_pct: 0.0,
            noise_db: -60.0,
            open_quotient: 0.6,
            formants: VOWEL_A.to_vec(),
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.f0_hz >= 40.0 && self.f0_hz <= 1000.0) {
            return bad(format!("f0 {} Hz out of range", self.f0_hz));
        }
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return bad(format!("duration {} s must be positive", self.duration_s));
        }
        if !(self.jitter_pct >= 0.0) || !(self.shimmer_pct >= 0.0) {
            return bad("jitter and shimmer must be non-negative".into());
        }
        if !self.noise_db.is_finite() {
            return bad("noise level must be finite".into());
        }
        if !(self.open_quotient > 0.0 && self.open_quotient < 1.0) {
            return bad(format!("open quotient {} must lie in (0, 1)", self.open_quotient));
        }
        let nyquist = ANALYSIS_RATE as f64 / 2.0;
        if self.formants.iter().any(|&(f, b)| !(f > 0.0 && f < nyquist) || !(b > 0.0)) {
            return bad("formant centres must lie in (0, 8000) Hz with positive bandwidths".into());
        }
        Ok(())
    }

    /// Label implied by the perturbation levels.
    pub fn label(&self) -> Label {
        if self.jitter_pct < 1.0 && self.shimmer_pct < 3.0 && self.noise_db < -25.0 {
            Label::Normophonic
        } else {
            Label::Pathological
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthTruth {
    /// Sample index of each glottal closure.
    pub excitation_instants: Vec<usize>,
    /// Open phase of each cycle, ending at the matching closure instant.
    pub glottal_cycles: Vec<Vec<f64>>,
    pub label: Label,
}

/// Maximum-phase open phase of `len` samples (approximately), last sample
/// at the closure instant.
pub fn open_phase_pulse(len: usize) -> Vec<f64> {
    let len = len.max(4);
    let a = (-OPEN_PHASE_DECAY / len as f64).exp();
    let m = len / 2 + 1;
    let e: Vec<f64> = (0..m).map(|i| a.powi(i as i32)).collect();
    let flow = convolve(&e, &e);
    let mut h = convolve(&[1.0, -DERIVATIVE_ZERO], &flow);
    h.iter_mut().for_each(|v| *v = -*v);
    h.reverse();
    h
}

fn return_phase(period: usize) -> Vec<f64> {
    let ta = (RETURN_PHASE_FRACTION * period as f64).max(0.25);
    let len = (8.0 * ta).ceil() as usize + 1;
    (0..len).map(|m| (-(m as f64) / ta).exp()).collect()
}

pub fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Unity-DC-gain two-pole resonator cascade.
pub fn formant_filter(x: &[f64], formants: &[(f64, f64)]) -> Vec<f64> {
    let sr = ANALYSIS_RATE as f64;
    let mut y = x.to_vec();
    for &(freq, bw) in formants {
        let r = (-PI * bw / sr).exp();
        let a1 = 2.0 * r * (2.0 * PI * freq / sr).cos();
        let a2 = -r * r;
        let g = 1.0 - a1 - a2;
        let (mut y1, mut y2) = (0.0, 0.0);
        for v in y.iter_mut() {
            let out = g * *v + a1 * y1 + a2 * y2;
            y2 = y1;
            y1 = out;
            *v = out;
        }
    }
    y
}

pub fn synth_vowel(config: &SynthConfig) -> Result<(AudioSignal, SynthTruth)> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let sr = ANALYSIS_RATE as f64;
    let n = (config.duration_s * sr).round() as usize;
    let t0 = sr / config.f0_hz;
    let nominal = t0.round() as usize;

    let mut excitation = vec![0.0; n];
    let mut instants = Vec::new();
    let mut cycles = Vec::new();

    let mut gci = nominal;
    let mut period = nominal;
    while gci < n {
        let amp = if config.shimmer_pct > 0.0 {
            let z: f64 = rng.sample(StandardNormal);
            (1.0 + config.shimmer_pct / 100.0 * z).max(0.1)
        } else {
            1.0
        };
        let open: Vec<f64> = open_phase_pulse((config.open_quotient * period as f64).round() as usize)
            .into_iter()
            .map(|v| amp * v)
            .collect();
        let pulse = convolve(&open, &return_phase(period));
        let start = gci as isize - (open.len() as isize - 1);
        for (i, v) in pulse.iter().enumerate() {
            let idx = start + i as isize;
            if idx >= 0 && (idx as usize) < n {
                excitation[idx as usize] += v;
            }
        }
        instants.push(gci);
        cycles.push(open);

        period = if config.jitter_pct > 0.0 {
            let z: f64 = rng.sample(StandardNormal);
            (t0 + config.jitter_pct / 100.0 * t0 * z).round().clamp(0.5 * t0, 1.5 * t0) as usize
        } else {
            nominal
        };
        gci += period.max(1);
    }

    let mut speech = formant_filter(&excitation, &config.formants);

    // aspiration enters after the tract, so it only sees the radiation
    // first difference; level is set against the voiced output power
    let voiced_power = speech.iter().map(|v| v * v).sum::<f64>() / n.max(1) as f64;
    let noise_std = (voiced_power * 10f64.powf(config.noise_db / 10.0) / 2.0).sqrt();
    let mut prev = 0.0;
    for v in speech.iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *v += noise_std * (z - prev);
        prev = z;
    }

    let peak = speech.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        speech.iter_mut().for_each(|v| *v *= PEAK_LEVEL / peak);
    }

    let signal = AudioSignal::new(speech, ANALYSIS_RATE, format!("synth-{}", config.seed))?;
    Ok((
        signal,
        SynthTruth {
            excitation_instants: instants,
            glottal_cycles: cycles,
            label: config.label(),
        },
    ))
}

/// Draws a speaker configuration for the given class.
pub fn sample_config(label: Label, duration_s: f64, rng: &mut impl Rng) -> SynthConfig {
    let (jitter, shimmer, noise) = match label {
        Label::Normophonic => (0.0..=0.5, 0.0..=2.0, -60.0..=-30.0),
        Label::Pathological => (2.0..=6.0, 5.0..=15.0, -25.0..=-10.0),
    };
    let formants = VOWEL_A
        .iter()
        .map(|&(f, b)| (f * rng.gen_range(0.95..=1.05), b))
        .collect();
    SynthConfig {
        f0_hz: rng.gen_range(90.0..=220.0),
        duration_s,
        jitter_pct: rng.gen_range(jitter),
        shimmer_pct: rng.gen_range(shimmer),
        noise_db: rng.gen_range(noise),
        open_quotient: rng.gen_range(0.5..=0.7),
        formants,
        seed: rng.gen(),
    }
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub manifest_path: PathBuf,
    pub entries: Vec<ManifestEntry>,
}

pub const MANIFEST_FILE: &str = "manifest.csv";

/// Writes `n_normo + n_patho` vowels, their truth files and a manifest.
///
/// File `i` draws from ChaCha stream `i` of `seed`, so any file can be
/// regenerated on its own and the output does not depend on scheduling.
pub fn make_corpus(
    n_normo: usize,
    n_patho: usize,
    seed: u64,
    duration_s: f64,
    out_dir: &Path,
    provenance: &str,
) -> Result<Corpus> {
    if n_normo == 0 || n_patho == 0 {
        return Err(Error::InvalidConfig("corpus needs at least one speaker per class".into()));
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let plan: Vec<(Label, usize)> = (0..n_normo)
        .map(|i| (Label::Normophonic, i))
        .chain((0..n_patho).map(|i| (Label::Pathological, i)))
        .collect();

    use rayon::prelude::*;
    let entries = plan
        .par_iter()
        .enumerate()
        .map(|(index, &(label, k))| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(index as u64);
            let cfg = sample_config(label, duration_s, &mut rng);
            let (signal, truth) = synth_vowel(&cfg)?;
            let patient_id = format!("{}{:03}", label.short(), k + 1);
            let wav_name = format!("{patient_id}.wav");
            write_wav(out_dir.join(&wav_name), &signal)?;

            let truth_path = out_dir.join(format!("{patient_id}.truth.json"));
            let doc = serde_json::json!({ "provenance": provenance, "config": cfg, "truth": truth });
            let text = serde_json::to_string_pretty(&doc).expect("truth serialises");
            fs::write(&truth_path, text).map_err(|e| Error::io(&truth_path, e))?;

            Ok(ManifestEntry {
                path: PathBuf::from(wav_name),
                label: truth.label,
                patient_id,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let manifest_path = out_dir.join(MANIFEST_FILE);
    let mut text = format!("# {provenance}\n# synth seed={seed} normo={n_normo} patho={n_patho} duration_s={duration_s}\npath,label,patient_id\n");
    for e in &entries {
        text.push_str(&format!("{},{},{}\n", e.path.display(), e.label, e.patient_id));
    }
    let mut f = fs::File::create(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(&manifest_path, e))?;

    Ok(Corpus { manifest_path, entries })
}
