//! Per-recording analysis: audio in, aligned 10-feature rows out.

use rayon::prelude::*;
use serde::Serialize;

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::features::{
    assemble_features, spectral_balances, spectrogram_delta, AssemblyStats, FeatureMatrix, Label, ManifestEntry,
    RecordingStreams,
};
use crate::mixed_phase::{ccd_decompose, detect_gci, extract_time_constants, interpolate_stream, GciSequence};
use crate::signal::{estimate_f0, frame_signal, load_wav, AudioSignal, WindowKind};
use crate::spectra::{
    cgd_spectrogram, fm_spectrogram, modgd_spectrogram, ppgd_spectrogram, smooth_fm, Spectrogram, SpectrogramKind,
};

/// Everything computed for one recording.
#[derive(Debug, Clone)]
pub struct RecordingAnalysis {
    /// FM, SMOOTH, MODGD, PPGD, CGD.
    pub spectrograms: [Spectrogram; 5],
    pub gci: Option<GciSequence>,
    /// Cycles decomposed, and cycles that yielded time constants.
    pub cycles: (usize, usize),
    pub streams: RecordingStreams,
}

pub fn spectrogram(signal: &AudioSignal, kind: SpectrogramKind, cfg: &PipelineConfig) -> Result<Spectrogram> {
    let grid = cfg.grid();
    let frames = frame_signal(signal, grid, WindowKind::Blackman)?;
    let mut spec = match kind {
        SpectrogramKind::Fm => fm_spectrogram(&frames, cfg.n_fft)?,
        SpectrogramKind::Smooth => smooth_fm(&fm_spectrogram(&frames, cfg.n_fft)?, &estimate_f0(signal, grid), grid)?,
        SpectrogramKind::ModGd => modgd_spectrogram(&frames, &cfg.modgd, cfg.n_fft)?,
        SpectrogramKind::PpGd => ppgd_spectrogram(&frames, cfg.n_fft)?,
        SpectrogramKind::Cgd => cgd_spectrogram(&frames, &cfg.cgd, cfg.n_fft)?,
    };
    spec.hop_ms = cfg.hop_ms;
    Ok(spec)
}

pub fn analyse_recording(signal: &AudioSignal, cfg: &PipelineConfig) -> Result<RecordingAnalysis> {
    let grid = cfg.grid();
    let frames = frame_signal(signal, grid, WindowKind::Blackman)?;
    let pitch = estimate_f0(signal, grid);

    let fm = fm_spectrogram(&frames, cfg.n_fft)?;
    let smooth = smooth_fm(&fm, &pitch, grid)?;
    let modgd = modgd_spectrogram(&frames, &cfg.modgd, cfg.n_fft)?;
    let ppgd = ppgd_spectrogram(&frames, cfg.n_fft)?;
    let cgd = cgd_spectrogram(&frames, &cfg.cgd, cfg.n_fft)?;
    let mut spectrograms = [fm, smooth, modgd, ppgd, cgd];
    for s in spectrograms.iter_mut() {
        s.hop_ms = cfg.hop_ms;
    }

    let mut deltas: [Vec<f64>; 5] = Default::default();
    for (d, s) in deltas.iter_mut().zip(&spectrograms) {
        *d = spectrogram_delta(s, cfg.delta_norm)?;
    }
    let balances = spectral_balances(&spectrograms[0], &cfg.balances)?;

    let gci = match detect_gci(signal, &pitch, grid) {
        Ok(g) => Some(g),
        Err(Error::NoVoicedContent) => None,
        Err(e) => return Err(e),
    };

    let (mut t1, mut t2, mut cycles) = (None, None, (0, 0));
    if let Some(g) = gci.as_ref().filter(|g| g.len() >= 2) {
        let out = ccd_decompose(signal, g, &pitch, grid, &cfg.ccd)?;
        let sr = signal.sample_rate() as f64;
        let (mut times, mut v1, mut v2) = (Vec::new(), Vec::new(), Vec::new());
        for c in &out.cycles {
            if let Ok(tc) = extract_time_constants(c) {
                times.push(c.gci as f64 / sr);
                v1.push(tc.t1);
                v2.push(tc.t2);
            }
        }
        cycles = (out.cycles.len(), times.len());
        if !times.is_empty() {
            let targets = grid.center_times(frames.len());
            t1 = Some(interpolate_stream(&times, &v1, &targets)?);
            t2 = Some(interpolate_stream(&times, &v2, &targets)?);
        }
    }

    Ok(RecordingAnalysis {
        spectrograms,
        gci,
        cycles,
        streams: RecordingStreams { deltas, t1, t2, balances },
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RecordingReport {
    pub patient_id: String,
    pub path: String,
    pub gcis: usize,
    pub cycles_decomposed: usize,
    pub cycles_used: usize,
    pub stats: Option<AssemblyStats>,
    /// Set when the recording contributed no rows.
    pub skipped: Option<String>,
}

pub fn recording_features(
    signal: &AudioSignal,
    label: Label,
    patient_id: &str,
    cfg: &PipelineConfig,
) -> Result<(FeatureMatrix, AssemblyStats, RecordingAnalysis)> {
    let analysis = analyse_recording(signal, cfg)?;
    let (m, stats) = assemble_features(&analysis.streams, label, patient_id)?;
    Ok((m, stats, analysis))
}

/// Features for every manifest entry, concatenated in manifest order.
///
/// With `allow_partial`, recordings that leave no aligned rows (typically
/// no glottal closures, hence no T1/T2) are skipped and reported instead of
/// failing the batch. `jobs = 0` uses all cores.
pub fn build_feature_matrix(
    entries: &[ManifestEntry],
    cfg: &PipelineConfig,
    allow_partial: bool,
    jobs: usize,
) -> Result<(FeatureMatrix, Vec<RecordingReport>)> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    let results: Vec<Result<(Option<FeatureMatrix>, RecordingReport)>> = pool.install(|| {
        entries
            .par_iter()
            .map(|e| {
                let signal = load_wav(&e.path, cfg.rate_policy())?;
                let mut report = RecordingReport {
                    patient_id: e.patient_id.clone(),
                    path: e.path.display().to_string(),
                    gcis: 0,
                    cycles_decomposed: 0,
                    cycles_used: 0,
                    stats: None,
                    skipped: None,
                };
                let analysis = analyse_recording(&signal, cfg)?;
                report.gcis = analysis.gci.as_ref().map_or(0, GciSequence::len);
                (report.cycles_decomposed, report.cycles_used) = analysis.cycles;
                match assemble_features(&analysis.streams, e.label, &e.patient_id) {
                    Ok((m, stats)) => {
                        report.stats = Some(stats);
                        Ok((Some(m), report))
                    }
                    Err(Error::EmptyAfterAlignment) if allow_partial => {
                        report.skipped = Some("no aligned rows (no usable glottal cycles)".into());
                        Ok((None, report))
                    }
                    Err(err) => Err(err),
                }
            })
            .collect()
    });

    let mut matrix = FeatureMatrix::default();
    let mut reports = Vec::with_capacity(entries.len());
    for r in results {
        let (m, rep) = r?;
        if let Some(m) = m {
            matrix.extend(m);
        }
        reports.push(rep);
    }
    if matrix.is_empty() {
        return Err(Error::EmptyAfterAlignment);
    }
    matrix.validate()?;
    Ok((matrix, reports))
}
