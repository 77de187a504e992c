//! Computes all five spectrograms of a synthetic vowel and exports them.
//!
//! Run with `cargo run --example spectrograms [out_dir]`.

use std::path::PathBuf;

use phasevoice::pipeline::spectrogram;
use phasevoice::spectra::{write_csv, write_png, SpectrogramKind};
use phasevoice::synth::{synth_vowel, SynthConfig};
use phasevoice::PipelineConfig;

fn main() -> phasevoice::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "spectrograms".into()));
    std::fs::create_dir_all(&out).expect("output directory");
    let cfg = PipelineConfig::default();
    let (signal, _) = synth_vowel(&SynthConfig { f0_hz: 140.0, noise_db: -40.0, ..Default::default() })?;

    for kind in [
        SpectrogramKind::Fm,
        SpectrogramKind::Smooth,
        SpectrogramKind::ModGd,
        SpectrogramKind::PpGd,
        SpectrogramKind::Cgd,
    ] {
        let spec = spectrogram(&signal, kind, &cfg)?;
        let stem = out.join(kind.name().to_lowercase());
        write_csv(&stem.with_extension("csv"), &spec, &cfg.provenance())?;
        write_png(&stem.with_extension("png"), &spec, &cfg.provenance())?;
        println!("{:<7} {} frames x {} bins -> {}.{{csv,png}}", kind.name(), spec.n_frames(), spec.n_bins(), stem.display());
    }
    Ok(())
}
