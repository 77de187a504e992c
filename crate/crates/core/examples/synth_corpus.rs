//! Generates a small labelled corpus of normophonic and pathological vowels.
//!
//! Run with `cargo run --example synth_corpus [out_dir]`.

use std::path::PathBuf;

use phasevoice::signal::load_wav;
use phasevoice::synth::make_corpus;
use phasevoice::PipelineConfig;

fn main() -> phasevoice::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "corpus".into()));
    let cfg = PipelineConfig::default();
    let corpus = make_corpus(5, 5, 42, 1.0, &out, &cfg.provenance())?;
    println!("manifest: {}", corpus.manifest_path.display());
    for e in &corpus.entries {
        let sig = load_wav(out.join(&e.path), cfg.rate_policy())?;
        let rms = (sig.samples().iter().map(|v| v * v).sum::<f64>() / sig.len() as f64).sqrt();
        println!("{:<6} {:<3} {:.2} s  rms {:.3}", e.patient_id, e.label.short(), sig.duration_s(), rms);
    }
    Ok(())
}
