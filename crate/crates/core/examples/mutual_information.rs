//! Ranks the features of a synthetic corpus by normalised mutual information
//! with the class label, and shows the redundancy of a few feature pairs.
//!
//! Run with `cargo run --release --example mutual_information`.

use phasevoice::features::read_manifest;
use phasevoice::infotheory::mi_report;
use phasevoice::pipeline::build_feature_matrix;
use phasevoice::synth::make_corpus;
use phasevoice::PipelineConfig;

fn main() -> phasevoice::Result<()> {
    let dir = std::env::temp_dir().join("phasevoice-mi-example");
    let cfg = PipelineConfig::default();
    let corpus = make_corpus(10, 10, 7, 1.0, &dir, &cfg.provenance())?;
    let entries = read_manifest(&corpus.manifest_path)?;
    let (m, _) = build_feature_matrix(&entries, &cfg, true, 0)?;
    println!("{} frames from {} recordings\n", m.len(), entries.len());

    let report = mi_report(&m, cfg.n_bins, true, &cfg.provenance())?;
    print!("{}", report.to_table());
    Ok(())
}
