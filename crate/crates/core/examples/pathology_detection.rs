//! Patient-disjoint cross-validation of the MLP detector on a synthetic
//! corpus, for a magnitude-only and a phase-based feature set.
//!
//! Run with `cargo run --release --example pathology_detection`.

use phasevoice::classifier::cross_validate;
use phasevoice::features::{parse_subset, read_manifest};
use phasevoice::pipeline::build_feature_matrix;
use phasevoice::synth::make_corpus;
use phasevoice::PipelineConfig;

fn main() -> phasevoice::Result<()> {
    let dir = std::env::temp_dir().join("phasevoice-cv-example");
    let cfg = PipelineConfig::default();
    let corpus = make_corpus(15, 15, 11, 1.0, &dir, &cfg.provenance())?;
    let entries = read_manifest(&corpus.manifest_path)?;
    let (m, _) = build_feature_matrix(&entries, &cfg, true, 0)?;

    println!("{:<28}{:>10}{:>10}{:>8}", "features", "frame err", "pat err", "AUC");
    for subset in ["dFM", "dCGD", "dFM,dCGD,T1,T2", "all"] {
        let cols = parse_subset(subset)?;
        let out = cross_validate(&m, 5, &cfg.train, &cols, cfg.frame_threshold, &cfg.provenance())?;
        let r = &out.report;
        println!("{subset:<28}{:>9.1}%{:>9.1}%{:>8.3}", r.frame_error_pct, r.patient_error_pct, r.auc);
    }
    Ok(())
}
