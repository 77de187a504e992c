//! Phase-aware speech analysis: group-delay spectrograms, complex-cepstrum
//! glottal decomposition, mutual-information feature ranking and an MLP
//! voice-pathology detector, with a synthetic vowel generator as oracle.

pub mod classifier;
pub mod cli;
pub mod config;
pub mod error;
pub mod features;
pub mod infotheory;
pub mod mixed_phase;
pub mod pipeline;
pub mod signal;
pub mod spectra;
pub mod synth;

pub use config::PipelineConfig;
pub use error::{Error, Result};
