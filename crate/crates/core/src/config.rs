//! Declarative pipeline settings, loadable from TOML. The hash of the
//! effective configuration is stamped into every artifact.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classifier::{TrainConfig, DEFAULT_THRESHOLD};
use crate::error::{Error, Result};
use crate::features::{BalanceBands, DeltaNorm};
use crate::infotheory::DEFAULT_N_BINS;
use crate::mixed_phase::CcdConfig;
use crate::signal::{FrameGrid, RatePolicy, ANALYSIS_RATE, DEFAULT_N_FFT};
use crate::spectra::{CgdConfig, ModGdConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub frame_ms: f64,
    pub hop_ms: f64,
    pub n_fft: usize,
    /// Reject non-16 kHz input instead of resampling it.
    pub strict_rate: bool,
    pub modgd: ModGdConfig,
    pub cgd: CgdConfig,
    pub ccd: CcdConfig,
    pub balances: BalanceBands,
    pub delta_norm: DeltaNorm,
    pub n_bins: usize,
    pub train: TrainConfig,
    pub frame_threshold: f64,
    pub folds: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            frame_ms: 30.0,
            hop_ms: 10.0,
            n_fft: DEFAULT_N_FFT,
            strict_rate: false,
            modgd: ModGdConfig::default(),
            cgd: CgdConfig::default(),
            ccd: CcdConfig::default(),
            balances: BalanceBands::default(),
            delta_norm: DeltaNorm::default(),
            n_bins: DEFAULT_N_BINS,
            train: TrainConfig::default(),
            frame_threshold: DEFAULT_THRESHOLD,
            folds: 10,
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.frame_ms > 0.0 && self.hop_ms > 0.0) {
            return Err(Error::InvalidConfig("frame_ms and hop_ms must be positive".into()));
        }
        let grid = self.grid();
        if grid.frame_len < 2 || grid.hop == 0 {
            return Err(Error::InvalidConfig("frame is shorter than two samples".into()));
        }
        if !self.n_fft.is_power_of_two() || self.n_fft < grid.frame_len {
            return Err(Error::InvalidConfig(format!(
                "n_fft {} must be a power of two no shorter than the {}-sample frame",
                self.n_fft, grid.frame_len
            )));
        }
        if self.n_bins < 2 {
            return Err(Error::InvalidConfig("n_bins must be at least 2".into()));
        }
        if !(0.0..=1.0).contains(&self.frame_threshold) {
            return Err(Error::InvalidConfig("frame_threshold must lie in [0, 1]".into()));
        }
        if self.folds < 2 {
            return Err(Error::InvalidConfig("folds must be at least 2".into()));
        }
        self.modgd.validate()?;
        self.cgd.validate()?;
        self.ccd.validate()?;
        self.balances.validate()?;
        self.train.validate()
    }

    pub fn grid(&self) -> FrameGrid {
        FrameGrid::from_ms(self.frame_ms, self.hop_ms, ANALYSIS_RATE)
    }

    pub fn rate_policy(&self) -> RatePolicy {
        if self.strict_rate {
            RatePolicy::Strict
        } else {
            RatePolicy::Resample
        }
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serialises");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Provenance tag embedded in artifacts.
    pub fn provenance(&self) -> String {
        format!("phasevoice {} config={}", env!("CARGO_PKG_VERSION"), self.hash())
    }
}
