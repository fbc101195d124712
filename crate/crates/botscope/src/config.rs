//! Key-value configuration file (TOML). Every setting is optional and can
//! be overridden by a CLI flag; flags win over the file, the file wins
//! over built-in defaults.

use crate::ingest::TrackingWindow;
use crate::metrics::{TextNormalization, ThresholdOverrides};
use crate::synth::SynthConfig;
use serde::Deserialize;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse config {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectSection {
    pub tu_threshold: Option<f64>,
    pub tfq_threshold: Option<f64>,
    pub ffr_threshold: Option<f64>,
    pub activity_min_tweets: Option<u64>,
    pub activity_window_days: Option<u32>,
    pub tu_normalization: Option<TextNormalization>,
    pub infer_rt_prefix: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RankSection {
    pub damping: Option<f64>,
    pub tolerance: Option<f64>,
    pub max_iterations: Option<u32>,
    pub threat_percentile: Option<f64>,
}

/// Parsed configuration file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub detect: DetectSection,
    pub rank: RankSection,
    /// Tracking window; absent means "use the data extent".
    pub window: Option<TrackingWindow>,
    pub synth: Option<SynthConfig>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn threshold_overrides(&self) -> ThresholdOverrides {
        ThresholdOverrides {
            tu_threshold: self.detect.tu_threshold,
            tfq_threshold: self.detect.tfq_threshold,
            ffr_threshold: self.detect.ffr_threshold,
            activity_min_tweets: self.detect.activity_min_tweets,
            activity_window_days: self.detect.activity_window_days,
        }
    }
}
