use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use pseudoclust::baselines::{SvmConfig, DEFAULT_ALPHA};
use pseudoclust::cluster::{
    DEFAULT_CLUSTERS, DEFAULT_CONVERGENCE_THRESHOLD, DEFAULT_MAX_ITERATIONS, DEFAULT_RESTARTS,
};
use pseudoclust::corpus::{SplitRatios, DEFAULT_BUDGETS, DEFAULT_VOCAB_CAP};
use pseudoclust::eval::ReportConfig;
use pseudoclust::{Algorithm, ClusterConfig};

use crate::error::{CliError, Result};

/// Everything a pipeline run depends on. Loaded from TOML, then overridden
/// by command-line flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    /// Word-vector text file; enables dense features.
    pub embeddings: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: u64,
    pub vocab_cap: usize,
    pub budgets: Vec<usize>,
    pub repetitions: usize,
    pub filter_fraction: f64,
    pub nb_alpha: f64,
    pub permutations: usize,
    pub split: SplitRatios,
    pub trim: Option<TrimCaps>,
    pub cluster: ClusterSection,
    pub svm: SvmSection,
    pub eval: EvalSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrimCaps {
    pub train: usize,
    pub test: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterSection {
    pub algorithm: Algorithm,
    pub n_clusters: usize,
    pub restarts: usize,
    pub max_iterations: usize,
    pub convergence_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmSection {
    pub regularization: f64,
    pub tolerance: f64,
    pub max_epochs: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    /// Setting every other is compared against; empty compares all pairs.
    pub reference_setting: String,
    pub num_comparisons: Option<usize>,
    pub expected_repetitions: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            corpus: None,
            embeddings: None,
            out: PathBuf::from("run"),
            seed: 0,
            vocab_cap: DEFAULT_VOCAB_CAP,
            budgets: DEFAULT_BUDGETS.to_vec(),
            repetitions: 5,
            filter_fraction: 0.0,
            nb_alpha: DEFAULT_ALPHA,
            permutations: 1000,
            split: SplitRatios::default(),
            trim: None,
            cluster: ClusterSection::default(),
            svm: SvmSection::default(),
            eval: EvalSection::default(),
        }
    }
}

impl Default for ClusterSection {
    fn default() -> Self {
        ClusterSection {
            algorithm: Algorithm::Sib,
            n_clusters: DEFAULT_CLUSTERS,
            restarts: DEFAULT_RESTARTS,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            convergence_threshold: DEFAULT_CONVERGENCE_THRESHOLD,
        }
    }
}

impl Default for SvmSection {
    fn default() -> Self {
        let d = SvmConfig::default();
        SvmSection { regularization: d.regularization, tolerance: d.tolerance, max_epochs: d.max_epochs }
    }
}

impl Default for EvalSection {
    fn default() -> Self {
        let d = ReportConfig::default();
        EvalSection {
            reference_setting: d.reference_setting.unwrap_or_default(),
            num_comparisons: d.num_comparisons,
            expected_repetitions: d.expected_repetitions,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text).map_err(|message| CliError::ConfigParse { path: path.to_path_buf(), message })
    }

    pub fn from_toml(text: &str) -> std::result::Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    pub fn cluster_config(&self) -> ClusterConfig {
        ClusterConfig {
            n_clusters: self.cluster.n_clusters,
            algorithm: self.cluster.algorithm,
            restarts: self.cluster.restarts,
            max_iterations: self.cluster.max_iterations,
            seed: self.seed,
            convergence_threshold: self.cluster.convergence_threshold,
        }
    }

    pub fn svm_config(&self) -> SvmConfig {
        SvmConfig {
            regularization: self.svm.regularization,
            tolerance: self.svm.tolerance,
            max_epochs: self.svm.max_epochs,
            seed: self.seed,
        }
    }

    pub fn report_config(&self) -> ReportConfig {
        ReportConfig {
            reference_setting: Some(self.eval.reference_setting.clone()).filter(|s| !s.is_empty()),
            num_comparisons: self.eval.num_comparisons,
            expected_repetitions: self.eval.expected_repetitions,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.split.validate()?;
        self.cluster_config().validate()?;
        if self.budgets.is_empty() || self.budgets.contains(&0) {
            return Err(CliError::Config("budgets must be a non-empty list of positive sizes".into()));
        }
        if self.repetitions == 0 {
            return Err(CliError::Config("repetitions must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.filter_fraction) {
            return Err(CliError::Config(format!("filter_fraction must lie in [0, 1), got {}", self.filter_fraction)));
        }
        if self.vocab_cap == 0 {
            return Err(CliError::Config("vocab_cap must be positive".into()));
        }
        if self.permutations == 0 {
            return Err(CliError::Config("permutations must be at least 1".into()));
        }
        if !(self.nb_alpha > 0.0) {
            return Err(CliError::Config("nb_alpha must be positive".into()));
        }
        Ok(())
    }
}
