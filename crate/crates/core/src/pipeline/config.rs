use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::EncodingSpec;
use crate::error::{config, Result};
use crate::featuremap::{Entanglement, FeatureMapConfig, FeatureMapKind, RbfConfig};
use crate::hardware::NoiseModel;
use crate::qkernel::DEFAULT_SHOTS;
use crate::svm::SvmTrainConfig;

/// Environment variable that replaces [`ExperimentConfig::seed`].
pub const SEED_ENV: &str = "QKSVM_SEED";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    #[serde(default = "half")]
    pub train_fraction: f64,
    /// Defaults to a seed derived from the master seed.
    #[serde(default)]
    pub seed: Option<u64>,
}

fn half() -> f64 {
    0.5
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            train_fraction: half(),
            seed: None,
        }
    }
}

/// Feature-map settings; the qubit count follows the reduced dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureMapSettings {
    #[serde(default = "zz")]
    pub kind: FeatureMapKind,
    #[serde(default = "two")]
    pub reps: usize,
    #[serde(default = "full")]
    pub entanglement: Entanglement,
}

fn zz() -> FeatureMapKind {
    FeatureMapKind::ZZ
}
fn two() -> usize {
    2
}
fn full() -> Entanglement {
    Entanglement::Full
}

impl Default for FeatureMapSettings {
    fn default() -> Self {
        Self {
            kind: zz(),
            reps: two(),
            entanglement: full(),
        }
    }
}

impl FeatureMapSettings {
    pub fn for_features(&self, n_features: usize) -> FeatureMapConfig {
        FeatureMapConfig {
            kind: self.kind,
            reps: self.reps,
            entanglement: self.entanglement,
            n_features,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSettings {
    #[serde(default = "default_shots")]
    pub shots: u64,
    /// Eigenvalue floor for repairing sampled Gram matrices.
    #[serde(default)]
    pub psd_floor: f64,
}

fn default_shots() -> u64 {
    DEFAULT_SHOTS
}

impl Default for KernelSettings {
    fn default() -> Self {
        Self {
            shots: DEFAULT_SHOTS,
            psd_floor: 0.0,
        }
    }
}

/// One column of the accuracy comparison.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArmSpec {
    /// RBF-kernel SVM.
    ClassicalRbf,
    /// Quantum kernel from exact statevector overlaps.
    QsvmExact,
    /// Quantum kernel from ideal shot sampling.
    QsvmSampled,
    /// Quantum kernel sampled on an emulated device: a builtin coupling-map
    /// name or a path to a coupling-map JSON file.
    QsvmDevice(String),
}

impl ArmSpec {
    pub fn name(&self) -> String {
        match self {
            ArmSpec::ClassicalRbf => "classical_rbf".into(),
            ArmSpec::QsvmExact => "qsvm_exact".into(),
            ArmSpec::QsvmSampled => "qsvm_sampled".into(),
            ArmSpec::QsvmDevice(d) => {
                let stem = Path::new(d)
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .unwrap_or(d);
                let clean: String = stem
                    .chars()
                    .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
                    .collect();
                format!("qsvm_{}", clean.trim_end_matches('_'))
            }
        }
    }
}

fn default_arms() -> Vec<ArmSpec> {
    vec![
        ArmSpec::ClassicalRbf,
        ArmSpec::QsvmExact,
        ArmSpec::QsvmDevice("ourense".into()),
        ArmSpec::QsvmDevice("yorktown".into()),
    ]
}

fn default_samples() -> usize {
    40
}
fn default_pca() -> Option<usize> {
    Some(2)
}
fn default_range() -> [f64; 2] {
    [0.0, 2.0 * std::f64::consts::PI]
}
fn default_seed() -> u64 {
    42
}

/// Everything needed to reproduce one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// CSV path; relative paths resolve against the config file's directory.
    pub dataset: PathBuf,
    pub encoding: EncodingSpec,
    /// Samples drawn (seeded) from the encoded rows.
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    /// Principal components kept; `null` skips PCA.
    #[serde(default = "default_pca")]
    pub pca_components: Option<usize>,
    /// Target angle range `[lo, hi)` for the feature maps.
    #[serde(default = "default_range")]
    pub scale_range: [f64; 2],
    #[serde(default)]
    pub split: SplitConfig,
    /// Master seed; every other seed derives from it unless set explicitly.
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub svm: SvmTrainConfig,
    #[serde(default)]
    pub rbf: RbfConfig,
    #[serde(default)]
    pub feature_map: FeatureMapSettings,
    #[serde(default)]
    pub kernel: KernelSettings,
    #[serde(default)]
    pub noise: NoiseModel,
    #[serde(default = "default_arms")]
    pub arms: Vec<ArmSpec>,
    /// Where artifacts are written; `null` writes nothing.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| {
            crate::Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
        })?;
        let mut cfg = Self::from_json(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    /// Applies `QKSVM_SEED` if it is set.
    pub fn apply_env_overrides(&mut self) -> Result<()> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            self.seed = v
                .trim()
                .parse()
                .map_err(|_| config(format!("{SEED_ENV}={v:?} is not an unsigned integer")))?;
        }
        Ok(())
    }

    pub fn dataset_path(&self) -> PathBuf {
        match &self.base_dir {
            Some(base) if self.dataset.is_relative() => base.join(&self.dataset),
            _ => self.dataset.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples < 4 {
            return Err(config("n_samples must be at least 4"));
        }
        let f = self.split.train_fraction;
        if !(f > 0.0 && f < 1.0) {
            return Err(config(format!("split.train_fraction {f} is outside (0, 1)")));
        }
        let [lo, hi] = self.scale_range;
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(config(format!("scale_range [{lo}, {hi}) is empty")));
        }
        if self.pca_components == Some(0) {
            return Err(config("pca_components must be >= 1 or null"));
        }
        if self.kernel.shots == 0 {
            return Err(config("kernel.shots must be >= 1"));
        }
        if self.arms.is_empty() {
            return Err(config("no experiment arms configured"));
        }
        self.svm.validate()?;
        self.noise.validate()?;
        if !(self.rbf.sigma.is_finite() && self.rbf.sigma > 0.0) {
            return Err(config("rbf.sigma must be > 0"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "dataset": "survey.csv",
        "encoding": {
            "label": {"column": "treatment", "positive": ["Yes"], "negative": ["No"]},
            "features": [{"column": "Age", "encoding": "numeric"}]
        }
    }"#;

    #[test]
    fn defaults_fill_in() {
        let cfg = ExperimentConfig::from_json(MINIMAL).unwrap();
        assert_eq!(cfg.n_samples, 40);
        assert_eq!(cfg.pca_components, Some(2));
        assert_eq!(cfg.split.train_fraction, 0.5);
        assert_eq!(cfg.svm, SvmTrainConfig::default());
        assert_eq!(cfg.kernel.shots, 1024);
        assert_eq!(cfg.feature_map.reps, 2);
        assert_eq!(cfg.noise, NoiseModel::default());
        assert_eq!(cfg.arms.len(), 4);
        assert_eq!(
            cfg.arms.iter().map(ArmSpec::name).collect::<Vec<_>>(),
            vec!["classical_rbf", "qsvm_exact", "qsvm_ourense", "qsvm_yorktown"]
        );
    }

    #[test]
    fn arm_json_forms() {
        let arms: Vec<ArmSpec> =
            serde_json::from_str(r#"["classical_rbf", {"qsvm_device": "line(5)"}, {"qsvm_device": "dev/my_chip.json"}]"#)
                .unwrap();
        assert_eq!(arms[1].name(), "qsvm_line_5");
        assert_eq!(arms[2].name(), "qsvm_my_chip");
    }

    #[test]
    fn rejects_bad_values() {
        let mut v: serde_json::Value = serde_json::from_str(MINIMAL).unwrap();
        v["split"] = serde_json::json!({"train_fraction": 1.0});
        assert!(ExperimentConfig::from_json(&v.to_string()).is_err());
        let mut v: serde_json::Value = serde_json::from_str(MINIMAL).unwrap();
        v["bogus"] = serde_json::json!(1);
        assert!(ExperimentConfig::from_json(&v.to_string()).is_err());
    }

    #[test]
    fn relative_dataset_resolves_against_config() {
        let mut cfg = ExperimentConfig::from_json(MINIMAL).unwrap();
        cfg.base_dir = Some(PathBuf::from("/etc/qk"));
        assert_eq!(cfg.dataset_path(), PathBuf::from("/etc/qk/survey.csv"));
    }
}
