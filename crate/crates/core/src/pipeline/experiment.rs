use std::path::Path;
use std::time::Instant;

use ndarray::Array2;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{
    encode_dataset, fit_pca, load_csv, split_indices, ArmSpec, Dataset, EncodeSummary,
    ExperimentConfig, MinMaxScaler, PcaTransform, Standardizer,
};
use crate::error::{Error, Result};
use crate::hardware::{CouplingMap, Device};
use crate::par::Exec;
use crate::qkernel::{
    cross_gram, gram_matrix, psd_project, rbf_cross, rbf_gram, write_matrix_csv, KernelEstimator,
    KernelMatrix, KernelMode,
};
use crate::rng::{derive_seed_str, rng_from_seed};
use crate::svm::{accuracy, train_smo, KernelSpec, SvmModel, TrainStats};

/// Report layout version; bump on incompatible changes.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Preprocessed train/test data ready for kernel evaluation.
#[derive(Debug, Clone)]
pub struct PreparedData {
    /// Training samples after standardization, PCA and angle scaling.
    pub train: Dataset,
    pub test: Dataset,
    /// Reduced (pre-scaling) coordinates for every selected sample.
    pub scatter: Array2<f64>,
    pub scatter_labels: Vec<i8>,
    pub pca: Option<PcaTransform>,
    pub summary: DataSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSummary {
    pub input_rows: usize,
    pub dropped_rows: usize,
    pub encoded_rows: usize,
    pub encoded_features: usize,
    pub n_samples: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub n_qubits: usize,
    pub explained_variance: Vec<f64>,
    pub split_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmReport {
    pub name: String,
    /// `ok` or `failed`.
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub train_accuracy: Option<f64>,
    pub test_accuracy: Option<f64>,
    pub n_support: Option<usize>,
    pub kernel_mode: Option<KernelMode>,
    pub shots: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub device: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smo: Option<TrainStats>,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub preprocess_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub data: DataSummary,
    pub arms: Vec<ArmReport>,
    pub timings: Timings,
}

impl Report {
    pub fn arm(&self, name: &str) -> Option<&ArmReport> {
        self.arms.iter().find(|a| a.name == name)
    }

    /// The report as JSON with every `*_ms` field removed, for comparing
    /// runs.
    pub fn without_timings(&self) -> Result<serde_json::Value> {
        let mut v = serde_json::to_value(self)?;
        strip_timing_fields(&mut v);
        Ok(v)
    }
}

fn strip_timing_fields(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Object(map) => {
            map.retain(|k, _| !k.ends_with("_ms"));
            map.values_mut().for_each(strip_timing_fields);
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(strip_timing_fields),
        _ => {}
    }
}

/// Loads, encodes, subsamples, splits, and transforms the dataset.
///
/// Standardization, PCA and scaling are fitted on the training side only
/// and then applied to the test side, in that order.
pub fn prepare_data(cfg: &ExperimentConfig) -> Result<PreparedData> {
    let table = load_csv(cfg.dataset_path())?;
    let (encoded, enc): (Dataset, EncodeSummary) = encode_dataset(&table, &cfg.encoding)?;

    let mut idx: Vec<usize> = (0..encoded.len()).collect();
    if encoded.len() > cfg.n_samples {
        idx.shuffle(&mut rng_from_seed(derive_seed_str(cfg.seed, "sample")));
        idx.truncate(cfg.n_samples);
        idx.sort_unstable();
    } else if encoded.len() < cfg.n_samples {
        log::warn!(
            "only {} encoded rows available, fewer than n_samples = {}",
            encoded.len(),
            cfg.n_samples
        );
    }
    let selected = encoded.select(&idx);

    let split_seed = cfg
        .split
        .seed
        .unwrap_or_else(|| derive_seed_str(cfg.seed, "split"));
    let parts = split_indices(&selected.labels, cfg.split.train_fraction, split_seed)?;
    let raw_train = selected.select(&parts.train);
    let raw_test = selected.select(&parts.test);

    let standardizer = Standardizer::fit(&raw_train.features)?;
    let z_train = standardizer.apply(&raw_train.features)?;
    let z_test = standardizer.apply(&raw_test.features)?;
    let z_all = standardizer.apply(&selected.features)?;

    let (pca, r_train, r_test, r_all) = match cfg.pca_components {
        Some(k) => {
            let t = fit_pca(&z_train, k)?;
            let (a, b, c) = (t.apply(&z_train)?, t.apply(&z_test)?, t.apply(&z_all)?);
            (Some(t), a, b, c)
        }
        None => (None, z_train, z_test, z_all),
    };

    let [lo, hi] = cfg.scale_range;
    let scaler = MinMaxScaler::fit(&r_train, lo, hi)?;
    let names: Vec<String> = (1..=r_train.ncols()).map(|i| format!("pc{i}")).collect();
    let train = Dataset::new(scaler.apply(&r_train)?, raw_train.labels, names.clone())?;
    let test = Dataset::new(scaler.apply(&r_test)?, raw_test.labels, names)?;

    let summary = DataSummary {
        input_rows: enc.input_rows,
        dropped_rows: enc.dropped_rows,
        encoded_rows: enc.emitted_rows,
        encoded_features: encoded.n_features(),
        n_samples: selected.len(),
        n_train: train.len(),
        n_test: test.len(),
        n_qubits: train.n_features(),
        explained_variance: pca
            .as_ref()
            .map(|p| p.explained_variance.clone())
            .unwrap_or_default(),
        split_seed,
    };
    Ok(PreparedData {
        train,
        test,
        scatter: r_all,
        scatter_labels: selected.labels,
        pca,
        summary,
    })
}

/// Kernel blocks and trained model for one arm.
pub struct ArmOutcome {
    pub gram: KernelMatrix,
    pub test_kernel: Array2<f64>,
    pub model: SvmModel,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub device: Option<String>,
}

/// Builds the estimator an arm uses, with its arm-specific seed.
pub fn arm_estimator(cfg: &ExperimentConfig, arm: &ArmSpec) -> Result<Option<KernelEstimator>> {
    let seed = derive_seed_str(cfg.seed, &arm.name());
    Ok(match arm {
        ArmSpec::ClassicalRbf => None,
        ArmSpec::QsvmExact => Some(KernelEstimator::exact()),
        ArmSpec::QsvmSampled => Some(KernelEstimator::sampled(cfg.kernel.shots, seed)),
        ArmSpec::QsvmDevice(spec) => {
            let path = Path::new(spec);
            let resolved = match (&cfg.base_dir, spec.ends_with(".json") && path.is_relative()) {
                (Some(base), true) => base.join(path).to_string_lossy().into_owned(),
                _ => spec.clone(),
            };
            let cm = CouplingMap::resolve(&resolved)?;
            Some(KernelEstimator::sampled(cfg.kernel.shots, seed).on_device(Device::new(cm, cfg.noise)))
        }
    })
}

/// Trains and evaluates one arm on prepared data.
pub fn run_arm(cfg: &ExperimentConfig, data: &PreparedData, arm: &ArmSpec) -> Result<ArmOutcome> {
    let train_pts = data.train.points();
    let test_pts = data.test.points();
    let (gram, test_kernel, spec, device) = match arm_estimator(cfg, arm)? {
        None => (
            rbf_gram(&train_pts, &cfg.rbf)?,
            rbf_cross(&train_pts, &test_pts, &cfg.rbf)?,
            KernelSpec::Rbf(cfg.rbf),
            None,
        ),
        Some(est) => {
            let fm = cfg.feature_map.for_features(data.train.n_features());
            let mut gram = gram_matrix(&train_pts, &fm, &est)?;
            if est.mode == KernelMode::Sampled {
                gram = psd_project(&gram, cfg.kernel.psd_floor)?;
            }
            let cross = cross_gram(&train_pts, &test_pts, &fm, &est)?;
            let device = est.device.as_ref().map(|d| d.coupling.name.clone());
            (gram, cross, KernelSpec::Quantum(fm), device)
        }
    };
    let model = train_smo(&gram.values, &data.train.labels, &cfg.svm)?.with_kernel(spec, train_pts);
    let train_accuracy = accuracy(&model.predict_rows(&gram.values)?, &data.train.labels)?;
    let test_accuracy = accuracy(&model.predict_rows(&test_kernel)?, &data.test.labels)?;
    Ok(ArmOutcome {
        gram,
        test_kernel,
        model,
        train_accuracy,
        test_accuracy,
        device,
    })
}

fn write_artifacts(dir: &Path, name: &str, out: &ArmOutcome) -> Result<()> {
    write_matrix_csv(&out.gram.values, std::fs::File::create(dir.join(format!("gram_{name}.csv")))?)?;
    std::fs::write(dir.join(format!("model_{name}.json")), out.model.to_json()?)?;
    Ok(())
}

fn write_scatter(dir: &Path, data: &PreparedData) -> Result<()> {
    let mut w = csv::Writer::from_path(dir.join("scatter.csv"))
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    let mut header: Vec<String> = (1..=data.scatter.ncols()).map(|i| format!("pc{i}")).collect();
    header.push("label".into());
    w.write_record(&header).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    for (row, label) in data.scatter.rows().into_iter().zip(&data.scatter_labels) {
        let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        rec.push(label.to_string());
        w.write_record(&rec).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    w.flush()?;
    Ok(())
}

fn elapsed_ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Runs every configured arm and, when `output_dir` is set, writes
/// `report.json`, `scatter.csv`, `gram_<arm>.csv` and `model_<arm>.json`.
///
/// A failing arm is recorded in the report; the other arms still run.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let start = Instant::now();
    let data = prepare_data(cfg)?;
    let preprocess_ms = elapsed_ms(start);

    if let Some(dir) = &cfg.output_dir {
        std::fs::create_dir_all(dir)?;
        write_scatter(dir, &data)?;
    }

    let mut arms = Vec::with_capacity(cfg.arms.len());
    for arm in &cfg.arms {
        let name = arm.name();
        let t = Instant::now();
        let result = run_arm(cfg, &data, arm).and_then(|out| {
            if let Some(dir) = &cfg.output_dir {
                write_artifacts(dir, &name, &out)?;
            }
            Ok(out)
        });
        let report = match result {
            Ok(out) => ArmReport {
                name,
                status: "ok".into(),
                error: None,
                train_accuracy: Some(out.train_accuracy),
                test_accuracy: Some(out.test_accuracy),
                n_support: Some(out.model.support_indices.len()),
                kernel_mode: Some(out.gram.mode),
                shots: Some(out.gram.shots),
                device: out.device,
                smo: out.model.stats,
                elapsed_ms: elapsed_ms(t),
            },
            Err(e) => {
                log::error!("arm {name} failed: {e}");
                ArmReport {
                    name,
                    status: "failed".into(),
                    error: Some(e.to_string()),
                    train_accuracy: None,
                    test_accuracy: None,
                    n_support: None,
                    kernel_mode: None,
                    shots: None,
                    device: None,
                    smo: None,
                    elapsed_ms: elapsed_ms(t),
                }
            }
        };
        arms.push(report);
    }

    let report = Report {
        schema_version: REPORT_SCHEMA_VERSION,
        config: cfg.clone(),
        data: data.summary,
        arms,
        timings: Timings {
            preprocess_ms,
            total_ms: elapsed_ms(start),
        },
    };
    if let Some(dir) = &cfg.output_dir {
        std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(&report)?)?;
    }
    Ok(report)
}

/// Per-arm accuracy statistics over a seed sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmSummary {
    pub name: String,
    pub runs: usize,
    pub failures: usize,
    pub train_mean: f64,
    pub train_std: f64,
    pub test_mean: f64,
    pub test_std: f64,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64;
    (m, v.sqrt())
}

/// Runs the experiment once per master seed (no artifacts written).
/// Seeds run in parallel under `exec`; results are in seed order.
pub fn run_seed_sweep(cfg: &ExperimentConfig, seeds: &[u64], exec: Exec) -> Result<Vec<Report>> {
    exec.map_slice(seeds, |&seed| {
        let mut c = cfg.clone();
        c.seed = seed;
        c.split.seed = None;
        c.output_dir = None;
        run_experiment(&c)
    })
    .into_iter()
    .collect()
}

pub fn summarize_sweep(reports: &[Report]) -> Vec<ArmSummary> {
    let Some(first) = reports.first() else {
        return Vec::new();
    };
    first
        .arms
        .iter()
        .map(|a| {
            let runs: Vec<&ArmReport> = reports.iter().filter_map(|r| r.arm(&a.name)).collect();
            let train: Vec<f64> = runs.iter().filter_map(|r| r.train_accuracy).collect();
            let test: Vec<f64> = runs.iter().filter_map(|r| r.test_accuracy).collect();
            let (train_mean, train_std) = mean_std(&train);
            let (test_mean, test_std) = mean_std(&test);
            ArmSummary {
                name: a.name.clone(),
                runs: runs.len(),
                failures: runs.iter().filter(|r| r.status != "ok").count(),
                train_mean,
                train_std,
                test_mean,
                test_std,
            }
        })
        .collect()
}
