//! Dataset ingestion and the end-to-end experiment driver.
//!
//! Order of operations: encode → subsample → stratified split →
//! z-score → PCA → min-max scaling into the angle range. Every fitted
//! transform sees training rows only.

mod config;
mod encode;
mod experiment;
mod pca;
mod scale;
mod split;
mod table;

pub use config::{
    ArmSpec, ExperimentConfig, FeatureMapSettings, KernelSettings, SplitConfig, SEED_ENV,
};
pub use encode::{
    encode_dataset, ColumnEncoding, Dataset, EncodeSummary, EncodingSpec, FeatureSpec, LabelSpec,
};
pub use experiment::{
    arm_estimator, prepare_data, run_arm, run_experiment, run_seed_sweep, summarize_sweep,
    ArmOutcome, ArmReport, ArmSummary, DataSummary, PreparedData, Report, Timings,
    REPORT_SCHEMA_VERSION,
};
pub use pca::{apply_pca, fit_pca, PcaTransform, Standardizer};
pub use scale::{scale_features, MinMaxScaler, OPEN_UPPER_SHRINK};
pub use split::{split, split_indices, SplitIndices};
pub use table::{load_csv, read_csv, RawTable};
