use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use ndarray::Array2;
use serde_json::json;

use qksvm::hardware::CouplingMap;
use qksvm::par::Exec;
use qksvm::pipeline::{
    load_csv, prepare_data, run_arm, run_experiment, run_seed_sweep, summarize_sweep, ArmSpec,
    ExperimentConfig, Report,
};
use qksvm::qkernel::{cross_gram, gram_matrix, rbf_cross, KernelEstimator};
use qksvm::sim::{bell_circuit, sample_counts, StateVector};
use qksvm::svm::{accuracy, KernelSpec, Label, SvmModel};

#[derive(Parser)]
#[command(name = "qksvm", version, about = "Quantum-kernel SVM toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured arm and write the report and artifacts.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `output_dir` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Repeat the experiment over consecutive master seeds and summarize.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        #[arg(long, default_value_t = 0)]
        first_seed: u64,
    },
    /// Write the training-set Gram matrix as CSV.
    Kernel {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
        mode: ModeArg,
        /// Sample on an emulated device (builtin name or coupling-map JSON).
        #[arg(long, requires = "mode")]
        device: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one arm and write its model file.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Arm name as it appears in the report, e.g. `qsvm_exact`.
        #[arg(long, default_value = "qsvm_exact")]
        arm: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Classify the rows of a numeric CSV with a saved model.
    ///
    /// Columns are the model's (already scaled) features; a column named
    /// `label` is treated as ground truth. Precomputed-kernel models expect
    /// kernel rows instead.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
    },
    /// Prepare and sample a Bell pair, printing the histogram as JSON.
    BellDemo {
        #[arg(long, default_value_t = 10_000)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// List the builtin coupling maps.
    Devices,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Sampled,
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::from_file(path)
        .with_context(|| format!("loading config {}", path.display()))?;
    cfg.apply_env_overrides()?;
    Ok(cfg)
}

fn print_summary(report: &Report) {
    println!("{:<16} {:>8} {:>8} {:>6}", "arm", "train", "test", "sv");
    for a in &report.arms {
        match (a.train_accuracy, a.test_accuracy, a.n_support) {
            (Some(tr), Some(te), Some(sv)) => println!("{:<16} {tr:>8.3} {te:>8.3} {sv:>6}", a.name),
            _ => println!(
                "{:<16} failed: {}",
                a.name,
                a.error.as_deref().unwrap_or("unknown error")
            ),
        }
    }
}

fn cmd_run(config: &Path, out: Option<PathBuf>) -> Result<()> {
    let mut cfg = load_config(config)?;
    if out.is_some() {
        cfg.output_dir = out;
    }
    let report = run_experiment(&cfg)?;
    print_summary(&report);
    if let Some(dir) = &cfg.output_dir {
        eprintln!("artifacts written to {}", dir.display());
    }
    Ok(())
}

fn cmd_sweep(config: &Path, seeds: u64, first: u64) -> Result<()> {
    let cfg = load_config(config)?;
    let seeds: Vec<u64> = (first..first + seeds).collect();
    let reports = run_seed_sweep(&cfg, &seeds, Exec::default())?;
    println!("{}", serde_json::to_string_pretty(&summarize_sweep(&reports))?);
    Ok(())
}

fn cmd_kernel(config: &Path, mode: ModeArg, device: Option<String>, out: &Path) -> Result<()> {
    let cfg = load_config(config)?;
    let arm = match (mode, device) {
        (ModeArg::Exact, None) => ArmSpec::QsvmExact,
        (ModeArg::Exact, Some(_)) => bail!("--device needs --mode sampled"),
        (ModeArg::Sampled, None) => ArmSpec::QsvmSampled,
        (ModeArg::Sampled, Some(d)) => ArmSpec::QsvmDevice(d),
    };
    let data = prepare_data(&cfg)?;
    let est = qksvm::pipeline::arm_estimator(&cfg, &arm)?.expect("quantum arm");
    let fm = cfg.feature_map.for_features(data.train.n_features());
    let gram = gram_matrix(&data.train.points(), &fm, &est)?;
    let file = File::create(out).with_context(|| format!("creating {}", out.display()))?;
    gram.write_csv(file)?;
    eprintln!("{0}x{0} Gram matrix written to {1}", gram.size(), out.display());
    Ok(())
}

fn cmd_train(config: &Path, arm_name: &str, out: &Path) -> Result<()> {
    let cfg = load_config(config)?;
    let Some(arm) = cfg.arms.iter().find(|a| a.name() == arm_name).cloned().or_else(|| {
        [ArmSpec::ClassicalRbf, ArmSpec::QsvmExact, ArmSpec::QsvmSampled]
            .into_iter()
            .find(|a| a.name() == arm_name)
    }) else {
        let known: Vec<String> = cfg.arms.iter().map(ArmSpec::name).collect();
        bail!("unknown arm {arm_name:?}; configured arms: {}", known.join(", "));
    };
    let data = prepare_data(&cfg)?;
    let outcome = run_arm(&cfg, &data, &arm)?;
    std::fs::write(out, outcome.model.to_json()?)
        .with_context(|| format!("writing {}", out.display()))?;
    println!(
        "{}: train {:.3}, test {:.3}, {} support vectors",
        arm_name,
        outcome.train_accuracy,
        outcome.test_accuracy,
        outcome.model.support_indices.len()
    );
    Ok(())
}

/// Feature rows, plus labels when a `label` column is present.
type NumericRows = (Vec<Vec<f64>>, Option<Vec<Label>>);

fn read_numeric_rows(path: &Path) -> Result<NumericRows> {
    let table = load_csv(path).with_context(|| format!("reading {}", path.display()))?;
    let label_col = table.column_index("label");
    let mut rows = Vec::with_capacity(table.rows.len());
    let mut labels = Vec::new();
    for (r, row) in table.rows.iter().enumerate() {
        let mut feats = Vec::with_capacity(row.len());
        for (c, cell) in row.iter().enumerate() {
            let v: f64 = cell
                .trim()
                .parse()
                .with_context(|| format!("row {}: column {:?} is not numeric", r + 2, table.columns[c]))?;
            if Some(c) == label_col {
                labels.push(if v > 0.0 { 1 } else { -1 });
            } else {
                feats.push(v);
            }
        }
        rows.push(feats);
    }
    Ok((rows, label_col.map(|_| labels)))
}

fn cmd_predict(model_path: &Path, input: &Path) -> Result<()> {
    let text = std::fs::read_to_string(model_path)
        .with_context(|| format!("reading {}", model_path.display()))?;
    let model = SvmModel::from_json(&text)?;
    let (rows, labels) = read_numeric_rows(input)?;
    let k: Array2<f64> = match &model.feature_map {
        KernelSpec::Quantum(fm) => cross_gram(&model.training_points, &rows, fm, &KernelEstimator::exact())?,
        KernelSpec::Rbf(rbf) => rbf_cross(&model.training_points, &rows, rbf)?,
        KernelSpec::Precomputed => {
            let n = model.alphas.len();
            if let Some(bad) = rows.iter().position(|r| r.len() != n) {
                bail!("row {} has {} kernel entries, model expects {n}", bad + 2, rows[bad].len());
            }
            Array2::from_shape_fn((rows.len(), n), |(i, j)| rows[i][j])
        }
    };
    let mut out = io::stdout().lock();
    writeln!(out, "row,decision,prediction")?;
    let mut preds = Vec::with_capacity(rows.len());
    for (i, krow) in k.rows().into_iter().enumerate() {
        let krow = krow.to_vec();
        let d = model.decision_value(&krow)?;
        let p = model.predict(&krow)?;
        preds.push(p);
        writeln!(out, "{i},{d},{p}")?;
    }
    if let Some(truth) = labels {
        eprintln!("accuracy {:.4} on {} rows", accuracy(&preds, &truth)?, truth.len());
    }
    Ok(())
}

fn cmd_bell(shots: u64, seed: u64) -> Result<()> {
    let state = StateVector::from_circuit(&bell_circuit())?;
    let hist = sample_counts(&state, shots, seed)?;
    let probs: serde_json::Map<String, serde_json::Value> = ["00", "01", "10", "11"]
        .iter()
        .map(|b| (b.to_string(), json!(hist.frequency(b))))
        .collect();
    let doc = json!({
        "shots": hist.shots,
        "seed": seed,
        "counts": hist.counts,
        "probabilities": probs,
    });
    println!("{}", serde_json::to_string_pretty(&doc)?);
    Ok(())
}

fn cmd_devices() -> Result<()> {
    for name in ["ourense", "yorktown"] {
        let cm = CouplingMap::builtin(name)?;
        let edges: Vec<String> = cm.edges.iter().map(|(a, b)| format!("{a}-{b}")).collect();
        println!("{name:<10} {} qubits  edges {}", cm.n_qubits, edges.join(" "));
    }
    println!("{:<10} n qubits  chain 0-1-...-(n-1)", "line(n)");
    println!("{:<10} n qubits  all pairs", "full(n)");
    println!("coupling-map JSON files ({{\"name\", \"n_qubits\", \"edges\"}}) are accepted wherever a device name is");
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out } => cmd_run(&config, out),
        Command::Sweep { config, seeds, first_seed } => cmd_sweep(&config, seeds, first_seed),
        Command::Kernel { config, mode, device, out } => cmd_kernel(&config, mode, device, &out),
        Command::Train { config, arm, out } => cmd_train(&config, &arm, &out),
        Command::Predict { model, input } => cmd_predict(&model, &input),
        Command::BellDemo { shots, seed } => cmd_bell(shots, seed),
        Command::Devices => cmd_devices(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
