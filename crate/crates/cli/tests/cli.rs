use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn qksvm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qksvm"))
        .args(args)
        .env_remove("QKSVM_SEED")
        .output()
        .expect("binary runs")
}

fn config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/osmi_default.json")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn devices_lists_builtin_maps() {
    let o = qksvm(&["devices"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("ourense") && text.contains("0-1 1-2 1-3 3-4"));
    assert!(text.contains("yorktown") && text.contains("0-1 0-2 1-2 2-3 2-4 3-4"));
}

#[test]
fn bell_demo_is_seeded() {
    let a = qksvm(&["bell-demo", "--shots", "500", "--seed", "3"]);
    let b = qksvm(&["bell-demo", "--shots", "500", "--seed", "3"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let doc: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(doc["shots"], 500);
    let total: u64 = doc["counts"].as_object().unwrap().values().map(|v| v.as_u64().unwrap()).sum();
    assert_eq!(total, 500);
}

#[test]
fn kernel_command_writes_square_csv() {
    let dir = tempfile::tempdir().unwrap();
    for mode in ["exact", "sampled"] {
        let out = dir.path().join(format!("{mode}.csv"));
        let o = qksvm(&["kernel", "--config", config().to_str().unwrap(), "--mode", mode, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        let text = std::fs::read_to_string(&out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 21, "header plus 20 training rows");
        assert!(lines[1..].iter().all(|l| l.split(',').count() == 20));
        assert_eq!(lines[1].split(',').next().unwrap().parse::<f64>().unwrap(), 1.0);
    }
    let out = dir.path().join("device.csv");
    let o = qksvm(&["kernel", "--config", config().to_str().unwrap(), "--mode", "sampled", "--device", "yorktown", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = qksvm(&["kernel", "--config", config().to_str().unwrap(), "--device", "yorktown", "--out", out.to_str().unwrap()]);
    assert!(!o.status.success());
}

#[test]
fn train_then_predict_reproduces_training_accuracy() {
    let dir = tempfile::tempdir().unwrap();
    let model_path = dir.path().join("model.json");
    for arm in ["qsvm_exact", "classical_rbf"] {
        let o = qksvm(&["train", "--config", config().to_str().unwrap(), "--arm", arm, "--out", model_path.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        let train_acc: f64 = stdout(&o).split("train ").nth(1).unwrap()[..5].parse().unwrap();

        let model: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&model_path).unwrap()).unwrap();
        let points = model["training_points"].as_array().unwrap();
        let labels = model["labels"].as_array().unwrap();
        let mut csv = String::from("pc1,pc2,label\n");
        for (p, l) in points.iter().zip(labels) {
            let p = p.as_array().unwrap();
            csv.push_str(&format!("{},{},{}\n", p[0], p[1], l));
        }
        let input = dir.path().join("input.csv");
        std::fs::write(&input, csv).unwrap();

        let o = qksvm(&["predict", "--model", model_path.to_str().unwrap(), "--input", input.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert_eq!(stdout(&o).lines().count(), points.len() + 1);
        let acc: f64 = stderr(&o).split_whitespace().nth(1).unwrap().parse().unwrap();
        assert!((acc - train_acc).abs() < 1e-3, "{arm}: predict {acc} vs train {train_acc}");
    }
}

#[test]
fn run_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let o = qksvm(&["run", "--config", config().to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["report.json", "scatter.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    for arm in ["classical_rbf", "qsvm_exact", "qsvm_ourense", "qsvm_yorktown"] {
        assert!(dir.path().join(format!("gram_{arm}.csv")).exists());
        assert!(dir.path().join(format!("model_{arm}.json")).exists());
        assert!(stdout(&o).contains(arm));
    }
}

#[test]
fn errors_exit_nonzero() {
    let o = qksvm(&["run", "--config", "/nonexistent/config.json"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("error"));

    let o = Command::new(env!("CARGO_BIN_EXE_qksvm"))
        .args(["run", "--config", config().to_str().unwrap()])
        .env("QKSVM_SEED", "minus-one")
        .output()
        .unwrap();
    assert!(!o.status.success());
    assert!(stderr(&o).contains("QKSVM_SEED"));

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.json");
    let o = qksvm(&["train", "--config", config().to_str().unwrap(), "--arm", "nope", "--out", out.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("unknown arm"));

    let o = qksvm(&["kernel", "--config", config().to_str().unwrap(), "--mode", "fuzzy", "--out", "x.csv"]);
    assert!(!o.status.success());
}
