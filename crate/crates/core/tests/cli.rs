use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use osr_core::checkpoint::Checkpoint;
use osr_core::datastore::load_csv;

const SMALL: &str = r#"
output_dir = "unused"

[dataset]
kind = "blobs"
num_classes = 4
per_class = 40
dim = 2
center_scale = 4.0
spread = 0.4
seed = 3

[split]
known = [0, 1, 2]
unknown = [3]
seed = 3

[model]
pre_widths = [12]
post_widths = [8]
embedding_dim = 6

[train]
pretrain_epochs = 20
finetune_epochs = 8
batch_size = 32
pretrain_learning_rate = 0.02
learning_rate = 0.005
seed = 3
"#;

fn osr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_osr")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    path
}

fn run_small(dir: &Path, text: &str) -> PathBuf {
    let config = write_config(dir, text);
    let out = dir.join("out");
    let o = osr(&["run", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_writes_four_artifacts_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_small(dir.path(), SMALL);
    let mut names: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["calibration.json", "checkpoint.json", "report.json", "train_log.tsv"]);
    // nothing else written next to the config
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 2);

    let log = fs::read_to_string(out.join("train_log.tsv")).unwrap();
    assert_eq!(log.lines().count(), 1 + 20 + 8);
    assert!(log.lines().all(|l| l.split('\t').count() == 5));

    let again = tempfile::tempdir().unwrap();
    let out2 = run_small(again.path(), SMALL);
    for name in ["report.json", "checkpoint.json", "train_log.tsv", "calibration.json"] {
        assert_eq!(fs::read(out.join(name)).unwrap(), fs::read(out2.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn evaluate_reproduces_the_run_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_small(dir.path(), SMALL);
    let config = dir.path().join("run.toml");
    let o = osr(&["evaluate", "--checkpoint", s(&out.join("checkpoint.json")), "--config", s(&config)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(o.stdout, fs::read(out.join("report.json")).unwrap());
}

#[test]
fn evaluate_accepts_a_csv_test_set() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_small(dir.path(), SMALL);
    let csv = dir.path().join("test.csv");
    fs::write(&csv, "x0,x1,label\n0.5,0.5,0\n9.0,9.0,3\n-1.0,2.0,1\n").unwrap();
    let report = dir.path().join("report.json");
    let o = osr(&["evaluate", "--checkpoint", s(&out.join("checkpoint.json")), "--data", s(&csv), "--out", s(&report)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&report).unwrap();
    assert!(text.contains("\"test_known\": 2") && text.contains("\"test_unknown\": 1"), "{text}");
}

#[test]
fn evaluate_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_small(dir.path(), SMALL);
    let config = dir.path().join("run.toml");
    let ck = out.join("checkpoint.json");

    let missing = osr(&["evaluate", "--checkpoint", s(&dir.path().join("nope.json")), "--config", s(&config)]);
    assert_eq!(missing.status.code(), Some(2));

    let corrupt = dir.path().join("corrupt.json");
    let text = fs::read_to_string(&ck).unwrap();
    fs::write(&corrupt, &text[..text.len() / 3]).unwrap();
    let o = osr(&["evaluate", "--checkpoint", s(&corrupt), "--config", s(&config)]);
    assert_eq!(o.status.code(), Some(2));

    let future = dir.path().join("future.json");
    fs::write(&future, text.replacen("\"format_version\": 1", "\"format_version\": 2", 1)).unwrap();
    let o = osr(&["evaluate", "--checkpoint", s(&future), "--config", s(&config)]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains('2') && err.contains('1') && err.contains("version"), "{err}");
}

#[test]
fn boundary_grid_shape_and_bias_extremes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_small(dir.path(), SMALL);
    let ck = out.join("checkpoint.json");
    let k = Checkpoint::load(&ck).unwrap().known_class_ids.len();

    let o = osr(&["boundary-grid", "--checkpoint", s(&ck), "--resolution", "3", "--range", "0,1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y,label,score"));
    assert_eq!(lines.count(), 9);

    let labels_with = |bias: &str| -> Vec<usize> {
        let o = osr(&[
            "boundary-grid", "--checkpoint", s(&ck), "--resolution", "15", "--range", "-6,6,-6,6", "--bias", bias,
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        String::from_utf8(o.stdout)
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
            .collect()
    };
    let permissive = labels_with("-1e9");
    assert_eq!(permissive.len(), 225);
    assert!(permissive.iter().all(|&l| l < k));
    assert!(labels_with("1e9").iter().all(|&l| l == k));
}

#[test]
fn boundary_grid_needs_two_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_small(dir.path(), &SMALL.replace("dim = 2", "dim = 3"));
    let o = osr(&["boundary-grid", "--checkpoint", s(&out.join("checkpoint.json")), "--resolution", "3"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn baseline_mode_reports_softmax_scores() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL.replace("[train]\n", "[train]\ntrain_mode = \"baseline\"\n");
    let out = run_small(dir.path(), &text);
    let report = fs::read_to_string(out.join("report.json")).unwrap();
    assert!(report.contains("\"score\": \"max_softmax\""), "{report}");
    let log = fs::read_to_string(out.join("train_log.tsv")).unwrap();
    assert!(log.lines().skip(1).all(|l| l.starts_with("pretrain")));
}

#[test]
fn config_errors_exit_2_and_contract_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let typo = write_config(dir.path(), &SMALL.replace("batch_size", "batchsize"));
    let o = osr(&["run", "--config", s(&typo)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("batchsize"));

    let missing = osr(&["run", "--config", s(&dir.path().join("absent.toml"))]);
    assert_eq!(missing.status.code(), Some(2));

    let one_known = write_config(dir.path(), &SMALL.replace("known = [0, 1, 2]", "known = [0]"));
    let o = osr(&["run", "--config", s(&one_known), "--out", s(&dir.path().join("o"))]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));

    assert_eq!(osr(&["run"]).status.code(), Some(2));
    assert_eq!(osr(&["gen-data"]).status.code(), Some(2));
}

#[test]
fn gen_data_round_trips_through_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL);
    let csv = dir.path().join("blobs.csv");
    let o = osr(&["gen-data", "--config", s(&config), "--out", s(&csv)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let set = load_csv(&csv).unwrap();
    assert_eq!(set.len(), 160);
    assert_eq!(set.dim(), 2);
    assert_eq!(set.class_counts(), vec![40; 4]);
}
