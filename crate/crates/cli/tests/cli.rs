use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use rdr_cli::{run, RunConfig, EXIT_DATA, EXIT_OK, EXIT_TRAINING, EXIT_USAGE, RUN_CONFIG_FILE};
use rdr_core::dataset::{read_manifest, Split};
use rdr_core::eval::EvaluationReport;

const DESK: &str = r#"
seed = 3

[preprocess]
source = "synthetic"
target_size = 32

[split.test]
n_total = 20
positive_fraction = 0.5

[split.train_validation]
n_total = 40
positive_fraction = 0.5
train_fraction = 0.75

[training]
batch_size = 8
max_epochs = 2

[training.backbone]
kind = "small_cnn"
input_size = 32

[synthetic]
n_images = 70
positive_fraction = 0.5
image_size = 64
"#;

fn rdr(args: &[&str]) -> i32 {
    let mut full = vec!["rdr"];
    full.extend_from_slice(args);
    run(full)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn desk_config(dir: &Path) -> PathBuf {
    let path = dir.join("desk.toml");
    fs::write(&path, DESK).unwrap();
    path
}

fn read(path: impl AsRef<Path>) -> Vec<u8> {
    fs::read(path).unwrap()
}

#[test]
fn synthetic_corpus_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let code = rdr(&["generate-synthetic", "--out", s(out), "--n", "10", "--positive-fraction", "0.3", "--image-size", "64", "--seed", "5"]);
        assert_eq!(code, EXIT_OK);
    }
    let grades = String::from_utf8(read(a.join("grades.csv"))).unwrap();
    assert_eq!(grades.lines().count(), 11);
    assert_eq!(grades.lines().filter(|l| l.ends_with(",2")).count(), 3);
    assert_eq!(grades, String::from_utf8(read(b.join("grades.csv"))).unwrap());
    assert_eq!(read(a.join("images/synth_00004.png")), read(b.join("images/synth_00004.png")));
    assert!(String::from_utf8(read(a.join(RUN_CONFIG_FILE))).unwrap().contains("seed = 5"));
}

#[test]
fn preprocess_reports_failures_and_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    assert_eq!(rdr(&["generate-synthetic", "--out", s(&corpus), "--n", "9", "--image-size", "64"]), EXIT_OK);
    image::RgbImage::new(64, 64).save(corpus.join("images/black.png")).unwrap();
    let mut grades = fs::read_to_string(corpus.join("grades.csv")).unwrap();
    grades.push_str("black,0\n");
    fs::write(corpus.join("grades.csv"), grades).unwrap();

    let images = corpus.join("images");
    let grades = corpus.join("grades.csv");
    let (a, b) = (dir.path().join("pre_a"), dir.path().join("pre_b"));
    for out in [&a, &b] {
        let code = rdr(&[
            "preprocess", "--input", s(&images), "--grades", s(&grades), "--out", s(out),
            "--source", "synthetic", "--set", "preprocess.target_size=32",
        ]);
        assert_eq!(code, EXIT_OK);
    }
    let pngs = |d: &Path| {
        let mut v: Vec<String> = fs::read_dir(d)
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .filter(|n| n.ends_with(".png"))
            .collect();
        v.sort();
        v
    };
    assert_eq!(pngs(&a).len(), 9);
    assert!(!a.join("black.png").exists());
    let failures = fs::read_to_string(a.join("failures.csv")).unwrap();
    assert_eq!(failures.lines().count(), 2);
    assert!(failures.lines().nth(1).unwrap().starts_with("black,"));
    assert_eq!(fs::read_to_string(a.join("circles.csv")).unwrap().lines().count(), 10);
    assert_eq!(read_manifest(&a.join("manifest.csv")).unwrap().entries.len(), 9);

    for name in pngs(&a) {
        assert_eq!(read(a.join(&name)), read(b.join(&name)), "{name}");
    }
    assert_eq!(read(a.join("circles.csv")), read(b.join("circles.csv")));
    assert_eq!(read(a.join("manifest.csv")), read(b.join("manifest.csv")));

    // One failure in ten breaches a 5% limit.
    let code = rdr(&[
        "preprocess", "--input", s(&images), "--grades", s(&grades), "--out", s(&dir.path().join("pre_c")),
        "--set", "preprocess.target_size=32", "--set", "preprocess.max_failure_fraction=0.05",
    ]);
    assert_eq!(code, EXIT_DATA);
}

#[test]
fn desk_pipeline_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = desk_config(d);
    let c = s(&cfg);
    let (corpus, pre, split, runs) = (d.join("corpus"), d.join("pre"), d.join("split"), d.join("runs"));

    assert_eq!(rdr(&["--config", c, "generate-synthetic", "--out", s(&corpus)]), EXIT_OK);
    assert_eq!(
        rdr(&["--config", c, "preprocess", "--input", s(&corpus.join("images")), "--grades", s(&corpus.join("grades.csv")), "--out", s(&pre)]),
        EXIT_OK
    );
    assert_eq!(rdr(&["--config", c, "split", "--manifest", s(&pre.join("manifest.csv")), "--out", s(&split)]), EXIT_OK);
    let manifest_path = split.join("manifest.csv");
    let m = read_manifest(&manifest_path).unwrap();
    let count = |sp| m.split(sp).count();
    assert_eq!((count(Split::Test), count(Split::Train), count(Split::Validation)), (20, 30, 10));

    let manifest = s(&manifest_path);
    let one = runs.join("one");
    assert_eq!(
        rdr(&["--config", c, "--deterministic", "train", "--manifest", manifest, "--images", s(&pre), "--out", s(&one)]),
        EXIT_OK
    );
    let log = fs::read_to_string(one.join("training_log.csv")).unwrap();
    assert_eq!(log.lines().count(), 3);
    let ens = runs.join("ens");
    assert_eq!(
        rdr(&["--config", c, "train-ensemble", "--members", "2", "--manifest", manifest, "--images", s(&pre), "--out", s(&ens)]),
        EXIT_OK
    );

    let eval_one = d.join("eval_one");
    let ckpt = one.join("best.ckpt");
    assert_eq!(
        rdr(&["--config", c, "evaluate", "--checkpoint", s(&ckpt), "--manifest", manifest, "--images", s(&pre), "--out", s(&eval_one)]),
        EXIT_OK
    );
    let eval_two = d.join("eval_two");
    let (m0, m1) = (ens.join("member_0/best.ckpt"), ens.join("member_1/best.ckpt"));
    assert_eq!(
        rdr(&[
            "--config", c, "evaluate", "--checkpoint", s(&m0), "--checkpoint", s(&m1), "--manifest", manifest,
            "--images", s(&pre), "--out", s(&eval_two), "--name", "synthetic-test",
        ]),
        EXIT_OK
    );
    for f in ["predictions.csv", "predictions_member_1.csv", "roc.csv", "report.txt", RUN_CONFIG_FILE] {
        assert!(eval_two.join(f).is_file(), "{f}");
    }
    let report: EvaluationReport = serde_json::from_slice(&read(eval_two.join("report.json"))).unwrap();
    assert_eq!((report.n_images, report.positives, report.ensemble_size), (20, 10, 2));
    assert_eq!(report.test_set_name, "synthetic-test");
    assert_eq!(fs::read_to_string(eval_two.join("roc.csv")).unwrap().lines().count(), 201);

    let table = d.join("table.txt");
    assert_eq!(
        rdr(&["report", "--input", s(&eval_one.join("report.json")), "--input", s(&eval_two.join("report.json")), "--out", s(&table), "--reference"]),
        EXIT_OK
    );
    let table = fs::read_to_string(table).unwrap();
    assert!(table.contains("synthetic-test (n=20, k=2)"));
    assert!(table.contains("test (n=20, k=1)"));

    let missing = d.join("nope.ckpt");
    assert_eq!(
        rdr(&["evaluate", "--checkpoint", s(&missing), "--manifest", manifest, "--images", s(&pre), "--out", s(&d.join("eval_bad"))]),
        EXIT_DATA
    );

    let code = rdr(&[
        "--config", c, "--set", "training.learning_rate=1e30", "--set", "training.rmsprop_epsilon=1e-30",
        "train-ensemble", "--members", "1", "--manifest", manifest, "--images", s(&pre), "--out", s(&runs.join("diverge")),
    ]);
    assert_eq!(code, EXIT_TRAINING);
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(rdr(&["frobnicate"]), EXIT_USAGE);
    assert_eq!(rdr(&["evaluate", "--manifest", "m.csv"]), EXIT_USAGE);
    assert_eq!(rdr(&["--set", "training.no_such_key=1", "report", "--input", "r.json"]), EXIT_USAGE);
    assert_eq!(rdr(&["--set", "training.learning_rate=-1", "train", "--manifest", "m", "--images", "i", "--out", "o"]), EXIT_USAGE);
    assert_eq!(rdr(&["--help"]), EXIT_OK);
}

#[test]
fn split_without_class_balance_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    assert_eq!(rdr(&["--set", "split.test.n_total=10", "split", "--manifest", "m.csv", "--out", s(&out)]), EXIT_USAGE);
    assert_eq!(rdr(&["split", "--manifest", "m.csv", "--out", s(&out)]), EXIT_USAGE);
    let code = rdr(&["--set", "split.test.n_total=10", "--set", "split.test.positive_fraction=0.5", "split", "--manifest", "m.csv", "--out", s(&out)]);
    assert_eq!(code, EXIT_DATA);
}

#[test]
fn binary_reports_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_rdr");
    let help = Command::new(bin).arg("--help").output().unwrap();
    assert!(help.status.success());
    let text = String::from_utf8(help.stdout).unwrap();
    for sub in ["generate-synthetic", "preprocess", "split", "serve-grading", "train", "train-ensemble", "evaluate", "report"] {
        assert!(text.contains(sub), "{sub}");
    }
    assert_eq!(Command::new(bin).arg("bogus").status().unwrap().code(), Some(EXIT_USAGE));
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(bin)
        .args(["report", "--input"])
        .arg(dir.path().join("missing.json"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(EXIT_DATA));
}

#[test]
fn shipped_configs_load() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let desk = RunConfig::load(Some(&root.join("desk_synthetic.toml")), &[], None).unwrap();
    assert_eq!(desk.test_split().unwrap().unwrap().n_total, 500);
    assert_eq!(desk.ensemble_spec().unwrap().member_seeds().len(), 5);

    let full = RunConfig::load(Some(&root.join("full_scale.toml")), &[], Some(7)).unwrap();
    assert_eq!((full.seed, full.training.seed), (7, 7));
    assert_eq!(full.ensemble_spec().unwrap().member_seeds().len(), 10);
    // Class balance is left for the operator to fill in.
    assert_eq!(full.test_split().unwrap_err().code, EXIT_USAGE);
}
