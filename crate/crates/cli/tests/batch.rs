use std::path::{Path, PathBuf};
use std::process::Command;

use sena_cli::{output_path, run_batch, Method, RunManifest};
use sena_core::imgcore::io::read_rgb;
use sena_core::iqa::{mean_brightness, piqe};

fn repo() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn manifest(out: &Path, workers: usize) -> RunManifest {
    let mut m = RunManifest::new(
        repo().join("fixtures/batch"),
        out.join("images"),
        vec![Method::Sena, Method::Clahe, Method::None],
        out.join("report.csv"),
    );
    m.worker_count = workers;
    m.niqe_model = Some(repo().join("fixtures/models/niqe_pristine.nss"));
    m.omit_timing = true;
    m
}

#[test]
fn golden_report_is_stable() {
    let golden = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/batch_report.csv");
    let dir = tempfile::tempdir().unwrap();
    run_batch(&manifest(dir.path(), 2)).unwrap();
    let produced = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&golden, &produced).unwrap();
    }
    let expected = std::fs::read_to_string(&golden).expect("golden file; regenerate with UPDATE_GOLDEN=1");
    assert_eq!(produced, expected);
}

#[test]
fn parallel_and_serial_runs_agree() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let serial = run_batch(&manifest(a.path(), 1)).unwrap();
    let parallel = run_batch(&manifest(b.path(), 4)).unwrap();
    assert_eq!(serial.csv_string(false), parallel.csv_string(false));
    for rel in ["day/coffee.png", "night/rocket.png"] {
        for m in [Method::Sena, Method::Clahe] {
            let x = std::fs::read(output_path(&a.path().join("images"), Path::new(rel), m)).unwrap();
            let y = std::fs::read(output_path(&b.path().join("images"), Path::new(rel), m)).unwrap();
            assert_eq!(x, y, "{rel} {m}");
        }
    }
}

#[test]
fn report_shape_and_means() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_batch(&manifest(dir.path(), 2)).unwrap();
    assert_eq!(report.rows.len(), 6 * 3);
    assert_eq!(report.failures(), 0);
    for summary in &report.methods {
        let piqes: Vec<f64> = report
            .rows
            .iter()
            .filter(|r| r.method == summary.method)
            .map(|r| r.metrics().unwrap().piqe)
            .collect();
        let mean = piqes.iter().sum::<f64>() / piqes.len() as f64;
        assert!((summary.means.piqe.unwrap() - mean).abs() < 1e-12);
        assert_eq!(summary.timing.is_some(), summary.method != Method::None);
    }
    let json: serde_json::Value =
        serde_json::from_reader(std::fs::File::open(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(json["rows"].as_array().unwrap().len(), 18);
    assert_eq!(json["comparisons"].as_array().unwrap().len(), 3 * 6);
}

#[test]
fn pass_through_reproduces_inputs_and_their_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let mut m = manifest(dir.path(), 2);
    m.methods = vec![Method::None];
    let report = run_batch(&m).unwrap();
    for row in &report.rows {
        let original = read_rgb(repo().join("fixtures/batch").join(&row.file)).unwrap();
        let written = read_rgb(output_path(&m.output_dir, Path::new(&row.file), Method::None)).unwrap();
        assert_eq!(original, written, "{}", row.file);
        let metrics = row.metrics().unwrap();
        assert_eq!(metrics.mean_brightness, mean_brightness(&original));
        assert_eq!(metrics.piqe, piqe(&original).unwrap());
    }
}

#[test]
fn unreadable_image_becomes_an_error_row() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in");
    std::fs::create_dir_all(input.join("sub")).unwrap();
    std::fs::copy(repo().join("fixtures/batch/day/coffee.png"), input.join("good.png")).unwrap();
    std::fs::write(input.join("sub/broken.png"), b"not a png").unwrap();

    let status = Command::new(env!("CARGO_BIN_EXE_sena"))
        .args(["batch", "--methods", "sena,none", "--input"])
        .arg(&input)
        .arg("--output")
        .arg(dir.path().join("out"))
        .arg("--report")
        .arg(dir.path().join("r.csv"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
    let csv = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("good.png,none,ok,"));
    assert!(lines[2].starts_with("good.png,sena,ok,"));
    assert!(lines[3].starts_with("sub/broken.png,none,error,"));
    assert!(lines[4].starts_with("sub/broken.png,sena,error,"));
    assert!(dir.path().join("out/good_sena.png").is_file());
}

#[test]
fn exit_codes() {
    let bin = env!("CARGO_BIN_EXE_sena");
    let dir = tempfile::tempdir().unwrap();
    let run = |args: &[&str], env: Option<&str>| {
        let mut c = Command::new(bin);
        c.args(args).env_remove("SENA_WORKERS");
        if let Some(v) = env {
            c.env("SENA_WORKERS", v);
        }
        c.output().unwrap().status.code()
    };
    let out = dir.path().join("o.png");
    let out = out.to_str().unwrap();
    let fixture = repo().join("fixtures/batch/day/coffee.png");
    let fixture = fixture.to_str().unwrap();
    let report = dir.path().join("r.csv");
    let report = report.to_str().unwrap();
    let input = repo().join("fixtures/batch/night");
    let input = input.to_str().unwrap();
    let outdir = dir.path().join("b");
    let outdir = outdir.to_str().unwrap();

    assert_eq!(run(&["enhance", fixture, out], None), Some(0));
    assert!(read_rgb(out).is_ok());
    assert_eq!(run(&["enhance", fixture, out, "--method", "retinex"], None), Some(2));
    assert_eq!(run(&["bench", fixture, "-n", "3"], None), Some(2));
    assert_eq!(run(&["frobnicate"], None), Some(2));
    assert_eq!(run(&["enhance", "/nonexistent.png", out], None), Some(1));
    let batch = ["batch", "--input", input, "--output", outdir, "--report", report];
    assert_eq!(run(&batch, Some("0")), Some(2));
    assert_eq!(run(&batch, Some("2")), Some(0));

    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[sena]\ngamma = -1.0\n").unwrap();
    assert_eq!(run(&["enhance", fixture, out, "--config", cfg.to_str().unwrap()], None), Some(2));
}

#[test]
fn dump_intermediates_writes_planes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.png");
    let status = Command::new(env!("CARGO_BIN_EXE_sena"))
        .arg("enhance")
        .arg(repo().join("fixtures/batch/day/astronaut.png"))
        .arg(&out)
        .arg("--dump-intermediates")
        .status()
        .unwrap();
    assert!(status.success());
    let planes = dir.path().join("x_intermediates");
    for name in ["mask", "laplacian_stretched", "y_pre_norm", "cr_adjusted", "preprocessed", "linear_output"] {
        assert!(planes.join(format!("{name}.png")).is_file(), "{name}");
    }
}
