use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const TOY: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/toy.libsvm");

fn casgd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_casgd"))
        .args(args)
        .output()
        .unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn train(dir: &TempDir, name: &str, extra: &[&str]) -> (PathBuf, Output) {
    let trace = dir.path().join(name);
    let mut args = vec!["train", "--data", TOY, "--trace", path_str(&trace)];
    args.extend_from_slice(extra);
    let out = casgd(&args);
    (trace, out)
}

fn rows(csv: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(csv)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn field(out: &Output, key: &str) -> f64 {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .find_map(|l| l.strip_prefix(key))
        .unwrap()
        .trim()
        .parse()
        .unwrap()
}

#[test]
fn zero_epochs_records_only_the_origin() {
    let dir = TempDir::new().unwrap();
    let (trace, out) = train(&dir, "t.csv", &["--epochs", "0"]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(trace).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "epoch,loss,accuracy,flops,words,messages,collectives"
    );
    assert_eq!(lines.len(), 2);
    let loss: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
    assert!((loss - std::f64::consts::LN_2).abs() <= 1e-15);
    assert!(lines[1].ends_with(",0,0,0,0"));
}

#[test]
fn gd_is_sgd_with_the_full_batch() {
    let dir = TempDir::new().unwrap();
    let (gd, o1) = train(
        &dir,
        "gd.csv",
        &["--algo", "gd", "--epochs", "5", "--eta", "1"],
    );
    let (sgd, o2) = train(
        &dir,
        "sgd.csv",
        &[
            "--algo", "sgd", "--batch", "200", "--epochs", "5", "--eta", "1",
        ],
    );
    assert!(o1.status.success() && o2.status.success());
    assert_eq!(std::fs::read(gd).unwrap(), std::fs::read(sgd).unwrap());
}

#[test]
fn sgd_overtakes_gd_on_the_toy_set() {
    let dir = TempDir::new().unwrap();
    let (sgd, _) = train(
        &dir,
        "sgd.csv",
        &["--algo", "sgd", "--eta", "10", "--epochs", "100"],
    );
    let (gd, _) = train(
        &dir,
        "gd.csv",
        &["--algo", "gd", "--eta", "1", "--epochs", "100"],
    );
    let at = |p: &Path| -> f64 { rows(p)[100][1].parse().unwrap() };
    assert!(at(&sgd) < at(&gd));
}

#[test]
fn prints_final_loss_and_accuracy() {
    let dir = TempDir::new().unwrap();
    let (trace, out) = train(
        &dir,
        "t.csv",
        &[
            "--algo", "casgd", "--s-step", "4", "--procs", "2", "--epochs", "3",
        ],
    );
    assert!(out.status.success());
    let last = rows(&trace).pop().unwrap();
    assert_eq!(field(&out, "loss "), last[1].parse::<f64>().unwrap());
    assert_eq!(field(&out, "accuracy "), last[2].parse::<f64>().unwrap());
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    assert_eq!(
        casgd(&["train", "--data", TOY, "--bogus"]).status.code(),
        Some(2)
    );
    assert_eq!(
        casgd(&["train", "--data", TOY, "--algo", "newton"])
            .status
            .code(),
        Some(2)
    );

    let missing = dir.path().join("missing.libsvm");
    assert_eq!(
        casgd(&["train", "--data", path_str(&missing)])
            .status
            .code(),
        Some(1)
    );

    let bad = dir.path().join("bad.libsvm");
    std::fs::write(&bad, "+1 1:1\n+1 3:1 2:0.5\n").unwrap();
    let out = casgd(&["train", "--data", path_str(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn failed_run_leaves_no_trace() {
    let dir = TempDir::new().unwrap();
    let (trace, out) = train(
        &dir,
        "t.csv",
        &["--layout", "row", "--procs", "3", "--batch", "4"],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(!trace.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn gzip_input_matches_plain() {
    use flate2::{write::GzEncoder, Compression};
    use std::io::Write;

    let dir = TempDir::new().unwrap();
    let gz = dir.path().join("toy.libsvm.gz");
    let mut enc = GzEncoder::new(std::fs::File::create(&gz).unwrap(), Compression::default());
    enc.write_all(&std::fs::read(TOY).unwrap()).unwrap();
    enc.finish().unwrap();
    let (plain, _) = train(&dir, "plain.csv", &["--epochs", "2"]);
    let zipped = dir.path().join("zipped.csv");
    let out = casgd(&[
        "train",
        "--data",
        path_str(&gz),
        "--gzip",
        "--epochs",
        "2",
        "--trace",
        path_str(&zipped),
    ]);
    assert!(out.status.success());
    assert_eq!(
        std::fs::read(plain).unwrap(),
        std::fs::read(zipped).unwrap()
    );
}

fn compare(dir: &TempDir, data: &str, extra: &[&str]) -> (Output, Vec<Vec<String>>) {
    let csv = dir.path().join("compare.csv");
    let mut args = vec!["compare", "--data", data, "--out", path_str(&csv)];
    args.extend_from_slice(extra);
    let out = casgd(&args);
    let body = if csv.exists() { rows(&csv) } else { Vec::new() };
    (out, body)
}

#[test]
fn compare_unit_s_is_exact() {
    let dir = TempDir::new().unwrap();
    let (out, body) = compare(
        &dir,
        TOY,
        &[
            "--s-list", "1", "--epochs", "10", "--eta", "10", "--procs", "4",
        ],
    );
    assert!(out.status.success());
    assert_eq!(body.len(), 11);
    for r in &body {
        assert!(r[2].parse::<f64>().unwrap() <= 1e-15);
    }
}

#[test]
fn compare_row_layout_and_tolerance_exit() {
    let dir = TempDir::new().unwrap();
    let flags = [
        "--s-list", "2,3,8", "--epochs", "5", "--eta", "10", "--layout", "row", "--procs", "2",
        "--batch", "2",
    ];
    let (out, body) = compare(&dir, TOY, &flags);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(!body.is_empty());
    let mut strict = flags.to_vec();
    strict.push("--tolerance=-1");
    let (out, _) = compare(&dir, TOY, &strict);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn compare_error_grows_with_unrolling() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("mush.libsvm");
    let out = casgd(&[
        "generate",
        "--kind",
        "mushrooms",
        "--m",
        "1500",
        "--seed",
        "4",
        "--out",
        path_str(&data),
    ]);
    assert!(out.status.success());
    let (out, body) = compare(
        &dir,
        path_str(&data),
        &[
            "--labels",
            "2,1",
            "--num-features",
            "112",
            "--s-list",
            "2,512",
            "--epochs",
            "10",
            "--eta",
            "10",
            "--procs",
            "4",
        ],
    );
    assert!(out.status.success());
    let worst = |s: &str| {
        body.iter()
            .filter(|r| r[1] == s)
            .map(|r| r[2].parse::<f64>().unwrap())
            .fold(0.0, f64::max)
    };
    assert!(worst("512") <= 1e-10);
    assert!(worst("512") >= worst("2"));
}

fn costs(extra: &[&str]) -> Output {
    let mut args = vec!["costs"];
    args.extend_from_slice(extra);
    casgd(&args)
}

fn cost_row(out: &Output, prefix: &str) -> Vec<String> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .find(|l| l.starts_with(prefix))
        .unwrap_or_else(|| panic!("no row {prefix}"))
        .split(',')
        .map(str::to_owned)
        .collect()
}

#[test]
fn costs_examples() {
    let machine = ["--alpha", "1", "--beta", "0", "--gamma", "0"];
    let mut a = vec![
        "--m", "30", "--n", "8", "--f", "1", "--p", "4", "--b", "3", "--s", "1", "--epochs", "1",
    ];
    a.extend(machine);
    let out = costs(&a);
    assert!(out.status.success());
    let sgd = cost_row(&out, "sgd,col,");
    assert_eq!((sgd[3].as_str(), sgd[4].as_str()), ("30", "20"));

    let mut a = vec![
        "--m", "20", "--n", "8", "--f", "1", "--p", "4", "--b", "2", "--s", "5", "--epochs", "1",
    ];
    a.extend(machine);
    let out = costs(&a);
    let ca = cost_row(&out, "casgd,col,");
    assert_eq!((ca[3].as_str(), ca[5].as_str()), ("220", "2"));

    let out = costs(&[
        "--m", "20", "--n", "8", "--f", "1", "--p", "4", "--b", "2", "--s", "5", "--epochs", "1",
        "--alpha", "0", "--beta", "1", "--gamma", "1",
    ]);
    assert_eq!(cost_row(&out, "crossover_s,col")[2], "1");
    assert_eq!(cost_row(&out, "crossover_s,row")[2], "1");

    let out = costs(&[
        "--m", "20", "--n", "8", "--f", "2", "--p", "4", "--b", "2", "--s", "5", "--epochs", "1",
        "--alpha", "1", "--beta", "1", "--gamma", "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn train_counters_match_costs_prediction() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("dense.libsvm");
    let gen = [
        "generate",
        "--m",
        "64",
        "--n",
        "16",
        "--density",
        "1",
        "--seed",
        "2",
        "--out",
        path_str(&data),
    ];
    assert!(casgd(&gen).status.success());
    for (algo, layout, lname, s) in [
        ("sgd", "col", "sgd,col,", "1"),
        ("casgd", "col", "casgd,col,", "4"),
        ("sgd", "row", "sgd,row,", "1"),
        ("casgd", "row", "casgd,row,", "4"),
    ] {
        let trace = dir.path().join("t.csv");
        let out = casgd(&[
            "train",
            "--data",
            path_str(&data),
            "--algo",
            algo,
            "--layout",
            layout,
            "--procs",
            "4",
            "--batch",
            "8",
            "--s-step",
            s,
            "--epochs",
            "3",
            "--trace",
            path_str(&trace),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let last = rows(&trace).pop().unwrap();
        let predicted = costs(&[
            "--m", "64", "--n", "16", "--f", "1", "--p", "4", "--b", "8", "--s", s, "--epochs",
            "3", "--alpha", "1", "--beta", "1", "--gamma", "1",
        ]);
        let row = cost_row(&predicted, lname);
        assert_eq!(&last[3..7], &row[2..6], "{algo} {layout}");
    }
}

#[test]
fn bench_reports_every_phase() {
    let dir = TempDir::new().unwrap();
    for repeats in ["1", "5"] {
        let csv = dir.path().join(format!("bench{repeats}.csv"));
        let out = casgd(&[
            "bench",
            "--data",
            TOY,
            "--s-step",
            "8",
            "--procs",
            "2",
            "--epochs",
            "3",
            "--repeats",
            repeats,
            "--out",
            path_str(&csv),
        ]);
        assert!(out.status.success());
        let body = rows(&csv);
        assert_eq!(body.len(), 8);
        assert_eq!(body[7][0], "total");
        let populated = body.iter().all(|r| !r[2].is_empty());
        assert_eq!(populated, repeats == "5");
        let sum: f64 = body[..7].iter().map(|r| r[1].parse::<f64>().unwrap()).sum();
        let total: f64 = body[7][1].parse().unwrap();
        assert!(sum <= total * 1.05);
    }
}
