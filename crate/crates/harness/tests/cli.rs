use std::path::{Path, PathBuf};
use std::process::Command;

use clap::Parser;
use cva_greeks::greeks::{delta_conditional, EstimatorRun, Moments, RunConfig};
use cva_harness::config::{Cli, Config, DiscountKind, Estimator, Mode};
use cva_harness::report::{efficiency_ratio, HEADER};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn base(out: &Path) -> Config {
    Config {
        rates_file: root().join("fixtures/ESTR.csv"),
        credit_file: root().join("fixtures/INDUSTRIAL_Ba.csv"),
        paths: 3_000,
        out_dir: out.to_path_buf(),
        ..Config::default()
    }
}

fn cli(args: &[&str]) -> anyhow::Result<Config> {
    let mut v = vec!["cva-greeks"];
    v.extend_from_slice(args);
    Cli::try_parse_from(v)?.resolve()
}

#[test]
fn shipped_configs_parse() {
    let c = Config::from_file(&root().join("configs/desk.toml")).unwrap();
    assert_eq!(c.lgd, 0.6);
    assert_eq!(c.paths, 100_000);
    assert_eq!(c.estimator, [Estimator::Price, Estimator::Ad]);
    let b = Config::from_file(&root().join("configs/bilateral.toml")).unwrap();
    assert_eq!(b.mode, Mode::Bilateral);
    assert_eq!(b.rho, 0.5);
}

#[test]
fn unknown_keys_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.toml");
    std::fs::write(&p, "paths = 10\nnum_paths = 20\n").unwrap();
    let e = format!("{:#}", Config::from_file(&p).unwrap_err());
    assert!(e.contains("num_paths"), "{e}");
}

#[test]
fn invalid_values_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let ok = base(dir.path());
    ok.validate().unwrap();
    let bad = [
        Config { paths: 0, ..ok.clone() },
        Config { lgd: 0.0, ..ok.clone() },
        Config { rho: 1.0, ..ok.clone() },
        Config {
            bump_bp: vec![-1.0],
            ..ok.clone()
        },
        Config {
            mode: Mode::Bilateral,
            ..ok.clone()
        },
        Config {
            credit_file: "no/such/file.csv".into(),
            ..ok.clone()
        },
        Config {
            mode: Mode::Bilateral,
            second_credit_file: Some(root().join("fixtures/BANK_FLAT_1PCT.csv")),
            estimator: vec![Estimator::Dist],
            ..ok.clone()
        },
    ];
    for c in bad {
        assert!(c.validate().is_err(), "{c:?}");
    }
}

#[test]
fn flags_override_config() {
    let cfg = root().join("configs/desk.toml");
    let rates = root().join("fixtures/ESTR.csv");
    let credit = root().join("fixtures/INDUSTRIAL_Ba.csv");
    let c = cli(&[
        "--config",
        cfg.to_str().unwrap(),
        "--rates-file",
        rates.to_str().unwrap(),
        "--credit-file",
        credit.to_str().unwrap(),
        "--paths",
        "500",
        "--estimator",
        "ad,cd",
        "--bump-bp",
        "5",
        "--rho",
        "-0.3",
        "--discounting",
        "deterministic",
    ])
    .unwrap();
    assert_eq!(c.paths, 500);
    assert_eq!(c.estimator, [Estimator::Ad, Estimator::Cd]);
    assert_eq!(c.bump_bp, [5.0]);
    assert_eq!(c.rho, -0.3);
    assert_eq!(c.discounting, DiscountKind::Deterministic);
    assert_eq!(c.lgd, 0.6);
}

#[test]
fn zero_paths_flag_rejected() {
    let rates = root().join("fixtures/ESTR.csv");
    let credit = root().join("fixtures/INDUSTRIAL_Ba.csv");
    let e = cli(&[
        "--rates-file",
        rates.to_str().unwrap(),
        "--credit-file",
        credit.to_str().unwrap(),
        "--paths",
        "0",
    ])
    .unwrap_err();
    assert!(e.to_string().contains("paths"), "{e}");
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    v.sort();
    v
}

#[test]
fn untimed_runs_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let est = vec![
        Estimator::Price,
        Estimator::Ad,
        Estimator::Cd,
        Estimator::Ad2,
        Estimator::Cdad,
    ];
    let mk = |d: &Path, workers| Config {
        estimator: est.clone(),
        bump_bp: vec![10.0],
        record_timing: false,
        workers,
        paths: 1_500,
        ..base(d)
    };
    cva_harness::run(&mk(a.path(), 1)).unwrap();
    cva_harness::run(&mk(b.path(), 4)).unwrap();
    let (x, y) = (read_dir_sorted(a.path()), read_dir_sorted(b.path()));
    assert!(x.len() > 10);
    assert_eq!(x, y);
}

#[test]
fn report_schema() {
    let d = tempfile::tempdir().unwrap();
    let out = cva_harness::run(&Config {
        estimator: vec![Estimator::Ad],
        ..base(d.path())
    })
    .unwrap();
    let text = std::fs::read_to_string(d.path().join("delta_ad.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), HEADER.join(","));
    let rows: Vec<&str> = lines.collect();
    // 10 credit pillars, rate pillars, two parallel views
    let r = &out.runs["delta_ad"];
    assert_eq!(rows.len(), r.dim());
    assert!(rows[0].starts_with("theta[0],6M,"));
    assert!(rows.iter().any(|l| l.starts_with("theta[sum],parallel,")));
    for l in rows {
        assert_eq!(l.split(',').count(), HEADER.len());
    }
}

fn fake(wall: f64) -> EstimatorRun {
    let mut m = Moments::default();
    for x in [1.0, 2.0, 4.0] {
        m.push(x);
    }
    EstimatorRun {
        estimator: "x".into(),
        coordinates: vec!["theta[0]".into(), "theta[1]".into()],
        pillar_labels: vec!["1Y".into(), "2Y".into()],
        moments: vec![m, m],
        per_path: None,
        n_paths: 3,
        seed: 1,
        wall_time: wall,
    }
}

#[test]
fn efficiency_ratio_tracks_time() {
    assert!((efficiency_ratio(&fake(1.0), &fake(2.0)).unwrap() - 2.0).abs() < 1e-12);
    assert!(efficiency_ratio(&fake(0.0), &fake(2.0)).is_none());
}

#[test]
fn efficiency_is_path_count_invariant() {
    let x = cva_greeks::greeks::toy_experiment(0.3, 2.0).unwrap();
    // best of three to keep scheduler noise out of the wall time
    let best = |n: usize| {
        (0..3)
            .map(|k| delta_conditional(&x, &RunConfig::new(n, 60 + k)).unwrap())
            .min_by(|a, b| a.wall_time.total_cmp(&b.wall_time))
            .unwrap()
    };
    let (a, b) = (best(400_000), best(800_000));
    let hw = a.half_ci(0) / b.half_ci(0);
    assert!((hw / 2f64.sqrt() - 1.0).abs() < 0.15, "half-width ratio {hw}");
    let e = b.efficiency(0) / a.efficiency(0);
    assert!((e - 1.0).abs() < 0.2, "efficiency ratio {e}");
}

#[test]
fn binary_end_to_end() {
    let d = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_cva-greeks"))
        .current_dir(root())
        .args(["--config", "configs/desk.toml", "--paths", "1000", "--out-dir"])
        .arg(d.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("price"));
    assert!(d.path().join("price.csv").is_file());
    let bad = Command::new(env!("CARGO_BIN_EXE_cva-greeks"))
        .current_dir(root())
        .args(["--config", "configs/desk.toml", "--paths", "0"])
        .output()
        .unwrap();
    assert!(!bad.status.success());
}
