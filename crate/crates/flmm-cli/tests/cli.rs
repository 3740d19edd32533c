//! End-to-end checks of the binary and the command layer.

use flmm_cli::bench::{log_log_slope, sweep, BenchSetup};
use flmm_cli::config::Config;
use flmm_cli::fode_cmd::{sweep_errors, ErrorMode, FodeSweep};
use flmm_cli::{run, CliError};
use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_flmm"))
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("flmm_cli_{tag}_{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

#[test]
fn validation_errors_exit_with_code_2() {
    let status = bin().arg("nonsense").status().unwrap();
    assert_eq!(status.code(), Some(2));
    let status = bin().args(["weights", "--gf", "bogus9"]).status().unwrap();
    assert_eq!(status.code(), Some(2));
    let status = bin().args(["fode", "--taus", "0.1,0.03"]).status().unwrap();
    assert_eq!(status.code(), Some(2), "non-halving tau list must be rejected");
    let status = bin()
        .args(["rd", "--engine", "talbot", "--T", "1"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn successful_run_exits_zero_and_writes_outputs() {
    let dir = tmp_dir("ok");
    let status = bin()
        .args([
            "weights",
            "--alpha",
            "0.5",
            "--Q",
            "64",
            "--nT",
            "2000",
            "--points",
            "50",
            "--out",
            dir.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(dir.join("weights.csv").exists());
    assert!(dir.join("rule.csv").exists());
    assert!(dir.join("manifest.txt").exists());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn outputs_are_deterministic_and_manifest_reruns_bit_identically() {
    let (d1, d2, d3) = (tmp_dir("det1"), tmp_dir("det2"), tmp_dir("det3"));
    let args = |out: &PathBuf| {
        vec![
            "weights".to_string(),
            "--alpha".into(),
            "0.3".into(),
            "--sigma".into(),
            "0.5".into(),
            "--Q".into(),
            "96".into(),
            "--nT".into(),
            "3000".into(),
            "--points".into(),
            "80".into(),
            "--out".into(),
            out.to_str().unwrap().into(),
        ]
    };
    run(&args(&d1)).unwrap();
    run(&args(&d2)).unwrap();
    let a = std::fs::read(d1.join("weights.csv")).unwrap();
    let b = std::fs::read(d2.join("weights.csv")).unwrap();
    assert_eq!(a, b, "same flags must reproduce identical bytes");

    // Re-run from the manifest alone.
    let rerun = vec![
        "weights".to_string(),
        "--config".into(),
        d1.join("manifest.txt").to_str().unwrap().into(),
        "--out".into(),
        d3.to_str().unwrap().into(),
    ];
    run(&rerun).unwrap();
    let c = std::fs::read(d3.join("weights.csv")).unwrap();
    assert_eq!(a, c, "manifest re-run must reproduce identical bytes");
    for d in [d1, d2, d3] {
        std::fs::remove_dir_all(&d).unwrap();
    }
}

#[test]
fn degenerate_two_node_rule_still_runs() {
    let dir = tmp_dir("q2");
    let args: Vec<String> = [
        "weights", "--Q", "2", "--nT", "500", "--points", "20", "--out",
        dir.to_str().unwrap(),
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    run(&args).unwrap();
    let csv = std::fs::read_to_string(dir.join("weights.csv")).unwrap();
    let worst: f64 = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(3).unwrap().parse::<f64>().unwrap())
        .fold(0.0, f64::max)
        ;
    assert!(worst.is_finite());
    assert!(worst > 1e-3, "two nodes cannot be accurate, got {worst:e}");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn bdf2_regime_shows_second_order_in_the_table() {
    let sweep = FodeSweep {
        gf: flmm::GeneratingFunction::gngf(2).unwrap(),
        alpha: 1.0,
        sigma: 0.0,
        t_end: 2.0,
        taus: vec![1.0 / 16.0, 1.0 / 32.0],
        ms: vec![1],
        engine: flmm::Engine::Direct,
        mode: ErrorMode::Max,
    };
    let errors = sweep_errors(&sweep, 2).unwrap();
    let order = (errors[0][0] / errors[1][0]).log2();
    assert!((1.6..=2.4).contains(&order), "order {order}");
}

#[test]
fn single_size_bench_omits_the_slope() {
    let setup = BenchSetup {
        gf: flmm::GeneratingFunction::gngf(2).unwrap(),
        alpha: 0.5,
        sigma: 0.0,
        tau: 0.01,
        q: 64,
        n0: 50,
        talbot: flmm::talbot::TalbotParams { n_nodes: 12, base: 5, n0: 50 },
    };
    let (report, _) = sweep(&setup, &[400]).unwrap();
    assert!(report.slopes.is_empty());
    assert_eq!(report.rows.len(), 3);
}

#[test]
fn fast_engine_cost_is_linear_in_quadrature_points() {
    // Operation counters double exactly when Q doubles at fixed n_T.
    use flmm::realline::{RealLineConvolver, RealLineParams};
    let gf = flmm::GeneratingFunction::gngf(2).unwrap();
    let count = |q: usize| {
        let mut conv =
            RealLineConvolver::new(&gf, 0.5, 0.0, 0.01, RealLineParams::with_q(q), 2000).unwrap();
        for k in 0..=2000 {
            conv.feed(k as f64 * 0.01);
        }
        conv.stats.history_madds
    };
    assert_eq!(count(256), 2 * count(128));
}

#[test]
fn slope_fit_recovers_known_exponents() {
    let sizes = [1_000usize, 10_000, 100_000];
    let quadratic: Vec<f64> = sizes.iter().map(|n| 1e-9 * (*n as f64).powi(2)).collect();
    let s = log_log_slope(&sizes, &quadratic);
    assert!((s - 2.0).abs() < 1e-9);
}

#[test]
fn rd_preset_expands_to_expected_parameters() {
    let dir = tmp_dir("preset");
    let args: Vec<String> = [
        "rd", "--preset", "fig8b", "--T", "1", "--cells", "32", "--save-every", "50",
        "--out", dir.to_str().unwrap(),
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    run(&args).unwrap();
    let manifest = std::fs::read_to_string(dir.join("manifest.txt")).unwrap();
    assert!(manifest.contains("kinetics = brusselator"));
    assert!(manifest.contains("alpha1 = 0.5"));
    assert!(manifest.contains("alpha2 = 0.5"));
    assert!(manifest.contains("d = 17"));
    assert!(dir.join("manifest.json").exists());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn rd_with_zero_perturbation_stays_homogeneous() {
    let dir = tmp_dir("flat");
    let args: Vec<String> = [
        "rd", "--preset", "fig8b", "--epsilon", "0", "--T", "2", "--cells", "64",
        "--save-every", "100", "--out", dir.to_str().unwrap(),
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    run(&args).unwrap();
    // Every snapshot must be spatially flat to roundoff.
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_string_lossy().to_string();
        if !name.starts_with("snap_") {
            continue;
        }
        let csv = std::fs::read_to_string(&path).unwrap();
        let us: Vec<f64> = csv
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
            .collect();
        let mean = us.iter().sum::<f64>() / us.len() as f64;
        let var = us.iter().map(|u| (u - mean) * (u - mean)).sum::<f64>() / us.len() as f64;
        assert!(var <= 1e-20, "{name}: variance {var:e}");
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn library_level_validation_is_typed() {
    let args: Vec<String> = ["weights", "--nT", "10"].iter().map(|s| s.to_string()).collect();
    match run(&args) {
        Err(CliError::Validation(_)) => {}
        other => panic!("expected validation error, got {other:?}"),
    }
    let cfg = Config::from_pairs(&[("engine", "warp-drive")]);
    match flmm_cli::fode_cmd::run(cfg) {
        Err(CliError::Validation(_)) => {}
        other => panic!("expected validation error, got {other:?}"),
    }
}
