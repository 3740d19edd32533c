//! `flmm fode`: convergence table for the linear fractional relaxation
//! problem (f = 0) against the analytic reference, over a τ-halving sweep and
//! a list of correction counts.

use crate::config::Config;
use crate::{parse_gf, write_output, CliError};
use flmm::fode::{reference_linear, solve, FodeProblem, Rhs};
use flmm::operator::Engine;
use flmm::realline::RealLineParams;
use flmm::talbot::TalbotParams;
use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorMode {
    Max,
    Final,
}

pub struct FodeSweep {
    pub gf: flmm::GeneratingFunction,
    pub alpha: f64,
    pub sigma: f64,
    pub t_end: f64,
    pub taus: Vec<f64>,
    pub ms: Vec<usize>,
    pub engine: Engine,
    pub mode: ErrorMode,
}

fn one_error(sweep: &FodeSweep, tau: f64, m: usize) -> Result<f64, CliError> {
    let mut p = FodeProblem::new(sweep.alpha, sweep.sigma, Rhs::zero(), 1.0, sweep.t_end, tau);
    p.gf = sweep.gf.clone();
    p.m = m;
    p.engine = sweep.engine;
    let traj = solve(&p).map_err(|e| CliError::Runtime(e.to_string()))?;
    let err = match sweep.mode {
        ErrorMode::Max => traj
            .times
            .iter()
            .zip(traj.values.iter())
            .map(|(t, u)| {
                let r = reference_linear(sweep.alpha, sweep.sigma, *t).expect("valid order");
                (u - r).abs()
            })
            .fold(0.0, f64::max),
        ErrorMode::Final => {
            let t = *traj.times.last().expect("nonempty");
            let r = reference_linear(sweep.alpha, sweep.sigma, t).expect("valid order");
            (traj.values.last().unwrap() - r).abs()
        }
    };
    Ok(err)
}

/// `errors[i][j]` = error at `taus[i]`, `ms[j]`; computed with up to `jobs`
/// worker threads, one τ row per task, assembled in order.
pub fn sweep_errors(sweep: &FodeSweep, jobs: usize) -> Result<Vec<Vec<f64>>, CliError> {
    let jobs = jobs.max(1);
    let mut errors: Vec<Option<Vec<f64>>> = vec![None; sweep.taus.len()];
    let next = std::sync::atomic::AtomicUsize::new(0);
    let results: Vec<std::sync::Mutex<Option<Result<(usize, Vec<f64>), CliError>>>> =
        (0..sweep.taus.len()).map(|_| std::sync::Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(sweep.taus.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                if i >= sweep.taus.len() {
                    break;
                }
                let row: Result<Vec<f64>, CliError> = sweep
                    .ms
                    .iter()
                    .map(|&m| one_error(sweep, sweep.taus[i], m))
                    .collect();
                *results[i].lock().unwrap() = Some(row.map(|r| (i, r)));
            });
        }
    });
    for cell in results {
        match cell.into_inner().unwrap() {
            Some(Ok((i, row))) => errors[i] = Some(row),
            Some(Err(e)) => return Err(e),
            None => return Err(CliError::Runtime("worker produced no result".into())),
        }
    }
    Ok(errors.into_iter().map(|r| r.expect("filled")).collect())
}

pub fn format_table(sweep: &FodeSweep, errors: &[Vec<f64>]) -> (String, String) {
    let mut csv = String::from("tau,m,error,order\n");
    let mut text = String::new();
    let _ = write!(text, "{:>12} ", "tau");
    for m in &sweep.ms {
        let _ = write!(text, "{:>12} {:>8} ", format!("m={m}"), "order");
    }
    text.push('\n');
    for (i, tau) in sweep.taus.iter().enumerate() {
        let _ = write!(text, "{tau:>12.6e} ");
        for (j, m) in sweep.ms.iter().enumerate() {
            let err = errors[i][j];
            let order = if i > 0 {
                Some((errors[i - 1][j] / err).log2())
            } else {
                None
            };
            match order {
                Some(o) => {
                    let _ = writeln!(csv, "{tau},{m},{err},{o}");
                    let _ = write!(text, "{err:>12.4e} {o:>8.4} ");
                }
                None => {
                    let _ = writeln!(csv, "{tau},{m},{err},");
                    let _ = write!(text, "{err:>12.4e} {:>8} ", "");
                }
            }
        }
        text.push('\n');
    }
    (csv, text)
}

pub fn run(mut cfg: Config) -> Result<(), CliError> {
    let taus = cfg.f64_list_or(
        "taus",
        &[1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0, 1.0 / 512.0],
    )?;
    if taus.is_empty() || taus.iter().any(|t| *t <= 0.0) {
        return Err(CliError::Validation("--taus must be positive".into()));
    }
    for w in taus.windows(2) {
        let ratio = w[0] / w[1];
        if (ratio - 2.0).abs() > 1e-12 {
            return Err(CliError::Validation(
                "--taus must halve from entry to entry".into(),
            ));
        }
    }
    let ms = cfg.usize_list_or("m", &[0, 1, 2, 3])?;
    let engine = match cfg.str_or("engine", "realline") {
        "direct" => Engine::Direct,
        "realline" => Engine::RealLine(RealLineParams {
            q: cfg.usize_or("Q", 256)?,
            n0: cfg.usize_or("n0", 50)?,
            epsilon: cfg.f64_or("epsilon", 1e-20)?,
        }),
        "talbot" => Engine::Talbot(TalbotParams {
            n_nodes: cfg.usize_or("talbot-N", 36)?,
            base: cfg.usize_or("B", 5)?,
            n0: cfg.usize_or("n0", 50)?,
        }),
        other => {
            return Err(CliError::Validation(format!(
                "unknown engine '{other}' (expected direct, talbot, realline)"
            )))
        }
    };
    let mode = match cfg.str_or("error-mode", "max") {
        "max" => ErrorMode::Max,
        "final" => ErrorMode::Final,
        other => {
            return Err(CliError::Validation(format!(
                "unknown error mode '{other}' (expected max or final)"
            )))
        }
    };
    let sweep = FodeSweep {
        gf: parse_gf(cfg.str_or("gf", "gngf2"))?,
        alpha: cfg.f64_or("alpha", 0.5)?,
        sigma: cfg.f64_or("sigma", 0.0)?,
        t_end: cfg.f64_or("T", 10.0)?,
        taus,
        ms,
        engine,
        mode,
    };
    let jobs = cfg.usize_or("jobs", 1)?;
    let out = PathBuf::from(cfg.str_or("out", "out").to_string());

    let errors = sweep_errors(&sweep, jobs)?;
    let (csv, text) = format_table(&sweep, &errors);

    // Trajectory dump of the finest run at the largest m.
    let finest = {
        let mut p = FodeProblem::new(
            sweep.alpha,
            sweep.sigma,
            Rhs::zero(),
            1.0,
            sweep.t_end,
            *sweep.taus.last().unwrap(),
        );
        p.gf = sweep.gf.clone();
        p.m = *sweep.ms.last().unwrap();
        p.engine = sweep.engine;
        solve(&p).map_err(|e| CliError::Runtime(e.to_string()))?
    };

    cfg.record("gf", sweep.gf.name());
    cfg.record("alpha", sweep.alpha);
    cfg.record("sigma", sweep.sigma);
    cfg.record("T", sweep.t_end);
    cfg.record(
        "taus",
        sweep.taus.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(","),
    );
    cfg.record("m", sweep.ms.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(","));
    cfg.record("engine", sweep.engine.name());
    cfg.record("error-mode", if mode == ErrorMode::Max { "max" } else { "final" });
    write_output(&out, "fode.csv", &csv)?;
    write_output(&out, "table.txt", &text)?;
    write_output(&out, "trajectory.csv", &finest.to_csv())?;
    write_output(&out, "manifest.txt", &cfg.manifest("fode"))?;
    print!("{text}");
    Ok(())
}
