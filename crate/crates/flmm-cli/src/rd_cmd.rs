//! `flmm rd`: run the 1-D fractional activator-inhibitor system and write
//! snapshots, surface data, and the run manifest.

use crate::config::Config;
use crate::{write_output, CliError};
use flmm::rd::{
    run as rd_run, Kinetics, Perturbation, PerturbationKind, RdEngine, RdProblem,
};
use std::path::PathBuf;

/// Named parameter sets for the standard experiment configurations.
fn apply_preset(cfg: &mut Config, name: &str) -> Result<(), CliError> {
    let (kinetics, a, d, ic): (&str, f64, f64, &str) = match name {
        "fig7a" => ("gm", 0.2, 7.0, "random"),
        "fig7b" => ("gm", 0.5, 14.0, "random"),
        "fig7c" => ("gm", 0.8, 21.0, "random"),
        "fig8a" => ("brusselator", 0.2, 9.0, "random"),
        "fig8b" => ("brusselator", 0.5, 17.0, "random"),
        "fig8c" => ("brusselator", 0.8, 23.0, "random"),
        "fig10" => ("gm", 0.5, 8.0, "random"),
        "fig11" => ("brusselator", 0.5, 10.0, "short-wave"),
        other => {
            return Err(CliError::Validation(format!("unknown preset '{other}'")));
        }
    };
    let defaults: &[(&str, String)] = &[
        ("kinetics", kinetics.to_string()),
        ("alpha1", a.to_string()),
        (
            "alpha2",
            if name == "fig10" || name == "fig11" { "1.0".into() } else { a.to_string() },
        ),
        ("d", d.to_string()),
        ("ic", ic.to_string()),
    ];
    for (k, v) in defaults {
        if cfg.get(k).is_none() {
            cfg.record(k, v);
        }
    }
    Ok(())
}

pub fn run(mut cfg: Config) -> Result<(), CliError> {
    if let Some(preset) = cfg.get("preset").map(str::to_string) {
        apply_preset(&mut cfg, &preset)?;
    }
    let kinetics = match cfg.str_or("kinetics", "brusselator") {
        "gm" | "gierer-meinhardt" => Kinetics::gierer_meinhardt(),
        "brusselator" => Kinetics::brusselator(),
        other => {
            return Err(CliError::Validation(format!(
                "unknown kinetics '{other}' (expected gm or brusselator)"
            )))
        }
    };
    let stab_default = if kinetics.name == "gierer-meinhardt" { 10.0 } else { 2.0 };
    let kind = match cfg.str_or("ic", "random") {
        "random" => PerturbationKind::Random,
        "long-wave" => PerturbationKind::LongWave,
        "short-wave" => PerturbationKind::ShortWave,
        other => {
            return Err(CliError::Validation(format!(
                "unknown ic '{other}' (expected random, long-wave, short-wave)"
            )))
        }
    };
    let engine = match cfg.str_or("engine", "realline") {
        "realline" => RdEngine::RealLine { q: cfg.usize_or("Q", 256)? },
        "direct" => RdEngine::Direct,
        "talbot" => {
            return Err(CliError::Validation(
                "the rd memory term runs through the real-line engine; use --engine realline or direct"
                    .into(),
            ))
        }
        other => return Err(CliError::Validation(format!("unknown engine '{other}'"))),
    };
    let q_wave = match cfg.get("q") {
        Some(v) => Some(
            v.parse::<f64>()
                .map_err(|_| CliError::Validation(format!("--q: bad number '{v}'")))?,
        ),
        None => None,
    };
    let problem = RdProblem {
        kinetics,
        alpha1: cfg.f64_or("alpha1", 0.5)?,
        alpha2: cfg.f64_or("alpha2", 0.5)?,
        d: cfg.f64_or("d", 17.0)?,
        kappa: cfg.f64_or("kappa", 5.0)?,
        kappa1: cfg.f64_or("kappa1", stab_default)?,
        kappa2: cfg.f64_or("kappa2", stab_default)?,
        domain: cfg.f64_or("domain", 100.0)?,
        cells: cfg.usize_or("cells", 256)?,
        tau: cfg.f64_or("tau", 0.01)?,
        t_end: cfg.f64_or("T", 500.0)?,
        ic: Perturbation {
            kind,
            epsilon: cfg.f64_or("epsilon", 0.01)?,
            q: q_wave,
            seed: cfg.u64_or("seed", 1)?,
        },
        engine,
    };
    let save_every = cfg.usize_or("save-every", 100)?;
    let out = PathBuf::from(cfg.str_or("out", "out").to_string());

    let history = rd_run(problem.clone(), save_every).map_err(CliError::from)?;
    history
        .write_outputs(&problem, &out)
        .map_err(CliError::from)?;

    cfg.record("kinetics", &problem.kinetics.name);
    cfg.record("alpha1", problem.alpha1);
    cfg.record("alpha2", problem.alpha2);
    cfg.record("d", problem.d);
    cfg.record("kappa", problem.kappa);
    cfg.record("kappa1", problem.kappa1);
    cfg.record("kappa2", problem.kappa2);
    cfg.record("domain", problem.domain);
    cfg.record("cells", problem.cells);
    cfg.record("tau", problem.tau);
    cfg.record("T", problem.t_end);
    cfg.record("epsilon", problem.ic.epsilon);
    cfg.record("seed", problem.ic.seed);
    cfg.record("engine", problem.engine.name());
    cfg.record("Q", problem.engine.quad_points());
    cfg.record("save-every", save_every);
    write_output(&out, "manifest.txt", &cfg.manifest("rd"))?;
    println!(
        "saved {} snapshots ({} grid points) to {}",
        history.times.len(),
        history.x.len(),
        out.display()
    );
    Ok(())
}
