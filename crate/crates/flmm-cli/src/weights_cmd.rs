//! `flmm weights`: exact convolution weights against both fast
//! approximations, as CSV rows `n,exact,fast2,fast2_relerr[,fast1,fast1_relerr]`.

use crate::config::Config;
use crate::{parse_gf, write_output, CliError};
use flmm::realline::{build_rule, PhiIntegrand};
use flmm::talbot::{fast_weight_talbot, level_for_weight, level_time_scale, talbot_nodes};
use flmm::weights::WeightTable;
use std::fmt::Write as _;
use std::path::PathBuf;

pub fn run(mut cfg: Config) -> Result<(), CliError> {
    let gf = parse_gf(cfg.str_or("gf", "gngf2"))?;
    let alpha = cfg.f64_or("alpha", 0.5)?;
    let sigma = cfg.f64_or("sigma", 0.0)?;
    let tau = cfg.f64_or("tau", 0.01)?;
    let q = cfg.usize_or("Q", 256)?;
    let n0 = cfg.usize_or("n0", 50)?;
    let epsilon = cfg.f64_or("epsilon", 1e-20)?;
    let n_t = cfg.usize_or("nT", 100_000)?;
    let points = cfg.usize_or("points", 200)?;
    let talbot_n = match cfg.get("talbot-N") {
        Some(v) => Some(v.parse::<usize>().map_err(|_| {
            CliError::Validation(format!("--talbot-N: bad integer '{v}'"))
        })?),
        None => None,
    };
    let base = cfg.usize_or("B", 5)?;
    let out = PathBuf::from(cfg.str_or("out", "out").to_string());
    if n_t <= n0 {
        return Err(CliError::Validation(format!("--nT must exceed --n0 ({n0})")));
    }

    let table = WeightTable::build(&gf, alpha, sigma, tau, n_t)?;
    let phi = PhiIntegrand::new(gf.clone(), alpha, tau)?;
    let rule = build_rule(&phi, n0, n_t, q, epsilon)?;

    // Geometric subsample of [n0, nT]; points = 0 emits every index.
    let ns: Vec<usize> = if points == 0 {
        (n0..=n_t).collect()
    } else {
        let mut ns = Vec::with_capacity(points);
        let ratio = (n_t as f64 / n0 as f64).powf(1.0 / (points.saturating_sub(1).max(1)) as f64);
        let mut x = n0 as f64;
        for _ in 0..points {
            let n = (x.round() as usize).clamp(n0, n_t);
            if ns.last() != Some(&n) {
                ns.push(n);
            }
            x *= ratio;
        }
        ns
    };

    let contours: Vec<(usize, _)> = match talbot_n {
        None => Vec::new(),
        Some(nn) => {
            let mut cs = Vec::new();
            for &n in &ns {
                let level = level_for_weight(n, base, n0);
                if !cs.iter().any(|(l, _)| *l == level) {
                    cs.push((level, talbot_nodes(nn, level_time_scale(level, base, n0, tau))));
                }
            }
            cs
        }
    };

    let mut csv = String::from(if talbot_n.is_some() {
        "n,exact,fast2,fast2_relerr,fast1,fast1_relerr\n"
    } else {
        "n,exact,fast2,fast2_relerr\n"
    });
    for &n in &ns {
        let exact = table.weights[n];
        let fast2 = rule.weight_approx(sigma, n);
        let denom = exact.abs().max(f64::MIN_POSITIVE);
        let rel2 = (fast2 - exact).abs() / denom;
        if let Some(_nn) = talbot_n {
            let level = level_for_weight(n, base, n0);
            let contour = &contours.iter().find(|(l, _)| *l == level).unwrap().1;
            let fast1 = fast_weight_talbot(&gf, alpha, sigma, tau, contour, n);
            let rel1 = (fast1 - exact).abs() / denom;
            let _ = writeln!(csv, "{n},{exact},{fast2},{rel2},{fast1},{rel1}");
        } else {
            let _ = writeln!(csv, "{n},{exact},{fast2},{rel2}");
        }
    }

    cfg.record("gf", gf.name());
    cfg.record("alpha", alpha);
    cfg.record("sigma", sigma);
    cfg.record("tau", tau);
    cfg.record("Q", q);
    cfg.record("n0", n0);
    cfg.record("epsilon", epsilon);
    cfg.record("nT", n_t);
    cfg.record("points", points);
    cfg.record("B", base);
    write_output(&out, "weights.csv", &csv)?;
    write_output(&out, "rule.csv", &rule.to_csv())?;
    write_output(&out, "manifest.txt", &cfg.manifest("weights"))?;
    println!("wrote {} rows to {}", ns.len(), out.join("weights.csv").display());
    Ok(())
}
