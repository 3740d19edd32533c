//! The corrected fast operator
//! {}_F D_τ^{α,σ,γ,m,n} u = {}_F u_n^{(α,σ)} + τ^{-α} Σ_{k=1}^m w_{n,k}(u_k − u_0) − b_n^{(α,σ)} u_0,
//! shared entry point for the implicit solvers.
//!
//! The convolution part runs through a pluggable engine; correction sums stay
//! exact and direct (they touch only k ≤ m), and the starting-weight
//! right-hand sides are built from the exact weight table so correction
//! accuracy never depends on engine tolerance.

use crate::error::{Error, Result};
use crate::realline::{RealLineConvolver, RealLineParams};
use crate::talbot::{TalbotConvolver, TalbotParams};
use crate::weights::{
    tempered_power_derivative, GeneratingFunction, StartingWeightSolver, WeightTable,
};

/// Convolution evaluation strategy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Engine {
    /// O(n) per step, exact; the reference the fast engines are tested against.
    Direct,
    /// Fast Method I: contour-quadrature blocks.
    Talbot(TalbotParams),
    /// Fast Method II: real-line trapezoidal rule.
    RealLine(RealLineParams),
}

impl Engine {
    pub fn real_line(q: usize) -> Self {
        Engine::RealLine(RealLineParams::with_q(q))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Engine::Direct => "direct",
            Engine::Talbot(_) => "talbot",
            Engine::RealLine(_) => "realline",
        }
    }
}

/// Minimal step interface every convolution engine provides.
pub(crate) trait ConvolveEngine {
    /// Value at the next step index with the current sample left out.
    fn begin_step(&mut self) -> f64;
    fn finish_step(&mut self, u: f64);
    /// τ^{-α} ω_0, the coefficient the current sample enters with.
    fn w0_scaled(&self) -> f64;
}

/// Plain O(n)-per-step convolver over a precomputed weight table.
pub struct DirectConvolver {
    weights: Vec<f64>,
    tau_neg_alpha: f64,
    samples: Vec<f64>,
}

impl DirectConvolver {
    pub fn new(
        gf: &GeneratingFunction,
        alpha: f64,
        sigma: f64,
        tau: f64,
        n_max: usize,
    ) -> Result<Self> {
        let table = WeightTable::build(gf, alpha, sigma, tau, n_max)?;
        Ok(DirectConvolver {
            weights: table.weights,
            tau_neg_alpha: tau.powf(-alpha),
            samples: Vec::new(),
        })
    }

    pub fn feed(&mut self, u: f64) -> f64 {
        let p = self.begin_step();
        let v = p + self.w0_scaled() * u;
        self.finish_step(u);
        v
    }
}

impl ConvolveEngine for DirectConvolver {
    fn begin_step(&mut self) -> f64 {
        let n = self.samples.len();
        let mut s = 0.0;
        for (k, u) in self.samples.iter().enumerate() {
            s += self.weights[n - k] * u;
        }
        self.tau_neg_alpha * s
    }

    fn finish_step(&mut self, u: f64) {
        self.samples.push(u);
    }

    fn w0_scaled(&self) -> f64 {
        self.tau_neg_alpha * self.weights[0]
    }
}

impl ConvolveEngine for RealLineConvolver {
    fn begin_step(&mut self) -> f64 {
        RealLineConvolver::begin_step(self)
    }

    fn finish_step(&mut self, u: f64) {
        RealLineConvolver::finish_step(self, u)
    }

    fn w0_scaled(&self) -> f64 {
        RealLineConvolver::w0_scaled(self)
    }
}

impl ConvolveEngine for TalbotConvolver {
    fn begin_step(&mut self) -> f64 {
        TalbotConvolver::begin_step(self)
    }

    fn finish_step(&mut self, u: f64) {
        TalbotConvolver::finish_step(self, u)
    }

    fn w0_scaled(&self) -> f64 {
        TalbotConvolver::w0_scaled(self)
    }
}

/// Operator configuration; `n_max` is the step horizon (it sizes the weight
/// table and the fast-rule window).
#[derive(Debug, Clone)]
pub struct OperatorConfig {
    pub gf: GeneratingFunction,
    pub alpha: f64,
    pub sigma: f64,
    pub tau: f64,
    /// Correction exponents γ_1 < … < γ_m; empty for the plain operator.
    pub gammas: Vec<f64>,
    pub u0: f64,
    pub engine: Engine,
    pub n_max: usize,
}

/// The affine dependence of one operator evaluation on the current sample:
/// value(n) = known + u_coeff · u_n.
#[derive(Debug, Clone, Copy)]
pub struct StepTerms {
    pub known: f64,
    pub u_coeff: f64,
}

pub struct FlmmOperator {
    cfg: OperatorConfig,
    conv: Box<dyn ConvolveEngine + Send>,
    table: WeightTable,
    /// Untempered weights ω_k^{(α,0)}; the starting-weight system lives in
    /// the e^{σs}-conjugated space where tempering drops out.
    weights0: Vec<f64>,
    sw: Option<StartingWeightSolver>,
    /// (kτ)^{γ_j} for k = 0..n_max, one row per correction exponent.
    powers: Vec<Vec<f64>>,
    /// u_0..u_m as they arrive; corrections read these.
    early: Vec<f64>,
    n_next: usize,
}

impl FlmmOperator {
    pub fn new(cfg: OperatorConfig) -> Result<Self> {
        if !(cfg.tau > 0.0) {
            return Err(Error::InvalidParameter("tau must be positive".into()));
        }
        let table = WeightTable::build(&cfg.gf, cfg.alpha, cfg.sigma, cfg.tau, cfg.n_max)?;
        let conv: Box<dyn ConvolveEngine + Send> = match cfg.engine {
            Engine::Direct => Box::new(DirectConvolver::new(
                &cfg.gf, cfg.alpha, cfg.sigma, cfg.tau, cfg.n_max,
            )?),
            Engine::Talbot(p) => {
                Box::new(TalbotConvolver::new(&cfg.gf, cfg.alpha, cfg.sigma, cfg.tau, p)?)
            }
            Engine::RealLine(p) => Box::new(RealLineConvolver::new(
                &cfg.gf, cfg.alpha, cfg.sigma, cfg.tau, p, cfg.n_max,
            )?),
        };
        let sw = if cfg.gammas.is_empty() {
            None
        } else {
            Some(StartingWeightSolver::new(cfg.tau, &cfg.gammas)?)
        };
        let powers = cfg
            .gammas
            .iter()
            .map(|g| {
                (0..=cfg.n_max)
                    .map(|k| (k as f64 * cfg.tau).powf(*g))
                    .collect()
            })
            .collect();
        let weights0 = if cfg.sigma == 0.0 || cfg.gammas.is_empty() {
            Vec::new()
        } else {
            cfg.gf.untempered_weights(cfg.alpha, cfg.n_max)?
        };
        Ok(FlmmOperator { cfg, conv, table, weights0, sw, powers, early: Vec::new(), n_next: 0 })
    }

    pub fn config(&self) -> &OperatorConfig {
        &self.cfg
    }

    pub fn n_next(&self) -> usize {
        self.n_next
    }

    /// Untempered starting-weight row w_{n,1..m}^{(α,0)} from the exact-table
    /// right-hand sides.  The tempered row is e^{-(n-k)στ} w_{n,k}^{(α,0)},
    /// mirroring the weight rule ω_k^{(α,σ)} = e^{-kτσ} ω_k^{(α,0)}; it makes
    /// the corrected operator exact on e^{-σt} t^{γ_j} — the terms of the
    /// startup singularity in the tempered-Caputo setting.
    fn correction_row(&self, n: usize) -> Result<Vec<f64>> {
        let m = self.cfg.gammas.len();
        let t_n = n as f64 * self.cfg.tau;
        let ta = self.cfg.tau.powf(self.cfg.alpha);
        let weights0 = if self.cfg.sigma == 0.0 { &self.table.weights } else { &self.weights0 };
        let mut rhs = Vec::with_capacity(m);
        for (g, pow_row) in self.cfg.gammas.iter().zip(self.powers.iter()) {
            let exact = ta * tempered_power_derivative(self.cfg.alpha, 0.0, *g, t_n)?;
            let mut conv = 0.0;
            for k in 1..=n {
                conv += weights0[n - k] * pow_row[k];
            }
            rhs.push(exact - conv);
        }
        self.sw.as_ref().expect("m >= 1").solve(&rhs)
    }

    /// Affine terms of the operator at step `n`; the caller solves its
    /// implicit equation and then supplies the sample via [`Self::finish_step`].
    pub fn begin_step(&mut self, n: usize) -> Result<StepTerms> {
        if n != self.n_next {
            return Err(Error::SequenceError { expected: self.n_next, got: n });
        }
        let m = self.cfg.gammas.len();
        if m > 0 && n >= 1 && n < m {
            return Err(Error::StartupRequired { step: n, m });
        }
        let partial = self.conv.begin_step();
        // Constant anchor e^{-nστ} τ^{-α} Σ_{j<=n} ω_j^{(α,0)}: the operator is
        // the tempered-Caputo form D^{σ,α}(u − u_0 e^{-σt}), whose discrete
        // subtraction of u_0 happens inside the e^{σs}-conjugated space.  For
        // σ = 0 this is the plain cumulative-sum anchor b_n.
        let anchor = (-(n as f64) * self.cfg.sigma * self.cfg.tau).exp() * self.table.cumsum0[n];
        let mut known = partial - anchor * self.cfg.u0;
        let mut u_coeff = self.conv.w0_scaled();
        if m > 0 && n >= m {
            let w = self.correction_row(n)?;
            let scale = self.cfg.tau.powf(-self.cfg.alpha);
            let st = self.cfg.sigma * self.cfg.tau;
            let u0_decay = (-(n as f64) * st).exp();
            for (k, wk) in w.iter().enumerate() {
                let idx = k + 1;
                let tempering = (-((n - idx) as f64) * st).exp();
                if idx == n {
                    // u_n itself carries this correction weight.
                    u_coeff += scale * wk;
                    known -= scale * wk * u0_decay * self.cfg.u0;
                } else {
                    known +=
                        scale * wk * (tempering * self.early[idx] - u0_decay * self.cfg.u0);
                }
            }
        }
        Ok(StepTerms { known, u_coeff })
    }

    pub fn finish_step(&mut self, u: f64) {
        if self.n_next <= self.cfg.gammas.len() {
            self.early.push(u);
        }
        self.conv.finish_step(u);
        self.n_next += 1;
    }

    /// Feed a known sample without evaluating the operator (startup values).
    pub fn push_history(&mut self, u: f64) {
        let _ = self.conv.begin_step();
        self.finish_step(u);
    }

    /// Operator value at step n given the sample u_n (samples in order).
    pub fn apply(&mut self, n: usize, u_n: f64) -> Result<f64> {
        let terms = self.begin_step(n)?;
        let v = terms.known + terms.u_coeff * u_n;
        self.finish_step(u_n);
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gngf2() -> GeneratingFunction {
        GeneratingFunction::gngf(2).unwrap()
    }

    fn engines() -> Vec<Engine> {
        vec![
            Engine::Direct,
            Engine::Talbot(TalbotParams::default()),
            Engine::RealLine(RealLineParams::with_q(256)),
        ]
    }

    #[test]
    fn constant_input_maps_to_zero() {
        for engine in engines() {
            let mut op = FlmmOperator::new(OperatorConfig {
                gf: gngf2(),
                alpha: 0.5,
                sigma: 0.0,
                tau: 0.01,
                gammas: vec![],
                u0: 2.5,
                engine,
                n_max: 300,
            })
            .unwrap();
            for n in 0..=300 {
                let v = op.apply(n, 2.5).unwrap();
                assert!(v.abs() <= 1e-9, "{} n={n}: {v}", engine.name());
            }
        }
    }

    #[test]
    fn tempered_constant_follows_the_caputo_anchor() {
        // With σ > 0 the operator is D^{σ,α}(u − u_0 e^{-σt}); on u ≡ u_0 its
        // discrete value is u_0 (b_n^{(α,σ)} − e^{-nστ} b_n^{(α,0)}).
        let (alpha, sigma, tau, u0) = (0.5, 0.4, 0.01, 2.5);
        let table = WeightTable::build(&gngf2(), alpha, sigma, tau, 200).unwrap();
        let mut op = FlmmOperator::new(OperatorConfig {
            gf: gngf2(),
            alpha,
            sigma,
            tau,
            gammas: vec![],
            u0,
            engine: Engine::Direct,
            n_max: 200,
        })
        .unwrap();
        for n in 0..=200usize {
            let v = op.apply(n, u0).unwrap();
            let expect =
                u0 * (table.cumsum[n] - (-(n as f64) * sigma * tau).exp() * table.cumsum0[n]);
            assert!((v - expect).abs() <= 1e-10 * (1.0 + expect.abs()), "n={n}");
        }
    }

    #[test]
    fn alpha_one_differentiates_linears_exactly() {
        // GNGF-2 at α = 1 is the BDF2 polynomial; it differentiates u(t) = t
        // exactly once past the two startup steps.
        let mut op = FlmmOperator::new(OperatorConfig {
            gf: gngf2(),
            alpha: 1.0,
            sigma: 0.0,
            tau: 0.01,
            gammas: vec![],
            u0: 0.0,
            engine: Engine::Direct,
            n_max: 100,
        })
        .unwrap();
        for n in 0..=100usize {
            let v = op.apply(n, n as f64 * 0.01).unwrap();
            if n >= 2 {
                assert!((v - 1.0).abs() < 1e-10, "n={n}: {v}");
            }
        }
    }

    #[test]
    fn corrected_operator_reproduces_power_derivative() {
        // σ = 0: exact on t^{γ_1} against the Riemann-Liouville power rule.
        let (alpha, tau) = (0.5, 1.0 / 64.0);
        let gammas = vec![alpha, 2.0 * alpha];
        for engine in [Engine::Direct, Engine::RealLine(RealLineParams::with_q(256))] {
            let mut op = FlmmOperator::new(OperatorConfig {
                gf: gngf2(),
                alpha,
                sigma: 0.0,
                tau,
                gammas: gammas.clone(),
                u0: 0.0,
                engine,
                n_max: 200,
            })
            .unwrap();
            let g1 = gammas[0];
            for n in 0..=200usize {
                let t = n as f64 * tau;
                let u = t.powf(g1);
                if n >= 1 && n < gammas.len() {
                    op.push_history(u);
                    continue;
                }
                let v = op.apply(n, u).unwrap();
                if n > gammas.len() {
                    let exact = tempered_power_derivative(alpha, 0.0, g1, t).unwrap();
                    let rel = (v - exact).abs() / exact.abs();
                    assert!(rel <= 1e-8, "{} n={n}: rel={rel:e}", engine.name());
                }
            }
        }
    }

    #[test]
    fn tempered_corrections_are_exact_on_conjugated_powers() {
        // σ > 0: the correction row is the tempering-scaled untempered one,
        // making the operator exact on u = e^{-σt} t^{γ_1}, whose image is
        // e^{-σt} times the Riemann-Liouville power rule.
        let (alpha, sigma, tau) = (0.5, 0.25, 1.0 / 64.0);
        let gammas = vec![alpha, 2.0 * alpha];
        let mut op = FlmmOperator::new(OperatorConfig {
            gf: gngf2(),
            alpha,
            sigma,
            tau,
            gammas: gammas.clone(),
            u0: 0.0,
            engine: Engine::Direct,
            n_max: 200,
        })
        .unwrap();
        let g1 = gammas[0];
        for n in 0..=200usize {
            let t = n as f64 * tau;
            let u = (-sigma * t).exp() * t.powf(g1);
            if n >= 1 && n < gammas.len() {
                op.push_history(u);
                continue;
            }
            let v = op.apply(n, u).unwrap();
            if n > gammas.len() {
                let exact = (-sigma * t).exp()
                    * tempered_power_derivative(alpha, 0.0, g1, t).unwrap();
                let rel = (v - exact).abs() / exact.abs();
                assert!(rel <= 1e-8, "n={n}: rel={rel:e}");
            }
        }
    }

    #[test]
    fn engines_cross_agree_on_smooth_input() {
        let (alpha, sigma, tau) = (0.5, 0.0, 0.01);
        let n_t = 10_000;
        let u = |n: usize| {
            let t = n as f64 * tau;
            1.0 + 0.8 * (0.37 * t).sin() + 0.2 * (1.3 * t).cos()
        };
        let mk = |engine: Engine| {
            FlmmOperator::new(OperatorConfig {
                gf: gngf2(),
                alpha,
                sigma,
                tau,
                gammas: vec![],
                u0: u(0),
                engine,
                n_max: n_t,
            })
            .unwrap()
        };
        let mut direct = mk(Engine::Direct);
        let mut fast = mk(Engine::RealLine(RealLineParams::with_q(256)));
        for n in 0..=n_t {
            let a = direct.apply(n, u(n)).unwrap();
            let b = fast.apply(n, u(n)).unwrap();
            assert!(
                (a - b).abs() <= 1e-8 * (1.0 + a.abs()),
                "n={n}: direct {a} vs fast {b}"
            );
        }
    }

    #[test]
    fn operator_is_linear_in_the_samples() {
        let (a_coef, b_coef) = (1.7, -0.4);
        let u = |n: usize| ((n as f64) * 0.05).sin();
        let v = |n: usize| 1.0 / (1.0 + n as f64);
        let mk = || {
            FlmmOperator::new(OperatorConfig {
                gf: gngf2(),
                alpha: 0.5,
                sigma: 0.2,
                tau: 0.02,
                gammas: vec![],
                u0: 0.0,
                engine: Engine::Direct,
                n_max: 120,
            })
            .unwrap()
        };
        let (mut op_u, mut op_v, mut op_c) = (mk(), mk(), mk());
        for n in 0..=120usize {
            let au = op_u.apply(n, u(n)).unwrap();
            let av = op_v.apply(n, v(n)).unwrap();
            let ac = op_c.apply(n, a_coef * u(n) + b_coef * v(n)).unwrap();
            let lin = a_coef * au + b_coef * av;
            assert!(
                (ac - lin).abs() <= 1e-12 * (1.0 + lin.abs()),
                "n={n}: {ac} vs {lin}"
            );
        }
    }

    #[test]
    fn out_of_order_samples_are_rejected() {
        let mut op = FlmmOperator::new(OperatorConfig {
            gf: gngf2(),
            alpha: 0.5,
            sigma: 0.0,
            tau: 0.01,
            gammas: vec![],
            u0: 0.0,
            engine: Engine::Direct,
            n_max: 10,
        })
        .unwrap();
        op.apply(0, 0.0).unwrap();
        assert!(matches!(
            op.apply(2, 1.0),
            Err(Error::SequenceError { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn correction_steps_require_startup() {
        let mut op = FlmmOperator::new(OperatorConfig {
            gf: gngf2(),
            alpha: 0.5,
            sigma: 0.0,
            tau: 0.01,
            gammas: vec![0.5, 1.0, 1.5],
            u0: 1.0,
            engine: Engine::Direct,
            n_max: 10,
        })
        .unwrap();
        op.apply(0, 1.0).unwrap();
        assert!(matches!(
            op.begin_step(1),
            Err(Error::StartupRequired { step: 1, m: 3 })
        ));
    }
}
