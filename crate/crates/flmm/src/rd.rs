//! 1-D time-fractional activator-inhibitor system with zero-flux boundaries:
//!
//! ∂_t u = κ f₁(u,v) + D^{1-α₁}_mem Δu,   ∂_t v = κ f₂(u,v) + d · D^{1-α₂}_mem Δv,
//!
//! stepped by a stabilized semi-implicit BDF2 scheme: the time derivative by
//! (3u^n − 4u^{n-1} + u^{n-2})/(2τ), the memory term by the GNGF-2
//! convolution quadrature of order 1−α applied to the discrete Laplacian
//! (history through the real-line fast engine), the kinetics by second-order
//! extrapolation κ(2F^{n-1} − F^{n-2}), plus the damping
//! −κ_i(w^n − 2w^{n-1} + w^{n-2}).  Space is second-order central differences
//! with reflection ghost points.

use crate::error::{Error, Result};
use crate::realline::{RealLineFieldConvolver, RealLineParams};
use crate::weights::{GeneratingFunction, WeightTable};
use std::fmt;
use std::path::Path;
use std::sync::Arc;

type KineticsFn = dyn Fn(f64, f64) -> f64 + Send + Sync;

/// Reaction kinetics with a homogeneous steady state.
#[derive(Clone)]
pub struct Kinetics {
    pub name: String,
    f1: Arc<KineticsFn>,
    f2: Arc<KineticsFn>,
    pub u_star: f64,
    pub v_star: f64,
}

impl fmt::Debug for Kinetics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Kinetics")
            .field("name", &self.name)
            .field("u_star", &self.u_star)
            .field("v_star", &self.v_star)
            .finish()
    }
}

impl Kinetics {
    /// f₁ = 1 − u + 3u²/v, f₂ = u² − v; steady state (4, 16).
    pub fn gierer_meinhardt() -> Self {
        Kinetics {
            name: "gierer-meinhardt".into(),
            f1: Arc::new(|u, v| 1.0 - u + 3.0 * u * u / v),
            f2: Arc::new(|u, v| u * u - v),
            u_star: 4.0,
            v_star: 16.0,
        }
    }

    /// f₁ = 2 − 3u + u²v, f₂ = 2u − u²v; steady state (2, 1).
    pub fn brusselator() -> Self {
        Kinetics {
            name: "brusselator".into(),
            f1: Arc::new(|u, v| 2.0 - 3.0 * u + u * u * v),
            f2: Arc::new(|u, v| 2.0 * u - u * u * v),
            u_star: 2.0,
            v_star: 1.0,
        }
    }

    /// Custom kinetics; (u*, v*) must satisfy f₁ = f₂ = 0 to 1e-14.
    pub fn custom<F1, F2>(name: &str, f1: F1, f2: F2, u_star: f64, v_star: f64) -> Result<Self>
    where
        F1: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        F2: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        let k = Kinetics {
            name: name.into(),
            f1: Arc::new(f1),
            f2: Arc::new(f2),
            u_star,
            v_star,
        };
        let scale = u_star.abs().max(v_star.abs()).max(1.0);
        if k.f1(u_star, v_star).abs() > 1e-14 * scale || k.f2(u_star, v_star).abs() > 1e-14 * scale
        {
            return Err(Error::InvalidParameter(format!(
                "({u_star}, {v_star}) is not a steady state of the supplied kinetics"
            )));
        }
        Ok(k)
    }

    pub fn f1(&self, u: f64, v: f64) -> f64 {
        (self.f1)(u, v)
    }

    pub fn f2(&self, u: f64, v: f64) -> f64 {
        (self.f2)(u, v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerturbationKind {
    Random,
    LongWave,
    ShortWave,
}

/// Initial condition u = u* + ε r(x); `q` overrides the kinetics-specific
/// default wavenumber for the sinusoidal kinds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbation {
    pub kind: PerturbationKind,
    pub epsilon: f64,
    pub q: Option<f64>,
    pub seed: u64,
}

impl Perturbation {
    pub fn random(epsilon: f64, seed: u64) -> Self {
        Perturbation { kind: PerturbationKind::Random, epsilon, q: None, seed }
    }

    pub fn sine(kind: PerturbationKind, epsilon: f64) -> Self {
        Perturbation { kind, epsilon, q: None, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RdEngine {
    Direct,
    RealLine { q: usize },
}

impl RdEngine {
    pub fn name(&self) -> &'static str {
        match self {
            RdEngine::Direct => "direct",
            RdEngine::RealLine { .. } => "realline",
        }
    }

    pub fn quad_points(&self) -> usize {
        match self {
            RdEngine::Direct => 0,
            RdEngine::RealLine { q } => *q,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RdProblem {
    pub kinetics: Kinetics,
    pub alpha1: f64,
    pub alpha2: f64,
    /// Inhibitor/activator diffusion ratio.
    pub d: f64,
    /// Reaction scaling κ.
    pub kappa: f64,
    /// Stabilization constants of the two equations.
    pub kappa1: f64,
    pub kappa2: f64,
    /// Domain length D; grid spacing is h = D/cells.
    pub domain: f64,
    pub cells: usize,
    pub tau: f64,
    pub t_end: f64,
    pub ic: Perturbation,
    pub engine: RdEngine,
}

impl RdProblem {
    fn validate(&self) -> Result<()> {
        let ok = self.alpha1 > 0.0
            && self.alpha1 <= 1.0
            && self.alpha2 > 0.0
            && self.alpha2 <= 1.0
            && self.d > 0.0
            && self.kappa > 0.0
            && self.kappa1 >= 0.0
            && self.kappa2 >= 0.0
            && self.domain > 0.0
            && self.cells >= 2
            && self.tau > 0.0
            && self.t_end >= 2.0 * self.tau
            && self.ic.epsilon >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid rd problem: {self:?}")))
        }
    }

    pub fn h(&self) -> f64 {
        self.domain / self.cells as f64
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..=self.cells).map(|i| i as f64 * self.h()).collect()
    }

    fn default_q(&self) -> f64 {
        match self.ic.kind {
            PerturbationKind::ShortWave => 5.0,
            PerturbationKind::LongWave | PerturbationKind::Random => {
                if self.kinetics.name == "brusselator" {
                    0.5
                } else {
                    0.4
                }
            }
        }
    }

    /// Initial fields u* + ε r₁(x), v* + ε r₂(x).
    pub fn initial_fields(&self) -> (Vec<f64>, Vec<f64>) {
        let x = self.grid();
        let eps = self.ic.epsilon;
        let (us, vs) = (self.kinetics.u_star, self.kinetics.v_star);
        match self.ic.kind {
            PerturbationKind::Random => {
                let mut rng = XorShift::new(self.ic.seed);
                let r1: Vec<f64> = x.iter().map(|_| rng.uniform_sym()).collect();
                let r2: Vec<f64> = x.iter().map(|_| rng.uniform_sym()).collect();
                (
                    r1.iter().map(|r| us + eps * r).collect(),
                    r2.iter().map(|r| vs + eps * r).collect(),
                )
            }
            PerturbationKind::LongWave | PerturbationKind::ShortWave => {
                let q = self.ic.q.unwrap_or_else(|| self.default_q());
                let u = x.iter().map(|xi| us + eps * (q * xi).sin()).collect();
                let v = x.iter().map(|xi| vs + eps * (q * xi).sin()).collect();
                (u, v)
            }
        }
    }
}

/// xorshift64* generator; deterministic across platforms.
struct XorShift {
    state: u64,
}

impl XorShift {
    fn new(seed: u64) -> Self {
        XorShift { state: if seed == 0 { 0x9E37_79B9_7F4A_7C15 } else { seed } }
    }

    fn next_u64(&mut self) -> u64 {
        self.state ^= self.state >> 12;
        self.state ^= self.state << 25;
        self.state ^= self.state >> 27;
        self.state.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    /// Uniform in [-1, 1).
    fn uniform_sym(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 52) as f64 - 1.0
    }
}

/// Discrete Laplacian with zero-flux (reflection ghost-point) boundaries.
pub fn spatial_operator(field: &[f64], h: f64) -> Vec<f64> {
    assert!(field.len() >= 3, "grid needs at least 3 points");
    let inv_h2 = 1.0 / (h * h);
    let m = field.len() - 1;
    let mut out = vec![0.0; field.len()];
    out[0] = 2.0 * (field[1] - field[0]) * inv_h2;
    for i in 1..m {
        out[i] = (field[i - 1] - 2.0 * field[i] + field[i + 1]) * inv_h2;
    }
    out[m] = 2.0 * (field[m - 1] - field[m]) * inv_h2;
    out
}

/// Prefactored Thomas solve of (a·I − c·Δ_h) x = rhs.
struct TridiagSolver {
    upper: Vec<f64>,
    factor: Vec<f64>,
    den: Vec<f64>,
}

impl TridiagSolver {
    fn new(a: f64, c: f64, h: f64, len: usize) -> Result<Self> {
        let inv_h2 = 1.0 / (h * h);
        let m = len - 1;
        let diag = a + 2.0 * c * inv_h2;
        let mut upper = vec![-c * inv_h2; len];
        upper[0] = -2.0 * c * inv_h2;
        let mut lower = vec![-c * inv_h2; len];
        lower[m] = -2.0 * c * inv_h2;
        let mut den = vec![0.0; len];
        let mut factor = vec![0.0; len];
        den[0] = diag;
        for i in 1..len {
            if den[i - 1] == 0.0 {
                return Err(Error::StepFailure {
                    step: 0,
                    detail: "singular tridiagonal system".into(),
                });
            }
            factor[i] = lower[i] / den[i - 1];
            den[i] = diag - factor[i] * upper[i - 1];
        }
        if den[len - 1] == 0.0 {
            return Err(Error::StepFailure {
                step: 0,
                detail: "singular tridiagonal system".into(),
            });
        }
        Ok(TridiagSolver { upper, factor, den })
    }

    fn solve(&self, rhs: &mut Vec<f64>) {
        let len = rhs.len();
        for i in 1..len {
            let f = self.factor[i];
            rhs[i] = rhs[i] - f * rhs[i - 1];
        }
        rhs[len - 1] /= self.den[len - 1];
        for i in (0..len - 1).rev() {
            rhs[i] = (rhs[i] - self.upper[i] * rhs[i + 1]) / self.den[i];
        }
    }
}

/// Memory-term evaluator over a whole field.
trait FieldConvolve: Send {
    fn begin(&mut self, out: &mut [f64]);
    fn finish(&mut self, sample: Vec<f64>);
    fn w0_scaled(&self) -> f64;
}

impl FieldConvolve for RealLineFieldConvolver {
    fn begin(&mut self, out: &mut [f64]) {
        self.begin_step(out)
    }

    fn finish(&mut self, sample: Vec<f64>) {
        self.finish_step(sample)
    }

    fn w0_scaled(&self) -> f64 {
        RealLineFieldConvolver::w0_scaled(self)
    }
}

struct DirectFieldConvolver {
    weights: Vec<f64>,
    tau_neg_alpha: f64,
    fields: Vec<Vec<f64>>,
}

impl DirectFieldConvolver {
    fn new(gf: &GeneratingFunction, alpha: f64, tau: f64, n_max: usize) -> Result<Self> {
        let table = WeightTable::build(gf, alpha, 0.0, tau, n_max)?;
        Ok(DirectFieldConvolver {
            weights: table.weights,
            tau_neg_alpha: tau.powf(-alpha),
            fields: Vec::new(),
        })
    }
}

impl FieldConvolve for DirectFieldConvolver {
    fn begin(&mut self, out: &mut [f64]) {
        out.fill(0.0);
        let n = self.fields.len();
        for (k, field) in self.fields.iter().enumerate() {
            let w = self.tau_neg_alpha * self.weights[n - k];
            for (o, f) in out.iter_mut().zip(field.iter()) {
                *o += w * f;
            }
        }
    }

    fn finish(&mut self, sample: Vec<f64>) {
        self.fields.push(sample);
    }

    fn w0_scaled(&self) -> f64 {
        self.tau_neg_alpha * self.weights[0]
    }
}

/// α = 1 limit: the order-0 operator is the identity on the current sample,
/// so the history contributes nothing and no state is kept.
struct IdentityFieldConvolver;

impl FieldConvolve for IdentityFieldConvolver {
    fn begin(&mut self, out: &mut [f64]) {
        out.fill(0.0);
    }

    fn finish(&mut self, _sample: Vec<f64>) {}

    fn w0_scaled(&self) -> f64 {
        1.0
    }
}

fn make_convolver(
    gf: &GeneratingFunction,
    alpha_field: f64,
    tau: f64,
    engine: RdEngine,
    n_t: usize,
    width: usize,
) -> Result<Box<dyn FieldConvolve>> {
    let mem_order = 1.0 - alpha_field;
    if mem_order == 0.0 {
        return Ok(Box::new(IdentityFieldConvolver));
    }
    match engine {
        RdEngine::Direct => Ok(Box::new(DirectFieldConvolver::new(gf, mem_order, tau, n_t)?)),
        RdEngine::RealLine { q } => Ok(Box::new(RealLineFieldConvolver::new(
            gf,
            mem_order,
            0.0,
            tau,
            RealLineParams::with_q(q),
            n_t,
            width,
        )?)),
    }
}

/// Saved snapshots of one run.
#[derive(Debug, Clone)]
pub struct FieldHistory {
    pub x: Vec<f64>,
    pub times: Vec<f64>,
    pub u: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
}

impl FieldHistory {
    pub fn snapshot_csv(&self, idx: usize) -> String {
        let mut out = String::from("x,u,v\n");
        for (x, (u, v)) in self.x.iter().zip(self.u[idx].iter().zip(self.v[idx].iter())) {
            out.push_str(&format!("{x},{u},{v}\n"));
        }
        out
    }

    /// Long-format surface data `t,x,u,v` for external plotting.
    pub fn surface_csv(&self) -> String {
        let mut out = String::from("t,x,u,v\n");
        for (i, t) in self.times.iter().enumerate() {
            for (x, (u, v)) in self.x.iter().zip(self.u[i].iter().zip(self.v[i].iter())) {
                out.push_str(&format!("{t},{x},{u},{v}\n"));
            }
        }
        out
    }

    /// Write snapshots, the surface CSV, and a JSON manifest of the
    /// parameters that produced them.
    pub fn write_outputs(&self, problem: &RdProblem, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("manifest.json"), manifest_json(problem))?;
        std::fs::write(dir.join("surface.csv"), self.surface_csv())?;
        for i in 0..self.times.len() {
            let name = format!("snap_{:06}.csv", i);
            std::fs::write(dir.join(name), self.snapshot_csv(i))?;
        }
        Ok(())
    }
}

fn manifest_json(p: &RdProblem) -> String {
    let ic_kind = match p.ic.kind {
        PerturbationKind::Random => "random",
        PerturbationKind::LongWave => "long-wave",
        PerturbationKind::ShortWave => "short-wave",
    };
    format!(
        concat!(
            "{{\n",
            "  \"kinetics\": \"{}\",\n",
            "  \"alpha1\": {},\n",
            "  \"alpha2\": {},\n",
            "  \"d\": {},\n",
            "  \"kappa\": {},\n",
            "  \"kappa1\": {},\n",
            "  \"kappa2\": {},\n",
            "  \"domain\": {},\n",
            "  \"cells\": {},\n",
            "  \"tau\": {},\n",
            "  \"t_end\": {},\n",
            "  \"ic\": \"{}\",\n",
            "  \"epsilon\": {},\n",
            "  \"q\": {},\n",
            "  \"seed\": {},\n",
            "  \"engine\": \"{}\",\n",
            "  \"quad_points\": {}\n",
            "}}\n"
        ),
        p.kinetics.name,
        p.alpha1,
        p.alpha2,
        p.d,
        p.kappa,
        p.kappa1,
        p.kappa2,
        p.domain,
        p.cells,
        p.tau,
        p.t_end,
        ic_kind,
        p.ic.epsilon,
        p.ic.q.unwrap_or_else(|| p.default_q()),
        p.ic.seed,
        p.engine.name(),
        p.engine.quad_points(),
    )
}

/// Spatial variance mean((w − mean w)²) of one snapshot.
pub fn spatial_variance(field: &[f64]) -> f64 {
    let mean = field.iter().sum::<f64>() / field.len() as f64;
    field.iter().map(|w| (w - mean) * (w - mean)).sum::<f64>() / field.len() as f64
}

/// Index of the dominant discrete-cosine mode of `field` on [0, D].
pub fn dominant_cosine_mode(field: &[f64], domain: f64, max_mode: usize) -> usize {
    let m = field.len() - 1;
    let mean = field.iter().sum::<f64>() / field.len() as f64;
    let mut best = (0usize, 0.0f64);
    for k in 1..=max_mode {
        let mut c = 0.0;
        for (i, w) in field.iter().enumerate() {
            let x = i as f64 / m as f64 * domain;
            let weight = if i == 0 || i == m { 0.5 } else { 1.0 };
            c += weight * (w - mean) * (k as f64 * std::f64::consts::PI * x / domain).cos();
        }
        if c.abs() > best.1 {
            best = (k, c.abs());
        }
    }
    best.0
}

/// One simulation; create with [`RdSim::new`] (configured initial conditions) or
/// [`RdSim::with_fields`] (explicit initial fields), then [`RdSim::run`].
pub struct RdSim {
    problem: RdProblem,
    n_t: usize,
    u: Vec<f64>,
    v: Vec<f64>,
    u_prev: Vec<f64>,
    v_prev: Vec<f64>,
    f1_cur: Vec<f64>,
    f2_cur: Vec<f64>,
    f1_prev: Vec<f64>,
    f2_prev: Vec<f64>,
    conv_u: Box<dyn FieldConvolve>,
    conv_v: Box<dyn FieldConvolve>,
    solver_u: TridiagSolver,
    solver_v: TridiagSolver,
}

impl RdSim {
    pub fn new(problem: RdProblem) -> Result<Self> {
        problem.validate()?;
        let (u0, v0) = problem.initial_fields();
        Self::with_fields(problem, u0, v0)
    }

    pub fn with_fields(problem: RdProblem, u0: Vec<f64>, v0: Vec<f64>) -> Result<Self> {
        problem.validate()?;
        let width = problem.cells + 1;
        if u0.len() != width || v0.len() != width {
            return Err(Error::InvalidParameter(format!(
                "initial fields must have {width} points"
            )));
        }
        let gf = GeneratingFunction::gngf(2).expect("order 2 supported");
        let n_t = (problem.t_end / problem.tau).round() as usize;
        let tau = problem.tau;
        let h = problem.h();
        let mut conv_u = make_convolver(&gf, problem.alpha1, tau, problem.engine, n_t, width)?;
        let mut conv_v = make_convolver(&gf, problem.alpha2, tau, problem.engine, n_t, width)?;

        // Implicit coefficient of the BDF2 system: (3/(2τ) + κ_i) I − c Δ_h
        // with c the ω_0 weight of the memory operator (times d for v).
        let a_u = 1.5 / tau + problem.kappa1;
        let a_v = 1.5 / tau + problem.kappa2;
        let c_u = conv_u.w0_scaled();
        let c_v = problem.d * conv_v.w0_scaled();
        let solver_u = TridiagSolver::new(a_u, c_u, h, width)?;
        let solver_v = TridiagSolver::new(a_v, c_v, h, width)?;

        let kin = &problem.kinetics;
        let f1_prev: Vec<f64> = u0.iter().zip(v0.iter()).map(|(u, v)| kin.f1(*u, *v)).collect();
        let f2_prev: Vec<f64> = u0.iter().zip(v0.iter()).map(|(u, v)| kin.f2(*u, *v)).collect();

        // First step: u¹ = u⁰ + τ ∂_t u(0); the fractional memory term
        // vanishes at t = 0, and in the α = 1 limit it is the plain Laplacian.
        let lap_u0 = spatial_operator(&u0, h);
        let lap_v0 = spatial_operator(&v0, h);
        let mem_u0 = if problem.alpha1 == 1.0 { 1.0 } else { 0.0 };
        let mem_v0 = if problem.alpha2 == 1.0 { problem.d } else { 0.0 };
        let u1: Vec<f64> = u0
            .iter()
            .zip(f1_prev.iter().zip(lap_u0.iter()))
            .map(|(u, (f, l))| u + tau * (problem.kappa * f + mem_u0 * l))
            .collect();
        let v1: Vec<f64> = v0
            .iter()
            .zip(f2_prev.iter().zip(lap_v0.iter()))
            .map(|(v, (f, l))| v + tau * (problem.kappa * f + mem_v0 * l))
            .collect();
        let f1_cur: Vec<f64> = u1.iter().zip(v1.iter()).map(|(u, v)| kin.f1(*u, *v)).collect();
        let f2_cur: Vec<f64> = u1.iter().zip(v1.iter()).map(|(u, v)| kin.f2(*u, *v)).collect();

        // The convolvers ingest Δ_h u⁰ and Δ_h u¹ before stepping begins.
        let mut scratch = vec![0.0; width];
        conv_u.begin(&mut scratch);
        conv_u.finish(lap_u0);
        conv_v.begin(&mut scratch);
        conv_v.finish(lap_v0);
        conv_u.begin(&mut scratch);
        conv_u.finish(spatial_operator(&u1, h));
        conv_v.begin(&mut scratch);
        conv_v.finish(spatial_operator(&v1, h));

        Ok(RdSim {
            problem,
            n_t,
            u: u1,
            v: v1,
            u_prev: u0,
            v_prev: v0,
            f1_cur,
            f2_cur,
            f1_prev,
            f2_prev,
            conv_u,
            conv_v,
            solver_u,
            solver_v,
        })
    }

    /// Advance from (u^{n-1}, u^{n-2}) to u^n; `self.u` holds u^{n-1} on
    /// entry and u^n on exit.
    fn step(&mut self, n: usize, mem_u: &mut Vec<f64>, mem_v: &mut Vec<f64>) -> Result<()> {
        let p = &self.problem;
        let tau = p.tau;
        let h = p.h();
        self.conv_u.begin(mem_u);
        self.conv_v.begin(mem_v);
        let mut rhs_u = vec![0.0; self.u.len()];
        let mut rhs_v = vec![0.0; self.v.len()];
        for i in 0..self.u.len() {
            rhs_u[i] = (4.0 * self.u[i] - self.u_prev[i]) / (2.0 * tau)
                + p.kappa1 * (2.0 * self.u[i] - self.u_prev[i])
                + mem_u[i]
                + p.kappa * (2.0 * self.f1_cur[i] - self.f1_prev[i]);
            rhs_v[i] = (4.0 * self.v[i] - self.v_prev[i]) / (2.0 * tau)
                + p.kappa2 * (2.0 * self.v[i] - self.v_prev[i])
                + p.d * mem_v[i]
                + p.kappa * (2.0 * self.f2_cur[i] - self.f2_prev[i]);
        }
        self.solver_u.solve(&mut rhs_u);
        self.solver_v.solve(&mut rhs_v);
        if !rhs_u.iter().chain(rhs_v.iter()).all(|w| w.is_finite()) {
            return Err(Error::StepFailure {
                step: n,
                detail: "non-finite field value".into(),
            });
        }
        std::mem::swap(&mut self.u_prev, &mut self.u);
        std::mem::swap(&mut self.v_prev, &mut self.v);
        self.u = rhs_u;
        self.v = rhs_v;
        let kin = &p.kinetics;
        std::mem::swap(&mut self.f1_prev, &mut self.f1_cur);
        std::mem::swap(&mut self.f2_prev, &mut self.f2_cur);
        for i in 0..self.u.len() {
            self.f1_cur[i] = kin.f1(self.u[i], self.v[i]);
            self.f2_cur[i] = kin.f2(self.u[i], self.v[i]);
        }
        self.conv_u.finish(spatial_operator(&self.u, h));
        self.conv_v.finish(spatial_operator(&self.v, h));
        Ok(())
    }

    /// Run to t_end, saving every `save_stride` steps (plus t = 0, t = τ and
    /// the final step).
    pub fn run(mut self, save_stride: usize) -> Result<FieldHistory> {
        let stride = save_stride.max(1);
        let tau = self.problem.tau;
        let mut hist = FieldHistory {
            x: self.problem.grid(),
            times: vec![0.0, tau],
            u: vec![self.u_prev.clone(), self.u.clone()],
            v: vec![self.v_prev.clone(), self.v.clone()],
        };
        let mut mem_u = vec![0.0; self.u.len()];
        let mut mem_v = vec![0.0; self.v.len()];
        for n in 2..=self.n_t {
            self.step(n, &mut mem_u, &mut mem_v)?;
            if n % stride == 0 || n == self.n_t {
                hist.times.push(n as f64 * tau);
                hist.u.push(self.u.clone());
                hist.v.push(self.v.clone());
            }
        }
        Ok(hist)
    }
}

/// Build and run in one call.
pub fn run(problem: RdProblem, save_stride: usize) -> Result<FieldHistory> {
    RdSim::new(problem)?.run(save_stride)
}
