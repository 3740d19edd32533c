//! Fast Method II: real-line trapezoidal compression of the convolution.
//!
//! Every weight is a real-line integral
//! ω_n^{(α,σ)} = τ^{1+α} e^{-nστ} ∫ φ_n(x) dx with
//! φ_n(x) = (1+e^x τ)^{-1-n} φ(x) and
//! φ(x) = -(sin(απ)/π) e^{(1+α)x} F_ω(-e^x).
//!
//! φ_n decays exponentially as |x| → ∞ for n beyond the local window, so one
//! global trapezoidal rule over the ε-support of φ_{n0} and φ_{nT} serves all
//! n at once.  The history Σ_{k<n-n0} ω_{n-k} u_k then collapses to Q scalar
//! geometric recurrences y_n^{(j)} = e^{-τσ}/(1+λ_j τ) (y_{n-1}^{(j)} + τ u_{n-1}),
//! giving O(Q) memory and O(Q) work per step; only the newest n0+1 samples
//! are summed exactly.

use crate::error::{Error, Result};
use crate::weights::{GeneratingFunction, WeightTable};
use std::collections::VecDeque;
use std::f64::consts::PI;

/// Quadrature/window parameters for the real-line engine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealLineParams {
    /// Number of trapezoidal nodes.
    pub q: usize,
    /// Local window length: the newest n0+1 samples are summed exactly.
    pub n0: usize,
    /// Relative support threshold for the window search.
    pub epsilon: f64,
}

impl Default for RealLineParams {
    fn default() -> Self {
        RealLineParams { q: 256, n0: 50, epsilon: 1e-20 }
    }
}

impl RealLineParams {
    pub fn with_q(q: usize) -> Self {
        RealLineParams { q, ..Default::default() }
    }
}

/// Evaluator of φ(x) and φ_n(x) for one (generating function, α, τ) context.
#[derive(Debug, Clone)]
pub struct PhiIntegrand {
    gf: GeneratingFunction,
    pub alpha: f64,
    pub tau: f64,
    prefactor: f64, // -sin(απ)/π
}

impl PhiIntegrand {
    pub fn new(gf: GeneratingFunction, alpha: f64, tau: f64) -> Result<Self> {
        if alpha == alpha.trunc() {
            return Err(Error::UnsupportedForMethodII(format!(
                "integer order alpha = {alpha} (sin(απ) = 0 makes φ vanish identically)"
            )));
        }
        // Reject unsupported families up front.
        gf.f_omega_neg_real(alpha, 0.0)?;
        let prefactor = -(alpha * PI).sin() / PI;
        Ok(PhiIntegrand { gf, alpha, tau, prefactor })
    }

    pub fn phi(&self, x: f64) -> f64 {
        let lam_tau = self.tau * x.exp();
        let f = self
            .gf
            .f_omega_neg_real(self.alpha, lam_tau)
            .expect("family validated at construction");
        self.prefactor * ((1.0 + self.alpha) * x).exp() * f
    }

    pub fn phi_n(&self, x: f64, n: usize) -> f64 {
        self.phi(x) * (-(1.0 + n as f64) * (self.tau * x.exp()).ln_1p()).exp()
    }

    /// ln |φ_n(x)|; -inf where φ vanishes.
    fn ln_abs_phi_n(&self, x: f64, n: usize) -> f64 {
        let lam_tau = self.tau * x.exp();
        let f = self
            .gf
            .f_omega_neg_real(self.alpha, lam_tau)
            .expect("family validated at construction");
        self.prefactor.abs().ln() + (1.0 + self.alpha) * x + f.abs().ln()
            - (1.0 + n as f64) * lam_tau.ln_1p()
    }

    /// Location of the |φ_n| peak ignoring the slowly varying F factor.
    fn peak_seed(&self, n: usize) -> f64 {
        ((1.0 + self.alpha) / ((n as f64 - self.alpha) * self.tau)).ln()
    }
}

/// ε-support window of φ_n for n ∈ {n0, nT}: coarse scan + golden-section for
/// the peak, then outward bisection (to 1e-3 in x) for the relative-ε
/// crossing points; the returned window is the envelope over both n.
pub fn support_window(
    phi: &PhiIntegrand,
    n0: usize,
    n_t: usize,
    epsilon: f64,
) -> Result<(f64, f64)> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon = {epsilon} not in (0,1)")));
    }
    if n_t < n0 {
        return Err(Error::InvalidParameter(format!("need n0 <= nT, got {n0} > {n_t}")));
    }
    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let ns = if n0 == n_t { vec![n0] } else { vec![n0, n_t] };
    for n in ns {
        let (lo, hi) = single_window(phi, n, epsilon)?;
        x_min = x_min.min(lo);
        x_max = x_max.max(hi);
    }
    Ok((x_min, x_max))
}

fn single_window(phi: &PhiIntegrand, n: usize, epsilon: f64) -> Result<(f64, f64)> {
    let seed = phi.peak_seed(n);
    // Coarse scan, then golden-section refinement around the best sample.
    let span = 10.0;
    let m = 200;
    let mut best_i = 0;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=m {
        let x = seed - span + 2.0 * span * i as f64 / m as f64;
        let v = phi.ln_abs_phi_n(x, n);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    if !best.is_finite() {
        return Err(Error::UnsupportedForMethodII(
            "phi_n vanished over the whole search bracket".into(),
        ));
    }
    let cell = 2.0 * span / m as f64;
    let peak_x = seed - span + cell * best_i as f64;
    let (mut a, mut b) = (peak_x - cell, peak_x + cell);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = phi.ln_abs_phi_n(x1, n);
    let mut f2 = phi.ln_abs_phi_n(x2, n);
    while b - a > 1e-6 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = phi.ln_abs_phi_n(x2, n);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = phi.ln_abs_phi_n(x1, n);
        }
    }
    let x_peak = 0.5 * (a + b);
    let ln_max = phi.ln_abs_phi_n(x_peak, n);
    let target = ln_max + epsilon.ln();
    let crossing = |mut inside: f64, direction: f64| -> f64 {
        let mut outside = inside + direction;
        while phi.ln_abs_phi_n(outside, n) > target {
            inside = outside;
            outside += direction;
            if (outside - x_peak).abs() > 500.0 {
                break;
            }
        }
        // Bisect the bracket [inside, outside] to 1e-3 in x.
        while (outside - inside).abs() > 1e-3 {
            let mid = 0.5 * (inside + outside);
            if phi.ln_abs_phi_n(mid, n) > target {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        0.5 * (inside + outside)
    };
    Ok((crossing(x_peak, -1.0), crossing(x_peak, 1.0)))
}

/// Trapezoidal rule data: nodes λ_j = e^{x_j} and weights w_j = Δx·φ(x_j) on
/// a uniform x-grid over the support window.
#[derive(Debug, Clone)]
pub struct RealLineRule {
    pub q: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    pub lambda: Vec<f64>,
    pub w: Vec<f64>,
    pub epsilon: f64,
    pub alpha: f64,
    pub tau: f64,
}

/// Build the global rule for history indices in [n0, nT].
pub fn build_rule(
    phi: &PhiIntegrand,
    n0: usize,
    n_t: usize,
    q: usize,
    epsilon: f64,
) -> Result<RealLineRule> {
    if q < 2 {
        return Err(Error::InvalidParameter(format!("need Q >= 2 nodes, got {q}")));
    }
    let (x_min, x_max) = support_window(phi, n0, n_t, epsilon)?;
    let dx = (x_max - x_min) / (q - 1) as f64;
    let mut lambda = Vec::with_capacity(q);
    let mut w = Vec::with_capacity(q);
    for j in 0..q {
        let x = x_min + dx * j as f64;
        lambda.push(x.exp());
        w.push(dx * phi.phi(x));
    }
    Ok(RealLineRule {
        q,
        x_min,
        x_max,
        dx,
        lambda,
        w,
        epsilon,
        alpha: phi.alpha,
        tau: phi.tau,
    })
}

impl RealLineRule {
    /// ŵ_n^{(α,σ)} = τ^{1+α} e^{-nστ} Σ_j w_j (1+λ_j τ)^{-1-n}.
    pub fn weight_approx(&self, sigma: f64, n: usize) -> f64 {
        let mut s = 0.0;
        for (w, lam) in self.w.iter().zip(self.lambda.iter()) {
            s += w * (-(1.0 + n as f64) * (lam * self.tau).ln_1p()).exp();
        }
        self.tau.powf(1.0 + self.alpha) * (-(n as f64) * sigma * self.tau).exp() * s
    }

    /// CSV serialization: header `j,x,lambda,w`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("j,x,lambda,w\n");
        for j in 0..self.q {
            let x = self.x_min + self.dx * j as f64;
            out.push_str(&format!("{j},{x},{},{}\n", self.lambda[j], self.w[j]));
        }
        out
    }
}

/// Per-step cost/memory counters (slice lengths actually touched).
#[derive(Debug, Clone, Copy, Default)]
pub struct StepStats {
    pub history_madds: u64,
    pub local_madds: u64,
    pub steps: u64,
}

/// Scalar fast convolver: computes τ^{-α} Σ_{k=0}^{n} ω_{n-k}^{(α,σ)} u_k one
/// step at a time, exactly on the local window and through the Q recurrences
/// beyond it.
#[derive(Debug, Clone)]
pub struct RealLineConvolver {
    pub rule: RealLineRule,
    n0: usize,
    local_w: Vec<f64>,
    tau_neg_alpha: f64,
    w0_scaled: f64,
    rho: Vec<f64>,
    cj: Vec<f64>,
    y: Vec<f64>,
    ring: VecDeque<f64>,
    n_next: usize,
    pub stats: StepStats,
}

impl RealLineConvolver {
    pub fn new(
        gf: &GeneratingFunction,
        alpha: f64,
        sigma: f64,
        tau: f64,
        params: RealLineParams,
        n_t: usize,
    ) -> Result<Self> {
        let phi = PhiIntegrand::new(gf.clone(), alpha, tau)?;
        let rule = build_rule(&phi, params.n0, n_t.max(params.n0 + 1), params.q, params.epsilon)?;
        let table = WeightTable::build(gf, alpha, sigma, tau, params.n0)?;
        let tau_neg_alpha = tau.powf(-alpha);
        let decay = (-sigma * tau).exp();
        let rho: Vec<f64> = rule.lambda.iter().map(|l| decay / (1.0 + l * tau)).collect();
        // The τ^{-α}·τ^{1+α} of convolution times weight integral leaves one
        // factor τ, which the recurrence state y already carries; the
        // per-node constant is w_j e^{-n0 τσ} (1+λ_j τ)^{-(n0+1)}.
        let n0p1 = (params.n0 + 1) as f64;
        let cj: Vec<f64> = rule
            .w
            .iter()
            .zip(rule.lambda.iter())
            .map(|(w, l)| {
                w * (-(params.n0 as f64) * sigma * tau - n0p1 * (l * tau).ln_1p()).exp()
            })
            .collect();
        let w0_scaled = tau_neg_alpha * table.weights[0];
        Ok(RealLineConvolver {
            n0: params.n0,
            local_w: table.weights,
            tau_neg_alpha,
            w0_scaled,
            rho,
            cj,
            y: vec![0.0; rule.q],
            ring: VecDeque::with_capacity(params.n0 + 2),
            rule,
            n_next: 0,
            stats: StepStats::default(),
        })
    }

    pub fn n_processed(&self) -> usize {
        self.n_next
    }

    /// τ^{-α}·ω_0, the coefficient the current sample enters with.
    pub fn w0_scaled(&self) -> f64 {
        self.w0_scaled
    }

    /// Everything at step n except the ω_0·u_n term: the exact local sum over
    /// the ring buffer plus the compressed history.
    pub fn begin_step(&mut self) -> f64 {
        let n = self.n_next;
        let tau = self.rule.tau;
        let mut history = 0.0;
        if n > self.n0 {
            let u_old = self.ring.pop_front().expect("ring holds n0+1 samples");
            for (y, (rho, cj)) in self.y.iter_mut().zip(self.rho.iter().zip(self.cj.iter())) {
                *y = rho * (*y + tau * u_old);
                history += cj * *y;
            }
            self.stats.history_madds += self.y.len() as u64;
        }
        let mut local = 0.0;
        let len = self.ring.len();
        for (i, u) in self.ring.iter().enumerate() {
            local += self.local_w[len - i] * u;
        }
        self.stats.local_madds += len as u64;
        self.stats.steps += 1;
        self.tau_neg_alpha * local + history
    }

    pub fn finish_step(&mut self, u: f64) {
        self.ring.push_back(u);
        self.n_next += 1;
    }

    /// Convenience: full convolution value at the next step.
    pub fn feed(&mut self, u: f64) -> f64 {
        let partial = self.begin_step();
        let v = partial + self.w0_scaled * u;
        self.finish_step(u);
        v
    }

    /// (state length, ring capacity) actually allocated.
    pub fn memory_model(&self) -> (usize, usize) {
        (self.y.len(), self.n0 + 1)
    }
}

/// Vectorized variant: one set of Q recurrences per grid point, updated in a
/// fused pass.  Used by the reaction-diffusion stepper.
#[derive(Debug, Clone)]
pub struct RealLineFieldConvolver {
    rule: RealLineRule,
    n0: usize,
    width: usize,
    local_w: Vec<f64>,
    tau_neg_alpha: f64,
    w0_scaled: f64,
    rho: Vec<f64>,
    cj: Vec<f64>,
    y: Vec<f64>, // q × width, row-major in j
    ring: VecDeque<Vec<f64>>,
    n_next: usize,
}

impl RealLineFieldConvolver {
    pub fn new(
        gf: &GeneratingFunction,
        alpha: f64,
        sigma: f64,
        tau: f64,
        params: RealLineParams,
        n_t: usize,
        width: usize,
    ) -> Result<Self> {
        let scalar = RealLineConvolver::new(gf, alpha, sigma, tau, params, n_t)?;
        Ok(RealLineFieldConvolver {
            n0: params.n0,
            width,
            local_w: scalar.local_w,
            tau_neg_alpha: scalar.tau_neg_alpha,
            w0_scaled: scalar.w0_scaled,
            rho: scalar.rho,
            cj: scalar.cj,
            y: vec![0.0; scalar.rule.q * width],
            ring: VecDeque::with_capacity(params.n0 + 2),
            rule: scalar.rule,
            n_next: 0,
        })
    }

    pub fn w0_scaled(&self) -> f64 {
        self.w0_scaled
    }

    /// Writes the per-point partial convolution into `out`.
    pub fn begin_step(&mut self, out: &mut [f64]) {
        assert_eq!(out.len(), self.width);
        out.fill(0.0);
        let n = self.n_next;
        let tau = self.rule.tau;
        if n > self.n0 {
            let u_old = self.ring.pop_front().expect("ring holds n0+1 fields");
            for ((row, rho), cj) in self
                .y
                .chunks_exact_mut(self.width)
                .zip(self.rho.iter())
                .zip(self.cj.iter())
            {
                for ((y, o), u) in row.iter_mut().zip(out.iter_mut()).zip(u_old.iter()) {
                    *y = rho * (*y + tau * u);
                    *o += cj * *y;
                }
            }
        }
        let len = self.ring.len();
        for (i, field) in self.ring.iter().enumerate() {
            let w = self.tau_neg_alpha * self.local_w[len - i];
            for (o, u) in out.iter_mut().zip(field.iter()) {
                *o += w * u;
            }
        }
    }

    pub fn finish_step(&mut self, u: Vec<f64>) {
        assert_eq!(u.len(), self.width);
        self.ring.push_back(u);
        self.n_next += 1;
    }
}
