//! Fast Method I: block-partitioned history with Talbot-contour quadrature.
//!
//! The history beyond the local window is tiled into exponentially growing
//! blocks.  Within a block the weights ω_ν share one contour representation
//!
//! ω_ν^{(α,σ)} = 2 τ^{1+α} e^{-νστ} Im Σ_j w_j λ_j^α (1-λ_j τ)^{-1-ν} F_ω(λ_j),
//!
//! so the block's contribution to the convolution collapses to N complex
//! states advanced by backward Euler, y ← (y + τu)/(1-τλ), one per contour
//! node.  The stored node weights absorb the 1/(2πi) and midpoint-rule
//! normalization so the `2 Im` form above is literal.

use crate::error::{Error, Result};
use crate::weights::{GeneratingFunction, WeightTable};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Talbot parameters: nodes per contour, block base, local window length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TalbotParams {
    pub n_nodes: usize,
    pub base: usize,
    pub n0: usize,
}

impl Default for TalbotParams {
    fn default() -> Self {
        TalbotParams { n_nodes: 36, base: 5, n0: 50 }
    }
}

/// The cotangent contour z(θ, s) = s(−0.4814 + 0.6443(θ cot θ + 0.5653 i θ)).
fn contour_point(theta: f64, s: f64) -> Complex64 {
    let cot = theta.cos() / theta.sin();
    s * Complex64::new(-0.4814 + 0.6443 * theta * cot, 0.6443 * 0.5653 * theta)
}

/// ∂_θ z(θ, s), evaluated analytically.
fn contour_derivative(theta: f64, s: f64) -> Complex64 {
    let sin = theta.sin();
    let cot = theta.cos() / sin;
    s * Complex64::new(0.6443 * (cot - theta / (sin * sin)), 0.6443 * 0.5653)
}

/// One Talbot contour: nodes λ_j = z(θ_j, N/T) at θ_j = (2j+1)π/(2N) and
/// stored weights w_j = ∂_θ z(θ_j, N/T) / (2N), which fold the 1/(2πi) and
/// the midpoint spacing Δθ = π/N into the node weight.
#[derive(Debug, Clone)]
pub struct TalbotContour {
    pub n_nodes: usize,
    pub t_scale: f64,
    pub nodes: Vec<Complex64>,
    pub weights: Vec<Complex64>,
}

pub fn talbot_nodes(n_nodes: usize, t_scale: f64) -> TalbotContour {
    assert!(n_nodes >= 1 && t_scale > 0.0);
    let s = n_nodes as f64 / t_scale;
    let norm = 1.0 / (2.0 * n_nodes as f64);
    let mut nodes = Vec::with_capacity(n_nodes);
    let mut weights = Vec::with_capacity(n_nodes);
    for j in 0..n_nodes {
        let theta = (2 * j + 1) as f64 * PI / (2.0 * n_nodes as f64);
        nodes.push(contour_point(theta, s));
        weights.push(norm * contour_derivative(theta, s));
    }
    TalbotContour { n_nodes, t_scale, nodes, weights }
}

/// Block decomposition of the history [0, n−n0−1] at step n: boundaries
/// b_0 = n−n0 ≥ b_1 ≥ … ≥ b_L = 0 with b_ℓ = q_ℓ B^ℓ and
/// n − n0 + 1 − b_ℓ ∈ [B^{ℓ-1}, 2B^ℓ − 1] for 1 ≤ ℓ ≤ L−1.
#[derive(Debug, Clone, PartialEq)]
pub struct TalbotSchedule {
    pub base: usize,
    pub n0: usize,
    pub levels: usize,
    pub b: Vec<usize>,
    pub q: Vec<usize>,
}

pub fn level_schedule(n: usize, base: usize, n0: usize) -> Result<TalbotSchedule> {
    assert!(base >= 2, "block base must be at least 2");
    if n < n0 {
        return Err(Error::ScheduleNotNeeded { n, n0 });
    }
    let s = n - n0 + 1;
    if s == 1 {
        return Ok(TalbotSchedule { base, n0, levels: 0, b: vec![n - n0], q: Vec::new() });
    }
    // Smallest L ≥ 1 with s ≤ 2 B^L; the L = 0 window cannot reach sample 0.
    let mut levels = 1usize;
    let mut pow = base;
    while s > 2 * pow {
        levels += 1;
        pow *= base;
    }
    let mut b = Vec::with_capacity(levels + 1);
    let mut q = Vec::with_capacity(levels.saturating_sub(1));
    b.push(n - n0);
    let mut bl = 1usize; // B^{ℓ-1}
    for _ in 1..levels {
        let bpow = bl * base; // B^ℓ
        // Smallest q with s - qB^ℓ <= 2B^ℓ - 1; where the defining relation
        // admits two multiples, the further-back block start keeps the next
        // level's weight indices well inside its contour's validity range.
        let ql = (s + 1).saturating_sub(2 * bpow).div_ceil(bpow);
        q.push(ql);
        b.push(ql * bpow);
        bl = bpow;
    }
    b.push(0);
    Ok(TalbotSchedule { base, n0, levels, b, q })
}

impl TalbotSchedule {
    /// Half-open sample range [lo, hi) covered by level ℓ ∈ 1..=levels.
    pub fn block(&self, level: usize) -> (usize, usize) {
        (self.b[level], self.b[level - 1])
    }
}

/// Contour scale for level ℓ: T_ℓ = (2B^ℓ − 2 + n0)τ.
pub fn level_time_scale(level: usize, base: usize, n0: usize, tau: f64) -> f64 {
    (2.0 * (base as f64).powi(level as i32) - 2.0 + n0 as f64) * tau
}

/// One-off Talbot approximation of the weight ω_n^{(α,σ)} on a given contour:
/// ω̃ = 2 τ^{1+α} e^{-nστ} Im Σ_j w_j λ_j^α (1-λ_j τ)^{-1-n} F_ω(λ_j).
pub fn fast_weight_talbot(
    gf: &GeneratingFunction,
    alpha: f64,
    sigma: f64,
    tau: f64,
    contour: &TalbotContour,
    n: usize,
) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (lam, w) in contour.nodes.iter().zip(contour.weights.iter()) {
        let zeta = tau * lam;
        let decay = (-(1.0 + n as f64) * (Complex64::new(1.0, 0.0) - zeta).ln()).exp();
        acc += w * lam.powf(alpha) * decay * gf.f_omega(alpha, zeta);
    }
    2.0 * tau.powf(1.0 + alpha) * (-(n as f64) * sigma * tau).exp() * acc.im
}

/// Smallest level whose contour scale covers the weight index n.
pub fn level_for_weight(n: usize, base: usize, n0: usize) -> usize {
    let mut level = 1usize;
    let mut pow = base;
    while n + 2 > 2 * pow + n0 {
        level += 1;
        pow *= base;
    }
    level
}

struct LevelState {
    /// Per-node constants w_j λ_j^α F_ω(λ_j) / (1-τλ_j).
    cj: Vec<Complex64>,
    /// ln ρ_j with ρ_j = e^{-στ}/(1-τλ_j).
    log_rho: Vec<Complex64>,
    rho: Vec<Complex64>,
    state: Vec<Complex64>,
    block: (usize, usize),
}

/// Stateful fast convolver for τ^{-α} Σ ω_{n-k}^{(α,σ)} u_k (Algorithm-1
/// style).  Block states are created lazily per level and re-synchronized
/// whenever the schedule moves a block; samples are retained so a moved block
/// can be rebuilt from scratch.
pub struct TalbotConvolver {
    gf: GeneratingFunction,
    alpha: f64,
    sigma: f64,
    tau: f64,
    params: TalbotParams,
    local_w: Vec<f64>,
    tau_neg_alpha: f64,
    w0_scaled: f64,
    samples: Vec<f64>,
    levels: Vec<LevelState>,
    n_next: usize,
}

impl TalbotConvolver {
    pub fn new(
        gf: &GeneratingFunction,
        alpha: f64,
        sigma: f64,
        tau: f64,
        params: TalbotParams,
    ) -> Result<Self> {
        if params.base < 2 || params.n_nodes == 0 {
            return Err(Error::InvalidParameter(
                "talbot engine needs base >= 2 and at least one node".into(),
            ));
        }
        let table = WeightTable::build(gf, alpha, sigma, tau, params.n0)?;
        let tau_neg_alpha = tau.powf(-alpha);
        Ok(TalbotConvolver {
            gf: gf.clone(),
            alpha,
            sigma,
            tau,
            params,
            w0_scaled: tau_neg_alpha * table.weights[0],
            local_w: table.weights,
            tau_neg_alpha,
            samples: Vec::new(),
            levels: Vec::new(),
            n_next: 0,
        })
    }

    pub fn w0_scaled(&self) -> f64 {
        self.w0_scaled
    }

    pub fn n_processed(&self) -> usize {
        self.n_next
    }

    fn make_level(&self, level: usize) -> LevelState {
        let t_scale = level_time_scale(level, self.params.base, self.params.n0, self.tau);
        let contour = talbot_nodes(self.params.n_nodes, t_scale);
        let one = Complex64::new(1.0, 0.0);
        let mut cj = Vec::with_capacity(contour.n_nodes);
        let mut log_rho = Vec::with_capacity(contour.n_nodes);
        let mut rho = Vec::with_capacity(contour.n_nodes);
        for (lam, w) in contour.nodes.iter().zip(contour.weights.iter()) {
            let zeta = self.tau * lam;
            cj.push(w * lam.powf(self.alpha) * self.gf.f_omega(self.alpha, zeta) / (one - zeta));
            let lr = -Complex64::new(self.sigma * self.tau, 0.0) - (one - zeta).ln();
            log_rho.push(lr);
            rho.push(lr.exp());
        }
        LevelState {
            cj,
            log_rho,
            rho,
            state: vec![Complex64::new(0.0, 0.0); self.params.n_nodes],
            block: (0, 0),
        }
    }

    /// Bring a level's states to the target block, incrementally if the block
    /// only grew by trailing samples, otherwise by a rebuild over the block.
    fn sync_level(&mut self, level: usize, target: (usize, usize)) {
        while self.levels.len() < level {
            let next = self.make_level(self.levels.len() + 1);
            self.levels.push(next);
        }
        let tau = self.tau;
        let ls = &mut self.levels[level - 1];
        if ls.block == target {
            return;
        }
        let incremental = ls.block.0 == target.0 && ls.block.1 <= target.1 && ls.block != (0, 0);
        let start = if incremental {
            ls.block.1
        } else {
            for y in ls.state.iter_mut() {
                *y = Complex64::new(0.0, 0.0);
            }
            target.0
        };
        for k in start..target.1 {
            let u = self.samples[k];
            for (y, rho) in ls.state.iter_mut().zip(ls.rho.iter()) {
                *y = rho * (*y + tau * u);
            }
        }
        ls.block = target;
    }

    /// Everything at step n except the ω_0·u_n term.
    pub fn begin_step(&mut self) -> f64 {
        let n = self.n_next;
        let n0 = self.params.n0;
        let mut total = 0.0;
        if n > n0 {
            let schedule =
                level_schedule(n, self.params.base, n0).expect("n > n0 always schedules");
            for level in 1..=schedule.levels {
                let block = schedule.block(level);
                if block.0 == block.1 {
                    continue;
                }
                self.sync_level(level, block);
                let ls = &self.levels[level - 1];
                let catch_up = (n - block.1) as f64;
                let mut acc = Complex64::new(0.0, 0.0);
                for ((c, lr), y) in
                    ls.cj.iter().zip(ls.log_rho.iter()).zip(ls.state.iter())
                {
                    acc += c * (catch_up * lr).exp() * y;
                }
                total += 2.0 * acc.im;
            }
        }
        let lo = n.saturating_sub(n0);
        let mut local = 0.0;
        for k in lo..n {
            local += self.local_w[n - k] * self.samples[k];
        }
        total + self.tau_neg_alpha * local
    }

    pub fn finish_step(&mut self, u: f64) {
        self.samples.push(u);
        self.n_next += 1;
    }

    pub fn feed(&mut self, u: f64) -> f64 {
        let partial = self.begin_step();
        let v = partial + self.w0_scaled * u;
        self.finish_step(u);
        v
    }

    /// Per-level diagnostics versus exact weights: CSV `n,level,approx,exact,relerr`
    /// for the one-off weight quadrature at each requested index.
    pub fn weight_diagnostics_csv(
        gf: &GeneratingFunction,
        alpha: f64,
        sigma: f64,
        tau: f64,
        params: TalbotParams,
        indices: &[usize],
    ) -> Result<String> {
        let n_max = indices.iter().copied().max().unwrap_or(0);
        let table = WeightTable::build(gf, alpha, sigma, tau, n_max)?;
        let mut out = String::from("n,level,approx,exact,relerr\n");
        let mut contours: Vec<(usize, TalbotContour)> = Vec::new();
        for &n in indices {
            let level = level_for_weight(n, params.base, params.n0);
            if !contours.iter().any(|(l, _)| *l == level) {
                let ts = level_time_scale(level, params.base, params.n0, tau);
                contours.push((level, talbot_nodes(params.n_nodes, ts)));
            }
            let contour = &contours.iter().find(|(l, _)| *l == level).unwrap().1;
            let approx = fast_weight_talbot(gf, alpha, sigma, tau, contour, n);
            let exact = table.weights[n];
            let relerr = (approx - exact).abs() / exact.abs().max(f64::MIN_POSITIVE);
            out.push_str(&format!("{n},{level},{approx},{exact},{relerr}\n"));
        }
        Ok(out)
    }
}
