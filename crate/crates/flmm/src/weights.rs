//! Convolution quadrature weights for (tempered) fractional operators.
//!
//! A generating function ω(z) (the order-p symbol of an implicit linear
//! multistep method) raised to the real power α yields the weights of a
//! stable discretization τ^{-α} Σ ω_k^{(α,σ)} u_{n-k} of the tempered
//! fractional derivative D^{σ,α} (integral for α < 0).  Tempering is an
//! exponential scaling of the untempered weights:
//! ω_k^{(α,σ)} = e^{-kτσ} ω_k^{(α,0)}.

use crate::error::{Error, Result};
use crate::series::{
    binomial_series, one_minus_z_pow, poly_eval, rational_power_series, series_power_coeffs,
};
use crate::special::{gamma, Compensated};
use num_complex::Complex64;

/// Supported FLMM families.
#[derive(Debug, Clone, PartialEq)]
pub enum GeneratingFunction {
    /// Fractional backward difference formula of order p:
    /// ω(z) = (Σ_{k=1}^p (1/k)(1−z)^k)^α.
    Fbdf { p: u8 },
    /// Generalized Newton–Gregory formula of order p:
    /// ω(z) = (1−z)^α Σ_{k=1}^p g_{k−1}(1−z)^{k−1}, with g_k = g_k(α).
    Gngf { p: u8 },
    /// Fractional trapezoidal rule ω(z) = ((1−z)/(2(1+z)))^α.
    FTrap,
    /// Fractional power of a user-supplied implicit LMM (ρ̂, σ̂), as
    /// ω(z) = (ρ̂(1/z)/σ̂(1/z))^α.
    Custom { rho_hat: Vec<f64>, sigma_hat: Vec<f64> },
}

impl GeneratingFunction {
    pub fn fbdf(p: u8) -> Result<Self> {
        if (1..=6).contains(&p) {
            Ok(GeneratingFunction::Fbdf { p })
        } else {
            Err(Error::UnsupportedOrder(format!("FBDF-{p} (need 1 <= p <= 6)")))
        }
    }

    pub fn gngf(p: u8) -> Result<Self> {
        if (1..=6).contains(&p) {
            Ok(GeneratingFunction::Gngf { p })
        } else {
            Err(Error::UnsupportedOrder(format!("GNGF-{p} (need 1 <= p <= 6)")))
        }
    }

    pub fn ftrap() -> Self {
        GeneratingFunction::FTrap
    }

    /// Build a custom generating function from the characteristic pair
    /// (ρ̂, σ̂) of a stable implicit LMM, coefficients in ascending powers.
    ///
    /// Validates that σ̂'s roots lie strictly inside the unit circle
    /// (Schur–Cohn test), that ρ̂(1) = 0, and that ρ̂'(1) = σ̂(1), all to
    /// 1e-12 relative.
    pub fn custom(rho_hat: Vec<f64>, sigma_hat: Vec<f64>) -> Result<Self> {
        let scale = rho_hat
            .iter()
            .chain(sigma_hat.iter())
            .fold(0.0f64, |m, c| m.max(c.abs()));
        if scale == 0.0 {
            return Err(Error::InvalidGeneratingFunction("all coefficients zero".into()));
        }
        if sigma_hat.last().map_or(true, |c| *c == 0.0) {
            return Err(Error::InvalidGeneratingFunction(
                "sigma_hat leading coefficient is zero (method not implicit)".into(),
            ));
        }
        if !roots_inside_unit_circle(&sigma_hat) {
            return Err(Error::InvalidGeneratingFunction(
                "sigma_hat has a root with |root| >= 1".into(),
            ));
        }
        let rho_at_1 = poly_eval(&rho_hat, 1.0);
        if rho_at_1.abs() > 1e-12 * scale {
            return Err(Error::InvalidGeneratingFunction(format!(
                "rho_hat(1) = {rho_at_1} != 0"
            )));
        }
        let drho_at_1: f64 = rho_hat
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| i as f64 * c)
            .sum();
        let sigma_at_1 = poly_eval(&sigma_hat, 1.0);
        if (drho_at_1 - sigma_at_1).abs() > 1e-12 * scale.max(sigma_at_1.abs()) {
            return Err(Error::InvalidGeneratingFunction(format!(
                "consistency fails: rho_hat'(1) = {drho_at_1}, sigma_hat(1) = {sigma_at_1}"
            )));
        }
        Ok(GeneratingFunction::Custom { rho_hat, sigma_hat })
    }

    /// Taylor coefficients of ω^{(α,0)}(z) up to z^{n_max}.
    pub fn untempered_weights(&self, alpha: f64, n_max: usize) -> Result<Vec<f64>> {
        match self {
            GeneratingFunction::Fbdf { p } => {
                series_power_coeffs(&fbdf_base(*p), alpha, n_max)
            }
            GeneratingFunction::Gngf { p } => {
                let g = gngf_coeffs(alpha, *p);
                // Σ g_{k-1} (1−z)^{k-1} expanded in powers of z.
                let mut corr = vec![0.0; *p as usize];
                for (k, gk) in g.iter().enumerate() {
                    for (i, c) in one_minus_z_pow(k).iter().enumerate() {
                        corr[i] += gk * c;
                    }
                }
                let binom = binomial_series(alpha, n_max);
                let mut out = vec![0.0; n_max + 1];
                for (i, ci) in corr.iter().enumerate() {
                    if *ci == 0.0 {
                        continue;
                    }
                    for (n, o) in out.iter_mut().enumerate().skip(i) {
                        *o += ci * binom[n - i];
                    }
                }
                Ok(out)
            }
            GeneratingFunction::FTrap => {
                rational_power_series(&[1.0, -1.0], &[2.0, 2.0], alpha, n_max)
            }
            GeneratingFunction::Custom { rho_hat, sigma_hat } => {
                let a = reversed(rho_hat, sigma_hat.len());
                let b = reversed(sigma_hat, rho_hat.len());
                rational_power_series(&a, &b, alpha, n_max)
            }
        }
    }

    /// F_ω(λ) = (τλ)^{-α} ω^{(α,0)}(1−τλ) on the contour, as a function of
    /// ζ = τλ.  The (τλ)^{±α} branch factors cancel analytically for every
    /// supported family, leaving a principal power of a regular factor.
    pub fn f_omega(&self, alpha: f64, zeta: Complex64) -> Complex64 {
        match self {
            GeneratingFunction::Fbdf { p: 1 } | GeneratingFunction::Gngf { p: 1 } => {
                Complex64::new(1.0, 0.0)
            }
            GeneratingFunction::Fbdf { p } => {
                // ζ^{-α} (Σ (1/k) ζ^k)^α = (Σ (1/k) ζ^{k-1})^α.
                let mut base = Complex64::new(0.0, 0.0);
                for k in (1..=*p as usize).rev() {
                    base = base * zeta + Complex64::new(1.0 / k as f64, 0.0);
                }
                base.powf(alpha)
            }
            GeneratingFunction::Gngf { p } => {
                let g = gngf_coeffs(alpha, *p);
                let mut acc = Complex64::new(0.0, 0.0);
                for gk in g.iter().rev() {
                    acc = acc * zeta + Complex64::new(*gk, 0.0);
                }
                acc
            }
            GeneratingFunction::FTrap => {
                (Complex64::new(4.0, 0.0) - 2.0 * zeta).powf(-alpha)
            }
            GeneratingFunction::Custom { rho_hat, sigma_hat } => {
                let a = reversed(rho_hat, sigma_hat.len());
                let b = reversed(sigma_hat, rho_hat.len());
                // ρ̃(1−ζ) vanishes at ζ = 0 (consistency); divide it out so
                // the fractional power acts on a regular factor.
                let num = compose_one_minus(&a);
                let den = compose_one_minus(&b);
                let num2 = &num[1..]; // ρ̃(1−ζ)/ζ
                let num_v = horner_c(num2, zeta);
                let den_v = horner_c(&den, zeta);
                (num_v / den_v).powf(alpha)
            }
        }
    }

    /// Real form of F_ω(−λ) for λ > 0, used by the real-line engine.  Only
    /// families whose integrand is real-analytic on (0, ∞) are supported.
    pub fn f_omega_neg_real(&self, alpha: f64, zeta: f64) -> Result<f64> {
        match self {
            GeneratingFunction::Fbdf { p: 1 } | GeneratingFunction::Gngf { p: 1 } => Ok(1.0),
            GeneratingFunction::Gngf { p } => {
                let g = gngf_coeffs(alpha, *p);
                let mut acc = 0.0;
                for gk in g.iter().rev() {
                    acc = acc * (-zeta) + gk;
                }
                Ok(acc)
            }
            GeneratingFunction::FTrap => Ok((2.0 * (2.0 + zeta)).powf(-alpha)),
            GeneratingFunction::Fbdf { p } => Err(Error::UnsupportedForMethodII(format!(
                "FBDF-{p} (branch point on the integration ray)"
            ))),
            GeneratingFunction::Custom { .. } => Err(Error::UnsupportedForMethodII(
                "custom generating function".into(),
            )),
        }
    }

    /// CLI / manifest spelling.
    pub fn name(&self) -> String {
        match self {
            GeneratingFunction::Fbdf { p } => format!("fbdf{p}"),
            GeneratingFunction::Gngf { p } => format!("gngf{p}"),
            GeneratingFunction::FTrap => "ftrap".into(),
            GeneratingFunction::Custom { .. } => "custom".into(),
        }
    }
}

fn horner_c(poly: &[f64], z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for c in poly.iter().rev() {
        acc = acc * z + Complex64::new(*c, 0.0);
    }
    acc
}

/// Reverse p's coefficients after padding to the common LMM degree.
fn reversed(poly: &[f64], other_len: usize) -> Vec<f64> {
    let deg = poly.len().max(other_len);
    let mut padded = poly.to_vec();
    padded.resize(deg, 0.0);
    padded.reverse();
    padded
}

/// Coefficients of p(1−ζ) in powers of ζ.
fn compose_one_minus(poly: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; poly.len()];
    for (j, pj) in poly.iter().enumerate() {
        for (i, c) in one_minus_z_pow(j).iter().enumerate() {
            out[i] += pj * c;
        }
    }
    out
}

/// Base polynomial Σ_{k=1}^p (1/k)(1−z)^k of FBDF-p, in powers of z.
fn fbdf_base(p: u8) -> Vec<f64> {
    let mut base = vec![0.0; p as usize + 1];
    for k in 1..=p as usize {
        for (i, c) in one_minus_z_pow(k).iter().enumerate() {
            base[i] += c / k as f64;
        }
    }
    base
}

/// Newton–Gregory coefficients g_0..g_{p−1} as polynomials in α
/// (the Taylor coefficients of ((−ln(1−w))/w)^α).
pub fn gngf_coeffs(alpha: f64, p: u8) -> Vec<f64> {
    let a = alpha;
    let mut g = vec![1.0];
    let closed = [
        a / 2.0,
        a * (5.0 + 3.0 * a) / 24.0,
        a * (a + 2.0) * (a + 3.0) / 48.0,
        a * (502.0 + 485.0 * a + 150.0 * a * a + 15.0 * a * a * a) / 5760.0,
        a * (760.0 + 802.0 * a + 305.0 * a * a + 50.0 * a * a * a + 3.0 * a * a * a * a)
            / 11520.0,
    ];
    for k in 1..p as usize {
        g.push(closed[k - 1]);
    }
    g
}

/// Schur–Cohn reduction: true iff every root of the polynomial (ascending
/// coefficients, nonzero leading term) lies strictly inside the unit circle.
fn roots_inside_unit_circle(poly: &[f64]) -> bool {
    let mut c: Vec<f64> = poly.to_vec();
    while c.last().map_or(false, |x| *x == 0.0) {
        c.pop();
    }
    while c.len() > 1 {
        let d = c.len() - 1;
        let a0 = c[0];
        let ad = c[d];
        if a0.abs() >= ad.abs() {
            return false;
        }
        let next: Vec<f64> = (0..d).map(|i| ad * c[i + 1] - a0 * c[d - 1 - i]).collect();
        c = next;
    }
    true
}

/// Convolution weights ω_k^{(α,σ)} for k = 0..n_max plus the cumulative sums
/// b_n = τ^{-α} Σ_{j<=n} ω_j.
#[derive(Debug, Clone)]
pub struct WeightTable {
    pub alpha: f64,
    pub sigma: f64,
    pub tau: f64,
    pub weights: Vec<f64>,
    pub cumsum: Vec<f64>,
    /// Untempered cumulative sums τ^{-α} Σ_{j<=n} ω_j^{(α,0)}; the constant
    /// anchor of the tempered-Caputo operator is `e^{-n σ τ} * cumsum0[n]`.
    pub cumsum0: Vec<f64>,
}

impl WeightTable {
    /// Build the table: untempered series coefficients scaled by e^{-kτσ},
    /// cumulative sums accumulated with compensated summation.
    pub fn build(
        gf: &GeneratingFunction,
        alpha: f64,
        sigma: f64,
        tau: f64,
        n_max: usize,
    ) -> Result<Self> {
        if tau <= 0.0 {
            return Err(Error::InvalidParameter(format!("tau must be positive, got {tau}")));
        }
        if sigma < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "sigma must be non-negative, got {sigma}"
            )));
        }
        let mut weights = gf.untempered_weights(alpha, n_max)?;
        let scale = tau.powf(-alpha);
        let mut acc0 = Compensated::default();
        let cumsum0: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc0.add(*w);
                scale * acc0.value()
            })
            .collect();
        if sigma != 0.0 {
            for (k, w) in weights.iter_mut().enumerate() {
                *w *= (-(k as f64) * tau * sigma).exp();
            }
        }
        let cumsum = if sigma == 0.0 {
            cumsum0.clone()
        } else {
            let mut acc = Compensated::default();
            weights
                .iter()
                .map(|w| {
                    acc.add(*w);
                    scale * acc.value()
                })
                .collect()
        };
        Ok(WeightTable { alpha, sigma, tau, weights, cumsum, cumsum0 })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// b_n = τ^{-α} Σ_{j=0}^{n} ω_j^{(α,σ)}.
    pub fn b(&self, n: usize) -> f64 {
        self.cumsum[n]
    }

    /// CSV serialization: header `k,omega,cumsum`, shortest round-trip floats.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,omega,cumsum\n");
        for (k, (w, b)) in self.weights.iter().zip(self.cumsum.iter()).enumerate() {
            out.push_str(&format!("{k},{w},{b}\n"));
        }
        out
    }
}

/// Tempered fractional derivative of a power function,
/// D^{σ,α} t^γ = e^{-σt} Σ_{i≥0} (σ^i/i!) Γ(γ+i+1)/Γ(γ+i+1−α) t^{γ+i−α},
/// truncated when a term's relative contribution drops below 1e-16.
pub fn tempered_power_derivative(alpha: f64, sigma: f64, gamma_exp: f64, t: f64) -> Result<f64> {
    if t <= 0.0 || gamma_exp <= 0.0 || sigma < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "need t > 0, gamma > 0, sigma >= 0 (got t={t}, gamma={gamma_exp}, sigma={sigma})"
        )));
    }
    let st = sigma * t;
    let t_pow0 = t.powf(gamma_exp - alpha);
    if st == 0.0 {
        return Ok(gamma(gamma_exp + 1.0) / gamma(gamma_exp + 1.0 - alpha) * t_pow0);
    }
    // term_i = (σ^i/i!) · Γ(γ+i+1)/Γ(γ+i+1−α) · t^{γ+i−α}, with the gamma
    // ratio advanced by R_{i+1} = R_i (γ+i+1)/(γ+i+1−α).
    let mut ratio = gamma(gamma_exp + 1.0) / gamma(gamma_exp + 1.0 - alpha);
    let mut prefactor = t_pow0; // (σt)^i/i! · t^{γ−α}
    let mut acc = Compensated::default();
    for i in 0..200 {
        acc.add(prefactor * ratio);
        if i > 0 && (prefactor * ratio).abs() < 1e-16 * acc.value().abs().max(f64::MIN_POSITIVE) {
            return Ok((-st).exp() * acc.value());
        }
        prefactor *= st / (i as f64 + 1.0);
        let den = gamma_exp + i as f64 + 1.0 - alpha;
        if den == 0.0 {
            return Err(Error::InvalidParameter(format!(
                "gamma - alpha = {} hits a negative integer",
                gamma_exp - alpha
            )));
        }
        ratio *= (gamma_exp + i as f64 + 1.0) / den;
    }
    Err(Error::SeriesDivergence { sigma_t: st })
}

/// Starting weights w_{n,1..m}: the row making the corrected operator exact
/// on u(t) = t^{γ_j} at t_n, from the generalized Vandermonde system
/// Σ_k w_{n,k} (kτ)^{γ_j} = τ^α D^{σ,α} t^{γ_j}|_{t_n} − Σ_k ω_{n−k} (kτ)^{γ_j}.
pub fn starting_weights(
    gf: &GeneratingFunction,
    alpha: f64,
    sigma: f64,
    tau: f64,
    gammas: &[f64],
    n: usize,
) -> Result<Vec<f64>> {
    if gammas.is_empty() {
        return Ok(Vec::new());
    }
    if n == 0 {
        return Err(Error::InvalidParameter(
            "starting weights are defined for n >= 1".into(),
        ));
    }
    let table = WeightTable::build(gf, alpha, sigma, tau, n)?;
    let solver = StartingWeightSolver::new(tau, gammas)?;
    let t_n = n as f64 * tau;
    let ta = tau.powf(alpha);
    let mut rhs = Vec::with_capacity(gammas.len());
    for &g in gammas {
        let exact = ta * tempered_power_derivative(alpha, sigma, g, t_n)?;
        let mut conv = Compensated::default();
        for k in 1..=n {
            conv.add(table.weights[n - k] * (k as f64 * tau).powf(g));
        }
        rhs.push(exact - conv.value());
    }
    solver.solve(&rhs)
}

/// LU-factored, column-equilibrated generalized Vandermonde system
/// `A[j][k] = ((k+1)τ)^{γ_j}`; the matrix is n-independent, so one factorization
/// serves every step's right-hand side.
#[derive(Debug, Clone)]
pub struct StartingWeightSolver {
    m: usize,
    lu: Vec<f64>,
    piv: Vec<usize>,
    col_scale: Vec<f64>,
}

impl StartingWeightSolver {
    pub fn new(tau: f64, gammas: &[f64]) -> Result<Self> {
        let m = gammas.len();
        for (i, g) in gammas.iter().enumerate() {
            if *g <= 0.0 {
                return Err(Error::InvalidParameter(format!("gamma[{i}] = {g} <= 0")));
            }
            for other in &gammas[i + 1..] {
                if other == g {
                    return Err(Error::InvalidParameter(format!("duplicate gamma {g}")));
                }
            }
        }
        let mut a = vec![0.0; m * m];
        for (j, g) in gammas.iter().enumerate() {
            for k in 0..m {
                a[j * m + k] = ((k + 1) as f64 * tau).powf(*g);
            }
        }
        let mut col_scale = vec![0.0; m];
        for k in 0..m {
            let mx = (0..m).map(|j| a[j * m + k].abs()).fold(0.0f64, f64::max);
            col_scale[k] = if mx > 0.0 { mx } else { 1.0 };
            for j in 0..m {
                a[j * m + k] /= col_scale[k];
            }
        }
        let norm1 = matrix_norm1(&a, m);
        let (lu, piv) = lu_factor(a, m).ok_or(Error::IllConditionedStartingSystem {
            cond: f64::INFINITY,
        })?;
        // 1-norm condition estimate via the explicit inverse (m is tiny).
        let mut inv_norm: f64 = 0.0;
        for k in 0..m {
            let mut e = vec![0.0; m];
            e[k] = 1.0;
            let col = lu_solve(&lu, &piv, m, &e);
            let s: f64 = col.iter().map(|x| x.abs()).sum();
            inv_norm = inv_norm.max(s);
        }
        let cond = norm1 * inv_norm;
        if !cond.is_finite() || cond > 1e14 {
            return Err(Error::IllConditionedStartingSystem { cond });
        }
        Ok(StartingWeightSolver { m, lu, piv, col_scale })
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        assert_eq!(rhs.len(), self.m);
        let mut w = lu_solve(&self.lu, &self.piv, self.m, rhs);
        for (wk, s) in w.iter_mut().zip(self.col_scale.iter()) {
            *wk /= s;
        }
        Ok(w)
    }
}

fn matrix_norm1(a: &[f64], m: usize) -> f64 {
    (0..m)
        .map(|k| (0..m).map(|j| a[j * m + k].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn lu_factor(mut a: Vec<f64>, m: usize) -> Option<(Vec<f64>, Vec<usize>)> {
    let mut piv = vec![0usize; m];
    for col in 0..m {
        let mut p = col;
        let mut best = a[col * m + col].abs();
        for r in col + 1..m {
            let v = a[r * m + col].abs();
            if v > best {
                best = v;
                p = r;
            }
        }
        if best == 0.0 {
            return None;
        }
        piv[col] = p;
        if p != col {
            for k in 0..m {
                a.swap(col * m + k, p * m + k);
            }
        }
        let d = a[col * m + col];
        for r in col + 1..m {
            let f = a[r * m + col] / d;
            a[r * m + col] = f;
            for k in col + 1..m {
                a[r * m + k] -= f * a[col * m + k];
            }
        }
    }
    Some((a, piv))
}

fn lu_solve(lu: &[f64], piv: &[usize], m: usize, rhs: &[f64]) -> Vec<f64> {
    let mut x = rhs.to_vec();
    for col in 0..m {
        x.swap(col, piv[col]);
        for r in col + 1..m {
            let f = lu[r * m + col];
            x[r] -= f * x[col];
        }
    }
    for col in (0..m).rev() {
        x[col] /= lu[col * m + col];
        for r in 0..col {
            let f = lu[r * m + col];
            x[r] -= f * x[col];
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fbdf1_weights_are_binomial() {
        let gf = GeneratingFunction::fbdf(1).unwrap();
        let t = WeightTable::build(&gf, 0.5, 0.0, 0.01, 3).unwrap();
        let expect = [1.0, -0.5, -0.125, -0.0625];
        for (w, e) in t.weights.iter().zip(expect.iter()) {
            assert!((w - e).abs() < 1e-15);
        }
    }

    #[test]
    fn gngf2_leading_weight() {
        for &alpha in &[-0.7, 0.3, 0.5, 1.4] {
            let gf = GeneratingFunction::gngf(2).unwrap();
            let t = WeightTable::build(&gf, alpha, 0.0, 0.1, 1).unwrap();
            assert!((t.weights[0] - (1.0 + alpha / 2.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn tempering_scales_untempered_weights() {
        let gf = GeneratingFunction::fbdf(1).unwrap();
        let plain = WeightTable::build(&gf, 0.5, 0.0, 0.01, 64).unwrap();
        let tempered = WeightTable::build(&gf, 0.5, 2.0, 0.01, 64).unwrap();
        for k in 0..=64 {
            let expect = (-0.02 * k as f64).exp() * plain.weights[k];
            let rel = (tempered.weights[k] - expect).abs() / expect.abs();
            assert!(rel < 1e-15, "k={k}");
        }
    }

    #[test]
    fn tempering_commutes_across_families() {
        let cases = [
            GeneratingFunction::fbdf(3).unwrap(),
            GeneratingFunction::gngf(2).unwrap(),
            GeneratingFunction::ftrap(),
        ];
        for gf in &cases {
            for &alpha in &[-0.5, 0.3, 1.2] {
                for &sigma in &[0.25, 1.0] {
                    let tau = 0.05;
                    let plain = WeightTable::build(gf, alpha, 0.0, tau, 40).unwrap();
                    let temp = WeightTable::build(gf, alpha, sigma, tau, 40).unwrap();
                    for k in 0..=40 {
                        let expect = (-(k as f64) * tau * sigma).exp() * plain.weights[k];
                        let denom = expect.abs().max(1e-300);
                        assert!((temp.weights[k] - expect).abs() / denom < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn fbdf1_group_property() {
        // Convolving the α and −α weight sequences gives the delta sequence.
        let gf = GeneratingFunction::fbdf(1).unwrap();
        let a = gf.untempered_weights(0.6, 300).unwrap();
        let b = gf.untempered_weights(-0.6, 300).unwrap();
        for n in 0..=300 {
            let mut s = 0.0;
            for k in 0..=n {
                s += a[k] * b[n - k];
            }
            let expect = if n == 0 { 1.0 } else { 0.0 };
            assert!((s - expect).abs() < 1e-12, "n={n}: {s}");
        }
    }

    #[test]
    fn binomial_identity_exact() {
        // Σ_{k=j}^{m} C(m,k) C(k,j) (−1)^{k−j} = δ_{jm}, exact in integers.
        fn binom(n: u32, k: u32) -> i128 {
            if k > n {
                return 0;
            }
            let mut r: i128 = 1;
            for i in 0..k {
                r = r * (n - i) as i128 / (i + 1) as i128;
            }
            r
        }
        for m in 0..=12u32 {
            for j in 0..=m {
                let mut s: i128 = 0;
                for k in j..=m {
                    let sign = if (k - j) % 2 == 0 { 1 } else { -1 };
                    s += sign * binom(m, k) * binom(k, j);
                }
                assert_eq!(s, if j == m { 1 } else { 0 }, "m={m}, j={j}");
            }
        }
    }

    #[test]
    fn fbdf1_cumsum_matches_gamma_ratio() {
        // b_n τ^α = Γ(n+1−α)/(Γ(1−α)Γ(n+1)), via the exact recurrence.
        let alpha = 0.5;
        let tau = 0.02;
        let gf = GeneratingFunction::fbdf(1).unwrap();
        let t = WeightTable::build(&gf, alpha, 0.0, tau, 400).unwrap();
        let mut exact = 1.0; // n = 0
        let ta = tau.powf(alpha);
        for n in 0..=400usize {
            if n > 0 {
                exact *= (n as f64 - alpha) / n as f64;
            }
            let got = t.b(n) * ta;
            assert!((got - exact).abs() < 1e-13 * exact.abs().max(1.0), "n={n}");
        }
    }

    #[test]
    fn unsupported_orders_rejected() {
        assert!(matches!(GeneratingFunction::fbdf(0), Err(Error::UnsupportedOrder(_))));
        assert!(matches!(GeneratingFunction::fbdf(7), Err(Error::UnsupportedOrder(_))));
        assert!(matches!(GeneratingFunction::gngf(9), Err(Error::UnsupportedOrder(_))));
    }

    #[test]
    fn gngf_coefficients_match_series_route() {
        // g_k are the Taylor coefficients of ((−ln(1−w))/w)^α; the truncated
        // log series under the Miller recurrence is an independent route.
        let base: Vec<f64> = (0..8).map(|j| 1.0 / (j + 1) as f64).collect();
        for &alpha in &[-0.8, 0.2, 0.5, 1.0, 1.7] {
            let via_series = series_power_coeffs(&base, alpha, 5).unwrap();
            let closed = gngf_coeffs(alpha, 6);
            for (k, (s, c)) in via_series.iter().zip(closed.iter()).enumerate() {
                assert!(
                    (s - c).abs() < 1e-13 * s.abs().max(1.0),
                    "alpha={alpha}, g[{k}]: series {s} closed {c}"
                );
            }
        }
    }

    #[test]
    fn custom_backward_euler_equals_fbdf1() {
        // ρ̂(ζ) = ζ − 1, σ̂(ζ) = ζ.
        let gf = GeneratingFunction::custom(vec![-1.0, 1.0], vec![0.0, 1.0]).unwrap();
        let a = gf.untempered_weights(0.5, 40).unwrap();
        let b = GeneratingFunction::fbdf(1).unwrap().untempered_weights(0.5, 40).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn custom_validation_rejects_bad_pairs() {
        // ρ̂(1) != 0.
        assert!(matches!(
            GeneratingFunction::custom(vec![1.0, 1.0], vec![0.0, 1.0]),
            Err(Error::InvalidGeneratingFunction(_))
        ));
        // σ̂ root outside the unit circle: σ̂(ζ) = ζ − 2.
        assert!(matches!(
            GeneratingFunction::custom(vec![-1.0, 1.0], vec![-2.0, 1.0]),
            Err(Error::InvalidGeneratingFunction(_))
        ));
        // Consistency ρ̂'(1) = σ̂(1) violated: ρ̂ = ζ² − 1, σ̂ = ζ².
        assert!(matches!(
            GeneratingFunction::custom(vec![-1.0, 0.0, 1.0], vec![0.0, 0.0, 1.0]),
            Err(Error::InvalidGeneratingFunction(_))
        ));
    }

    #[test]
    fn power_derivative_classical_limit() {
        // σ = 0 collapses to the Riemann–Liouville power rule.
        let v = tempered_power_derivative(0.3, 0.0, 1.2, 2.5).unwrap();
        let exact = gamma(2.2) / gamma(2.2 - 0.3) * 2.5f64.powf(1.2 - 0.3);
        assert!((v - exact).abs() < 1e-14 * exact.abs());
        // α = γ, σ = 0 is constant Γ(γ+1).
        for &t in &[0.3, 1.0, 7.0] {
            let v = tempered_power_derivative(0.7, 0.0, 0.7, t).unwrap();
            assert!((v - gamma(1.7)).abs() < 1e-13);
        }
    }

    #[test]
    fn power_derivative_matches_quadrature_oracle() {
        // Independent oracle: D^{σ,α} t = e^{-σt}/Γ(1−α) ∫_0^t (t−s)^{-α} e^{σs}(1+σs) ds
        // (σ-shifted RL form for u = t, m = 1), with the endpoint singularity
        // removed by s = t(1−r²) and the smooth part under Gauss–Legendre.
        let (alpha, sigma, t): (f64, f64, f64) = (0.5, 0.5, 1.0);
        let gl_x = [
            -0.9894009349916499,
            -0.9445750230732326,
            -0.8656312023878318,
            -0.7554044083550030,
            -0.6178762444026438,
            -0.4580167776572274,
            -0.2816035507792589,
            -0.0950125098376374,
            0.0950125098376374,
            0.2816035507792589,
            0.4580167776572274,
            0.6178762444026438,
            0.7554044083550030,
            0.8656312023878318,
            0.9445750230732326,
            0.9894009349916499,
        ];
        let gl_w = [
            0.0271524594117541,
            0.0622535239386479,
            0.0951585116824928,
            0.1246289712555339,
            0.1495959888165767,
            0.1691565193950025,
            0.1826034150449236,
            0.1894506104550685,
            0.1894506104550685,
            0.1826034150449236,
            0.1691565193950025,
            0.1495959888165767,
            0.1246289712555339,
            0.0951585116824928,
            0.0622535239386479,
            0.0271524594117541,
        ];
        // ∫_0^t (t−s)^{-1/2} e^{σs}(1+σs) ds with s = t(1−r²), ds = −2tr dr:
        // = 2√t ∫_0^1 e^{σt(1−r²)} (1+σt(1−r²)) dr.
        let mut integral = 0.0;
        for (x, w) in gl_x.iter().zip(gl_w.iter()) {
            let r = 0.5 * (x + 1.0);
            let s = t * (1.0 - r * r);
            integral += 0.5 * w * (sigma * s).exp() * (1.0 + sigma * s);
        }
        integral *= 2.0 * t.sqrt();
        let oracle = (-sigma * t).exp() / gamma(0.5) * integral;
        let got = tempered_power_derivative(alpha, sigma, 1.0, t).unwrap();
        assert!(
            (got - oracle).abs() < 1e-10 * oracle.abs(),
            "series {got} vs quadrature {oracle}"
        );
    }

    #[test]
    fn power_derivative_diverges_for_large_sigma_t() {
        assert!(matches!(
            tempered_power_derivative(0.5, 40.0, 1.0, 10.0),
            Err(Error::SeriesDivergence { .. })
        ));
    }

    #[test]
    fn starting_weights_empty_for_m0() {
        let gf = GeneratingFunction::gngf(2).unwrap();
        let w = starting_weights(&gf, 0.5, 0.0, 0.1, &[], 10).unwrap();
        assert!(w.is_empty());
    }

    /// Corrected operator applied to t^γ at t_n, in τ^α-scaled form.
    fn corrected_apply(
        gf: &GeneratingFunction,
        alpha: f64,
        sigma: f64,
        tau: f64,
        gammas: &[f64],
        g: f64,
        n: usize,
    ) -> f64 {
        let table = WeightTable::build(gf, alpha, sigma, tau, n).unwrap();
        let w = starting_weights(gf, alpha, sigma, tau, gammas, n).unwrap();
        let mut s = 0.0;
        for k in 1..=n {
            s += table.weights[n - k] * (k as f64 * tau).powf(g);
        }
        for (k, wk) in w.iter().enumerate() {
            s += wk * ((k + 1) as f64 * tau).powf(g);
        }
        s * tau.powf(-alpha)
    }

    #[test]
    fn corrected_operator_exact_on_powers() {
        let gf = GeneratingFunction::gngf(2).unwrap();
        let alpha = 0.5;
        for &sigma in &[0.0, 0.3] {
            let tau = 1.0 / 32.0;
            let gammas = [alpha, 2.0 * alpha, 3.0 * alpha];
            for &n in &[gammas.len() + 1, 10, 100] {
                for &g in &gammas {
                    let got = corrected_apply(&gf, alpha, sigma, tau, &gammas, g, n);
                    let exact =
                        tempered_power_derivative(alpha, sigma, g, n as f64 * tau).unwrap();
                    let rel = (got - exact).abs() / exact.abs().max(1e-300);
                    assert!(rel <= 1e-8, "sigma={sigma} n={n} gamma={g}: rel={rel:e}");
                }
            }
        }
    }

    #[test]
    fn starting_system_rejects_near_duplicate_exponents() {
        let gf = GeneratingFunction::gngf(2).unwrap();
        let r = starting_weights(&gf, 0.5, 0.0, 0.01, &[1.0, 1.0 + 2e-15], 10);
        assert!(matches!(
            r,
            Err(Error::IllConditionedStartingSystem { .. }) | Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn weight_table_csv_round_trips() {
        let gf = GeneratingFunction::fbdf(1).unwrap();
        let t = WeightTable::build(&gf, 0.5, 0.0, 0.01, 3).unwrap();
        let csv = t.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("k,omega,cumsum"));
        for (k, line) in lines.enumerate() {
            let cols: Vec<&str> = line.split(',').collect();
            assert_eq!(cols[0].parse::<usize>().unwrap(), k);
            let w: f64 = cols[1].parse().unwrap();
            let b: f64 = cols[2].parse().unwrap();
            assert_eq!(w, t.weights[k], "shortest decimal must round-trip");
            assert_eq!(b, t.cumsum[k]);
        }
    }
}
