//! Power-series machinery: fractional powers of polynomials and rational
//! functions by the J.C.P. Miller recurrence.

use crate::error::{Error, Result};

/// Coefficients of g(z)^α up to z^{n_max} for a polynomial g with `g[0] != 0`.
///
/// Uses the Miller recurrence
/// c_n = (1/(n·g_0)) Σ_{k=1}^{min(n, deg g)} ((α+1)k/n − 1) g_k c_{n−k},
/// c_0 = g_0^α, which costs O(n_max · deg g).
pub fn series_power_coeffs(g: &[f64], alpha: f64, n_max: usize) -> Result<Vec<f64>> {
    if g.is_empty() || g[0] == 0.0 {
        return Err(Error::DegenerateSeries);
    }
    let g0 = g[0];
    let mut c = Vec::with_capacity(n_max + 1);
    c.push(g0.powf(alpha));
    for n in 1..=n_max {
        let nf = n as f64;
        let mut acc = 0.0;
        for k in 1..=n.min(g.len() - 1) {
            acc += ((alpha + 1.0) * k as f64 / nf - 1.0) * g[k] * c[n - k];
        }
        c.push(acc / g0);
    }
    Ok(c)
}

/// Coefficients of (a(z)/b(z))^α up to z^{n_max}, for polynomials with
/// `a[0] != 0` and `b[0] != 0`.
///
/// f = (a/b)^α satisfies a·b·f' = α(a'b − ab')f, which gives a short
/// recurrence with the polynomial coefficients of p = a·b and
/// q = α(a'b − ab'):
/// p_0 (n+1) c_{n+1} = Σ_i q_i c_{n−i} − Σ_{i≥1} p_i (n+1−i) c_{n+1−i}.
pub fn rational_power_series(a: &[f64], b: &[f64], alpha: f64, n_max: usize) -> Result<Vec<f64>> {
    if a.is_empty() || a[0] == 0.0 || b.is_empty() || b[0] == 0.0 {
        return Err(Error::DegenerateSeries);
    }
    let p = poly_mul(a, b);
    let q_poly = {
        let da = poly_derivative(a);
        let db = poly_derivative(b);
        let mut q = poly_mul(&da, b);
        let ab_db = poly_mul(a, &db);
        poly_sub_in_place(&mut q, &ab_db);
        for c in &mut q {
            *c *= alpha;
        }
        q
    };
    let mut c = Vec::with_capacity(n_max + 1);
    c.push((a[0] / b[0]).powf(alpha));
    for n in 0..n_max {
        let mut acc = 0.0;
        for (i, qi) in q_poly.iter().enumerate() {
            if *qi != 0.0 && i <= n {
                acc += qi * c[n - i];
            }
        }
        for (i, pi) in p.iter().enumerate().skip(1) {
            if *pi != 0.0 && i <= n + 1 {
                acc -= pi * (n + 1 - i) as f64 * c[n + 1 - i];
            }
        }
        c.push(acc / (p[0] * (n + 1) as f64));
    }
    Ok(c)
}

/// Coefficients of (1−z)^α up to z^{n_max} by the binomial recurrence
/// c_n = c_{n−1}(n−1−α)/n.
pub fn binomial_series(alpha: f64, n_max: usize) -> Vec<f64> {
    let mut c = Vec::with_capacity(n_max + 1);
    c.push(1.0);
    for n in 1..=n_max {
        let prev = c[n - 1];
        c.push(prev * (n as f64 - 1.0 - alpha) / n as f64);
    }
    c
}

pub(crate) fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        for (j, bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

fn poly_derivative(a: &[f64]) -> Vec<f64> {
    if a.len() <= 1 {
        return vec![0.0];
    }
    a.iter()
        .enumerate()
        .skip(1)
        .map(|(i, ai)| i as f64 * ai)
        .collect()
}

fn poly_sub_in_place(a: &mut Vec<f64>, b: &[f64]) {
    if a.len() < b.len() {
        a.resize(b.len(), 0.0);
    }
    for (ai, bi) in a.iter_mut().zip(b.iter()) {
        *ai -= bi;
    }
}

/// Evaluate Σ a_i x^i by Horner.
pub(crate) fn poly_eval(a: &[f64], x: f64) -> f64 {
    a.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Expansion of (1−z)^k in powers of z (exact integer binomials).
pub(crate) fn one_minus_z_pow(k: usize) -> Vec<f64> {
    let mut c = vec![0.0; k + 1];
    let mut binom = 1.0;
    for (j, cj) in c.iter_mut().enumerate() {
        *cj = if j % 2 == 0 { binom } else { -binom };
        binom = binom * (k - j) as f64 / (j + 1) as f64;
    }
    c
}
