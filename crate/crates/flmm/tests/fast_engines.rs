//! Cross-engine comparisons: the global trapezoidal rule beats the
//! per-block contour quadrature at equal node counts, both for raw weights
//! and for full convolutions.

use flmm::operator::DirectConvolver;
use flmm::realline::{build_rule, PhiIntegrand, RealLineConvolver, RealLineParams};
use flmm::talbot::{
    fast_weight_talbot, level_for_weight, level_time_scale, talbot_nodes, TalbotConvolver,
    TalbotParams,
};
use flmm::weights::{GeneratingFunction, WeightTable};

/// Max relative weight error of each engine over a geometric sample of
/// indices in [n0, nT], at matched node counts Q = N × 7.
fn weight_error_pair(alpha: f64, sigma: f64) -> (f64, f64) {
    let gf = GeneratingFunction::gngf(2).unwrap();
    let tau = 0.01;
    let (n0, n_t, base) = (50usize, 100_000usize, 5usize);
    let (n_nodes, q) = (64usize, 448usize);
    let table = WeightTable::build(&gf, alpha, sigma, tau, n_t).unwrap();
    let phi = PhiIntegrand::new(gf.clone(), alpha, tau).unwrap();
    let rule = build_rule(&phi, n0, n_t, q, 1e-20).unwrap();
    let mut contours: Vec<(usize, _)> = Vec::new();
    let mut n = n0;
    let (mut worst_rule, mut worst_contour) = (0.0f64, 0.0f64);
    while n <= n_t {
        let exact = table.weights[n];
        let denom = exact.abs().max(f64::MIN_POSITIVE);
        let rel2 = (rule.weight_approx(sigma, n) - exact).abs() / denom;
        let level = level_for_weight(n, base, n0);
        if !contours.iter().any(|(l, _)| *l == level) {
            contours.push((level, talbot_nodes(n_nodes, level_time_scale(level, base, n0, tau))));
        }
        let contour = &contours.iter().find(|(l, _)| *l == level).unwrap().1;
        let rel1 = (fast_weight_talbot(&gf, alpha, sigma, tau, contour, n) - exact).abs() / denom;
        worst_rule = worst_rule.max(rel2);
        worst_contour = worst_contour.max(rel1);
        n += 1 + n / 60;
    }
    (worst_rule, worst_contour)
}

#[test]
fn trapezoidal_rule_beats_contour_quadrature_on_weights() {
    for &(alpha, sigma) in &[(0.5, 0.0), (1.5, 0.5)] {
        let (rule_err, contour_err) = weight_error_pair(alpha, sigma);
        assert!(
            rule_err < contour_err,
            "alpha={alpha} sigma={sigma}: rule {rule_err:.3e} vs contour {contour_err:.3e}"
        );
        assert!(rule_err < 1e-10, "rule error {rule_err:.3e}");
    }
}

#[test]
fn real_line_convolution_beats_contour_at_equal_node_count() {
    // Q = 140 trapezoidal nodes against N = 20 contour nodes (7 block
    // levels), on the smooth ramp u(t) = t + t².
    let gf = GeneratingFunction::gngf(2).unwrap();
    let (alpha, tau) = (0.5, 0.01);
    let n_t = 20_000usize;
    let mut direct = DirectConvolver::new(&gf, alpha, 0.0, tau, n_t).unwrap();
    let mut fast2 =
        RealLineConvolver::new(&gf, alpha, 0.0, tau, RealLineParams::with_q(140), n_t).unwrap();
    let mut fast1 = TalbotConvolver::new(
        &gf,
        alpha,
        0.0,
        tau,
        TalbotParams { n_nodes: 20, base: 5, n0: 50 },
    )
    .unwrap();
    let (mut worst2, mut worst1) = (0.0f64, 0.0f64);
    for k in 0..=n_t {
        let t = k as f64 * tau;
        let u = t + t * t;
        let exact = direct.feed(u);
        let a = fast2.feed(u);
        let b = fast1.feed(u);
        if k > 0 {
            worst2 = worst2.max((a - exact).abs() / exact.abs());
            worst1 = worst1.max((b - exact).abs() / exact.abs());
        }
    }
    assert!(
        worst2 < worst1,
        "real-line {worst2:.3e} should beat contour {worst1:.3e}"
    );
    assert!(worst2 <= 1e-8, "real-line deviation {worst2:.3e}");
    assert!(worst1 <= 1e-4, "contour deviation {worst1:.3e}");
}
