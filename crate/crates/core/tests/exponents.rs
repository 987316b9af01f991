use proptest::prelude::*;
use slowgrowth::ellipticity::{analyze, beta_bar, check_ab, corollary_conditions, gradient_exponent, remark_comparison, AnalysisConfig};
use slowgrowth::integrand::from_spec;
use slowgrowth::sphere::rng;

use rand::RngExt;

/// Draws `(n, p, q)` with `1 < p <= q <= 2` and `q/p < 1 + 2/n`.
fn draw(r: &mut impl RngExt) -> (usize, f64, f64) {
    loop {
        let n = r.random_range(2..=8usize);
        let p = 1.0 + 1e-3 + r.random::<f64>() * (1.0 - 1e-3);
        let q = p + r.random::<f64>() * (2.0 - p);
        if q / p < 1.0 + 2.0 / n as f64 - 1e-9 {
            return (n, p, q);
        }
    }
}

#[test]
fn corollary_exponent_identity_over_a_thousand_points() {
    let mut r = rng(77);
    for _ in 0..1000 {
        let (n, p, q) = draw(&mut r);
        let nf = n as f64;
        let ab = check_ab(n, 2.0 - q, beta_bar(n, p, q), q / p);
        assert!(ab.pass, "n = {n}, p = {p}, q = {q}");
        // Direct substitution: q alpha / (q - alpha (n beta + q - 2)) with alpha = q/p.
        let beta = (nf - 2.0) * q / (2.0 * nf) - p / 2.0 + 2.0 / nf;
        let alpha = q / p;
        let by_hand = q * alpha / (q - alpha * (nf * beta + q - 2.0));
        let theta = ab.theta.unwrap();
        assert!((theta - by_hand).abs() <= 1e-12 * by_hand);
        let target = 2.0 / ((nf + 2.0) * p - nf * q);
        let g = gradient_exponent(theta, q);
        assert!((g - target).abs() <= 1e-12 * target, "n = {n}, p = {p}, q = {q}: {g} vs {target}");
        let x = corollary_conditions(n, p, q, 1.0, 1.0).unwrap();
        assert!(x.ordering_ok, "r <= p <= q <= s <= 2 fails at n = {n}, p = {p}, q = {q}");
        assert!((x.theta_pq.unwrap() - target).abs() <= 1e-12 * target);
        if p < q {
            let (lo, hi) = remark_comparison(n, p, q);
            assert!(lo < hi, "n = {n}, p = {p}, q = {q}");
        }
    }
}

#[test]
fn theta_is_one_over_p_for_balanced_growth() {
    for n in 2..6 {
        for p in [1.1, 1.5, 2.0] {
            let ab = check_ab(n, 2.0 - p, beta_bar(n, p, p), 1.0);
            assert!((gradient_exponent(ab.theta.unwrap(), p) - 1.0 / p).abs() < 1e-12);
        }
    }
}

#[test]
fn aniso_three_dimensional_threshold() {
    let x = corollary_conditions(3, 1.1, 2.0, 1.0, 1.0).unwrap();
    assert!(!x.aniso_ok);
    let x = corollary_conditions(3, 1.25, 2.0, 1.0, 1.0).unwrap();
    assert!(x.aniso_ok);
}

#[test]
fn ex2_is_trivial_when_p_reaches_n() {
    let x = corollary_conditions(2, 2.0, 2.0, 1.0, 1.0).unwrap();
    assert!(x.ex2_trivial && x.ex2_ok);
}

#[test]
fn log_power_report_passes() {
    let f = from_spec("log_power(a=1)").unwrap();
    let rep = analyze(f.as_ref(), &AnalysisConfig::default()).unwrap();
    assert!(rep.hypotheses_pass(), "{:#?}", rep.verdicts());
    assert!(rep.ab.theta.is_some());
}

#[test]
fn analysis_is_deterministic() {
    let f = from_spec("aniso_power_sum(p=[1.3,1.8])").unwrap();
    let a = analyze(f.as_ref(), &AnalysisConfig::default()).unwrap();
    let b = analyze(f.as_ref(), &AnalysisConfig::default()).unwrap();
    assert_eq!(format!("{a:?}"), format!("{b:?}"));
}

proptest! {
    #[test]
    fn ab_matches_interpolation_form(n in 2usize..7, mu in 0.0f64..1.0, b in 0.0f64..1.0, a in 1.0f64..6.0) {
        let nf = n as f64;
        let beta = (1.0 + b) / nf;
        prop_assume!(nf * beta > mu + 1e-6);
        let v = check_ab(n, mu, beta, a);
        let margin = v.denominator.abs();
        prop_assume!(margin > 1e-9);
        prop_assert_eq!(v.pass, v.interpolation_form);
    }

    #[test]
    fn theta_exceeds_alpha_when_ab_holds(n in 2usize..7, mu in 0.0f64..1.0, b in 0.0f64..1.0, a in 1.0f64..6.0) {
        let nf = n as f64;
        let beta = (1.0 + b) / nf;
        let v = check_ab(n, mu, beta, a);
        if let Some(theta) = v.theta {
            prop_assert!(theta > 0.0);
            if nf * beta >= mu {
                prop_assert!(theta >= a * (1.0 - 1e-12));
            }
        }
    }
}
