use std::sync::Arc;

use proptest::prelude::*;
use slowgrowth::approximation::{
    build_fk, build_ftilde_k, energy_convergence_check, k_sweep, mollify_grid, perturbation_h, perturbation_h_derivs, perturbed_bound_check, Cutoff, MollifierKernel,
};
use slowgrowth::ellipticity::{hessian_extremes, sample_growth_bounds, slope};
use slowgrowth::grid::GridFunction;
use slowgrowth::integrand::{from_spec, EnergyDensity};
use slowgrowth::sphere::{log_grid, random_unit, rng};

#[test]
fn fk_equals_f_beyond_t0_plus_two() {
    for spec in ["power_regularized(p=1.5)", "log_power(a=1)", "aniso_power_sum(p=[1.3,1.8])", "iterated_log(k=2)"] {
        let f = from_spec(spec).unwrap();
        let t0 = f.t0();
        let mut r = rng(5);
        for k in [4usize, 9, 64] {
            let fk = build_fk(f.clone(), k, t0).unwrap();
            assert!(fk.exact_from() <= t0 + 2.0);
            for m in 0..200 {
                let t = (t0 + 2.0) * (1.0 + m as f64 / 20.0);
                let xi: Vec<f64> = random_unit(&mut r, 2).iter().map(|x| x * t).collect();
                assert_eq!(fk.eval(&xi).to_bits(), f.eval(&xi).to_bits(), "{spec} k = {k} at {xi:?}");
                assert_eq!(fk.grad(&xi), f.grad(&xi));
                let l = random_unit(&mut r, 2);
                assert_eq!(fk.hess_quadform(&xi, &l).unwrap(), f.hess_quadform(&xi, &l).unwrap());
            }
        }
    }
}

#[test]
fn uniform_gap_decays_like_k_squared() {
    let f = from_spec("power_regularized(p=1.5)").unwrap();
    let ks = [8usize, 16, 32, 64, 128];
    let sweep = k_sweep(&f, f.t0(), &ks, 40, 3).unwrap();
    let xs: Vec<f64> = ks.iter().map(|&k| (k as f64).ln()).collect();
    let ys: Vec<f64> = sweep.rows.iter().map(|r| r.sup_gap.ln()).collect();
    let s = slope(&xs, &ys);
    assert!((s + 2.0).abs() < 0.2, "fitted exponent {s}");
    assert!(sweep.rows.iter().all(|r| r.gap_ok));
}

#[test]
fn fk_becomes_convex_for_large_k() {
    let f = from_spec("log_power(a=1)").unwrap();
    let sweep = k_sweep(&f, f.t0(), &[4, 64, 256], 40, 11).unwrap();
    let k_star = sweep.k_star.expect("some k is convex");
    assert!(k_star <= 64, "{k_star}");
    let last = sweep.rows.last().unwrap();
    assert!(last.convex && last.sup_gap <= 1.0);
}

#[test]
fn h_glues_to_the_identity_at_one() {
    let (h, d1, d2) = perturbation_h_derivs(1.0).unwrap();
    assert!((h - 1.0).abs() < 1e-12 && (d1 - 1.0).abs() < 1e-12 && d2.abs() < 1e-12);
    let e = 1e-5;
    let fd = (perturbation_h(0.5 + e).unwrap() - perturbation_h(0.5 - e).unwrap()) / (2.0 * e);
    assert!((fd - perturbation_h_derivs(0.5).unwrap().1).abs() < 1e-8);
    assert_eq!(perturbation_h(3.0).unwrap(), 3.0);
}

#[test]
fn perturbed_upper_bound_holds_past_the_threshold() {
    let f = from_spec("power_regularized(p=1.5)").unwrap();
    let t0 = f.t0();
    let k = 16;
    let ft = build_ftilde_k(Arc::new(build_fk(f.clone(), k, t0).unwrap()), k, t0).unwrap();
    let t = log_grid(t0 + 2.0, 200.0, 30);
    let s = sample_growth_bounds(f.as_ref(), &t, 64, 1).unwrap();
    let v = perturbed_bound_check(&ft, &t, s.g2(), 64, 1).unwrap();
    assert!((k as f64) >= v.k_threshold);
    assert!(v.pass, "{v:?}");
}

#[test]
fn ftilde_is_strictly_convex_at_the_origin() {
    let f = from_spec("log_power(a=1)").unwrap();
    let t0 = f.t0();
    let k = 8;
    let ft = build_ftilde_k(Arc::new(build_fk(f.clone(), k, t0).unwrap()), k, t0).unwrap();
    let (lo, _, _) = hessian_extremes(&ft, &[0.0, 0.0]).unwrap();
    assert!(lo > 0.0);
}

#[test]
fn kernel_is_normalized_and_supported_in_the_ball() {
    let k = MollifierKernel::new(2, 0.25).unwrap();
    assert!((k.mass() - 1.0).abs() < 1e-10);
    assert_eq!(k.value(&[0.25, 0.0]), 0.0);
    assert_eq!(k.value(&[0.2, 0.2]), 0.0);
    assert!(k.value(&[0.1, 0.0]) > 0.0);
}

#[test]
fn mollification_keeps_affine_data_and_is_second_order() {
    let affine = GridFunction::from_fn(64, |x, y| 3.0 * x - y + 0.5).unwrap();
    let m = mollify_grid(&affine, 0.1).unwrap();
    let err = m.u.values().iter().zip(affine.values()).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
    assert!(err < 1e-13, "{err:e}");

    let quad = |n: usize, eps: f64| {
        let u = GridFunction::from_fn(n, |x, _| x * x).unwrap();
        let m = mollify_grid(&u, eps).unwrap();
        (m.u.get(n / 2, n / 2) - u.get(n / 2, n / 2)).abs()
    };
    let e1 = quad(512, 0.08);
    let e2 = quad(512, 0.04);
    let ratio = e1 / e2;
    assert!((ratio - 4.0).abs() < 0.4, "ratio {ratio}");
}

#[test]
fn mollified_energy_is_dominated_and_converges() {
    let f = from_spec("power_regularized(p=1.5)").unwrap();
    let u = GridFunction::from_fn(256, |x, y| 2.0 * (std::f64::consts::PI * x).sin() * (std::f64::consts::PI * y).sin() + x).unwrap();
    let c = energy_convergence_check(f.as_ref(), &u, 0.25, &[0.08, 0.04, 0.02, 0.01]).unwrap();
    assert!(c.dominance_ok, "{:?}", c.rows);
    assert!(c.gap_decreasing, "{:?}", c.rows);
    let last = c.rows.last().unwrap();
    assert!(last.gap < 1e-2 * last.base_energy);
}

#[test]
fn mollification_rejects_oversized_radius() {
    let u = GridFunction::from_fn(16, |x, _| x).unwrap();
    assert!(mollify_grid(&u, 0.6).is_err());
}

proptest! {
    #[test]
    fn cutoff_is_monotone_between_zero_and_one(t0 in 0.0f64..5.0, a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let c = Cutoff::for_t0(t0);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let r1 = t0 + 0.5 + 1.5 * lo;
        let r2 = t0 + 0.5 + 1.5 * hi;
        let (v1, v2) = (c.value(r1), c.value(r2));
        prop_assert!((0.0..=1.0).contains(&v1) && (0.0..=1.0).contains(&v2));
        prop_assert!(v2 <= v1);
    }

    #[test]
    fn fk_stays_close_to_f(seed in 0u64..10_000, t in 0.0f64..5.0) {
        let f = from_spec("power_regularized(p=1.5)").unwrap();
        let fk = build_fk(f.clone(), 32, f.t0()).unwrap();
        let mut r = rng(seed);
        let xi: Vec<f64> = random_unit(&mut r, 2).iter().map(|x| x * t).collect();
        prop_assert!((fk.eval(&xi) - f.eval(&xi)).abs() <= 1.0);
    }
}
