use proptest::prelude::*;
use rand::RngExt;
use slowgrowth::ellipticity::hessian_extremes;
use slowgrowth::integrand::{from_spec, Density, Profile, CATALOG};
use slowgrowth::sphere::{random_unit, rng};

const ENTRIES: &[&str] = &[
    "power_regularized(p=1.5)",
    "power_regularized(p=1.2,n=3)",
    "radial_power(p=1.7)",
    "log_power(a=0.5)",
    "log_power(a=1)",
    "log_power(a=3,n=3)",
    "iterated_log(k=1)",
    "iterated_log(k=2)",
    "iterated_log(k=3)",
    "aniso_power_sum(p=[1.3,1.8])",
    "aniso_power_sum(p=[1.1,1.5,2])",
    "sqrt_power_sum(p=[1.5,1.5])",
    "sqrt_power_sum(p=[1.3,1.7,2.2])",
    "degenerate_radicand(p=[1,1.5])",
    "p_plus_h(ps=[1.2,1.8])",
    "log_plus_h(a=1,q=1.5)",
    "iterlog_plus_h(k=2,q=1.5,n=3)",
    "separable_log_power(a=[1,2])",
    "separable_iterated_log(k=[1,2])",
];

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Points away from the origin, the coordinate hyperplanes and the radius (or component) `t0`,
/// where some entries are only `C^1`.
fn smooth_points(f: &Density, count: usize, seed: u64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let n = f.dim();
    let t0 = f.t0();
    let mut r = rng(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let d = random_unit(&mut r, n);
        let t = 0.3 * (200.0f64).powf(r.random::<f64>());
        let xi: Vec<f64> = d.iter().map(|x| x * t).collect();
        let near_kink = |s: f64| (s - t0).abs() < 0.05 * (1.0 + t0);
        if xi.iter().any(|x| x.abs() < 0.05 || near_kink(x.abs())) || near_kink(t) {
            continue;
        }
        out.push((xi, random_unit(&mut r, n)));
    }
    out
}

#[test]
fn catalog_lists_every_entry_used_here() {
    for spec in ENTRIES {
        let name = spec.split('(').next().unwrap();
        assert!(CATALOG.iter().any(|e| e.name == name), "{name}");
    }
}

#[test]
fn gradients_and_hessians_match_finite_differences() {
    for (idx, spec) in ENTRIES.iter().enumerate() {
        let f = from_spec(spec).unwrap();
        for (xi, lambda) in smooth_points(&f, 100, 1000 + idx as u64) {
            let t = norm(&xi);
            let g = f.grad(&xi);
            let h = 1e-6 * t.max(1.0);
            let mut fd = vec![0.0; xi.len()];
            for i in 0..xi.len() {
                let (mut a, mut b) = (xi.clone(), xi.clone());
                a[i] += h;
                b[i] -= h;
                fd[i] = (f.eval(&a) - f.eval(&b)) / (2.0 * h);
            }
            let err = norm(&fd.iter().zip(&g).map(|(a, b)| a - b).collect::<Vec<_>>());
            assert!(err <= 1e-6 * norm(&g) + 1e-9, "{spec} grad at {xi:?}: {err:e} vs |g| = {:e}", norm(&g));

            let q = f.hess_quadform(&xi, &lambda).unwrap();
            let h = 1e-4 * t.max(1.0);
            let plus: Vec<f64> = xi.iter().zip(&lambda).map(|(x, l)| x + h * l).collect();
            let minus: Vec<f64> = xi.iter().zip(&lambda).map(|(x, l)| x - h * l).collect();
            let gp = f.grad(&plus);
            let gm = f.grad(&minus);
            let fdq: f64 = lambda.iter().zip(gp.iter().zip(&gm)).map(|(l, (a, b))| l * (a - b)).sum::<f64>() / (2.0 * h);
            let scale = hessian_extremes(f.as_ref(), &xi).unwrap().1;
            assert!((fdq - q).abs() <= 1e-4 * q.abs() + 1e-9 * scale, "{spec} quadform at {xi:?}: {q:e} vs {fdq:e}");
        }
    }
}

#[test]
fn radial_eigenvalues_are_g2_and_slope() {
    for (spec, prof) in [
        ("power_regularized(p=1.5,n=3)", Profile::PowerRegularized { p: 1.5 }),
        ("log_power(a=2)", Profile::LogPower { a: 2.0 }),
        ("iterated_log(k=2)", Profile::IteratedLog { k: 2 }),
    ] {
        let f = from_spec(spec).unwrap();
        let n = f.dim();
        for t in [5.0, 40.0, 900.0] {
            let mut xi = vec![0.0; n];
            xi[0] = t * 0.6;
            xi[1] = t * 0.8;
            let along: Vec<f64> = xi.iter().map(|x| x / t).collect();
            let mut perp = vec![0.0; n];
            perp[0] = -0.8;
            perp[1] = 0.6;
            let a = f.hess_quadform(&xi, &along).unwrap();
            let b = f.hess_quadform(&xi, &perp).unwrap();
            // Second derivative and g'(t)/t from centred differences of the profile itself.
            let h = 1e-4 * t;
            let d2 = (prof.value(t + h) - 2.0 * prof.value(t) + prof.value(t - h)) / (h * h);
            let d1 = (prof.value(t + h) - prof.value(t - h)) / (2.0 * h);
            assert!((a - d2).abs() <= 1e-5 * a.abs(), "{spec} t = {t}: {a} vs {d2}");
            assert!((b - d1 / t).abs() <= 1e-8 * b.abs(), "{spec} t = {t}: {b} vs {}", d1 / t);
        }
    }
}

fn entry() -> impl Strategy<Value = usize> {
    0..ENTRIES.len()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn quadform_is_nonnegative(i in entry(), seed in 0u64..1_000_000, t in 0.0f64..50.0) {
        let f = from_spec(ENTRIES[i]).unwrap();
        let mut r = rng(seed);
        let d = random_unit(&mut r, f.dim());
        let xi: Vec<f64> = d.iter().map(|x| x * t + 0.01).collect();
        let lambda = random_unit(&mut r, f.dim());
        let q = f.hess_quadform(&xi, &lambda).unwrap();
        let scale = hessian_extremes(f.as_ref(), &xi).unwrap().1.abs();
        prop_assert!(q >= -1e-12 * (1.0 + scale), "{} at {:?}: {}", ENTRIES[i], xi, q);
    }

    #[test]
    fn quadform_is_quadratic_in_lambda(i in entry(), seed in 0u64..1_000_000, s in -3.0f64..3.0, t in 0.5f64..30.0) {
        let f = from_spec(ENTRIES[i]).unwrap();
        let mut r = rng(seed);
        let n = f.dim();
        let xi: Vec<f64> = random_unit(&mut r, n).iter().map(|x| x * t + 0.02).collect();
        let a = random_unit(&mut r, n);
        let b = random_unit(&mut r, n);
        let q = |l: &[f64]| f.hess_quadform(&xi, l).unwrap();
        let scaled: Vec<f64> = a.iter().map(|x| s * x).collect();
        let qa = q(&a);
        let tol = 1e-10 * (1.0 + hessian_extremes(f.as_ref(), &xi).unwrap().1.abs());
        prop_assert!((q(&scaled) - s * s * qa).abs() <= tol * (1.0 + s * s));
        // Parallelogram law.
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        prop_assert!((q(&sum) + q(&diff) - 2.0 * (qa + q(&b))).abs() <= 8.0 * tol);
    }

    #[test]
    fn densities_are_even(i in entry(), seed in 0u64..1_000_000, t in 0.0f64..100.0) {
        let f = from_spec(ENTRIES[i]).unwrap();
        let mut r = rng(seed);
        let xi: Vec<f64> = random_unit(&mut r, f.dim()).iter().map(|x| x * t).collect();
        let neg: Vec<f64> = xi.iter().map(|x| -x).collect();
        prop_assert_eq!(f.eval(&xi), f.eval(&neg));
    }
}
