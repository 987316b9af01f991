//! Deterministic quasi-uniform points on the unit sphere and seeded sampling helpers.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `count` directions on `S^(n-1)`, followed by the coordinate axes and the main diagonal.
///
/// For `n = 2` these are equally spaced angles with a seeded offset; for `n > 2` a Kronecker
/// sequence with a seeded shift is pushed through the inverse normal CDF and normalized.
pub fn sphere_directions(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng(seed);
    let mut out = Vec::with_capacity(count + n + 1);
    if n == 2 {
        let u: f64 = r.random();
        for j in 0..count {
            let a = std::f64::consts::TAU * (j as f64 + u) / count as f64;
            out.push(vec![a.cos(), a.sin()]);
        }
    } else {
        let phi = generalized_golden(n);
        let alpha: Vec<f64> = (1..=n).map(|i| (1.0 / phi.powi(i as i32)).fract()).collect();
        let shift: Vec<f64> = (0..n).map(|_| r.random()).collect();
        let normal = Normal::standard();
        let mut j = 0u64;
        while out.len() < count {
            j += 1;
            let v: Vec<f64> = (0..n)
                .map(|i| {
                    let u = (shift[i] + j as f64 * alpha[i]).fract().clamp(1e-12, 1.0 - 1e-12);
                    normal.inverse_cdf(u)
                })
                .collect();
            let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if len > 1e-9 {
                out.push(v.into_iter().map(|x| x / len).collect());
            }
        }
    }
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        out.push(e);
    }
    out.push(vec![1.0 / (n as f64).sqrt(); n]);
    out
}

fn generalized_golden(n: usize) -> f64 {
    let mut x: f64 = 2.0;
    for _ in 0..100 {
        x = (1.0 + x).powf(1.0 / (n as f64 + 1.0));
    }
    x
}

/// A uniformly random unit vector.
pub fn random_unit(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
        let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len > 1e-3 && len <= 1.0 {
            return v.into_iter().map(|x| x / len).collect();
        }
    }
}

/// Log-spaced grid of `count` points on `[a, b]`.
pub fn log_grid(a: f64, b: f64, count: usize) -> Vec<f64> {
    assert!(a > 0.0 && b > a && count >= 2);
    let (la, lb) = (a.ln(), b.ln());
    (0..count)
        .map(|i| {
            if i == count - 1 {
                b
            } else {
                (la + (lb - la) * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn directions_are_unit_and_deterministic() {
        for n in [2, 3, 5] {
            let a = sphere_directions(n, 64, 7);
            let b = sphere_directions(n, 64, 7);
            assert_eq!(a, b);
            assert_eq!(a.len(), 64 + n + 1);
            for v in &a {
                let l: f64 = v.iter().map(|x| x * x).sum();
                assert!((l - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn directions_cover_the_sphere() {
        let d = sphere_directions(3, 512, 1);
        let mean: Vec<f64> = (0..3).map(|i| d[..512].iter().map(|v| v[i]).sum::<f64>() / 512.0).collect();
        assert!(mean.iter().all(|m| m.abs() < 0.05), "{mean:?}");
    }
}
