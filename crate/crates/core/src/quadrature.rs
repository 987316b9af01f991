//! Gauss-Legendre rules and adaptive composite integration.

use crate::error::{Error, Result};

/// Nodes and weights of the `m`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(m: usize) -> Self {
        assert!(m >= 1, "at least one node");
        let mut nodes = vec![0.0; m];
        let mut weights = vec![0.0; m];
        let mf = m as f64;
        for i in 0..m.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(m, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(m, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[m - 1 - i] = x;
            weights[i] = w;
            weights[m - 1 - i] = w;
        }
        if m % 2 == 1 {
            nodes[m / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Integral of `f` over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(c + h * x)).sum::<f64>() * h
    }
}

fn legendre(m: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Adaptive composite Gauss-Legendre integration of `f` over `[a, b]`.
///
/// The interval is first split at `breaks`, then each piece is bisected until a 10-point rule
/// and the sum over its halves agree to `rel_tol` relative to the running total.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let rule = GaussLegendre::new(10);
    let mut pts = vec![a];
    pts.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    pts.push(b);
    let mut stack: Vec<(f64, f64, f64, u32)> = pts
        .windows(2)
        .map(|w| (w[0], w[1], rule.integrate(w[0], w[1], &f), 0))
        .collect();
    let mut scale: f64 = stack.iter().map(|s| s.2.abs()).sum();
    let mut total = 0.0;
    let mut comp = 0.0;
    let mut evals = 0usize;
    while let Some((lo, hi, whole, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = rule.integrate(lo, mid, &f);
        let right = rule.integrate(mid, hi, &f);
        evals += 20;
        let refined = left + right;
        if !refined.is_finite() {
            return Err(Error::Quadrature(format!("non-finite integrand on [{lo}, {hi}]")));
        }
        scale = scale.max(refined.abs());
        let err = (refined - whole).abs();
        if err <= rel_tol * scale.max(f64::MIN_POSITIVE) || depth >= 60 {
            if depth >= 60 && err > 1e3 * rel_tol * scale {
                return Err(Error::Quadrature(format!("no convergence on [{lo}, {hi}]")));
            }
            let y = refined - comp;
            let t = total + y;
            comp = (t - total) - y;
            total = t;
        } else {
            if evals > 5_000_000 {
                return Err(Error::Quadrature("evaluation budget exhausted".into()));
            }
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }
    Ok(total)
}

/// Breakpoints `(1 + s)` doubling from `a` to `b`, so that power-type integrands change by a bounded
/// factor on each piece.
pub fn geometric_breaks(a: f64, b: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut x = (1.0 + a) * 2.0 - 1.0;
    while x < b {
        out.push(x);
        x = (1.0 + x) * 2.0 - 1.0;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rules_integrate_polynomials_exactly() {
        for m in 1..=20 {
            let g = GaussLegendre::new(m);
            let s: f64 = g.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "m={m}");
            let odd = 2 * m - 1;
            let got = g.integrate(-1.0, 1.0, |x| x.powi(odd as i32));
            assert!(got.abs() < 1e-13);
            let even = 2 * (m - 1);
            let got = g.integrate(-1.0, 1.0, |x| x.powi(even as i32));
            assert!((got - 2.0 / (even as f64 + 1.0)).abs() < 1e-13, "m={m}");
        }
    }

    #[test]
    fn adaptive_handles_scale_changes() {
        let v = integrate_adaptive(|s| 1.0 / (1.0 + s), 0.0, 1e6, &geometric_breaks(0.0, 1e6), 1e-12).unwrap();
        assert!((v - (1e6f64).ln_1p()).abs() < 1e-10 * v);
        let v = integrate_adaptive(|s| s.sqrt(), 0.0, 1.0, &[], 1e-12).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-11);
    }
}
