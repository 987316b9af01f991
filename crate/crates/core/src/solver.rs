//! Minimization of the discrete energy over the interior nodes (L-BFGS with Armijo backtracking).

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{energy_and_gradient, interior_sup_gradient, local_energy_mean, GridFunction};
use crate::integrand::EnergyDensity;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub memory: usize,
    /// Radii `rho` at which `sup |Du|` is reported.
    pub sup_radii: Vec<f64>,
    /// Pairs `(rho, R)` at which the local energy mean is reported.
    pub mean_pairs: Vec<(f64, f64)>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 100_000, memory: 10, sup_radii: vec![0.15], mean_pairs: vec![(0.15, 0.35)] }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveResult {
    #[serde(skip)]
    pub u: GridFunction,
    pub energy: f64,
    pub initial_energy: f64,
    pub iterations: usize,
    /// Sup-norm of the energy gradient over interior nodes.
    pub residual: f64,
    pub converged: bool,
    pub sup_grad: Vec<(f64, f64)>,
    pub local_mean: Vec<(f64, f64, f64)>,
}

fn sup_interior(g: &[f64], idx: &[usize]) -> f64 {
    idx.iter().fold(0.0, |m, &k| m.max(g[k].abs()))
}

fn dot_on(a: &[f64], b: &[f64], idx: &[usize]) -> f64 {
    idx.iter().map(|&k| a[k] * b[k]).sum()
}

/// Minimizes the discrete energy with the boundary ring of `init` held fixed.
///
/// Stops when `sup |grad| <= tol (1 + |E|)` on the interior nodes; otherwise returns the last iterate
/// with `converged = false` after `max_iter` iterations.
pub fn minimize(f: &dyn EnergyDensity, init: &GridFunction, opts: &SolverOptions) -> Result<SolveResult> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidInput(format!("tol must be positive, got {}", opts.tol)));
    }
    let idx = init.interior_indices();
    let mut u = init.clone();
    let (mut e, mut g) = energy_and_gradient(f, &u)?;
    let initial_energy = e;
    let mut hist: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(opts.memory);
    let mut iterations = 0;
    let mut residual = sup_interior(&g, &idx);
    let len = g.len();

    while residual > opts.tol * (1.0 + e.abs()) && iterations < opts.max_iter {
        let mut d = two_loop(&g, &hist, &idx, len);
        let mut slope = dot_on(&g, &d, &idx);
        if !(slope < 0.0) {
            hist.clear();
            d = steepest(&g, &idx, len);
            slope = dot_on(&g, &d, &idx);
        }
        let step0 = if hist.is_empty() { 1.0 / sup_interior(&d, &idx).max(1e-300) * u.spacing() } else { 1.0 };
        let accepted = line_search(f, &u, &idx, &d, e, &g, slope, step0)?;
        let (step, trial, e_new, g_new) = match accepted {
            Some(v) => v,
            None if !hist.is_empty() => {
                hist.clear();
                continue;
            }
            None => {
                if (slope.abs() * step0) < ENERGY_NOISE * (1.0 + e.abs()) {
                    break;
                }
                return Err(Error::Solver(format!(
                    "energy does not decrease along the steepest-descent direction (E = {e}, residual = {residual:e}); f may be non-convex on the sampled range"
                )));
            }
        };
        let s: Vec<f64> = d.iter().map(|x| x * step).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot_on(&s, &y, &idx);
        if sy > 1e-300 {
            if hist.len() == opts.memory {
                hist.pop_front();
            }
            hist.push_back((s, y, 1.0 / sy));
        }
        u = trial;
        e = e_new;
        g = g_new;
        residual = sup_interior(&g, &idx);
        iterations += 1;
    }

    let converged = residual <= opts.tol * (1.0 + e.abs());
    let mut sup_grad = Vec::new();
    for &rho in &opts.sup_radii {
        sup_grad.push((rho, interior_sup_gradient(&u, rho)?));
    }
    let mut local_mean = Vec::new();
    for &(rho, r) in &opts.mean_pairs {
        local_mean.push((rho, r, local_energy_mean(&u, f, rho, r)?));
    }
    Ok(SolveResult { u, energy: e, initial_energy, iterations, residual, converged, sup_grad, local_mean })
}

fn steepest(g: &[f64], idx: &[usize], len: usize) -> Vec<f64> {
    let mut d = vec![0.0; len];
    for &k in idx {
        d[k] = -g[k];
    }
    d
}

fn two_loop(g: &[f64], hist: &VecDeque<(Vec<f64>, Vec<f64>, f64)>, idx: &[usize], len: usize) -> Vec<f64> {
    let mut q = vec![0.0; len];
    for &k in idx {
        q[k] = g[k];
    }
    let mut alphas = Vec::with_capacity(hist.len());
    for (s, y, r) in hist.iter().rev() {
        let a = r * dot_on(s, &q, idx);
        for &k in idx {
            q[k] -= a * y[k];
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = hist.back() {
        let gamma = dot_on(s, y, idx) / dot_on(y, y, idx);
        for &k in idx {
            q[k] *= gamma;
        }
    }
    for ((s, y, r), a) in hist.iter().zip(alphas.into_iter().rev()) {
        let b = r * dot_on(y, &q, idx);
        for &k in idx {
            q[k] += s[k] * (a - b);
        }
    }
    for &k in idx {
        q[k] = -q[k];
    }
    q
}

type Trial = (f64, GridFunction, f64, Vec<f64>);

/// Relative size of energy changes treated as round-off.
pub const ENERGY_NOISE: f64 = 1e-13;

/// Backtracking until the Armijo condition holds. Once the predicted decrease is below round-off in
/// `E`, a step is accepted when it reduces `|grad|` and raises `E` by at most `ENERGY_NOISE (1 + |E|)`.
fn line_search(f: &dyn EnergyDensity, u: &GridFunction, idx: &[usize], d: &[f64], e: f64, g: &[f64], slope: f64, step0: f64) -> Result<Option<Trial>> {
    let noise_floor = ENERGY_NOISE * (1.0 + e.abs());
    let gnorm = dot_on(g, g, idx);
    let mut step = step0;
    for _ in 0..60 {
        let mut trial = u.clone();
        {
            let v = trial.values_mut();
            for &k in idx {
                v[k] += step * d[k];
            }
        }
        match energy_and_gradient(f, &trial) {
            Ok((e_new, g_new)) => {
                let decrease = 1e-4 * step * slope;
                let armijo = e_new <= e + decrease;
                let noisy = (step * slope).abs() < noise_floor && e_new <= e + noise_floor && dot_on(&g_new, &g_new, idx) < gnorm;
                if armijo || noisy {
                    return Ok(Some((step, trial, e_new, g_new)));
                }
            }
            Err(Error::NonFinite(_)) => {}
            Err(err) => return Err(err),
        }
        step *= 0.5;
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrand::from_spec;

    #[test]
    fn affine_data_reproduced() {
        let f = from_spec("power_regularized(p=2)").unwrap();
        let exact = GridFunction::from_fn(16, |x, y| 0.3 * x - 1.2 * y + 0.1).unwrap();
        let init = exact.clone().coons_fill();
        let mut start = init.clone();
        for k in start.interior_indices() {
            start.values_mut()[k] += 0.05 * ((k as f64) * 0.7).sin();
        }
        let opts = SolverOptions { tol: 1e-15, ..SolverOptions::default() };
        let r = minimize(f.as_ref(), &start, &opts).unwrap();
        assert!(r.converged, "{}", r.residual);
        let err = r.u.values().iter().zip(exact.values()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 1e-13, "{err}");
        assert!(r.energy <= r.initial_energy);
    }
}
