//! Smooth approximants of an integrand (cut, mollify, perturb) and mollification of grid data.

use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::ellipticity::{hessian_extremes, SLACK};
use crate::error::{Error, Result};
use crate::grid::{ball_integral, GridFunction};
use crate::integrand::{Density, EnergyDensity, ParamValue, Params};
use crate::quadrature::{integrate_adaptive, GaussLegendre};
use crate::sphere::{random_unit, rng, sphere_directions};

/// `h(t) = (6t^2 - t^4 + 3)/8` on `[0, 1)`, `t` beyond; returns `(h, h', h'')`.
pub fn perturbation_h_derivs(t: f64) -> Result<(f64, f64, f64)> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("h is defined for t >= 0, got {t}")));
    }
    if t < 1.0 {
        let t2 = t * t;
        Ok(((6.0 * t2 - t2 * t2 + 3.0) / 8.0, (3.0 * t - t2 * t) / 2.0, (3.0 - 3.0 * t2) / 2.0))
    } else {
        Ok((t, 1.0, 0.0))
    }
}

pub fn perturbation_h(t: f64) -> Result<f64> {
    perturbation_h_derivs(t).map(|d| d.0)
}

fn psi(x: f64) -> (f64, f64, f64) {
    if x <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let e = (-1.0 / x).exp();
    let x2 = x * x;
    (e, e / x2, e * (1.0 / (x2 * x2) - 2.0 / (x2 * x)))
}

/// Radial `C^inf` cutoff: 1 on `[0, inner]`, 0 on `[outer, inf)`, an `exp(-1/x)` ramp between.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Cutoff {
    pub inner: f64,
    pub outer: f64,
}

impl Cutoff {
    /// Plateau up to `t0 + 1`, support inside `t0 + 7/4`.
    pub fn for_t0(t0: f64) -> Self {
        Self { inner: t0 + 1.0, outer: t0 + 1.75 }
    }

    /// `(phi, phi', phi'')` at radius `r`.
    pub fn derivs(&self, r: f64) -> (f64, f64, f64) {
        if r <= self.inner {
            return (1.0, 0.0, 0.0);
        }
        if r >= self.outer {
            return (0.0, 0.0, 0.0);
        }
        let (a, da, d2a) = psi(self.outer - r);
        let (b, db, d2b) = psi(r - self.inner);
        let (da, d2a) = (-da, d2a);
        let s = a + b;
        let ds = da + db;
        let num = da * b - a * db;
        let dnum = d2a * b - a * d2b;
        (a / s, num / (s * s), dnum / (s * s) - 2.0 * num * ds / (s * s * s))
    }

    pub fn value(&self, r: f64) -> f64 {
        self.derivs(r).0
    }
}

/// Normalized bump `exp(-1/(1 - |y/eps|^2)) / (Z eps^n)` supported in `B_eps`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MollifierKernel {
    pub epsilon: f64,
    pub n: usize,
    norm: f64,
}

impl MollifierKernel {
    pub fn new(n: usize, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) || n == 0 {
            return Err(Error::InvalidInput(format!("mollifier needs epsilon > 0 and n >= 1, got {epsilon}, {n}")));
        }
        let nf = n as f64;
        let sphere = 2.0 * std::f64::consts::PI.powf(nf / 2.0) / gamma(nf / 2.0);
        let radial = integrate_adaptive(|r| r.powi(n as i32 - 1) * bump(r * r), 0.0, 1.0, &[0.5, 0.9, 0.99], 1e-14)?;
        Ok(Self { epsilon, n, norm: 1.0 / (sphere * radial * epsilon.powi(n as i32)) })
    }

    pub fn value(&self, y: &[f64]) -> f64 {
        let r2 = y.iter().map(|v| v * v).sum::<f64>() / (self.epsilon * self.epsilon);
        self.norm * bump(r2)
    }

    /// `(eta, grad eta . lambda, lambda^T D^2 eta lambda)` at `y`.
    fn derivs(&self, y: &[f64], lambda: Option<&[f64]>) -> (f64, Vec<f64>, f64) {
        let e2 = self.epsilon * self.epsilon;
        let r2 = y.iter().map(|v| v * v).sum::<f64>() / e2;
        let eta = self.norm * bump(r2);
        if eta == 0.0 {
            return (0.0, vec![0.0; y.len()], 0.0);
        }
        let u = 1.0 - r2;
        let a = -2.0 / (e2 * u * u);
        let grad: Vec<f64> = y.iter().map(|v| eta * a * v).collect();
        let quad = lambda.map_or(0.0, |l| {
            let yl: f64 = y.iter().zip(l).map(|(p, q)| p * q).sum();
            let ll: f64 = l.iter().map(|q| q * q).sum();
            eta * (a * a * yl * yl + a * ll - 8.0 / (e2 * e2 * u * u * u) * yl * yl)
        });
        (eta, grad, quad)
    }

    /// `int phi(y) eta(y) dy` by tensor Gauss-Legendre on `[-eps, eps]^n`, `m` nodes per axis.
    fn integrate<const K: usize>(&self, m: usize, rule: &GaussLegendre, phi: &dyn Fn(&[f64], &(f64, Vec<f64>, f64)) -> [f64; K], lambda: Option<&[f64]>) -> [f64; K] {
        let n = self.n;
        let eps = self.epsilon;
        let mut idx = vec![0usize; n];
        let mut y = vec![0.0; n];
        let mut acc = [0.0; K];
        loop {
            let mut w = eps.powi(n as i32);
            for d in 0..n {
                y[d] = eps * rule.nodes[idx[d]];
                w *= rule.weights[idx[d]];
            }
            let k = self.derivs(&y, lambda);
            if k.0 > 0.0 {
                let v = phi(&y, &k);
                for (a, b) in acc.iter_mut().zip(v) {
                    *a += w * b;
                }
            }
            let mut d = 0;
            loop {
                idx[d] += 1;
                if idx[d] < m {
                    break;
                }
                idx[d] = 0;
                d += 1;
                if d == n {
                    return acc;
                }
            }
        }
    }

    /// Doubles the node count from 8 until every component changes by less than `1e-8` relative.
    fn converged<const K: usize>(&self, phi: &dyn Fn(&[f64], &(f64, Vec<f64>, f64)) -> [f64; K], lambda: Option<&[f64]>) -> [f64; K] {
        let cap = match self.n {
            1 | 2 => 256,
            3 => 64,
            _ => 16,
        };
        let mut m = 8;
        let mut prev = self.integrate(m, &GaussLegendre::new(m), phi, lambda);
        while m < cap {
            m *= 2;
            let next = self.integrate(m, &GaussLegendre::new(m), phi, lambda);
            let scale = next.iter().chain(prev.iter()).fold(0.0f64, |s, v| s.max(v.abs()));
            let done = next.iter().zip(&prev).all(|(a, b)| (a - b).abs() <= 1e-8 * scale.max(f64::MIN_POSITIVE));
            prev = next;
            if done {
                break;
            }
        }
        prev
    }

    /// `int eta` by the same tensor rule used for convolutions.
    pub fn mass(&self) -> f64 {
        self.converged::<1>(&|_, k| [k.0], None)[0]
    }
}

fn bump(r2: f64) -> f64 {
    if r2 >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - r2)).exp()
    }
}

/// `f_k = f (1 - phi) + (f phi) * eta_k` with `eta_k` supported in `B_{1/k}`.
#[derive(Debug)]
pub struct Fk {
    base: Density,
    k: usize,
    t0: f64,
    cutoff: Cutoff,
    kernel: MollifierKernel,
    params: Params,
    name: String,
}

impl Fk {
    /// Radius beyond which `f_k` returns the base values untouched.
    pub fn exact_from(&self) -> f64 {
        self.cutoff.outer + self.kernel.epsilon
    }

    pub fn k(&self) -> usize {
        self.k
    }

    fn cut_value(&self, z: &[f64]) -> f64 {
        let r = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        let phi = self.cutoff.value(r);
        if phi == 0.0 {
            0.0
        } else {
            phi * self.base.eval(z)
        }
    }

    fn shifted(&self, xi: &[f64], y: &[f64]) -> Vec<f64> {
        xi.iter().zip(y).map(|(a, b)| a - b).collect()
    }

    fn radial_cut(&self, xi: &[f64]) -> (f64, f64, f64, f64) {
        let r = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
        let (p, d1, d2) = self.cutoff.derivs(r);
        (r, p, d1, d2)
    }
}

impl EnergyDensity for Fk {
    fn name(&self) -> &str {
        &self.name
    }
    fn dim(&self) -> usize {
        self.base.dim()
    }
    fn params(&self) -> &Params {
        &self.params
    }
    fn t0(&self) -> f64 {
        self.t0 + 2.0
    }

    fn eval(&self, xi: &[f64]) -> f64 {
        let (r, phi, _, _) = self.radial_cut(xi);
        if r >= self.exact_from() {
            return self.base.eval(xi);
        }
        let outer = if phi < 1.0 { self.base.eval(xi) * (1.0 - phi) } else { 0.0 };
        let conv = self.kernel.converged::<1>(&|y, k| [self.cut_value(&self.shifted(xi, y)) * k.0], None);
        outer + conv[0]
    }

    fn grad_into(&self, xi: &[f64], out: &mut [f64]) {
        let (r, phi, dphi, _) = self.radial_cut(xi);
        if r >= self.exact_from() {
            self.base.grad_into(xi, out);
            return;
        }
        out.iter_mut().for_each(|o| *o = 0.0);
        if phi < 1.0 {
            let f = self.base.eval(xi);
            let g = self.base.grad(xi);
            for i in 0..out.len() {
                out[i] = g[i] * (1.0 - phi) - f * dphi * xi[i] / r;
            }
        }
        let n = xi.len();
        let parts: Vec<f64> = (0..n)
            .map(|i| self.kernel.converged::<1>(&|y, k| [self.cut_value(&self.shifted(xi, y)) * k.1[i]], None)[0])
            .collect();
        for (o, p) in out.iter_mut().zip(parts) {
            *o += p;
        }
    }

    fn hess_quadform(&self, xi: &[f64], lambda: &[f64]) -> Result<f64> {
        let (r, phi, dphi, d2phi) = self.radial_cut(xi);
        if r >= self.exact_from() {
            return self.base.hess_quadform(xi, lambda);
        }
        let mut outer = 0.0;
        if phi < 1.0 {
            let f = self.base.eval(xi);
            let g = self.base.grad(xi);
            let q = self.base.hess_quadform(xi, lambda)?;
            let along: f64 = xi.iter().zip(lambda).map(|(a, b)| a * b).sum::<f64>() / r;
            let ll: f64 = lambda.iter().map(|v| v * v).sum();
            let gl: f64 = g.iter().zip(lambda).map(|(a, b)| a * b).sum();
            let phi_q = d2phi * along * along + dphi / r * (ll - along * along);
            outer = q * (1.0 - phi) - 2.0 * gl * dphi * along - f * phi_q;
        }
        let conv = self.kernel.converged::<1>(&|y, k| [self.cut_value(&self.shifted(xi, y)) * k.2], Some(lambda));
        Ok(outer + conv[0])
    }

    fn growth_class(&self) -> crate::integrand::GrowthClass {
        self.base.growth_class()
    }
    fn pq(&self) -> Option<(f64, f64)> {
        self.base.pq()
    }
}

/// Builds `f_k`; the kernel radius is `1/k` and the cutoff ramp sits on `[t0 + 1, t0 + 7/4]`, so
/// `f_k = f` exactly for `|xi| >= t0 + 2` once `k >= 4`.
pub fn build_fk(base: Density, k: usize, t0: f64) -> Result<Fk> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be >= 1".into()));
    }
    if !(t0 >= 0.0) {
        return Err(Error::InvalidInput(format!("t0 must be >= 0, got {t0}")));
    }
    let mut params = base.params().clone();
    params.insert("k".into(), ParamValue::Scalar(k as f64));
    Ok(Fk {
        name: format!("{}_k", base.name()),
        kernel: MollifierKernel::new(base.dim(), 1.0 / k as f64)?,
        cutoff: Cutoff::for_t0(t0),
        base,
        k,
        t0,
        params,
    })
}

/// `f~_k = f_k + h(|xi| / (t0 + 2)) / k`.
#[derive(Debug)]
pub struct FTilde {
    fk: Density,
    k: usize,
    t0: f64,
    params: Params,
    name: String,
}

impl FTilde {
    fn scale(&self) -> f64 {
        self.t0 + 2.0
    }

    fn radial(&self, xi: &[f64]) -> (f64, f64, f64, f64) {
        let r = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
        let (h, d1, d2) = perturbation_h_derivs(r / self.scale()).unwrap_or((0.0, 0.0, 0.0));
        (r, h, d1, d2)
    }
}

impl EnergyDensity for FTilde {
    fn name(&self) -> &str {
        &self.name
    }
    fn dim(&self) -> usize {
        self.fk.dim()
    }
    fn params(&self) -> &Params {
        &self.params
    }
    fn t0(&self) -> f64 {
        self.t0 + 2.0
    }
    fn eval(&self, xi: &[f64]) -> f64 {
        let (_, h, _, _) = self.radial(xi);
        self.fk.eval(xi) + h / self.k as f64
    }
    fn grad_into(&self, xi: &[f64], out: &mut [f64]) {
        self.fk.grad_into(xi, out);
        let (r, _, d1, _) = self.radial(xi);
        if r > 0.0 {
            let s = d1 / (self.k as f64 * self.scale() * r);
            for (o, x) in out.iter_mut().zip(xi) {
                *o += s * x;
            }
        }
    }
    fn hess_quadform(&self, xi: &[f64], lambda: &[f64]) -> Result<f64> {
        let base = self.fk.hess_quadform(xi, lambda)?;
        let (r, _, d1, d2) = self.radial(xi);
        let c = self.scale();
        let kf = self.k as f64;
        let ll: f64 = lambda.iter().map(|v| v * v).sum();
        let extra = if r == 0.0 {
            d2 / (c * c) * ll
        } else {
            let along: f64 = xi.iter().zip(lambda).map(|(a, b)| a * b).sum::<f64>() / r;
            d2 / (c * c) * along * along + d1 / (c * r) * (ll - along * along)
        };
        Ok(base + extra / kf)
    }
    fn growth_class(&self) -> crate::integrand::GrowthClass {
        self.fk.growth_class()
    }
    fn pq(&self) -> Option<(f64, f64)> {
        self.fk.pq()
    }
}

pub fn build_ftilde_k(fk: Density, k: usize, t0: f64) -> Result<FTilde> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be >= 1".into()));
    }
    let params = fk.params().clone();
    Ok(FTilde { name: format!("{}~", fk.name()), fk, k, t0, params })
}

/// One row of the `k` sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KRow {
    pub k: usize,
    /// `sup |f - f_k|` over the sample points.
    pub sup_gap: f64,
    /// Smallest sampled `Q_k(xi, lambda)` with `|lambda| = 1`.
    pub min_quadform: f64,
    pub convex: bool,
    pub gap_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KSweep {
    pub rows: Vec<KRow>,
    /// Smallest swept `k` from which every larger swept `k` is convex with gap `<= 1`.
    pub k_star: Option<usize>,
    pub n_points: usize,
    pub seed: u64,
}

/// Seeded points in `B_{t0+2}` (uniform in radius), each with a random unit direction.
pub fn sample_points(n: usize, radius: f64, count: usize, seed: u64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut r = rng(seed);
    (0..count)
        .map(|i| {
            let d = random_unit(&mut r, n);
            let rad = radius * (i as f64 + 0.5) / count as f64;
            (d.iter().map(|x| x * rad).collect(), random_unit(&mut r, n))
        })
        .collect()
}

/// Sweeps `k`, recording the uniform gap to the base and sampled convexity of `f_k`.
pub fn k_sweep(base: &Density, t0: f64, ks: &[usize], n_points: usize, seed: u64) -> Result<KSweep> {
    use rayon::prelude::*;
    let pts = sample_points(base.dim(), t0 + 2.0, n_points, seed);
    let rows: Vec<Result<KRow>> = ks
        .par_iter()
        .map(|&k| {
            let fk = build_fk(base.clone(), k, t0)?;
            let mut sup_gap: f64 = 0.0;
            let mut min_q = f64::INFINITY;
            for (xi, lambda) in &pts {
                sup_gap = sup_gap.max((fk.eval(xi) - base.eval(xi)).abs());
                let q = if xi.iter().all(|&v| v == 0.0) { fk.hess_quadform(xi, lambda)? } else { hessian_extremes(&fk, xi)?.0 };
                min_q = min_q.min(q);
            }
            Ok(KRow { k, sup_gap, min_quadform: min_q, convex: min_q >= -1e-10, gap_ok: sup_gap <= 1.0 })
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let mut k_star = None;
    for row in rows.iter().rev() {
        if row.convex && row.gap_ok {
            k_star = Some(row.k);
        } else {
            break;
        }
    }
    Ok(KSweep { rows, k_star, n_points, seed })
}

/// Sampled check of the perturbed upper bound `Q~_k <= 2 g2` for `|xi| >= t0 + 2`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerturbedBound {
    pub k: usize,
    /// `1 / ((t0 + 2)^2 g2(t0 + 2))`.
    pub k_threshold: f64,
    pub pass: bool,
    /// Largest sampled `max eig / (2 g2(|xi|))`.
    pub worst_ratio: f64,
    pub witness: Option<f64>,
}

/// `g2` is the upper ellipticity bound of the base integrand on the radii `t_grid`, all `>= t0 + 2`.
pub fn perturbed_bound_check(ft: &FTilde, t_grid: &[f64], g2: &[f64], n_dirs: usize, seed: u64) -> Result<PerturbedBound> {
    let c = ft.scale();
    if t_grid.first().is_none_or(|&t| t < c) || t_grid.len() != g2.len() {
        return Err(Error::InvalidInput(format!("t_grid must be nonempty, start at >= {c} and match g2")));
    }
    let dirs = sphere_directions(ft.dim(), n_dirs, seed);
    let mut worst: f64 = 0.0;
    let mut witness = None;
    for (&t, &g) in t_grid.iter().zip(g2) {
        for d in &dirs {
            let xi: Vec<f64> = d.iter().map(|x| x * t).collect();
            let hi = hessian_extremes(ft, &xi)?.1;
            let ratio = hi / (2.0 * g);
            if ratio > worst {
                worst = ratio;
                witness = Some(t);
            }
        }
    }
    Ok(PerturbedBound {
        k: ft.k,
        k_threshold: 1.0 / (c * c * g2[0]),
        pass: worst <= 1.0 + SLACK,
        worst_ratio: worst,
        witness,
    })
}

/// Grid convolution restricted to nodes at least `margin` nodes away from the boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct Mollified {
    pub u: GridFunction,
    pub epsilon: f64,
    pub margin: usize,
}

impl Mollified {
    pub fn is_valid(&self, i: usize, j: usize) -> bool {
        let n = self.u.n();
        i >= self.margin && j >= self.margin && i + self.margin <= n && j + self.margin <= n
    }
}

/// Discrete kernel offsets and renormalized weights for radius `eps` on spacing `h`.
pub fn discrete_kernel(eps: f64, h: f64) -> Result<Vec<(isize, isize, f64)>> {
    let kernel = MollifierKernel::new(2, eps)?;
    let m = (eps / h).floor() as isize;
    let mut out = Vec::new();
    for b in -m..=m {
        for a in -m..=m {
            let w = kernel.value(&[a as f64 * h, b as f64 * h]);
            if w > 0.0 {
                out.push((a, b, w));
            }
        }
    }
    if out.is_empty() {
        out.push((0, 0, 1.0));
    }
    let total: f64 = out.iter().map(|t| t.2).sum();
    for t in &mut out {
        t.2 /= total;
    }
    Ok(out)
}

/// `u_eps(x) = sum_y w(y) u(x - y)` on the nodes where the kernel fits; other nodes are copied.
pub fn mollify_grid(u: &GridFunction, eps: f64) -> Result<Mollified> {
    let n = u.n();
    let h = u.spacing();
    let kernel = discrete_kernel(eps, h)?;
    let margin = kernel.iter().map(|t| t.0.unsigned_abs()).max().unwrap_or(0);
    if 2 * margin >= n {
        return Err(Error::InvalidInput(format!("epsilon = {eps} leaves no interior node on an N = {n} grid")));
    }
    let mut values = u.values().to_vec();
    for j in margin..=(n - margin) {
        for i in margin..=(n - margin) {
            let mut s = 0.0;
            for &(a, b, w) in &kernel {
                s += w * u.get((i as isize - a) as usize, (j as isize - b) as usize);
            }
            values[u.index(i, j)] = s;
        }
    }
    Ok(Mollified { u: GridFunction::new(n, values)?, epsilon: eps, margin })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpsRow {
    pub epsilon: f64,
    /// `int_{B_rho} f(D u_eps)`.
    pub energy: f64,
    /// `int_{B_rho} f(D u)`.
    pub base_energy: f64,
    /// `int_{B_{rho+eps}} f(D u)`.
    pub bound: f64,
    pub gap: f64,
    pub dominated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyConvergence {
    pub rho: f64,
    pub rows: Vec<EpsRow>,
    pub dominance_ok: bool,
    /// Gap non-increasing as `epsilon` decreases.
    pub gap_decreasing: bool,
}

/// Relative slack allowed in the Jensen dominance.
pub const JENSEN_SLACK: f64 = 1e-10;

pub fn energy_convergence_check(f: &dyn EnergyDensity, u: &GridFunction, rho: f64, eps_list: &[f64]) -> Result<EnergyConvergence> {
    crate::grid::check_planar(f)?;
    let base_energy = ball_integral(u, rho, |xi| f.eval(&xi))?;
    let mut rows = Vec::new();
    for &eps in eps_list {
        if rho + eps >= 0.5 {
            return Err(Error::InvalidInput(format!("B_(rho + eps) must fit in the square (rho = {rho}, eps = {eps})")));
        }
        let m = mollify_grid(u, eps)?;
        for (i, j) in u.cells_in_ball(rho) {
            if !(m.is_valid(i, j) && m.is_valid(i + 1, j + 1)) {
                return Err(Error::InvalidInput(format!("epsilon = {eps} too large: cell ({i}, {j}) of B_rho is outside the valid region")));
            }
        }
        let energy = ball_integral(&m.u, rho, |xi| f.eval(&xi))?;
        let bound = ball_integral(u, rho + eps, |xi| f.eval(&xi))?;
        rows.push(EpsRow {
            epsilon: eps,
            energy,
            base_energy,
            bound,
            gap: (energy - base_energy).abs(),
            dominated: energy <= bound * (1.0 + JENSEN_SLACK),
        });
    }
    let mut order: Vec<&EpsRow> = rows.iter().collect();
    order.sort_by(|a, b| b.epsilon.total_cmp(&a.epsilon));
    let gap_decreasing = order.windows(2).all(|w| w[1].gap <= w[0].gap * (1.0 + JENSEN_SLACK));
    Ok(EnergyConvergence { rho, dominance_ok: rows.iter().all(|r| r.dominated), gap_decreasing, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn h_values() {
        assert_eq!(perturbation_h(0.0).unwrap(), 0.375);
        assert_eq!(perturbation_h(2.0).unwrap(), 2.0);
        assert!(perturbation_h(-1.0).is_err());
        let (a, b, c) = perturbation_h_derivs(1.0 - 1e-15).unwrap();
        assert!((a - 1.0).abs() < 1e-12 && (b - 1.0).abs() < 1e-12 && c.abs() < 1e-12);
    }

    #[test]
    fn cutoff_shape() {
        let c = Cutoff::for_t0(1.0);
        assert_eq!(c.value(2.0), 1.0);
        assert_eq!(c.value(2.75), 0.0);
        let mid = c.value(2.375);
        assert!((mid - 0.5).abs() < 1e-12);
        let h = 1e-5;
        for r in [2.1, 2.3, 2.6] {
            let (_, d1, d2) = c.derivs(r);
            let fd1 = (c.value(r + h) - c.value(r - h)) / (2.0 * h);
            let fd2 = (c.value(r + h) - 2.0 * c.value(r) + c.value(r - h)) / (h * h);
            assert!((d1 - fd1).abs() < 1e-6, "{d1} {fd1}");
            assert!((d2 - fd2).abs() < 1e-3 * (1.0 + d2.abs()), "{d2} {fd2}");
        }
    }

    #[test]
    fn kernel_has_unit_mass() {
        for (n, tol) in [(1, 1e-10), (2, 1e-10), (3, 1e-8)] {
            let k = MollifierKernel::new(n, 0.3).unwrap();
            assert!((k.mass() - 1.0).abs() < tol, "n = {n}: {}", k.mass());
        }
    }
}
