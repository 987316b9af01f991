//! Ellipticity bounds `g1 <= Q(xi, .) <= g2` by Hessian sampling, and the growth hypotheses
//! (H1)-(H5), (ab) and the p,q corollary conditions.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrand::{EnergyDensity, GrowthClass};
use crate::sphere::{log_grid, sphere_directions};

/// Relative slack allowed in every inequality check.
pub const SLACK: f64 = 1e-9;
/// Largest log-log slope of a required constant still counted as bounded.
pub const SLOPE_TOL: f64 = 1e-3;
/// Default factor in `2* = kappa * 2 / (1 - beta)` for `n = 2`.
pub const TWO_STAR_FACTOR: f64 = 1.25;

/// Sampled ellipticity bounds on a radius grid.
#[derive(Clone, Debug, Serialize)]
pub struct GrowthBoundSamples {
    pub t_grid: Vec<f64>,
    pub g1_samples: Vec<f64>,
    pub g2_samples: Vec<f64>,
    pub n_dirs: usize,
    pub seed: u64,
    /// Closed-form bounds from the catalog, when available on the whole grid.
    pub g1_closed: Option<Vec<f64>>,
    pub g2_closed: Option<Vec<f64>>,
}

impl GrowthBoundSamples {
    /// Lower bound used by the hypothesis checks (closed form when available).
    pub fn g1(&self) -> &[f64] {
        self.g1_closed.as_deref().unwrap_or(&self.g1_samples)
    }

    /// Upper bound used by the hypothesis checks (closed form when available).
    pub fn g2(&self) -> &[f64] {
        self.g2_closed.as_deref().unwrap_or(&self.g2_samples)
    }
}

fn hessian(f: &dyn EnergyDensity, xi: &[f64]) -> Result<DMatrix<f64>> {
    let n = xi.len();
    let mut e = vec![0.0; n];
    let mut diag = vec![0.0; n];
    for i in 0..n {
        e[i] = 1.0;
        diag[i] = f.hess_quadform(xi, &e)?;
        e[i] = 0.0;
    }
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = diag[i];
        for j in (i + 1)..n {
            e[i] = 1.0;
            e[j] = 1.0;
            let q = f.hess_quadform(xi, &e)?;
            e[i] = 0.0;
            e[j] = 0.0;
            let v = 0.5 * (q - diag[i] - diag[j]);
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    Ok(h)
}

/// Smallest and largest eigenvalue of the Hessian at `xi`, with the eigenvector of the smallest.
pub fn hessian_extremes(f: &dyn EnergyDensity, xi: &[f64]) -> Result<(f64, f64, Vec<f64>)> {
    let h = hessian(f, xi)?;
    let eig = SymmetricEigen::new(h);
    let (mut lo, mut hi, mut arg_lo, mut arg_hi) = (f64::INFINITY, f64::NEG_INFINITY, 0, 0);
    for (k, &v) in eig.eigenvalues.iter().enumerate() {
        if v < lo {
            lo = v;
            arg_lo = k;
        }
        if v > hi {
            hi = v;
            arg_hi = k;
        }
    }
    // Rayleigh quotients of the exact quadratic form remove the eigensolver's O(eps |H|) error.
    let rayleigh = |k: usize| -> Result<(f64, Vec<f64>)> {
        let v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
        let n2: f64 = v.iter().map(|x| x * x).sum();
        Ok((f.hess_quadform(xi, &v)? / n2, v))
    };
    let (lo, vec) = rayleigh(arg_lo)?;
    let hi = rayleigh(arg_hi)?.0.max(lo);
    Ok((lo, hi, vec))
}

/// Samples `g1(t) = min` and `g2(t) = max` of the Hessian spectrum over `n_dirs` quasi-uniform
/// directions `xi = t * d` (plus the coordinate axes and the diagonal).
pub fn sample_growth_bounds(f: &dyn EnergyDensity, t_grid: &[f64], n_dirs: usize, seed: u64) -> Result<GrowthBoundSamples> {
    if n_dirs < 64 {
        return Err(Error::InvalidInput(format!("n_dirs must be >= 64, got {n_dirs}")));
    }
    if t_grid.is_empty() || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("t_grid must be nonempty and strictly increasing".into()));
    }
    if t_grid[0] <= f.t0() {
        return Err(Error::InvalidInput(format!("min(t_grid) = {} must exceed t0 = {}", t_grid[0], f.t0())));
    }
    let dirs = sphere_directions(f.dim(), n_dirs, seed);
    let rows: Vec<Result<(f64, f64)>> = t_grid
        .par_iter()
        .map(|&t| {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for d in &dirs {
                let xi: Vec<f64> = d.iter().map(|x| x * t).collect();
                let (a, b, v) = hessian_extremes(f, &xi)?;
                if a < -1e-12 {
                    return Err(Error::NonConvex { xi, lambda: v, value: a });
                }
                lo = lo.min(a);
                hi = hi.max(b);
            }
            Ok((lo, hi))
        })
        .collect();
    let mut g1 = Vec::with_capacity(t_grid.len());
    let mut g2 = Vec::with_capacity(t_grid.len());
    for r in rows {
        let (a, b) = r?;
        g1.push(a);
        g2.push(b);
    }
    let closed_ok = t_grid[0] >= f.closed_from() * (1.0 - 1e-12);
    let g1_closed = closed_ok.then(|| t_grid.iter().map(|&t| f.g1_closed(t)).collect::<Option<Vec<_>>>()).flatten();
    let g2_closed = closed_ok.then(|| t_grid.iter().map(|&t| f.g2_closed(t)).collect::<Option<Vec<_>>>()).flatten();
    Ok(GrowthBoundSamples { t_grid: t_grid.to_vec(), g1_samples: g1, g2_samples: g2, n_dirs, seed, g1_closed, g2_closed })
}

/// Constants of the growth hypotheses.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HypothesisParams {
    pub t0: f64,
    pub mu: f64,
    pub beta: f64,
    pub alpha: f64,
    /// `None` means "report the minimal feasible constant and test boundedness".
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub n: usize,
    pub two_star: f64,
}

impl HypothesisParams {
    pub fn default_two_star(n: usize, beta: f64) -> f64 {
        if n > 2 {
            2.0 * n as f64 / (n as f64 - 2.0)
        } else {
            TWO_STAR_FACTOR * 2.0 / (1.0 - beta)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n as f64;
        let mut bad = Vec::new();
        if self.n < 2 {
            bad.push("n >= 2".to_string());
        }
        if !(self.beta > 1.0 / n && self.beta < 2.0 / n) {
            bad.push(format!("1/n < beta < 2/n (beta = {})", self.beta));
        }
        if !(self.alpha > 1.0) {
            bad.push(format!("alpha > 1 (alpha = {})", self.alpha));
        }
        if !(0.0..=1.0).contains(&self.mu) {
            bad.push(format!("0 <= mu <= 1 (mu = {})", self.mu));
        }
        if self.n == 2 && !(self.two_star > 2.0 / (1.0 - self.beta)) {
            bad.push(format!("2* > 2/(1-beta) for n = 2 (2* = {})", self.two_star));
        }
        for c in [self.c1, self.c2].into_iter().flatten() {
            if !(c > 0.0) {
                bad.push(format!("positive constants (got {c})"));
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("hypothesis parameters violate {}", bad.join(", "))))
        }
    }

    /// Exponent on `g2` in (H3): `(n-2)/n`, or `2/2*` for `n = 2`.
    pub fn h3_exponent(&self) -> f64 {
        if self.n > 2 {
            (self.n as f64 - 2.0) / self.n as f64
        } else {
            2.0 / self.two_star
        }
    }
}

/// Outcome of one check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub id: &'static str,
    pub pass: bool,
    /// Worst radius (or first violating radius).
    pub witness: Option<f64>,
    /// Signed slack; negative on failure.
    pub margin: f64,
    pub min_constant: Option<f64>,
    pub note: String,
}

fn ensure_nonempty(t: &[f64]) -> Result<()> {
    if t.is_empty() {
        Err(Error::InvalidInput("empty sample grid".into()))
    } else {
        Ok(())
    }
}

/// (H1): positive bounds with `g1 <= g2`, and closed forms sandwiching the sampled spectrum.
pub fn check_h1(s: &GrowthBoundSamples) -> Verdict {
    let mut margin = f64::INFINITY;
    let mut witness = None;
    let mut fail = |m: f64, t: f64, margin: &mut f64| {
        if m < *margin {
            *margin = m;
            witness = Some(t);
        }
    };
    for i in 0..s.t_grid.len() {
        let t = s.t_grid[i];
        let (a, b) = (s.g1_samples[i], s.g2_samples[i]);
        fail(if a > 0.0 { 1.0 } else { -1.0 }, t, &mut margin);
        fail((b - a) / b.abs().max(f64::MIN_POSITIVE) + SLACK, t, &mut margin);
        if let Some(c) = &s.g1_closed {
            fail(if c[i] > 0.0 { (a - c[i]) / a.abs() + SLACK } else { -1.0 }, t, &mut margin);
        }
        if let Some(c) = &s.g2_closed {
            fail((c[i] - b) / b.abs() + SLACK, t, &mut margin);
        }
    }
    let source = match (&s.g1_closed, &s.g2_closed) {
        (Some(_), Some(_)) => "closed-form g1 and g2",
        (Some(_), None) => "closed-form g1, sampled g2",
        (None, Some(_)) => "sampled g1, closed-form g2",
        (None, None) => "sampled g1 and g2",
    };
    Verdict {
        id: "H1",
        pass: margin >= 0.0,
        witness: if margin < 0.0 { witness } else { None },
        margin,
        min_constant: None,
        note: format!("{source}; {} directions per radius", s.n_dirs),
    }
}

/// (H2): `t^mu g2` non-increasing and `t g2` non-decreasing along the grid.
pub fn check_h2(t: &[f64], g2: &[f64], mu: f64) -> Result<Verdict> {
    ensure_nonempty(t)?;
    let mut margin = f64::INFINITY;
    let mut witness = None;
    for i in 0..t.len().saturating_sub(1) {
        let a0 = t[i].powf(mu) * g2[i];
        let a1 = t[i + 1].powf(mu) * g2[i + 1];
        let b0 = t[i] * g2[i];
        let b1 = t[i + 1] * g2[i + 1];
        let m = ((a0 - a1) / a0.abs()).min((b1 - b0) / b0.abs()) + SLACK;
        if m < 0.0 && witness.is_none() {
            witness = Some(t[i + 1]);
        }
        margin = margin.min(m);
    }
    Ok(Verdict {
        id: "H2",
        pass: margin >= 0.0,
        witness,
        margin: if margin.is_finite() { margin } else { 0.0 },
        min_constant: None,
        note: format!("mu = {mu}"),
    })
}

/// Least-squares slope of `ln y` against `ln t` over the last decade of the grid.
pub fn last_decade_slope(t: &[f64], y: &[f64]) -> f64 {
    let t_end = *t.last().unwrap();
    let idx: Vec<usize> = (0..t.len()).filter(|&i| t[i] >= t_end / 10.0 * (1.0 - 1e-12)).collect();
    if idx.len() < 2 {
        return 0.0;
    }
    let xs: Vec<f64> = idx.iter().map(|&i| t[i].ln()).collect();
    let ys: Vec<f64> = idx.iter().map(|&i| y[i].ln()).collect();
    slope(&xs, &ys)
}

pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn constant_verdict(id: &'static str, t: &[f64], ratio: &[f64], given: Option<f64>, note: String) -> Verdict {
    let (mut worst, mut at) = (f64::NEG_INFINITY, t[0]);
    for (&r, &ti) in ratio.iter().zip(t) {
        if r > worst || r.is_nan() {
            worst = r;
            at = ti;
        }
    }
    match given {
        Some(c) => {
            let margin = ratio.iter().map(|r| (c * (1.0 + SLACK) - r) / c).fold(f64::INFINITY, f64::min);
            let witness = ratio.iter().position(|&r| !(r <= c * (1.0 + SLACK))).map(|i| t[i]);
            Verdict { id, pass: witness.is_none(), witness, margin, min_constant: Some(worst), note: format!("{note}; C = {c}") }
        }
        None => {
            let sl = last_decade_slope(t, ratio);
            let pass = worst.is_finite() && sl <= SLOPE_TOL;
            Verdict {
                id,
                pass,
                witness: Some(at),
                margin: SLOPE_TOL - sl,
                min_constant: Some(worst),
                note: format!("{note}; minimal constant over the grid, last-decade log-log slope {sl:.3e}"),
            }
        }
    }
}

/// (H3): `g2^e <= C1 t^(2 beta) g1` with `e = (n-2)/n`, or `2/2*` when `n = 2`.
pub fn check_h3(t: &[f64], g1: &[f64], g2: &[f64], params: &HypothesisParams) -> Result<Verdict> {
    ensure_nonempty(t)?;
    let e = params.h3_exponent();
    let ratio: Vec<f64> = (0..t.len()).map(|i| g2[i].powf(e) / (t[i].powf(2.0 * params.beta) * g1[i])).collect();
    Ok(constant_verdict("H3", t, &ratio, params.c1, format!("beta = {}, exponent on g2 = {e}", params.beta)))
}

/// Directions used by (H4) and (H5).
pub fn check_directions(n: usize, n_dirs: usize, seed: u64) -> Vec<Vec<f64>> {
    sphere_directions(n, n_dirs, seed)
}

/// (H4): `g2(|xi|) |xi|^2 <= C2 (1 + f(xi))^alpha` at every sampled `xi`.
pub fn check_h4(f: &dyn EnergyDensity, t: &[f64], g2: &[f64], params: &HypothesisParams, dirs: &[Vec<f64>]) -> Result<Verdict> {
    ensure_nonempty(t)?;
    let ratio: Vec<f64> = t
        .par_iter()
        .zip(g2.par_iter())
        .map(|(&ti, &g)| {
            dirs.iter()
                .map(|d| {
                    let xi: Vec<f64> = d.iter().map(|x| x * ti).collect();
                    g * ti * ti / (1.0 + f.eval(&xi)).powf(params.alpha)
                })
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    Ok(constant_verdict("H4", t, &ratio, params.c2, format!("alpha = {}", params.alpha)))
}

/// (H5) proxy: `min_dir f(xi)/|xi|` strictly increasing over the last decade and doubling over the grid.
pub fn check_h5(f: &dyn EnergyDensity, t: &[f64], dirs: &[Vec<f64>]) -> Result<Verdict> {
    ensure_nonempty(t)?;
    let t_end = *t.last().unwrap();
    if t_end < 100.0 * t[0] {
        return Err(Error::InvalidInput("the (H5) grid must span at least two decades".into()));
    }
    let m: Vec<f64> = t
        .par_iter()
        .map(|&ti| {
            dirs.iter()
                .map(|d| {
                    let xi: Vec<f64> = d.iter().map(|x| x * ti).collect();
                    f.eval(&xi) / ti
                })
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let start = t.iter().position(|&x| x >= t_end / 10.0 * (1.0 - 1e-12)).unwrap();
    let mut witness = None;
    for i in start..t.len() - 1 {
        if !(m[i + 1] > m[i]) {
            witness = Some(t[i + 1]);
            break;
        }
    }
    let growth = m[m.len() - 1] / m[0];
    let pass = witness.is_none() && growth > 2.0;
    Ok(Verdict {
        id: "H5",
        pass,
        witness: if pass { None } else { witness.or(Some(t_end)) },
        margin: growth - 2.0,
        min_constant: None,
        note: format!("min f/|xi| grows from {:.6e} to {:.6e} (factor {growth:.4})", m[0], m[m.len() - 1]),
    })
}

/// Condition (ab) and the exponent `theta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AbVerdict {
    pub pass: bool,
    pub denominator: f64,
    pub theta: Option<f64>,
    /// Verdict of the equivalent form `vartheta (1 - lambda) < 1`.
    pub interpolation_form: bool,
}

/// `2 - mu - alpha (n beta - mu) > 0` and `theta = (2-mu) alpha / (2 - mu - alpha (n beta - mu))`.
pub fn check_ab(n: usize, mu: f64, beta: f64, alpha: f64) -> AbVerdict {
    let nf = n as f64;
    let denominator = 2.0 - mu - alpha * (nf * beta - mu);
    let pass = denominator > 0.0;
    let vartheta = (2.0 - mu) / (2.0 - nf * beta);
    let lambda = 1.0 / alpha;
    AbVerdict {
        pass,
        denominator,
        theta: pass.then(|| (2.0 - mu) * alpha / denominator),
        interpolation_form: vartheta * (1.0 - lambda) < 1.0,
    }
}

/// `beta_bar = (n-2) q / (2n) - p/2 + 2/n`.
pub fn beta_bar(n: usize, p: f64, q: f64) -> f64 {
    let nf = n as f64;
    (nf - 2.0) * q / (2.0 * nf) - p / 2.0 + 2.0 / nf
}

/// Exponent of the sup-gradient bound implied by `theta` when `mu = 2 - q`: `theta / q`.
pub fn gradient_exponent(theta: f64, q: f64) -> f64 {
    theta / q
}

/// Derived exponents and corollary conditions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentSet {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub m: f64,
    pub big_m: f64,
    pub r: f64,
    pub s: f64,
    pub theta_pq: Option<f64>,
    pub pq_ok: bool,
    pub aniso_ok: bool,
    pub ex1_ok: bool,
    /// ex1 in the form `q/p < 1 + 2/n - 2 (1/p - 1/q)`.
    pub ex1_equiv_ok: bool,
    pub ex2_ok: bool,
    /// `p >= n`, so `p* = inf` and ex2 holds trivially.
    pub ex2_trivial: bool,
    /// `r <= p <= q <= s <= 2`.
    pub ordering_ok: bool,
}

/// Fills every corollary condition for `(n, p, q)` with ellipticity constants `m`, `M`.
pub fn corollary_conditions(n: usize, p: f64, q: f64, m: f64, big_m: f64) -> Result<ExponentSet> {
    if !(p > 1.0 && q >= p) {
        return Err(Error::InvalidInput(format!("need 1 < p <= q, got p = {p}, q = {q}")));
    }
    let nf = n as f64;
    let r = 2.0 * p - q;
    let s = p / q * (q - 2.0) + 2.0;
    let pq_ok = q / p < 1.0 + 2.0 / nf;
    let ex2_trivial = p >= nf;
    Ok(ExponentSet {
        n,
        p,
        q,
        m,
        big_m,
        r,
        s,
        theta_pq: pq_ok.then(|| 2.0 / ((nf + 2.0) * p - nf * q)),
        pq_ok,
        aniso_ok: p > 2.0 * nf / (nf + 2.0),
        ex1_ok: s < 2.0 / nf * p + r,
        ex1_equiv_ok: q / p < 1.0 + 2.0 / nf - 2.0 * (1.0 / p - 1.0 / q),
        ex2_ok: ex2_trivial || q < nf * p / (nf - p),
        ex2_trivial,
        ordering_ok: r <= p && p <= q && q <= s && s <= 2.0,
    })
}

/// The two `s`-thresholds of the Remark: `((1 + 2/n) r, (2/n) p + r)`.
pub fn remark_comparison(n: usize, p: f64, q: f64) -> (f64, f64) {
    let nf = n as f64;
    let r = 2.0 * p - q;
    ((1.0 + 2.0 / nf) * r, 2.0 / nf * p + r)
}

/// Result of the `p < f < q` sandwich check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PfqVerdict {
    pub pass: bool,
    /// Smallest grid radius from which both bounds hold at every larger sampled radius.
    pub t_bar: Option<f64>,
}

/// `m/(2(p-1)) |xi|^p <= f(xi) <= 2M/(q-1) |xi|^q` (log variants for `p = 1` or `q = 1`).
pub fn pfq_bounds_check(f: &dyn EnergyDensity, p: f64, q: f64, m: f64, big_m: f64, t_grid: &[f64], dirs: &[Vec<f64>]) -> PfqVerdict {
    let lower = |t: f64| if p == 1.0 { 0.5 * m * t * t.ln() } else { m / (2.0 * (p - 1.0)) * t.powf(p) };
    let upper = |t: f64| if q == 1.0 { 2.0 * big_m * t * t.ln() } else { 2.0 * big_m / (q - 1.0) * t.powf(q) };
    let ok: Vec<bool> = t_grid
        .iter()
        .map(|&t| {
            dirs.iter().all(|d| {
                let xi: Vec<f64> = d.iter().map(|x| x * t).collect();
                let v = f.eval(&xi);
                lower(t) <= v * (1.0 + SLACK) && v <= upper(t) * (1.0 + SLACK)
            })
        })
        .collect();
    let mut t_bar = None;
    for i in (0..t_grid.len()).rev() {
        if ok[i] {
            t_bar = Some(t_grid[i]);
        } else {
            break;
        }
    }
    PfqVerdict { pass: t_bar.is_some(), t_bar }
}

/// Largest `mu` for which `t^mu g2` is non-increasing along the grid (clamped to `[0, 1]`).
pub fn max_mu(t: &[f64], g2: &[f64]) -> f64 {
    let mut mu: f64 = 1.0;
    for i in 0..t.len().saturating_sub(1) {
        let decay = -(g2[i + 1].ln() - g2[i].ln()) / (t[i + 1].ln() - t[i].ln());
        mu = mu.min(decay);
    }
    mu.max(0.0)
}

/// Picks `(mu, beta, alpha)` inside the feasible region suggested by the growth class.
///
/// For power-type classes `mu = 2 - upper`, lowered to what the sampled `g2` supports.
pub fn choose_params(f: &dyn EnergyDensity, samples: Option<&GrowthBoundSamples>) -> HypothesisParams {
    let n = f.dim();
    let nf = n as f64;
    let (mu, beta, alpha) = match f.growth_class() {
        GrowthClass::Power { lower, upper, growth } => {
            let cap = samples.map(|s| max_mu(&s.t_grid, s.g2())).unwrap_or(1.0);
            power_params(n, lower, upper, growth, cap)
        }
        GrowthClass::Logarithmic | GrowthClass::Unknown => {
            let beta = 1.5 / nf;
            let alpha_hi = 2.0 / (nf * beta);
            (0.0, beta, 1.0 + 0.5 * (alpha_hi - 1.0))
        }
    };
    HypothesisParams { t0: f.t0(), mu, beta, alpha, c1: None, c2: None, n, two_star: HypothesisParams::default_two_star(n, beta) }
}

fn power_params(n: usize, a1: f64, a2: f64, pf: f64, mu_cap: f64) -> (f64, f64, f64) {
    let nf = n as f64;
    let mu = (2.0 - a2).min(mu_cap).clamp(0.0, 1.0);
    let beta_h3 = if n > 2 {
        0.5 * ((nf - 2.0) / nf * (a2 - 2.0) + 2.0 - a1)
    } else {
        let k = (a2 - 2.0) / TWO_STAR_FACTOR;
        (k + 2.0 - a1) / (2.0 + k)
    };
    let (b_min, b_max) = (1.0 / nf, 2.0 / nf);
    let beta_lo = beta_h3.max(b_min);
    let alpha_lo = (a2 / pf).max(1.0);
    let alpha_hi = |b: f64| if nf * b > mu { (2.0 - mu) / (nf * b - mu) } else { f64::INFINITY };
    let beta_star = ((mu + (2.0 - mu) / alpha_lo) / nf).min(b_max);
    let beta = if beta_lo < beta_star { beta_lo + 0.5 * (beta_star - beta_lo) } else { beta_lo + 0.5 * (b_max - beta_lo) };
    let beta = beta.clamp(b_min + 1e-9, b_max - 1e-9);
    let hi = alpha_hi(beta);
    let alpha = if hi.is_finite() && hi > alpha_lo { alpha_lo + 0.5 * (hi - alpha_lo) } else if hi.is_finite() { alpha_lo.max(1.0 + 1e-9) } else { alpha_lo + 1.0 };
    (mu, beta, alpha.max(1.0 + 1e-9))
}

/// Grid and sampling settings for a full analysis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalysisConfig {
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub points: usize,
    pub n_dirs: usize,
    pub seed: u64,
    pub mu: Option<f64>,
    pub beta: Option<f64>,
    pub alpha: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub two_star: Option<f64>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self { t_min: None, t_max: None, points: 200, n_dirs: 256, seed: 0, mu: None, beta: None, alpha: None, c1: None, c2: None, two_star: None }
    }
}

/// Everything `analyze` reports for one integrand.
#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub integrand: String,
    pub n: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
    pub params: HypothesisParams,
    pub samples: GrowthBoundSamples,
    pub h1: Verdict,
    pub h2: Verdict,
    pub h3: Verdict,
    pub h4: Verdict,
    pub h5: Verdict,
    pub ab: AbVerdict,
    /// `theta / q` when `mu = 2 - q` makes it meaningful.
    pub gradient_exponent: Option<f64>,
    pub exponents: Option<ExponentSet>,
    pub remark: Option<(f64, f64)>,
}

impl AnalysisReport {
    pub fn hypotheses_pass(&self) -> bool {
        self.h1.pass && self.h2.pass && self.h3.pass && self.h4.pass && self.h5.pass && self.ab.pass
    }

    pub fn verdicts(&self) -> [&Verdict; 5] {
        [&self.h1, &self.h2, &self.h3, &self.h4, &self.h5]
    }
}

/// Samples the bounds and runs every hypothesis check.
pub fn analyze(f: &dyn EnergyDensity, cfg: &AnalysisConfig) -> Result<AnalysisReport> {
    let (dmin, dmax) = f.default_window();
    let t_min = cfg.t_min.unwrap_or(dmin);
    let t_max = cfg.t_max.unwrap_or(dmax);
    if !(t_min > f.t0() && t_max > t_min) || cfg.points < 2 {
        return Err(Error::InvalidInput(format!("need t0 < t_min < t_max and >= 2 points (t0 = {}, t_min = {t_min}, t_max = {t_max})", f.t0())));
    }
    let t = log_grid(t_min, t_max, cfg.points);
    let samples = sample_growth_bounds(f, &t, cfg.n_dirs, cfg.seed)?;
    let mut params = choose_params(f, Some(&samples));
    if let Some(mu) = cfg.mu {
        params.mu = mu;
    }
    if let Some(b) = cfg.beta {
        params.beta = b;
        params.two_star = HypothesisParams::default_two_star(params.n, b);
    }
    if let Some(a) = cfg.alpha {
        params.alpha = a;
    }
    if let Some(ts) = cfg.two_star {
        params.two_star = ts;
    }
    params.c1 = cfg.c1;
    params.c2 = cfg.c2;
    params.validate()?;

    let dirs = check_directions(f.dim(), cfg.n_dirs, cfg.seed);
    let h1 = check_h1(&samples);
    let h2 = check_h2(&t, samples.g2(), params.mu)?;
    let h3 = check_h3(&t, samples.g1(), samples.g2(), &params)?;
    let h4 = check_h4(f, &t, samples.g2(), &params, &dirs)?;
    let h5 = check_h5(f, &t, &dirs)?;
    let ab = check_ab(params.n, params.mu, params.beta, params.alpha);
    let (exponents, remark, gradient_exponent) = match f.pq() {
        Some((p, q)) if p > 1.0 && q >= p => {
            let (m, big_m) = envelope_constants(&samples, p, q);
            let x = corollary_conditions(params.n, p, q, m, big_m).ok();
            let rem = (p < q && q <= 2.0).then(|| remark_comparison(params.n, p, q));
            let ge = ab.theta.filter(|_| (params.mu - (2.0 - q)).abs() < 1e-12).map(|th| gradient_exponent(th, q));
            (x, rem, ge)
        }
        _ => (None, None, None),
    };
    Ok(AnalysisReport {
        integrand: f.spec_string(),
        n: f.dim(),
        t_min,
        t_max,
        points: cfg.points,
        params,
        samples,
        h1,
        h2,
        h3,
        h4,
        h5,
        ab,
        gradient_exponent,
        exponents,
        remark,
    })
}

/// Best constants `m <= g1 t^(2-p)` and `M >= g2 t^(2-q)` on the sampled grid.
fn envelope_constants(s: &GrowthBoundSamples, p: f64, q: f64) -> (f64, f64) {
    let mut m = f64::INFINITY;
    let mut big_m: f64 = 0.0;
    for i in 0..s.t_grid.len() {
        let t = s.t_grid[i];
        m = m.min(s.g1_samples[i] * t.powf(2.0 - p));
        big_m = big_m.max(s.g2_samples[i] * t.powf(2.0 - q));
    }
    (m, big_m)
}
