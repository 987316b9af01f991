//! Numerical checks of the a priori gradient estimate: scaling studies, the Moser exponent schedule,
//! the interpolation lemma and the one-dimensional integral inequalities.

use rayon::prelude::*;
use serde::Serialize;

use crate::ellipticity::slope;
use crate::error::{Error, Result};
use crate::grid::{ball_integral, interior_sup_gradient, GridFunction, CENTER, GAUSS};
use crate::integrand::EnergyDensity;
use crate::quadrature::integrate_adaptive;
use crate::solver::{minimize, SolverOptions};

/// Boundary data `s * base(x, y)` used by scaling studies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum BaseData {
    /// `a x + b y`.
    Affine { a: f64, b: f64 },
    /// `x^2 - y^2`.
    Saddle,
    /// `x + (x^2 - y^2) / 2`.
    Mixed,
}

impl BaseData {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match *self {
            BaseData::Affine { a, b } => a * x + b * y,
            BaseData::Saddle => x * x - y * y,
            BaseData::Mixed => x + 0.5 * (x * x - y * y),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "saddle" => Ok(BaseData::Saddle),
            "mixed" => Ok(BaseData::Mixed),
            "affine" => Ok(BaseData::Affine { a: 1.0, b: 0.0 }),
            _ => {
                let inner = s
                    .strip_prefix("affine(")
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| Error::InvalidInput(format!("unknown boundary data `{s}` (expected affine, affine(a,b), saddle or mixed)")))?;
                let parts: Vec<&str> = inner.split(',').collect();
                let num = |t: &str| t.trim().parse::<f64>().map_err(|_| Error::InvalidInput(format!("bad number `{t}` in `{s}`")));
                if parts.len() != 2 {
                    return Err(Error::InvalidInput(format!("affine data needs two slopes, got `{s}`")));
                }
                Ok(BaseData::Affine { a: num(parts[0])?, b: num(parts[1])? })
            }
        }
    }

    pub fn label(&self) -> String {
        match *self {
            BaseData::Affine { a, b } => format!("affine({a},{b})"),
            BaseData::Saddle => "saddle".into(),
            BaseData::Mixed => "mixed".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingConfig {
    pub n_grid: usize,
    pub rho: f64,
    pub r: f64,
    pub scales: Vec<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub slope_tol: f64,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self {
            n_grid: 64,
            rho: 0.15,
            r: 0.35,
            scales: vec![4.0, 5.657, 8.0, 11.31, 16.0, 22.63, 32.0, 45.25, 64.0],
            tol: 1e-8,
            max_iter: 100_000,
            slope_tol: 0.05,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingStudy {
    pub base: String,
    pub scales: Vec<f64>,
    pub sup_grads: Vec<f64>,
    pub means: Vec<f64>,
    pub iterations: Vec<usize>,
    pub fitted_slope: f64,
    pub theta_theoretical: f64,
    pub fitted_c: f64,
    pub slope_ok: bool,
    pub bound_ok: bool,
    pub sup_monotone: bool,
    pub span_decades: f64,
    /// Set when a solve failed; the table then stops before the failing scale.
    pub aborted: Option<String>,
}

impl ScalingStudy {
    pub fn bound(&self, j: usize) -> f64 {
        self.fitted_c * self.means[j].powf(self.theta_theoretical)
    }

    pub fn pass(&self) -> bool {
        self.aborted.is_none() && self.slope_ok && self.bound_ok && self.fitted_c.is_finite()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("scale,sup_grad,mean,bound,iterations\n");
        for j in 0..self.scales.len() {
            s.push_str(&format!("{:e},{:e},{:e},{:e},{}\n", self.scales[j], self.sup_grads[j], self.means[j], self.bound(j), self.iterations[j]));
        }
        s
    }
}

/// Solves with boundary data `s * base` for every scale and fits `sup |Du|` against the local mean.
///
/// `theta` is the exponent of the estimate being tested (for `p, q` growth `2/((n+2)p - nq)`).
pub fn scaling_study(f: &dyn EnergyDensity, base: BaseData, theta: f64, cfg: &ScalingConfig) -> Result<ScalingStudy> {
    if cfg.scales.len() < 2 || cfg.scales[0] < 1.0 || cfg.scales.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput(format!("scales must be strictly increasing and >= 1, got {:?}", cfg.scales)));
    }
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::InvalidInput(format!("theta must be positive, got {theta}")));
    }
    let opts = SolverOptions { tol: cfg.tol, max_iter: cfg.max_iter, memory: 10, sup_radii: vec![cfg.rho], mean_pairs: vec![(cfg.rho, cfg.r)] };
    let solves: Vec<Result<(f64, f64, usize, bool)>> = cfg
        .scales
        .par_iter()
        .map(|&s| {
            let data = GridFunction::from_fn(cfg.n_grid, |x, y| s * base.eval(x, y))?;
            let r = minimize(f, &data.coons_fill(), &opts)?;
            Ok((r.sup_grad[0].1, r.local_mean[0].2, r.iterations, r.converged))
        })
        .collect();

    let mut scales = Vec::new();
    let mut sup_grads = Vec::new();
    let mut means = Vec::new();
    let mut iterations = Vec::new();
    let mut aborted = None;
    for (&s, res) in cfg.scales.iter().zip(solves) {
        match res {
            Ok((g, m, it, true)) => {
                scales.push(s);
                sup_grads.push(g);
                means.push(m);
                iterations.push(it);
            }
            Ok((_, _, it, false)) => {
                aborted = Some(format!("solver did not converge at scale {s} after {it} iterations"));
                break;
            }
            Err(e) => {
                aborted = Some(format!("scale {s}: {e}"));
                break;
            }
        }
    }

    let k = scales.len();
    let top = k / 2;
    let fitted_slope = if k - top >= 2 {
        let xs: Vec<f64> = means[top..].iter().map(|m| m.ln()).collect();
        let ys: Vec<f64> = sup_grads[top..].iter().map(|g| g.ln()).collect();
        slope(&xs, &ys)
    } else {
        f64::NAN
    };
    let fitted_c = (0..k).map(|j| sup_grads[j] / means[j].powf(theta)).fold(0.0, f64::max);
    let bound_ok = (0..k).all(|j| sup_grads[j] <= fitted_c * means[j].powf(theta) * (1.0 + 1e-12));
    Ok(ScalingStudy {
        base: base.label(),
        span_decades: (cfg.scales[cfg.scales.len() - 1] / cfg.scales[0]).log10(),
        sup_monotone: sup_grads.windows(2).all(|w| w[1] >= w[0]),
        scales,
        sup_grads,
        means,
        iterations,
        slope_ok: fitted_slope <= theta + cfg.slope_tol,
        fitted_slope,
        theta_theoretical: theta,
        fitted_c,
        bound_ok,
        aborted,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Admissibility {
    Admissible,
    Boundary,
    Inadmissible,
}

#[derive(Clone, Debug, Serialize)]
pub struct IterationSchedule {
    pub n: usize,
    pub beta: f64,
    pub two_star: f64,
    pub deltas: Vec<f64>,
    pub closed_form: Vec<f64>,
    /// `delta_i (2/2*)^i`.
    pub normalized: Vec<f64>,
    pub limit: f64,
    pub admissibility: Admissibility,
    /// Largest relative gap between recursion and closed form.
    pub max_rel_gap: f64,
}

impl IterationSchedule {
    pub fn stays_above_two(&self) -> bool {
        self.deltas.iter().all(|&d| d >= 2.0)
    }
}

/// `delta_0 = 2`, `delta_{i+1} = (delta_i - 2 beta) 2*/2`, together with its closed form.
pub fn iteration_schedule(n: usize, beta: f64, two_star: f64, i_max: usize) -> Result<IterationSchedule> {
    let nf = n as f64;
    if n < 2 || !(beta > 1.0 / nf && beta < 2.0 / nf) {
        return Err(Error::InvalidInput(format!("need 1/n < beta < 2/n, got n = {n}, beta = {beta}")));
    }
    if !(two_star > 2.0 && two_star.is_finite()) {
        return Err(Error::InvalidInput(format!("2* must be finite and > 2, got {two_star}")));
    }
    let ratio = two_star / 2.0;
    let k = beta * two_star / (two_star - 2.0);
    let mut deltas = Vec::with_capacity(i_max + 1);
    let mut d = 2.0;
    for _ in 0..=i_max {
        deltas.push(d);
        d = (d - 2.0 * beta) * ratio;
    }
    let closed_form: Vec<f64> = (0..=i_max).map(|i| 2.0 * ratio.powi(i as i32) * (1.0 - k) + 2.0 * k).collect();
    let normalized: Vec<f64> = deltas.iter().enumerate().map(|(i, d)| d * ratio.powi(-(i as i32))).collect();
    let max_rel_gap = deltas
        .iter()
        .zip(&closed_form)
        .map(|(a, b)| if a == b { 0.0 } else { (a - b).abs() / a.abs().max(b.abs()) })
        .fold(0.0, f64::max);
    let b = 1.0 - 2.0 / two_star;
    let admissibility = if beta < b {
        Admissibility::Admissible
    } else if beta == b {
        Admissibility::Boundary
    } else {
        Admissibility::Inadmissible
    };
    Ok(IterationSchedule { n, beta, two_star, deltas, closed_form, normalized, limit: 2.0 - 2.0 * k, admissibility, max_rel_gap })
}

/// A nonnegative field on the unit square.
pub type Field<'a> = &'a (dyn Fn([f64; 2]) -> f64 + Sync);

#[derive(Clone, Debug, Serialize)]
pub struct InterpolationCheck {
    pub theta_cap: f64,
    pub lambda: f64,
    pub premise_c: f64,
    pub conclusion_c: f64,
    pub radius_pairs: Vec<(f64, f64)>,
    pub n_grid: usize,
    /// False when the premise admits no finite constant for the family.
    pub applicable: bool,
}

pub const DEFAULT_RADIUS_PAIRS: [(f64, f64); 6] = [(0.05, 0.1), (0.1, 0.2), (0.15, 0.35), (0.2, 0.3), (0.1, 0.45), (0.25, 0.45)];

const CUT_SUB: usize = 8;

/// `int_{B_r(CENTER)} phi(v)` on an `N x N` cell partition: Gauss points in cells inside the ball,
/// an `8 x 8` midpoint rule with indicator on cells cut by the sphere.
pub fn field_ball_integral(v: Field, r: f64, n_grid: usize, phi: impl Fn(f64) -> f64) -> f64 {
    let h = 1.0 / n_grid as f64;
    let inside = |x: f64, y: f64| (x - CENTER[0]).hypot(y - CENTER[1]) < r;
    let mut total = 0.0;
    for j in 0..n_grid {
        for i in 0..n_grid {
            let (x0, y0) = (i as f64 * h, j as f64 * h);
            let corners = [(x0, y0), (x0 + h, y0), (x0, y0 + h), (x0 + h, y0 + h)];
            let cnt = corners.iter().filter(|c| inside(c.0, c.1)).count();
            let (cx, cy) = ((x0 + 0.5 * h - CENTER[0]).abs(), (y0 + 0.5 * h - CENTER[1]).abs());
            if cnt == 0 && (cx.max(cy) - 0.5 * h > r || cx.hypot(cy) > r + h) {
                continue;
            }
            if cnt == 4 {
                for b in GAUSS {
                    for a in GAUSS {
                        total += phi(v([x0 + a * h, y0 + b * h])) * 0.25 * h * h;
                    }
                }
            } else {
                let hs = h / CUT_SUB as f64;
                for q in 0..CUT_SUB {
                    for p in 0..CUT_SUB {
                        let (x, y) = (x0 + (p as f64 + 0.5) * hs, y0 + (q as f64 + 0.5) * hs);
                        if inside(x, y) {
                            total += phi(v([x, y])) * hs * hs;
                        }
                    }
                }
            }
        }
    }
    total
}

/// `sup v` over the grid nodes and cell midpoints in the closed ball `B_r(CENTER)`.
pub fn field_ball_sup(v: Field, r: f64, n_grid: usize) -> f64 {
    let m = 2 * n_grid;
    let h = 1.0 / m as f64;
    let mut sup = f64::NEG_INFINITY;
    for j in 0..=m {
        for i in 0..=m {
            let x = [i as f64 * h, j as f64 * h];
            if (x[0] - CENTER[0]).hypot(x[1] - CENTER[1]) <= r {
                sup = sup.max(v(x));
            }
        }
    }
    sup
}

fn check_pairs(pairs: &[(f64, f64)]) -> Result<()> {
    for &(rho, r) in pairs {
        if !(rho > 0.0 && rho < r && r < 0.5) {
            return Err(Error::InvalidInput(format!("need 0 < rho < R < 1/2, got ({rho}, {r})")));
        }
    }
    if pairs.is_empty() {
        return Err(Error::InvalidInput("no radius pairs".into()));
    }
    Ok(())
}

/// Minimal constants of the premise `|v|_inf^(1/th) <= c (R-rho)^-2 int |v|` and of the conclusion
/// `|v|_inf^((1 - th (1 - lam)) / th) <= c_lam (R-rho)^-2 int |v|^lam`, uniform over the family and the radius pairs.
pub fn interpolation_lemma_check(family: &[Field], theta_cap: f64, lambda: f64, radius_pairs: &[(f64, f64)], n_grid: usize) -> Result<InterpolationCheck> {
    if !(theta_cap >= 1.0) {
        return Err(Error::InvalidInput(format!("theta_cap must be >= 1, got {theta_cap}")));
    }
    let lo = (theta_cap - 1.0) / theta_cap;
    if !(lambda > lo && lambda < 1.0) {
        return Err(Error::InvalidInput(format!("lambda must lie in ({lo}, 1), got {lambda}")));
    }
    check_pairs(radius_pairs)?;
    if family.is_empty() {
        return Err(Error::InvalidInput("empty family".into()));
    }
    let e = (1.0 - theta_cap * (1.0 - lambda)) / theta_cap;
    let jobs: Vec<(usize, (f64, f64))> = (0..family.len()).flat_map(|m| radius_pairs.iter().map(move |&p| (m, p))).collect();
    let consts: Vec<(f64, f64)> = jobs
        .par_iter()
        .map(|&(m, (rho, r))| {
            let v = family[m];
            let sup = field_ball_sup(v, rho, n_grid);
            let w = (r - rho).powi(2);
            let i1 = field_ball_integral(v, r, n_grid, f64::abs);
            let il = field_ball_integral(v, r, n_grid, |x| x.abs().powf(lambda));
            let premise = if sup <= 0.0 { 0.0 } else { sup.powf(1.0 / theta_cap) * w / i1 };
            let concl = if sup <= 0.0 { 0.0 } else { sup.powf(e) * w / il };
            (premise, concl)
        })
        .collect();
    let premise_c = consts.iter().map(|c| c.0).fold(0.0, f64::max);
    let conclusion_c = consts.iter().map(|c| c.1).fold(0.0, f64::max);
    Ok(InterpolationCheck {
        theta_cap,
        lambda,
        premise_c,
        conclusion_c,
        radius_pairs: radius_pairs.to_vec(),
        n_grid,
        applicable: premise_c.is_finite(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LambdaSweep {
    pub rows: Vec<(f64, f64)>,
    /// `c_lambda` non-decreasing as `lambda` decreases.
    pub monotone_growth: bool,
}

pub fn lambda_sweep(family: &[Field], theta_cap: f64, lambdas: &[f64], radius_pairs: &[(f64, f64)], n_grid: usize) -> Result<LambdaSweep> {
    let mut ls = lambdas.to_vec();
    ls.sort_by(|a, b| b.total_cmp(a));
    let mut rows = Vec::new();
    for l in ls {
        rows.push((l, interpolation_lemma_check(family, theta_cap, l, radius_pairs, n_grid)?.conclusion_c));
    }
    let monotone_growth = rows.windows(2).all(|w| w[1].1 >= w[0].1);
    Ok(LambdaSweep { rows, monotone_growth })
}

/// Radial spike `(1 + |x - center|)^-gamma`.
pub fn spike(gamma: f64) -> impl Fn([f64; 2]) -> f64 + Sync {
    move |x: [f64; 2]| (1.0 + (x[0] - CENTER[0]).hypot(x[1] - CENTER[1])).powf(-gamma)
}

/// Breakpoints `1 + s = ratio^k` on `(0, t)` with `ratio = 10^(1/e)`, so a power `(1+s)^e` changes
/// by at most a factor 10 between them.
fn scale_breaks(t: f64, e: f64) -> Vec<f64> {
    let ratio = 10f64.powf(1.0 / e.max(1.0));
    let mut out = Vec::new();
    let mut x = ratio;
    while x - 1.0 < t {
        out.push(x - 1.0);
        x *= ratio;
    }
    out
}

pub const LEMMA_RTOL: f64 = 1e-10;

#[derive(Clone, Debug, Serialize)]
pub struct G1G2Row {
    pub gamma: f64,
    pub t: f64,
    /// `1 + g2(1+t)^(1/2*) (1+t)^(gamma/2+1-beta) / (gamma/2+1-beta)^2`.
    pub left_coeff: f64,
    /// `1 + int_0^t (1+s)^((gamma-2)/2) s sqrt(g1(1+s)) ds`.
    pub right: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct G1G2Table {
    pub beta: f64,
    pub two_star: f64,
    pub rows: Vec<G1G2Row>,
    /// Largest feasible `C3` per gamma.
    pub c3: Vec<(f64, f64)>,
    pub c3_min: f64,
    pub bounded_below: bool,
}

pub fn g1g2_integral_check(g1: &(dyn Fn(f64) -> f64 + Sync), g2: &(dyn Fn(f64) -> f64 + Sync), beta: f64, gammas: &[f64], two_star: f64, t_grid: &[f64]) -> Result<G1G2Table> {
    if !(two_star > 2.0) {
        return Err(Error::InvalidInput(format!("2* must exceed 2, got {two_star}")));
    }
    if t_grid.iter().any(|&t| !(t >= 0.0 && t.is_finite())) {
        return Err(Error::InvalidInput("t grid must be finite and nonnegative".into()));
    }
    let jobs: Vec<(f64, f64)> = gammas.iter().flat_map(|&g| t_grid.iter().map(move |&t| (g, t))).collect();
    let rows: Vec<Result<G1G2Row>> = jobs
        .par_iter()
        .map(|&(gamma, t)| {
            let a = gamma / 2.0 + 1.0 - beta;
            if !(a > 0.0) {
                return Err(Error::InvalidInput(format!("gamma/2 + 1 - beta must be positive, got {a}")));
            }
            let left_coeff = 1.0 + g2(1.0 + t).powf(1.0 / two_star) * (1.0 + t).powf(a) / (a * a);
            let e = (gamma / 2.0 - 1.0).abs() + 1.5;
            let integral = integrate_adaptive(|s| (1.0 + s).powf((gamma - 2.0) / 2.0) * s * g1(1.0 + s).sqrt(), 0.0, t, &scale_breaks(t, e), LEMMA_RTOL)?;
            let right = 1.0 + integral;
            Ok(G1G2Row { gamma, t, left_coeff, right, ratio: right / left_coeff })
        })
        .collect();
    let rows: Vec<G1G2Row> = rows.into_iter().collect::<Result<_>>()?;
    let c3: Vec<(f64, f64)> = gammas
        .iter()
        .map(|&g| (g, rows.iter().filter(|r| r.gamma == g).map(|r| r.ratio).fold(f64::INFINITY, f64::min)))
        .collect();
    let c3_min = c3.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    Ok(G1G2Table { beta, two_star, rows, c3, c3_min, bounded_below: c3_min > 0.0 && c3_min.is_finite() })
}

/// `(e^(x L) - 1) / x`, continuous at `x = 0`.
fn expm1_over(x: f64, l: f64) -> f64 {
    if (x * l).abs() < 1e-10 {
        l * (1.0 + 0.5 * x * l)
    } else {
        (x * l).exp_m1() / x
    }
}

/// `int_0^t (1+s)^(alpha-2) s ds = ((1+t)^alpha - 1)/alpha - ((1+t)^(alpha-1) - 1)/(alpha-1)`
/// (`t - ln(1+t)` at `alpha = 1`).
pub fn lemmapaolo_integral(alpha: f64, t: f64) -> f64 {
    let l = t.ln_1p();
    if alpha == 1.0 {
        return t - l;
    }
    expm1_over(alpha, l) - expm1_over(alpha - 1.0, l)
}

/// Smallest `c` with `(1+t)^alpha <= c alpha^2 (1 + I(t))`, computed with `(1+t)^-alpha` factored out.
pub fn lemmapaolo_min_c(alpha: f64, t: f64) -> f64 {
    let l = t.ln_1p();
    let w = (-alpha * l).exp();
    let a = -(-alpha * l).exp_m1() / alpha;
    let b = if (alpha - 1.0).abs() * l < 1e-10 { w * l * (1.0 + 0.5 * (alpha - 1.0) * l) } else { ((-l).exp() - w) / (alpha - 1.0) };
    1.0 / (alpha * alpha * (w + a - b))
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmapaoloRow {
    pub alpha: f64,
    pub min_c: f64,
    pub worst_t: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmapaoloTable {
    pub alpha0: f64,
    pub rows: Vec<LemmapaoloRow>,
    pub sup_c: f64,
    pub bounded: bool,
}

pub fn lemmapaolo_check(alphas: &[f64], alpha0: f64, t_grid: &[f64]) -> Result<LemmapaoloTable> {
    if !(alpha0 > 0.0) {
        return Err(Error::InvalidInput(format!("alpha0 must be positive, got {alpha0}")));
    }
    if let Some(a) = alphas.iter().find(|&&a| !(a >= alpha0)) {
        return Err(Error::InvalidInput(format!("alpha = {a} is below alpha0 = {alpha0}")));
    }
    if t_grid.is_empty() || t_grid.iter().any(|&t| !(t >= 0.0 && t.is_finite())) {
        return Err(Error::InvalidInput("t grid must be nonempty, finite and nonnegative".into()));
    }
    let rows: Vec<LemmapaoloRow> = alphas
        .par_iter()
        .map(|&alpha| {
            let (mut min_c, mut worst_t) = (f64::NEG_INFINITY, t_grid[0]);
            for &t in t_grid {
                let c = lemmapaolo_min_c(alpha, t);
                if c > min_c {
                    min_c = c;
                    worst_t = t;
                }
            }
            LemmapaoloRow { alpha, min_c, worst_t }
        })
        .collect();
    let sup_c = rows.iter().map(|r| r.min_c).fold(0.0, f64::max);
    Ok(LemmapaoloTable { alpha0, rows, sup_c, bounded: sup_c.is_finite() })
}

#[derive(Clone, Debug, Serialize)]
pub struct Step1Probe {
    pub beta: f64,
    pub rho: f64,
    pub r: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub c4: f64,
    /// `1 + t^2 g2(t) <= (1/g2(1) + 1) t^2 g2(t)` on the probe grid.
    pub plus_one_ok: bool,
    pub plus_one_margin: f64,
}

/// Evaluates `max(1, sup_{B_rho} |Du|)^(2 - 2 beta)` against
/// `(R - rho)^-2 int_{B_R} w^2 g2(w)` with `w = max(1, |Du|)`.
pub fn step1_inequality_probe(u: &GridFunction, g2: &dyn Fn(f64) -> f64, beta: f64, rho: f64, r: f64, t_grid: &[f64]) -> Result<Step1Probe> {
    if !(rho > 0.0 && rho < r && r < 0.5) {
        return Err(Error::InvalidInput(format!("need 0 < rho < R < 1/2, got rho = {rho}, R = {r}")));
    }
    let sup = interior_sup_gradient(u, rho)?;
    let lhs = sup.max(1.0).powf(2.0 - 2.0 * beta);
    let integral = ball_integral(u, r, |xi| {
        let w = xi[0].hypot(xi[1]).max(1.0);
        w * w * g2(w)
    })?;
    let rhs = integral / (r - rho).powi(2);
    let g21 = g2(1.0);
    let mut margin = f64::INFINITY;
    for &t in t_grid.iter().filter(|&&t| t >= 1.0) {
        let m = t * t * g2(t);
        margin = margin.min(((1.0 / g21 + 1.0) * m - (1.0 + m)) / (1.0 + m));
    }
    Ok(Step1Probe { beta, rho, r, lhs, rhs, c4: lhs / rhs, plus_one_ok: margin >= -1e-12, plus_one_margin: margin })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_by_hand() {
        let s = iteration_schedule(4, 0.375, 4.0, 3).unwrap();
        assert_eq!(s.deltas[1], 2.5);
        assert!((s.limit - 0.5).abs() < 1e-15);
        assert_eq!(s.admissibility, Admissibility::Admissible);
    }

    #[test]
    fn lemmapaolo_at_zero() {
        for a in [0.5, 1.0, 2.0, 10.0] {
            assert!((lemmapaolo_min_c(a, 0.0) - 1.0 / (a * a)).abs() < 1e-15);
        }
        let near = lemmapaolo_integral(1.0 + 1e-12, 3.0);
        assert!((near - (3.0 - 4f64.ln())).abs() < 1e-9);
    }

    #[test]
    fn base_data_parse() {
        assert_eq!(BaseData::parse("affine(2,-1)").unwrap(), BaseData::Affine { a: 2.0, b: -1.0 });
        assert_eq!(BaseData::parse("saddle").unwrap(), BaseData::Saddle);
        assert!(BaseData::parse("cubic").is_err());
    }
}
