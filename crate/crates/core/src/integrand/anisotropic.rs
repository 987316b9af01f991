use super::{check_dim, power_window, EnergyDensity, ExtendedProfile, GrowthClass, Params, Profile};
use crate::error::{Error, Result};

fn check_lengths(xi: &[f64], lambda: &[f64], p: &[f64]) -> Result<()> {
    check_dim(p.len(), xi.len())?;
    check_dim(p.len(), lambda.len())
}

fn minmax(p: &[f64]) -> (f64, f64) {
    p.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)))
}

/// `s = (p/q)(q - 2) + 2`.
pub(crate) fn s_exponent(p: f64, q: f64) -> f64 {
    p / q * (q - 2.0) + 2.0
}

/// Quadratic form of `sum_i (1 + xi_i^2)^(p_i/2)`.
pub fn hess_quadform_aniso(xi: &[f64], lambda: &[f64], p: &[f64]) -> Result<f64> {
    check_lengths(xi, lambda, p)?;
    Ok(aniso_q(xi, lambda, p))
}

fn aniso_q(xi: &[f64], lambda: &[f64], p: &[f64]) -> f64 {
    xi.iter()
        .zip(lambda)
        .zip(p)
        .map(|((&x, &l), &pi)| {
            let s = 1.0 + x * x;
            pi * (1.0 + (pi - 1.0) * x * x) * s.powf(0.5 * pi - 2.0) * l * l
        })
        .sum()
}

/// `S sum_i b_i lambda_i^2 + 1/2 sum_ij (v_i w_j - v_j w_i)^2`, which equals
/// `S sum_i a_i lambda_i^2 - (v . w)^2` with `a_i = b_i + v_i^2 / lambda_i^2`.
fn lagrange_form(s: f64, b: &[f64], v: &[f64], w: &[f64], lambda: &[f64]) -> f64 {
    let diag: f64 = b.iter().zip(lambda).map(|(bi, l)| bi * l * l).sum();
    let mut cross = 0.0;
    for i in 0..v.len() {
        for j in (i + 1)..v.len() {
            let c = v[i] * w[j] - v[j] * w[i];
            cross += c * c;
        }
    }
    s * diag + cross
}

/// Quadratic form of `sqrt(sum_i (1 + xi_i^2)^(p_i))`.
pub fn hess_quadform_sqrt_sum(xi: &[f64], lambda: &[f64], p: &[f64]) -> Result<f64> {
    check_lengths(xi, lambda, p)?;
    Ok(sqrt_sum_q(xi, lambda, p))
}

fn sqrt_sum_q(xi: &[f64], lambda: &[f64], p: &[f64]) -> f64 {
    let n = p.len();
    let (mut b, mut v, mut w) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut s = 0.0;
    for i in 0..n {
        let x2 = xi[i] * xi[i];
        let base = 1.0 + x2;
        s += base.powf(p[i]);
        w[i] = base.powf(0.5 * p[i]);
        v[i] = p[i] * xi[i] * base.powf(0.5 * p[i] - 1.0) * lambda[i];
        b[i] = p[i] * base.powf(p[i] - 2.0) * (1.0 + (p[i] - 1.0) * x2);
    }
    lagrange_form(s, &b, &v, &w, lambda) / s.powf(1.5)
}

/// Quadratic form of `sqrt(sum_i |xi_i|^(2 p_i))`; undefined at `xi = 0`.
pub fn hess_quadform_degenerate(xi: &[f64], lambda: &[f64], p: &[f64]) -> Result<f64> {
    check_lengths(xi, lambda, p)?;
    degenerate_q(xi, lambda, p)
}

fn degenerate_q(xi: &[f64], lambda: &[f64], p: &[f64]) -> Result<f64> {
    if xi.iter().all(|&x| x == 0.0) {
        return Err(Error::Singular("the radicand is not twice differentiable at xi = 0".into()));
    }
    let n = p.len();
    let (mut b, mut v, mut w) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut s = 0.0;
    for i in 0..n {
        let a = xi[i].abs();
        let sign = if xi[i] < 0.0 { -1.0 } else { 1.0 };
        s += a.powf(2.0 * p[i]);
        w[i] = a.powf(p[i]);
        v[i] = p[i] * a.powf(p[i] - 1.0) * sign * lambda[i];
        b[i] = p[i] * (p[i] - 1.0) * a.powf(2.0 * p[i] - 2.0);
    }
    Ok(lagrange_form(s, &b, &v, &w, lambda) / s.powf(1.5))
}

pub(crate) fn radicand_eval(xi: &[f64], p: &[f64]) -> f64 {
    xi.iter().zip(p).map(|(x, pi)| x.abs().powf(2.0 * pi)).sum::<f64>().sqrt()
}

pub(crate) fn radicand_grad_add(xi: &[f64], p: &[f64], out: &mut [f64]) {
    let h = radicand_eval(xi, p);
    if h == 0.0 {
        return;
    }
    for ((o, &x), &pi) in out.iter_mut().zip(xi).zip(p) {
        if x != 0.0 {
            *o += pi * x.abs().powf(2.0 * pi - 2.0) * x / h;
        }
    }
}

/// Upper bound `(2q^2 - q) n^((2-s)/2) t^(s-2)` on the radicand's form, valid for `t >= sqrt(n)`, `q <= 2`.
pub(crate) fn radicand_g2(p: &[f64], t: f64) -> Option<f64> {
    let (pmin, q) = minmax(p);
    if q > 2.0 {
        return None;
    }
    let n = p.len() as f64;
    let s = s_exponent(pmin, q);
    Some((2.0 * q * q - q) * n.powf(0.5 * (2.0 - s)) * t.powf(s - 2.0))
}

/// `sum_i (1 + xi_i^2)^(p_i/2)`.
#[derive(Clone, Debug)]
pub struct AnisoPowerSum {
    p: Vec<f64>,
    params: Params,
}

impl AnisoPowerSum {
    pub fn new(p: Vec<f64>, params: Params) -> Self {
        Self { p, params }
    }
}

impl EnergyDensity for AnisoPowerSum {
    fn name(&self) -> &str {
        "aniso_power_sum"
    }
    fn dim(&self) -> usize {
        self.p.len()
    }
    fn params(&self) -> &Params {
        &self.params
    }
    fn t0(&self) -> f64 {
        0.0
    }
    fn eval(&self, xi: &[f64]) -> f64 {
        xi.iter().zip(&self.p).map(|(x, p)| (1.0 + x * x).powf(0.5 * p)).sum()
    }
    fn grad_into(&self, xi: &[f64], out: &mut [f64]) {
        for ((o, x), p) in out.iter_mut().zip(xi).zip(&self.p) {
            *o = p * x * (1.0 + x * x).powf(0.5 * p - 1.0);
        }
    }
    fn hess_quadform(&self, xi: &[f64], lambda: &[f64]) -> Result<f64> {
        hess_quadform_aniso(xi, lambda, &self.p)
    }
    fn g1_closed(&self, t: f64) -> Option<f64> {
        let p = minmax(&self.p).0;
        Some(p * (p - 1.0) * (1.0 + t * t).powf(0.5 * (p - 2.0)))
    }
    fn g2_closed(&self, _t: f64) -> Option<f64> {
        Some(2.0)
    }
    fn growth_class(&self) -> GrowthClass {
        let p = minmax(&self.p).0;
        GrowthClass::Power { lower: p, upper: 2.0, growth: p }
    }
    fn pq(&self) -> Option<(f64, f64)> {
        Some((minmax(&self.p).0, 2.0))
    }
    fn default_window(&self) -> (f64, f64) {
        power_window(1.0, minmax(&self.p).0)
    }
}

/// `sqrt(sum_i (1 + xi_i^2)^(p_i))`.
#[derive(Clone, Debug)]
pub struct SqrtPowerSum {
    p: Vec<f64>,
    params: Params,
}

impl SqrtPowerSum {
    pub fn new(p: Vec<f64>, params: Params) -> Self {
        Self { p, params }
    }

    /// The power-law lower bound `p(p-1)/sqrt(n) * (|xi|^2/2)^(-q/2)` (valid for `|xi| >= 1`).
    pub fn g1_power_law(&self, t: f64) -> f64 {
        let (p, q) = minmax(&self.p);
        p * (p - 1.0) / (self.p.len() as f64).sqrt() * 2f64.powf(-0.5 * q) * t.powf(-q)
    }
}

impl EnergyDensity for SqrtPowerSum {
    fn name(&self) -> &str {
        "sqrt_power_sum"
    }
    fn dim(&self) -> usize {
        self.p.len()
    }
    fn params(&self) -> &Params {
        &self.params
    }
    fn t0(&self) -> f64 {
        0.0
    }
    fn eval(&self, xi: &[f64]) -> f64 {
        xi.iter().zip(&self.p).map(|(x, p)| (1.0 + x * x).powf(*p)).sum::<f64>().sqrt()
    }
    fn grad_into(&self, xi: &[f64], out: &mut [f64]) {
        let f = self.eval(xi);
        for ((o, x), p) in out.iter_mut().zip(xi).zip(&self.p) {
            *o = p * x * (1.0 + x * x).powf(p - 1.0) / f;
        }
    }
    fn hess_quadform(&self, xi: &[f64], lambda: &[f64]) -> Result<f64> {
        hess_quadform_sqrt_sum(xi, lambda, &self.p)
    }
    fn g1_closed(&self, t: f64) -> Option<f64> {
        let (_, q) = minmax(&self.p);
        (q <= 2.0).then(|| self.g1_power_law(t))
    }
    fn g2_closed(&self, t: f64) -> Option<f64> {
        let (p, q) = minmax(&self.p);
        if q > 2.0 {
            return None;
        }
        let n = self.p.len() as f64;
        let s = s_exponent(p, q);
        Some((2.0 * q * q - q) * n.powf(0.5 * (2.0 - s)) * t.powf(s - 2.0))
    }
    fn closed_from(&self) -> f64 {
        1.0
    }
    fn growth_class(&self) -> GrowthClass {
        let (p, q) = minmax(&self.p);
        GrowthClass::Power { lower: 2.0 - q, upper: s_exponent(p, q), growth: p }
    }
    fn pq(&self) -> Option<(f64, f64)> {
        Some(minmax(&self.p))
    }
    fn default_window(&self) -> (f64, f64) {
        power_window(1.0, minmax(&self.p).0)
    }
}

/// `sqrt(sum_i |xi_i|^(2 p_i))`.
#[derive(Clone, Debug)]
pub struct DegenerateRadicand {
    p: Vec<f64>,
    params: Params,
}

impl DegenerateRadicand {
    pub fn new(p: Vec<f64>, params: Params) -> Self {
        Self { p, params }
    }
}

impl EnergyDensity for DegenerateRadicand {
    fn name(&self) -> &str {
        "degenerate_radicand"
    }
    fn dim(&self) -> usize {
        self.p.len()
    }
    fn params(&self) -> &Params {
        &self.params
    }
    fn t0(&self) -> f64 {
        0.0
    }
    fn eval(&self, xi: &[f64]) -> f64 {
        radicand_eval(xi, &self.p)
    }
    fn grad_into(&self, xi: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        radicand_grad_add(xi, &self.p, out);
    }
    fn hess_quadform(&self, xi: &[f64], lambda: &[f64]) -> Result<f64> {
        hess_quadform_degenerate(xi, lambda, &self.p)
    }
    fn g2_closed(&self, t: f64) -> Option<f64> {
        radicand_g2(&self.p, t)
    }
    fn closed_from(&self) -> f64 {
        (self.p.len() as f64).sqrt()
    }
    fn pq(&self) -> Option<(f64, f64)> {
        Some(minmax(&self.p))
    }
    fn default_window(&self) -> (f64, f64) {
        ((self.p.len() as f64).sqrt(), 1e4)
    }
}

/// `sum_i G_i(|xi_i|)` for one-dimensional extended profiles.
#[derive(Clone, Debug)]
pub struct Separable {
    name: String,
    profiles: Vec<ExtendedProfile>,
    t0: f64,
    params: Params,
}

impl Separable {
    pub fn new(name: &str, profiles: Vec<Profile>, t0: f64, params: Params) -> Result<Self> {
        let profiles = profiles
            .into_iter()
            .map(|p| ExtendedProfile::new(name, p, t0))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { name: name.to_string(), profiles, t0, params })
    }
}

impl EnergyDensity for Separable {
    fn name(&self) -> &str {
        &self.name
    }
    fn dim(&self) -> usize {
        self.profiles.len()
    }
    fn params(&self) -> &Params {
        &self.params
    }
    fn t0(&self) -> f64 {
        self.t0
    }
    fn eval(&self, xi: &[f64]) -> f64 {
        xi.iter().zip(&self.profiles).map(|(x, g)| g.value(x.abs())).sum()
    }
    fn grad_into(&self, xi: &[f64], out: &mut [f64]) {
        for ((o, x), g) in out.iter_mut().zip(xi).zip(&self.profiles) {
            *o = g.d1(x.abs()) * x.signum();
            if *x == 0.0 {
                *o = 0.0;
            }
        }
    }
    fn hess_quadform(&self, xi: &[f64], lambda: &[f64]) -> Result<f64> {
        check_dim(self.profiles.len(), xi.len())?;
        check_dim(self.profiles.len(), lambda.len())?;
        let mut q = 0.0;
        for ((x, l), g) in xi.iter().zip(lambda).zip(&self.profiles) {
            let c = if *x == 0.0 { g.curvature_at_zero()? } else { g.d2(x.abs()) };
            q += c * l * l;
        }
        Ok(q)
    }
    fn growth_class(&self) -> GrowthClass {
        GrowthClass::Logarithmic
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct_sqrt_sum(xi: &[f64], lambda: &[f64], p: &[f64]) -> f64 {
        let n = p.len();
        let s: f64 = (0..n).map(|i| (1.0 + xi[i] * xi[i]).powf(p[i])).sum();
        let vw: f64 = (0..n)
            .map(|i| {
                let b = 1.0 + xi[i] * xi[i];
                p[i] * xi[i] * b.powf(0.5 * p[i] - 1.0) * lambda[i] * b.powf(0.5 * p[i])
            })
            .sum();
        let a: f64 = (0..n)
            .map(|i| {
                let b = 1.0 + xi[i] * xi[i];
                p[i] * b.powf(p[i] - 2.0) * (1.0 + (2.0 * p[i] - 1.0) * xi[i] * xi[i]) * lambda[i] * lambda[i]
            })
            .sum();
        (-vw * vw + s * a) / s.powf(1.5)
    }

    #[test]
    fn aniso_examples() {
        assert_eq!(hess_quadform_aniso(&[0.0, 0.0], &[0.3, -2.0], &[2.0, 2.0]).unwrap(), 2.0 * (0.09 + 4.0));
        let q = hess_quadform_aniso(&[1.0, 0.0], &[0.0, 1.0], &[2.0, 1.5]).unwrap();
        assert!((q - 1.5).abs() < 1e-15);
        assert!(hess_quadform_aniso(&[1.0], &[0.0, 1.0], &[2.0, 1.5]).is_err());
    }

    #[test]
    fn sqrt_sum_matches_displayed_form() {
        let p = [1.3, 1.8, 2.5];
        for xi in [[0.1, -2.0, 0.7], [3.0, 0.0, -1.0], [0.0, 0.0, 0.0]] {
            for l in [[1.0, 0.0, 0.0], [0.3, -0.4, 0.5]] {
                let a = hess_quadform_sqrt_sum(&xi, &l, &p).unwrap();
                let b = direct_sqrt_sum(&xi, &l, &p);
                assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-3), "{a} {b}");
            }
        }
        let q = hess_quadform_sqrt_sum(&[0.0, 0.0], &[1.0, 2.0], &[1.5, 1.2]).unwrap();
        assert!((q - (1.5 + 1.2 * 4.0) / 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn degenerate_norm_case() {
        let xi = [0.6, -1.7];
        let lam = [0.4, 0.9];
        let t2: f64 = 0.36 + 2.89;
        let xl = 0.6 * 0.4 - 1.7 * 0.9;
        let expect = ((0.16 + 0.81) - xl * xl / t2) / t2.sqrt();
        let q = hess_quadform_degenerate(&xi, &lam, &[1.0, 1.0]).unwrap();
        assert!((q - expect).abs() < 1e-14);
        assert_eq!(hess_quadform_degenerate(&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]).unwrap(), 1.0);
        assert!(hess_quadform_degenerate(&[1.0, 2.0], &[1.0, 2.0], &[1.0, 1.0]).unwrap().abs() < 1e-15);
        assert!(matches!(hess_quadform_degenerate(&[0.0, 0.0], &[1.0, 0.0], &[1.0, 1.0]), Err(Error::Singular(_))));
    }

    #[test]
    fn degenerate_orthogonal_claim_fails_for_unequal_exponents() {
        let q = hess_quadform_degenerate(&[1.0, 1.0], &[1.0, -1.0], &[1.0, 2.0]).unwrap();
        assert!(q > 0.1);
    }

    #[test]
    fn sqrt_sum_lower_power_law_is_violated() {
        let p = [1.5, 1.8];
        let (pm, q): (f64, f64) = (1.5, 1.8);
        let c = (pm * pm - pm) / 2f64.sqrt();
        let t: f64 = 1e3;
        let val = hess_quadform_sqrt_sum(&[t, 0.0], &[0.0, 1.0], &p).unwrap();
        assert!(val < c * t.powf(2.0 * pm - 2.0 - q));
    }
}
