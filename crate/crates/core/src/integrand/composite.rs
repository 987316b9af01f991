use super::anisotropic::{hess_quadform_degenerate, radicand_eval, radicand_g2, radicand_grad_add, s_exponent};
use super::radial::{radial_grad, radial_quadform};
use super::{check_dim, norm, power_window, EnergyDensity, ExtendedProfile, GrowthClass, GrowthKind, Params, Profile};
use crate::error::Result;

/// `G(|xi|) + sqrt(sum_i |xi_i|^(2 p_i))`.
#[derive(Clone, Debug)]
pub struct RadialPlusH {
    name: String,
    radial: ExtendedProfile,
    p: Vec<f64>,
    params: Params,
    kind: GrowthKind,
}

impl RadialPlusH {
    pub(crate) fn new(name: &str, radial: ExtendedProfile, p: Vec<f64>, params: Params, kind: GrowthKind) -> Self {
        Self { name: name.to_string(), radial, p, params, kind }
    }

    fn h_exponents(&self) -> (f64, f64) {
        self.p.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)))
    }

    /// `s` of the radicand.
    pub fn s(&self) -> f64 {
        let (p, q) = self.h_exponents();
        s_exponent(p, q)
    }
}

impl EnergyDensity for RadialPlusH {
    fn name(&self) -> &str {
        &self.name
    }
    fn dim(&self) -> usize {
        self.p.len()
    }
    fn params(&self) -> &Params {
        &self.params
    }
    fn t0(&self) -> f64 {
        self.radial.t0
    }
    fn eval(&self, xi: &[f64]) -> f64 {
        self.radial.value(norm(xi)) + radicand_eval(xi, &self.p)
    }
    fn grad_into(&self, xi: &[f64], out: &mut [f64]) {
        radial_grad(&self.radial, xi, out);
        radicand_grad_add(xi, &self.p, out);
    }
    fn hess_quadform(&self, xi: &[f64], lambda: &[f64]) -> Result<f64> {
        check_dim(self.p.len(), xi.len())?;
        check_dim(self.p.len(), lambda.len())?;
        Ok(radial_quadform(&self.radial, xi, lambda)? + hess_quadform_degenerate(xi, lambda, &self.p)?)
    }
    fn g1_closed(&self, t: f64) -> Option<f64> {
        let (a, b) = self.radial.eigen(t).ok()?;
        Some(a.min(b))
    }
    fn g2_closed(&self, t: f64) -> Option<f64> {
        let (a, b) = self.radial.eigen(t).ok()?;
        Some(a.max(b) + radicand_g2(&self.p, t)?)
    }
    fn closed_from(&self) -> f64 {
        self.radial.t0.max((self.p.len() as f64).sqrt())
    }
    fn growth_class(&self) -> GrowthClass {
        let s = self.s();
        match self.kind {
            GrowthKind::Power(p) => GrowthClass::Power { lower: p, upper: p.max(s), growth: p },
            GrowthKind::Logarithmic => GrowthClass::Power { lower: 1.0, upper: s, growth: 1.0 },
        }
    }
    fn pq(&self) -> Option<(f64, f64)> {
        match self.kind {
            GrowthKind::Power(p) => Some((p, self.h_exponents().1)),
            GrowthKind::Logarithmic => None,
        }
    }
    fn default_window(&self) -> (f64, f64) {
        let base = self.closed_from().max(self.radial.t0 + 1.0);
        match self.radial.profile {
            Profile::LogPower { a } => {
                let t_min = base.max(a.max(1.0).exp() * std::f64::consts::E);
                (t_min, (1e3 * t_min).max(1e4))
            }
            Profile::TimesIteratedLog { .. } => (base.max(std::f64::consts::E), 1e6),
            Profile::Power { p } => power_window(base, p),
            _ => (base, 1e4),
        }
    }
}
