use std::sync::Arc;

use super::{check_dim, dot, norm, power_window, Density, EnergyDensity, ExtendedProfile, GrowthClass, Params, Profile};
use crate::error::Result;

/// `f(xi) = G(|xi|)` for an extended profile `G`.
#[derive(Clone, Debug)]
pub struct RadialDensity {
    name: String,
    n: usize,
    profile: ExtendedProfile,
    params: Params,
}

impl RadialDensity {
    pub fn new(name: &str, n: usize, profile: Profile, t0: f64, params: Params) -> Result<Self> {
        Ok(Self {
            name: name.to_string(),
            n,
            profile: ExtendedProfile::new(name, profile, t0)?,
            params,
        })
    }

    pub fn arc(self) -> Density {
        Arc::new(self)
    }
}

/// Radial Hessian form `g'' (xi_hat . lambda)^2 + (g'/t)(|lambda|^2 - (xi_hat . lambda)^2)`.
pub(crate) fn radial_quadform(profile: &ExtendedProfile, xi: &[f64], lambda: &[f64]) -> Result<f64> {
    let t = norm(xi);
    let (d2, slope) = profile.eigen(t)?;
    let l2 = dot(lambda, lambda);
    if t == 0.0 {
        return Ok(d2 * l2);
    }
    let along = dot(xi, lambda) / t;
    let along2 = along * along;
    Ok(d2 * along2 + slope * (l2 - along2).max(0.0))
}

pub(crate) fn radial_grad(profile: &ExtendedProfile, xi: &[f64], out: &mut [f64]) {
    let t = norm(xi);
    if t == 0.0 {
        out.iter_mut().for_each(|o| *o = 0.0);
        return;
    }
    let s = profile.d1(t) / t;
    for (o, x) in out.iter_mut().zip(xi) {
        *o = s * x;
    }
}

impl EnergyDensity for RadialDensity {
    fn name(&self) -> &str {
        &self.name
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn params(&self) -> &Params {
        &self.params
    }
    fn t0(&self) -> f64 {
        self.profile.t0
    }

    fn eval(&self, xi: &[f64]) -> f64 {
        self.profile.value(norm(xi))
    }

    fn grad_into(&self, xi: &[f64], out: &mut [f64]) {
        radial_grad(&self.profile, xi, out)
    }

    fn hess_quadform(&self, xi: &[f64], lambda: &[f64]) -> Result<f64> {
        check_dim(self.n, xi.len())?;
        check_dim(self.n, lambda.len())?;
        radial_quadform(&self.profile, xi, lambda)
    }

    fn g1_closed(&self, t: f64) -> Option<f64> {
        let (a, b) = self.profile.eigen(t).ok()?;
        Some(a.min(b))
    }

    fn g2_closed(&self, t: f64) -> Option<f64> {
        let (a, b) = self.profile.eigen(t).ok()?;
        Some(a.max(b))
    }

    fn growth_class(&self) -> GrowthClass {
        match self.profile.profile {
            Profile::PowerRegularized { p } | Profile::Power { p } => GrowthClass::Power { lower: p, upper: p, growth: p },
            _ => GrowthClass::Logarithmic,
        }
    }

    fn pq(&self) -> Option<(f64, f64)> {
        match self.profile.profile {
            Profile::PowerRegularized { p } | Profile::Power { p } => Some((p, p)),
            _ => None,
        }
    }

    fn radial_profile(&self) -> Option<&ExtendedProfile> {
        Some(&self.profile)
    }

    fn default_window(&self) -> (f64, f64) {
        let t0 = self.profile.t0;
        match self.profile.profile {
            Profile::LogPower { a } => {
                let t_min = (t0 + 1.0).max(a.max(1.0).exp() * std::f64::consts::E);
                (t_min, (1e3 * t_min).max(1e4))
            }
            Profile::IteratedLog { k } => {
                let t_min = (t0 + 1.0).max(std::f64::consts::E);
                let t_max = match k {
                    1 => 1e4,
                    2 => 1e6,
                    _ => 1e40,
                };
                (t_min, t_max)
            }
            Profile::PowerRegularized { p } | Profile::Power { p } => power_window(t0 + 1.0, p),
            Profile::TimesIteratedLog { .. } => (t0 + 1.0, 1e4),
        }
    }
}
