//! Energy densities `f: R^n -> [0, inf)` with analytic gradients and Hessian quadratic forms.

mod anisotropic;
mod composite;
mod parse;
pub mod profile;
mod radial;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

pub use anisotropic::{
    hess_quadform_aniso, hess_quadform_degenerate, hess_quadform_sqrt_sum, AnisoPowerSum,
    DegenerateRadicand, Separable, SqrtPowerSum,
};
pub use composite::RadialPlusH;
pub use parse::{parse_spec, IntegrandSpec};
pub use profile::{ExtendedProfile, Extension, Profile};
pub use radial::RadialDensity;

use crate::error::{invalid, Error, Result};

/// A named parameter value: a scalar or an exponent list.
#[derive(Clone, Debug, PartialEq)]
pub enum ParamValue {
    Scalar(f64),
    List(Vec<f64>),
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Scalar(x) => write!(f, "{x}"),
            ParamValue::List(v) => {
                write!(f, "[")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, "]")
            }
        }
    }
}

pub type Params = BTreeMap<String, ParamValue>;

/// Power-type asymptotics used to pick hypothesis constants:
/// `g1 ~ t^(lower-2)`, `g2 ~ t^(upper-2)`, `f >~ t^growth`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GrowthClass {
    Power { lower: f64, upper: f64, growth: f64 },
    /// Linear growth times logarithmic factors.
    Logarithmic,
    Unknown,
}

/// A convex energy density together with its derivatives.
pub trait EnergyDensity: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;
    fn dim(&self) -> usize;
    fn params(&self) -> &Params;
    /// Radius outside which `f` is `C^2` and the hypotheses are checked.
    fn t0(&self) -> f64;
    fn eval(&self, xi: &[f64]) -> f64;
    fn grad_into(&self, xi: &[f64], out: &mut [f64]);
    /// `sum_ij f_{xi_i xi_j}(xi) lambda_i lambda_j`.
    fn hess_quadform(&self, xi: &[f64], lambda: &[f64]) -> Result<f64>;

    fn grad(&self, xi: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; xi.len()];
        self.grad_into(xi, &mut out);
        out
    }

    /// Closed-form lower ellipticity bound, valid for `t >= closed_from()`.
    fn g1_closed(&self, _t: f64) -> Option<f64> {
        None
    }
    /// Closed-form upper ellipticity bound, valid for `t >= closed_from()`.
    fn g2_closed(&self, _t: f64) -> Option<f64> {
        None
    }
    fn closed_from(&self) -> f64 {
        self.t0()
    }
    fn growth_class(&self) -> GrowthClass {
        GrowthClass::Unknown
    }
    /// `(p, q)` exponents of the power-type ellipticity bounds, when they exist.
    fn pq(&self) -> Option<(f64, f64)> {
        None
    }
    /// Radial profile, for radial densities only.
    fn radial_profile(&self) -> Option<&ExtendedProfile> {
        None
    }
    /// Default `[t_min, t_max]` for the hypothesis grid.
    fn default_window(&self) -> (f64, f64) {
        (self.t0() + 1.0, 1e4)
    }

    /// Canonical `name(key=value,...)` string.
    fn spec_string(&self) -> String {
        let body: Vec<String> = self.params().iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{}({})", self.name(), body.join(","))
    }
}

pub type Density = Arc<dyn EnergyDensity>;

/// Window whose upper end lets `t^(growth-1)` grow by a factor 8 past `t_min`.
pub(crate) fn power_window(t_min: f64, growth: f64) -> (f64, f64) {
    let needed = t_min * 8f64.powf(1.0 / (growth - 1.0).max(1e-9)) * 10.0;
    (t_min, needed.clamp(1e4, 1e300))
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Description of a catalog entry for listings.
#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub formula: &'static str,
    pub params: &'static str,
}

pub const CATALOG: &[CatalogEntry] = &[
    CatalogEntry { name: "power_regularized", formula: "(1+|xi|^2)^(p/2)", params: "p > 1; n >= 2 (default 2)" },
    CatalogEntry { name: "radial_power", formula: "|xi|^p", params: "p > 1; n >= 2 (default 2)" },
    CatalogEntry { name: "log_power", formula: "|xi| (log|xi|)^a for |xi| >= t0", params: "a > 0; t0 >= max(1, e^(1-a)) (default that bound); n >= 2" },
    CatalogEntry { name: "iterated_log", formula: "(1+|xi|) L_k(|xi|)", params: "integer k >= 1; t0 >= convexity radius (default 1); n >= 2" },
    CatalogEntry { name: "aniso_power_sum", formula: "sum_i (1+xi_i^2)^(p_i/2)", params: "p = [p_1..p_n], 1 < p_i <= 2" },
    CatalogEntry { name: "sqrt_power_sum", formula: "sqrt(sum_i (1+xi_i^2)^(p_i))", params: "p = [p_1..p_n], p_i > 1" },
    CatalogEntry { name: "degenerate_radicand", formula: "sqrt(sum_i |xi_i|^(2 p_i))", params: "p = [p_1..p_n], p_i >= 1" },
    CatalogEntry { name: "p_plus_h", formula: "|xi|^p + sqrt(sum_i |xi_i|^(2 p_i))", params: "1 < p <= 2 (default min p_i); ps = [p_1..p_n], p_i >= 1" },
    CatalogEntry { name: "log_plus_h", formula: "|xi| (log|xi|)^a + sqrt(sum_{i<n} xi_i^2 + |xi_n|^(2q))", params: "a > 0; 1 < q <= 2; n >= 2 (default 2); t0 as log_power" },
    CatalogEntry { name: "iterlog_plus_h", formula: "|xi| L_k(|xi|) + sqrt(sum_{i<n} xi_i^2 + |xi_n|^(2q))", params: "integer k >= 1; 1 < q <= 2; n >= 2 (default 2); t0 >= convexity radius (default 1)" },
    CatalogEntry { name: "separable_log_power", formula: "sum_i |xi_i| (log|xi_i|)^(a_i)", params: "a = [a_1..a_n], a_i > 0; t0 as log_power" },
    CatalogEntry { name: "separable_iterated_log", formula: "sum_i (1+|xi_i|) L_(k_i)(|xi_i|)", params: "k = [k_1..k_n], integers >= 1; t0 (default 1)" },
];

/// Builds a catalog entry from a parsed specification.
pub fn catalog_lookup(name: &str, params: &Params) -> Result<Density> {
    let p = ParamReader { entry: name, params };
    let d: Density = match name {
        "power_regularized" => {
            p.allow(&["p", "n"])?;
            let exp = p.scalar("p")?;
            p.require(exp > 1.0, "p > 1")?;
            RadialDensity::new(name, p.dim(2)?, Profile::PowerRegularized { p: exp }, 0.0, p.canonical())?.arc()
        }
        "radial_power" => {
            p.allow(&["p", "n"])?;
            let exp = p.scalar("p")?;
            p.require(exp > 1.0, "p > 1")?;
            RadialDensity::new(name, p.dim(2)?, Profile::Power { p: exp }, 0.0, p.canonical())?.arc()
        }
        "log_power" => {
            p.allow(&["a", "t0", "n"])?;
            let a = p.scalar("a")?;
            p.require(a > 0.0, "a > 0")?;
            let prof = Profile::LogPower { a };
            let t0 = p.scalar_or("t0", prof.min_t0())?;
            p.require(t0 >= 1.0, "t0 >= 1")?;
            RadialDensity::new(name, p.dim(2)?, prof, t0, p.canonical_with("t0", t0))?.arc()
        }
        "iterated_log" => {
            p.allow(&["k", "t0", "n"])?;
            let k = p.integer("k")?;
            let prof = Profile::IteratedLog { k };
            let t0 = p.scalar_or("t0", prof.min_t0().max(1.0))?;
            RadialDensity::new(name, p.dim(2)?, prof, t0, p.canonical_with("t0", t0))?.arc()
        }
        "aniso_power_sum" => {
            p.allow(&["p"])?;
            let ps = p.list("p")?;
            p.require(ps.iter().all(|&x| x > 1.0 && x <= 2.0), "all p_i in (1, 2]")?;
            Arc::new(AnisoPowerSum::new(ps, p.canonical()))
        }
        "sqrt_power_sum" => {
            p.allow(&["p"])?;
            let ps = p.list("p")?;
            p.require(ps.iter().all(|&x| x > 1.0), "all p_i > 1")?;
            Arc::new(SqrtPowerSum::new(ps, p.canonical()))
        }
        "degenerate_radicand" => {
            p.allow(&["p"])?;
            let ps = p.list("p")?;
            p.require(ps.iter().all(|&x| x >= 1.0), "all p_i >= 1")?;
            Arc::new(DegenerateRadicand::new(ps, p.canonical()))
        }
        "p_plus_h" => {
            p.allow(&["p", "ps"])?;
            let ps = p.list("ps")?;
            p.require(ps.iter().all(|&x| x >= 1.0), "all p_i >= 1")?;
            let pmin = ps.iter().cloned().fold(f64::INFINITY, f64::min);
            let exp = p.scalar_or("p", pmin)?;
            p.require(exp > 1.0 && exp <= 2.0, "1 < p <= 2")?;
            let t0 = if exp < 2.0 { 1.0 } else { 0.0 };
            let radial = ExtendedProfile::new(name, Profile::Power { p: exp }, t0)?;
            let mut canon = p.canonical();
            canon.insert("p".into(), ParamValue::Scalar(exp));
            Arc::new(RadialPlusH::new(name, radial, ps, canon, GrowthKind::Power(exp)))
        }
        "log_plus_h" | "iterlog_plus_h" => {
            let prof = if name == "log_plus_h" {
                p.allow(&["a", "q", "n", "t0"])?;
                let a = p.scalar("a")?;
                p.require(a > 0.0, "a > 0")?;
                Profile::LogPower { a }
            } else {
                p.allow(&["k", "q", "n", "t0"])?;
                Profile::TimesIteratedLog { k: p.integer("k")? }
            };
            let q = p.scalar("q")?;
            p.require(q > 1.0 && q <= 2.0, "1 < q <= 2")?;
            let n = p.dim(2)?;
            let t0 = p.scalar_or("t0", prof.min_t0().max(1.0))?;
            let radial = ExtendedProfile::new(name, prof, t0)?;
            let mut ps = vec![1.0; n];
            ps[n - 1] = q;
            let mut canon = p.canonical_with("t0", t0);
            canon.insert("n".into(), ParamValue::Scalar(n as f64));
            Arc::new(RadialPlusH::new(name, radial, ps, canon, GrowthKind::Logarithmic))
        }
        "separable_log_power" => {
            p.allow(&["a", "t0"])?;
            let a = p.list("a")?;
            p.require(a.iter().all(|&x| x > 0.0), "all a_i > 0")?;
            let profs: Vec<Profile> = a.iter().map(|&a| Profile::LogPower { a }).collect();
            let t0 = profs.iter().map(|q| q.min_t0()).fold(1.0, f64::max);
            let t0 = p.scalar_or("t0", t0)?;
            Arc::new(Separable::new(name, profs, t0, p.canonical_with("t0", t0))?)
        }
        "separable_iterated_log" => {
            p.allow(&["k", "t0"])?;
            let ks = p.list("k")?;
            p.require(ks.iter().all(|&x| x >= 1.0 && x.fract() == 0.0 && x <= 16.0), "all k_i integers in [1, 16]")?;
            let profs: Vec<Profile> = ks.iter().map(|&k| Profile::IteratedLog { k: k as u32 }).collect();
            let t0 = profs.iter().map(|q| q.min_t0()).fold(1.0, f64::max);
            let t0 = p.scalar_or("t0", t0)?;
            Arc::new(Separable::new(name, profs, t0, p.canonical_with("t0", t0))?)
        }
        _ => return Err(Error::UnknownIntegrand(name.to_string())),
    };
    Ok(d)
}

/// Parses `name(key=value,...)` and builds the entry.
pub fn from_spec(spec: &str) -> Result<Density> {
    let s = parse_spec(spec)?;
    catalog_lookup(&s.name, &s.params)
}

#[derive(Clone, Copy, Debug)]
pub(crate) enum GrowthKind {
    Power(f64),
    Logarithmic,
}

struct ParamReader<'a> {
    entry: &'a str,
    params: &'a Params,
}

impl ParamReader<'_> {
    fn allow(&self, keys: &[&str]) -> Result<()> {
        for k in self.params.keys() {
            if !keys.contains(&k.as_str()) {
                return Err(invalid(self.entry, format!("unknown parameter `{k}` (allowed: {})", keys.join(", "))));
            }
        }
        Ok(())
    }

    fn require(&self, ok: bool, constraint: &str) -> Result<()> {
        if ok {
            Ok(())
        } else {
            Err(invalid(self.entry, format!("violates {constraint} ({})", self.describe())))
        }
    }

    fn describe(&self) -> String {
        self.params.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(", ")
    }

    fn scalar_opt(&self, key: &str) -> Result<Option<f64>> {
        match self.params.get(key) {
            None => Ok(None),
            Some(ParamValue::Scalar(x)) if x.is_finite() => Ok(Some(*x)),
            Some(ParamValue::Scalar(x)) => Err(invalid(self.entry, format!("`{key}` must be finite, got {x}"))),
            Some(ParamValue::List(_)) => Err(invalid(self.entry, format!("`{key}` must be a number, not a list"))),
        }
    }

    fn scalar(&self, key: &str) -> Result<f64> {
        self.scalar_opt(key)?
            .ok_or_else(|| invalid(self.entry, format!("missing parameter `{key}`")))
    }

    fn scalar_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.scalar_opt(key)?.unwrap_or(default))
    }

    fn integer(&self, key: &str) -> Result<u32> {
        let k = self.scalar(key)?;
        if k < 1.0 || k.fract() != 0.0 || k > 16.0 {
            return Err(invalid(self.entry, format!("`{key}` must be an integer in [1, 16], got {k}")));
        }
        Ok(k as u32)
    }

    fn dim(&self, default: usize) -> Result<usize> {
        let n = self.scalar_or("n", default as f64)?;
        if n < 2.0 || n.fract() != 0.0 || n > 64.0 {
            return Err(invalid(self.entry, format!("`n` must be an integer in [2, 64], got {n}")));
        }
        Ok(n as usize)
    }

    fn list(&self, key: &str) -> Result<Vec<f64>> {
        match self.params.get(key) {
            Some(ParamValue::List(v)) => {
                if v.len() < 2 {
                    return Err(invalid(self.entry, format!("`{key}` needs n >= 2 entries")));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(invalid(self.entry, format!("`{key}` entries must be finite")));
                }
                Ok(v.clone())
            }
            Some(ParamValue::Scalar(_)) => Err(invalid(self.entry, format!("`{key}` must be a bracketed list"))),
            None => Err(invalid(self.entry, format!("missing parameter `{key}`"))),
        }
    }

    fn canonical(&self) -> Params {
        self.params.clone()
    }

    fn canonical_with(&self, key: &str, value: f64) -> Params {
        let mut c = self.params.clone();
        c.insert(key.to_string(), ParamValue::Scalar(value));
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_examples() {
        let f = from_spec("aniso_power_sum(p=[2,2])").unwrap();
        assert_eq!(f.eval(&[1.0, 1.0]), 4.0);
        assert_eq!(f.grad(&[1.0, 1.0]), vec![2.0, 2.0]);

        let e = std::f64::consts::E;
        let f = from_spec("log_power(a=1, t0=1)").unwrap();
        assert!((f.eval(&[e, 0.0]) - e).abs() < 1e-15);

        let f = from_spec("sqrt_power_sum(p=[1,1])");
        assert!(f.is_err());
        let s = SqrtPowerSum::new(vec![1.0, 1.0], Params::new());
        assert!((s.eval(&[3.0, 4.0]) - 27f64.sqrt()).abs() < 1e-14);

        let f = from_spec("iterated_log(k=2)").unwrap();
        assert!((f.eval(&[e - 1.0, 0.0]) - e * 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn rejections_name_the_constraint() {
        let err = from_spec("power_regularized(p=1)").unwrap_err().to_string();
        assert!(err.contains("p > 1"), "{err}");
        let err = from_spec("aniso_power_sum(p=[1.5,2.5])").unwrap_err().to_string();
        assert!(err.contains("(1, 2]"), "{err}");
        assert!(matches!(from_spec("nope(p=2)"), Err(Error::UnknownIntegrand(_))));
        assert!(from_spec("power_regularized(p=2, z=1)").is_err());
        assert!(from_spec("log_power(a=0.5, t0=1)").is_err());
    }

    #[test]
    fn spec_string_round_trips() {
        for s in ["power_regularized(p=1.5)", "p_plus_h(ps=[1.2,1.5])", "log_plus_h(a=2,q=1.5)"] {
            let f = from_spec(s).unwrap();
            let g = from_spec(&f.spec_string()).unwrap();
            assert_eq!(f.spec_string(), g.spec_string());
            assert_eq!(f.eval(&[2.5, -1.5]), g.eval(&[2.5, -1.5]));
        }
    }
}
