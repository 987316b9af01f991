//! One-dimensional profiles `g(t)` and their extension inside `[0, t0)`.

use crate::error::{invalid, Error, Result};

/// A closed-form profile defined for `t >= 0` (or `t >= 1` for `LogPower`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Profile {
    /// `(1 + t^2)^(p/2)`
    PowerRegularized { p: f64 },
    /// `t^p`
    Power { p: f64 },
    /// `t (ln t)^a`
    LogPower { a: f64 },
    /// `(1 + t) L_k(t)`
    IteratedLog { k: u32 },
    /// `t L_k(t)`
    TimesIteratedLog { k: u32 },
}

/// `(L_k, prod_{j<k} (1 + L_j), sum_{i<k} 1 / prod_{j<=i} (1 + L_j))` with `L_1 = ln(1 + t)`.
pub fn iterated_logs(t: f64, k: u32) -> (f64, f64, f64) {
    let mut l = t;
    let mut prod = 1.0;
    let mut sum = 0.0;
    for j in 1..=k {
        l = l.ln_1p();
        if j < k {
            prod *= 1.0 + l;
            sum += 1.0 / prod;
        }
    }
    (l, prod, sum)
}

impl Profile {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Profile::PowerRegularized { p } => (1.0 + t * t).powf(0.5 * p),
            Profile::Power { p } => t.powf(p),
            Profile::LogPower { a } => {
                let l = t.ln();
                if l <= 0.0 {
                    0.0
                } else {
                    t * l.powf(a)
                }
            }
            Profile::IteratedLog { k } => (1.0 + t) * iterated_logs(t, k).0,
            Profile::TimesIteratedLog { k } => t * iterated_logs(t, k).0,
        }
    }

    pub fn d1(&self, t: f64) -> f64 {
        match *self {
            Profile::PowerRegularized { p } => p * t * (1.0 + t * t).powf(0.5 * p - 1.0),
            Profile::Power { p } => p * t.powf(p - 1.0),
            Profile::LogPower { a } => {
                let l = t.ln();
                l.powf(a) + a * l.powf(a - 1.0)
            }
            Profile::IteratedLog { k } => {
                let (l, prod, _) = iterated_logs(t, k);
                l + 1.0 / prod
            }
            Profile::TimesIteratedLog { k } => {
                let (l, prod, _) = iterated_logs(t, k);
                l + t / ((1.0 + t) * prod)
            }
        }
    }

    pub fn d2(&self, t: f64) -> f64 {
        match *self {
            Profile::PowerRegularized { p } => {
                let s = 1.0 + t * t;
                p * s.powf(0.5 * p - 2.0) * (1.0 + (p - 1.0) * t * t)
            }
            Profile::Power { p } => p * (p - 1.0) * t.powf(p - 2.0),
            Profile::LogPower { a } => {
                let l = t.ln();
                a / t * l.powf(a - 2.0) * (l + a - 1.0)
            }
            Profile::IteratedLog { k } => {
                let (_, prod, sum) = iterated_logs(t, k);
                (1.0 - sum) / ((1.0 + t) * prod)
            }
            Profile::TimesIteratedLog { k } => {
                let (_, prod, sum) = iterated_logs(t, k);
                (2.0 - t / (1.0 + t) * (1.0 + sum)) / ((1.0 + t) * prod)
            }
        }
    }

    /// `g'(t) / t`, evaluated without cancellation where a closed form exists.
    pub fn slope(&self, t: f64) -> f64 {
        match *self {
            Profile::PowerRegularized { p } => p * (1.0 + t * t).powf(0.5 * p - 1.0),
            Profile::Power { p } => p * t.powf(p - 2.0),
            _ => self.d1(t) / t,
        }
    }

    /// Radial Hessian at the origin when the profile is used without extension.
    fn curvature_at_zero(&self) -> Option<f64> {
        match *self {
            Profile::PowerRegularized { p } => Some(p),
            Profile::Power { p } if p == 2.0 => Some(2.0),
            Profile::Power { p } if p > 2.0 => Some(0.0),
            _ => None,
        }
    }

    /// Smallest admissible `t0` for which the profile is convex and nondecreasing beyond it.
    pub fn min_t0(&self) -> f64 {
        match *self {
            Profile::LogPower { a } => (1.0 - a).max(0.0).exp(),
            Profile::IteratedLog { .. } | Profile::TimesIteratedLog { .. } => {
                if self.d2(0.0) >= 0.0 {
                    return 0.0;
                }
                let (mut lo, mut hi) = (0.0, 1.0);
                while self.d2(hi) < 0.0 {
                    lo = hi;
                    hi *= 2.0;
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.d2(mid) < 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                hi
            }
            _ => 0.0,
        }
    }
}

/// Shape of the profile inside `[0, t0)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Extension {
    None,
    /// `a0 + b t^2`
    Quadratic { a0: f64, b: f64 },
    /// `c (t - t1)_+^2`; `c = 0` means identically zero (a kink at `t0`).
    FlatQuadratic { t1: f64, c: f64 },
}

/// A profile together with its convex even extension inside `t0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtendedProfile {
    pub profile: Profile,
    pub t0: f64,
    pub extension: Extension,
}

impl ExtendedProfile {
    pub fn new(entry: &str, profile: Profile, t0: f64) -> Result<Self> {
        if !(t0.is_finite() && t0 >= 0.0) {
            return Err(invalid(entry, format!("t0 must be finite and >= 0, got {t0}")));
        }
        let min_t0 = profile.min_t0();
        if t0 < min_t0 * (1.0 - 1e-12) {
            return Err(invalid(
                entry,
                format!("t0 = {t0} is below {min_t0:.12}, where the profile stops being convex"),
            ));
        }
        let extension = if t0 == 0.0 {
            Extension::None
        } else {
            let v = profile.value(t0);
            let s = profile.d1(t0);
            if s < 0.0 || v < 0.0 {
                return Err(invalid(entry, format!("profile must be nonnegative and nondecreasing at t0 = {t0}")));
            }
            let a0 = v - 0.5 * s * t0;
            if a0 >= 0.0 {
                Extension::Quadratic { a0, b: s / (2.0 * t0) }
            } else {
                let t1 = t0 - 2.0 * v / s;
                let c = if t0 > t1 { s / (2.0 * (t0 - t1)) } else { 0.0 };
                Extension::FlatQuadratic { t1, c }
            }
        };
        Ok(Self { profile, t0, extension })
    }

    fn inside(&self, t: f64) -> bool {
        t < self.t0 && self.extension != Extension::None
    }

    pub fn value(&self, t: f64) -> f64 {
        if !self.inside(t) {
            return self.profile.value(t);
        }
        match self.extension {
            Extension::Quadratic { a0, b } => a0 + b * t * t,
            Extension::FlatQuadratic { t1, c } => {
                let d = (t - t1).max(0.0);
                c * d * d
            }
            Extension::None => unreachable!(),
        }
    }

    pub fn d1(&self, t: f64) -> f64 {
        if !self.inside(t) {
            return self.profile.d1(t);
        }
        match self.extension {
            Extension::Quadratic { b, .. } => 2.0 * b * t,
            Extension::FlatQuadratic { t1, c } => 2.0 * c * (t - t1).max(0.0),
            Extension::None => unreachable!(),
        }
    }

    pub fn d2(&self, t: f64) -> f64 {
        if !self.inside(t) {
            return self.profile.d2(t);
        }
        match self.extension {
            Extension::Quadratic { b, .. } => 2.0 * b,
            Extension::FlatQuadratic { t1, c } => {
                if t > t1 {
                    2.0 * c
                } else {
                    0.0
                }
            }
            Extension::None => unreachable!(),
        }
    }

    /// `g'(t) / t`, with the limit value at `t = 0` when it exists.
    pub fn slope(&self, t: f64) -> Result<f64> {
        if t > 0.0 {
            return Ok(if self.inside(t) { self.d1(t) / t } else { self.profile.slope(t) });
        }
        self.curvature_at_zero()
    }

    pub fn curvature_at_zero(&self) -> Result<f64> {
        match self.extension {
            Extension::Quadratic { b, .. } => Ok(2.0 * b),
            Extension::FlatQuadratic { t1, c } => Ok(if t1 > 0.0 { 0.0 } else { 2.0 * c }),
            Extension::None => self
                .profile
                .curvature_at_zero()
                .ok_or_else(|| Error::Singular("profile is not twice differentiable at 0".into())),
        }
    }

    /// Radial eigenvalues `(g'', g'/t)`.
    pub fn eigen(&self, t: f64) -> Result<(f64, f64)> {
        if t == 0.0 {
            let c = self.curvature_at_zero()?;
            return Ok((c, c));
        }
        Ok((self.d2(t), self.slope(t)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd1(p: &ExtendedProfile, t: f64) -> f64 {
        let h = 1e-6 * t.max(1.0);
        (p.value(t + h) - p.value(t - h)) / (2.0 * h)
    }

    fn fd2(p: &ExtendedProfile, t: f64) -> f64 {
        let h = 1e-4 * t.max(1.0);
        (p.value(t + h) - 2.0 * p.value(t) + p.value(t - h)) / (h * h)
    }

    #[test]
    fn derivatives_match_differences() {
        let cases = [
            ExtendedProfile::new("t", Profile::PowerRegularized { p: 1.5 }, 0.0).unwrap(),
            ExtendedProfile::new("t", Profile::Power { p: 1.3 }, 1.0).unwrap(),
            ExtendedProfile::new("t", Profile::LogPower { a: 0.5 }, 0.5f64.exp()).unwrap(),
            ExtendedProfile::new("t", Profile::LogPower { a: 3.0 }, 1.0).unwrap(),
            ExtendedProfile::new("t", Profile::IteratedLog { k: 3 }, 1.0).unwrap(),
            ExtendedProfile::new("t", Profile::TimesIteratedLog { k: 2 }, 1.0).unwrap(),
        ];
        for p in &cases {
            for &t in &[0.3, 0.9, 1.7, 3.0, 12.0, 150.0] {
                if (t - p.t0).abs() < 1e-3 {
                    continue;
                }
                let d1 = p.d1(t);
                assert!((d1 - fd1(p, t)).abs() <= 1e-6 * d1.abs().max(1.0), "{p:?} t={t}");
                let d2 = p.d2(t);
                assert!((d2 - fd2(p, t)).abs() <= 1e-4 * d2.abs().max(1e-2), "{p:?} t={t} {d2} {}", fd2(p, t));
            }
        }
    }

    #[test]
    fn extension_is_c1_at_t0() {
        for (prof, t0) in [
            (Profile::Power { p: 1.2 }, 1.0),
            (Profile::LogPower { a: 0.8 }, 0.2f64.exp()),
            (Profile::LogPower { a: 2.0 }, 2.0),
            (Profile::IteratedLog { k: 1 }, 1.0),
        ] {
            let e = ExtendedProfile::new("t", prof, t0).unwrap();
            let below = t0 * (1.0 - 1e-12);
            assert!((e.value(below) - prof.value(t0)).abs() < 1e-9);
            assert!((e.d1(below) - prof.d1(t0)).abs() < 1e-9);
        }
    }

    #[test]
    fn log_power_below_convexity_radius_is_rejected() {
        assert!(ExtendedProfile::new("log_power", Profile::LogPower { a: 0.5 }, 1.0).is_err());
    }

    #[test]
    fn iterated_logs_by_hand() {
        let t = std::f64::consts::E - 1.0;
        let (l2, prod, sum) = iterated_logs(t, 2);
        assert!((l2 - 2f64.ln()).abs() < 1e-15);
        assert!((prod - 2.0).abs() < 1e-15);
        assert!((sum - 0.5).abs() < 1e-15);
    }
}
