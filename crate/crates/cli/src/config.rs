use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

pub const OUT_ENV: &str = "SLOWGROWTH_OUT";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub general: General,
    pub analyze: Analyze,
    pub approx: Approx,
    pub solve: Solve,
    pub scale: Scale,
    pub lemmas: Lemmas,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            general: General::default(),
            analyze: Analyze::default(),
            approx: Approx::default(),
            solve: Solve::default(),
            scale: Scale::default(),
            lemmas: Lemmas::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct General {
    pub integrand: String,
    pub seed: u64,
    pub out_dir: String,
}

impl Default for General {
    fn default() -> Self {
        Self {
            integrand: "power_regularized(p=1.5)".into(),
            seed: 0,
            out_dir: std::env::var(OUT_ENV).unwrap_or_else(|_| "slowgrowth-out".into()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Analyze {
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub points: usize,
    pub n_dirs: usize,
    pub mu: Option<f64>,
    pub beta: Option<f64>,
    pub alpha: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub two_star: Option<f64>,
}

impl Default for Analyze {
    fn default() -> Self {
        Self { t_min: None, t_max: None, points: 200, n_dirs: 256, mu: None, beta: None, alpha: None, c1: None, c2: None, two_star: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Approx {
    /// Defaults to the integrand's own `t0`.
    pub t0: Option<f64>,
    pub ks: Vec<usize>,
    pub n_points: usize,
    pub n_dirs: usize,
    pub n_grid: usize,
    pub rho: f64,
    pub eps: Vec<f64>,
}

impl Default for Approx {
    fn default() -> Self {
        Self { t0: None, ks: vec![4, 16, 64, 128, 256], n_points: 60, n_dirs: 64, n_grid: 256, rho: 0.25, eps: vec![0.08, 0.04, 0.02, 0.01] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Solve {
    pub n_grid: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub boundary: String,
    pub scale: f64,
    pub rho: f64,
    pub radius: f64,
}

impl Default for Solve {
    fn default() -> Self {
        Self { n_grid: 64, tol: 1e-8, max_iter: 100_000, boundary: "mixed".into(), scale: 8.0, rho: 0.15, radius: 0.35 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scale {
    pub n_grid: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub boundary: String,
    pub scales: Vec<f64>,
    pub rho: f64,
    pub radius: f64,
    pub slope_tol: f64,
    /// Defaults to `2/((n+2)p - nq)` for `p, q` growth, otherwise to `theta` of the hypothesis report.
    pub theta: Option<f64>,
}

impl Default for Scale {
    fn default() -> Self {
        let d = slowgrowth::apriori::ScalingConfig::default();
        Self {
            n_grid: d.n_grid,
            tol: d.tol,
            max_iter: d.max_iter,
            boundary: "mixed".into(),
            scales: d.scales,
            rho: d.rho,
            radius: d.r,
            slope_tol: d.slope_tol,
            theta: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Lemmas {
    /// `(n, beta, 2*)` triples for the exponent schedule.
    pub schedules: Vec<(usize, f64, f64)>,
    pub i_max: usize,
    pub spike_gammas: Vec<f64>,
    pub theta_cap: f64,
    pub lambda: f64,
    pub lambdas: Vec<f64>,
    pub n_grid: usize,
    pub refine_grid: usize,
    pub gammas: Vec<f64>,
    pub alphas: Vec<f64>,
    pub alpha0: f64,
    pub t_max: f64,
    pub t_points: usize,
}

impl Default for Lemmas {
    fn default() -> Self {
        Self {
            schedules: vec![(3, 0.4, 6.0), (3, 0.5, 6.0), (4, 0.3, 4.0)],
            i_max: 200,
            spike_gammas: vec![0.5, 1.0, 2.0, 4.0],
            theta_cap: 2.0,
            lambda: 0.75,
            lambdas: vec![0.55, 0.65, 0.75, 0.9],
            n_grid: 64,
            refine_grid: 256,
            gammas: vec![0.0, 2.0, 8.0, 32.0],
            alphas: vec![0.5, 1.0, 2.0, 10.0, 100.0],
            alpha0: 0.5,
            t_max: 1e3,
            t_points: 60,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("cannot read config {}", p.display()))?;
                toml::from_str(&text).with_context(|| format!("invalid config {}", p.display()))
            }
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn out_dir(&self) -> PathBuf {
        PathBuf::from(&self.general.out_dir)
    }
}
