//! Nodal fields on the unit square, bilinear gradients and the discrete energy.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::integrand::EnergyDensity;

/// Offsets of the 2x2 Gauss points inside a unit cell.
pub const GAUSS: [f64; 2] = [0.5 - 0.288_675_134_594_812_9, 0.5 + 0.288_675_134_594_812_9];

/// Center of the square, about which the balls `B_rho` are taken.
pub const CENTER: [f64; 2] = [0.5, 0.5];

/// `(N+1) x (N+1)` nodal values on `[0,1]^2`, row-major with `x` varying fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    n: usize,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if n < 8 {
            return Err(Error::InvalidInput(format!("grid size N must be >= 8, got {n}")));
        }
        if values.len() != (n + 1) * (n + 1) {
            return Err(Error::Dimension { expected: (n + 1) * (n + 1), got: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("grid value at node {i}")));
        }
        Ok(Self { n, values })
    }

    pub fn from_fn(n: usize, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let h = 1.0 / n as f64;
        let mut values = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                values.push(f(i as f64 * h, j as f64 * h));
            }
        }
        Self::new(n, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * (self.n + 1) + i
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.index(i, j)]
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.n || j == self.n
    }

    pub fn interior_indices(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity((self.n - 1) * (self.n - 1));
        for j in 1..self.n {
            for i in 1..self.n {
                out.push(self.index(i, j));
            }
        }
        out
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Transfinite (Coons) interpolation of the boundary ring into the interior.
    pub fn coons_fill(&self) -> Self {
        let n = self.n;
        let h = self.spacing();
        let mut out = self.clone();
        let (c00, c10, c01, c11) = (self.get(0, 0), self.get(n, 0), self.get(0, n), self.get(n, n));
        for j in 1..n {
            let y = j as f64 * h;
            for i in 1..n {
                let x = i as f64 * h;
                let v = (1.0 - x) * self.get(0, j) + x * self.get(n, j) + (1.0 - y) * self.get(i, 0) + y * self.get(i, n)
                    - ((1.0 - x) * (1.0 - y) * c00 + x * (1.0 - y) * c10 + (1.0 - x) * y * c01 + x * y * c11);
                let k = out.index(i, j);
                out.values[k] = v;
            }
        }
        out
    }

    /// Bilinear interpolation onto the grid with `2N` cells.
    pub fn refine(&self) -> Self {
        let m = 2 * self.n;
        let mut values = Vec::with_capacity((m + 1) * (m + 1));
        for j in 0..=m {
            for i in 0..=m {
                let (i0, j0) = (i / 2, j / 2);
                let (i1, j1) = ((i + 1) / 2, (j + 1) / 2);
                values.push(0.25 * (self.get(i0, j0) + self.get(i1, j0) + self.get(i0, j1) + self.get(i1, j1)));
            }
        }
        Self { n: m, values }
    }

    /// Gradient of the bilinear interpolant in cell `(i, j)` at local coordinates `(a, b)`.
    pub fn cell_gradient(&self, i: usize, j: usize, a: f64, b: f64) -> [f64; 2] {
        let h = self.spacing();
        let (u00, u10, u01, u11) = (self.get(i, j), self.get(i + 1, j), self.get(i, j + 1), self.get(i + 1, j + 1));
        [((u10 - u00) * (1.0 - b) + (u11 - u01) * b) / h, ((u01 - u00) * (1.0 - a) + (u11 - u10) * a) / h]
    }

    pub fn cell_center(&self, i: usize, j: usize) -> [f64; 2] {
        let h = self.spacing();
        [(i as f64 + 0.5) * h, (j as f64 + 0.5) * h]
    }

    /// Cells whose center lies in the open ball `B_r(CENTER)`.
    pub fn cells_in_ball(&self, r: f64) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for j in 0..self.n {
            for i in 0..self.n {
                let c = self.cell_center(i, j);
                if (c[0] - CENTER[0]).hypot(c[1] - CENTER[1]) < r {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Row-major text dump, one grid row per line, 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.values.len() * 25);
        for row in self.values.chunks(self.n + 1) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            let _ = writeln!(s, "{}", line.join(" "));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut values = Vec::new();
        let mut rows = 0;
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            rows += 1;
            for tok in line.split_whitespace() {
                values.push(tok.parse::<f64>().map_err(|e| Error::InvalidInput(format!("grid value `{tok}`: {e}")))?);
            }
        }
        if rows < 2 {
            return Err(Error::InvalidInput("grid dump has fewer than two rows".into()));
        }
        Self::new(rows - 1, values)
    }
}

/// Values `f(Du)` at the four Gauss points of every cell, row by row.
fn cell_rows<T: Send>(u: &GridFunction, per_cell: impl Fn(usize, usize) -> T + Sync) -> Vec<Vec<T>> {
    (0..u.n).into_par_iter().map(|j| (0..u.n).map(|i| per_cell(i, j)).collect()).collect()
}

fn checked_eval(f: &dyn EnergyDensity, xi: &[f64; 2], i: usize, j: usize) -> Result<f64> {
    let v = f.eval(xi);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(format!("f(Du) = {v} in cell ({i}, {j}) at Du = {xi:?}")))
    }
}

/// `sum_cells sum_gauss f(Du) w h^2`.
pub fn discretize_energy(f: &dyn EnergyDensity, u: &GridFunction) -> Result<f64> {
    check_planar(f)?;
    let w = 0.25 * u.spacing() * u.spacing();
    let rows = cell_rows(u, |i, j| -> Result<f64> {
        let mut s = 0.0;
        for b in GAUSS {
            for a in GAUSS {
                s += checked_eval(f, &u.cell_gradient(i, j, a, b), i, j)?;
            }
        }
        Ok(s * w)
    });
    let mut total = 0.0;
    for row in rows {
        for c in row {
            total += c?;
        }
    }
    Ok(total)
}

pub(crate) fn check_planar(f: &dyn EnergyDensity) -> Result<()> {
    if f.dim() == 2 {
        Ok(())
    } else {
        Err(Error::Dimension { expected: 2, got: f.dim() })
    }
}

/// Energy and its gradient with respect to every nodal value.
pub fn energy_and_gradient(f: &dyn EnergyDensity, u: &GridFunction) -> Result<(f64, Vec<f64>)> {
    check_planar(f)?;
    let n = u.n;
    let h = u.spacing();
    let w = 0.25 * h * h;
    let rows = cell_rows(u, |i, j| -> Result<(f64, [f64; 4])> {
        let mut e = 0.0;
        let mut g = [0.0; 4];
        let mut d = [0.0; 2];
        for b in GAUSS {
            for a in GAUSS {
                let xi = u.cell_gradient(i, j, a, b);
                e += checked_eval(f, &xi, i, j)?;
                if xi[0].hypot(xi[1]) < 1e-12 {
                    continue;
                }
                f.grad_into(&xi, &mut d);
                let (dx, dy) = (d[0] * w / h, d[1] * w / h);
                g[0] += -dx * (1.0 - b) - dy * (1.0 - a);
                g[1] += dx * (1.0 - b) - dy * a;
                g[2] += -dx * b + dy * (1.0 - a);
                g[3] += dx * b + dy * a;
            }
        }
        Ok((e * w, g))
    });
    let mut total = 0.0;
    let mut grad = vec![0.0; (n + 1) * (n + 1)];
    for (j, row) in rows.into_iter().enumerate() {
        for (i, c) in row.into_iter().enumerate() {
            let (e, g) = c?;
            total += e;
            grad[u.index(i, j)] += g[0];
            grad[u.index(i + 1, j)] += g[1];
            grad[u.index(i, j + 1)] += g[2];
            grad[u.index(i + 1, j + 1)] += g[3];
        }
    }
    Ok((total, grad))
}

/// `sup |Du|` over the Gauss points of the cells centered in `B_rho(CENTER)`.
pub fn interior_sup_gradient(u: &GridFunction, rho: f64) -> Result<f64> {
    if !(rho > 0.0 && rho < 0.5) {
        return Err(Error::InvalidInput(format!("rho must lie in (0, 1/2), got {rho}")));
    }
    let cells = u.cells_in_ball(rho);
    if cells.is_empty() {
        return Err(Error::EmptyRegion(format!("no cell center lies in B_{rho}")));
    }
    let mut sup: f64 = 0.0;
    for (i, j) in cells {
        for b in GAUSS {
            for a in GAUSS {
                let g = u.cell_gradient(i, j, a, b);
                sup = sup.max(g[0].hypot(g[1]));
            }
        }
    }
    Ok(sup)
}

/// `int_{B_r} phi(Du)` by 2x2 Gauss quadrature over the cells centered in `B_r`.
pub fn ball_integral(u: &GridFunction, r: f64, phi: impl Fn([f64; 2]) -> f64) -> Result<f64> {
    let cells = u.cells_in_ball(r);
    if cells.is_empty() {
        return Err(Error::EmptyRegion(format!("no cell center lies in B_{r}")));
    }
    let w = 0.25 * u.spacing() * u.spacing();
    let mut s = 0.0;
    for (i, j) in cells {
        for b in GAUSS {
            for a in GAUSS {
                s += phi(u.cell_gradient(i, j, a, b)) * w;
            }
        }
    }
    Ok(s)
}

/// `(R - rho)^-2 int_{B_R} (1 + f(Du))`.
pub fn local_energy_mean(u: &GridFunction, f: &dyn EnergyDensity, rho: f64, r: f64) -> Result<f64> {
    check_planar(f)?;
    if !(rho > 0.0 && rho < r && r < 0.5) {
        return Err(Error::InvalidInput(format!("need 0 < rho < R < 1/2, got rho = {rho}, R = {r}")));
    }
    let s = ball_integral(u, r, |xi| 1.0 + f.eval(&xi))?;
    Ok(s / (r - rho).powi(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrand::from_spec;

    #[test]
    fn affine_energy() {
        let f = from_spec("aniso_power_sum(p=[2,2])").unwrap();
        let u = GridFunction::from_fn(16, |x, y| x + y).unwrap();
        assert!((discretize_energy(f.as_ref(), &u).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn text_round_trip() {
        let u = GridFunction::from_fn(9, |x, y| (x * 3.0).sin() + y / 7.0).unwrap();
        assert_eq!(GridFunction::from_text(&u.to_text()).unwrap(), u);
    }

    #[test]
    fn gradient_matches_differences() {
        let f = from_spec("power_regularized(p=1.5)").unwrap();
        let u = GridFunction::from_fn(8, |x, y| x * x - 2.0 * y * x + (3.0 * y).sin()).unwrap();
        let (_, g) = energy_and_gradient(f.as_ref(), &u).unwrap();
        for k in [0, 10, 40, 80] {
            let mut up = u.clone();
            let mut dn = u.clone();
            up.values[k] += 1e-6;
            dn.values[k] -= 1e-6;
            let fd = (discretize_energy(f.as_ref(), &up).unwrap() - discretize_energy(f.as_ref(), &dn).unwrap()) / 2e-6;
            assert!((fd - g[k]).abs() < 1e-7, "{k}: {fd} vs {}", g[k]);
        }
    }
}
