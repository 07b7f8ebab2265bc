//! Nonlocal operators: the one-dimensional H^{1/2} stray-field quadratic form,
//! the half-Laplacian on a bounded interval, and the Fourier mode sum of the
//! periodic strip stray energy.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::cutoff::{eta_delta_nodes, CutoffSpec};
use crate::error::{param, Error, Result};
use crate::grid::Grid1D;
use crate::strip2d::Strip2DField;
use crate::quad::gauss_legendre;

/// Dense symmetric matrix `K` with `uᵀKu = (1/4π) ∬ (u(x)-u(y))²/(x-y)² dx dy`
/// for the piecewise-linear interpolant of `u`, extended by zero.
///
/// Endpoint values are closed off by one ghost cell on each side (as wide as
/// the neighbouring cell) on which the interpolant ramps linearly to zero. For
/// `u` vanishing at both endpoints the ghost cells carry no charge and the form
/// is exact.
#[derive(Debug, Clone)]
pub struct StrayMatrix {
    grid: Grid1D,
    n: usize,
    entries: Vec<f64>,
}

/// `G(t) = t²(2 ln|t| - 3)/4`, an antiderivative of order two of `ln|t|`.
pub fn log_antiderivative(t: f64) -> f64 {
    let a = t.abs();
    if a < 1e-300 {
        return 0.0;
    }
    0.25 * t * t * (2.0 * a.ln() - 3.0)
}

/// `∫_a^b ∫_c^d ln|x - y| dy dx` in closed form.
pub fn cell_pair_log_integral(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let g = log_antiderivative;
    g(b - c) - g(a - c) - g(b - d) + g(a - d)
}

struct Extended {
    x: Vec<f64>,
}

impl Extended {
    fn new(grid: &Grid1D) -> Self {
        let nodes = grid.nodes();
        let n = nodes.len();
        let mut x = Vec::with_capacity(n + 2);
        x.push(nodes[0] - (nodes[1] - nodes[0]));
        x.extend_from_slice(nodes);
        x.push(nodes[n - 1] + (nodes[n - 1] - nodes[n - 2]));
        Self { x }
    }

    fn len(&self, c: usize) -> f64 {
        self.x[c + 1] - self.x[c]
    }

    /// `-∫∫ ln|x-y|` over extended cells `c`, `d`.
    fn neg_log(&self, c: usize, d: usize) -> f64 {
        -cell_pair_log_integral(self.x[c], self.x[c + 1], self.x[d], self.x[d + 1])
    }

    /// Entry for hats `i < j` whose supports are well separated.
    fn far_entry(&self, i: usize, j: usize, order: usize) -> f64 {
        let rule = gauss_legendre(order);
        let hat_points = |k: usize| {
            let mut pts = Vec::with_capacity(2 * order);
            for cell in [k, k + 1] {
                let (a, b) = (self.x[cell], self.x[cell + 1]);
                let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
                for &(s, w) in rule {
                    let y = c + r * s;
                    let phi = if cell == k { (y - a) / (b - a) } else { (b - y) / (b - a) };
                    pts.push((y, w * r * phi));
                }
            }
            pts
        };
        let (pi, pj) = (hat_points(i), hat_points(j));
        let mut acc = 0.0;
        for &(x, wx) in &pi {
            let mut row = 0.0;
            for &(y, wy) in &pj {
                let t = x - y;
                row += wy / (t * t);
            }
            acc += wx * row;
        }
        -acc / (2.0 * PI)
    }

    fn near_entry(&self, i: usize, j: usize) -> f64 {
        let (li, li1, lj, lj1) = (self.len(i), self.len(i + 1), self.len(j), self.len(j + 1));
        let same = self.neg_log(i, j) / (li * lj) + self.neg_log(i + 1, j + 1) / (li1 * lj1);
        let cross = self.neg_log(i + 1, j) / (li1 * lj) + self.neg_log(i, j + 1) / (li * lj1);
        (same - cross) / (2.0 * PI)
    }

    fn entry(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        if j >= i + 2 {
            let gap = self.x[j] - self.x[i + 2];
            let lmax = self.len(i).max(self.len(i + 1)).max(self.len(j)).max(self.len(j + 1));
            let ratio = gap / lmax;
            if ratio >= 2.0 {
                let order = if ratio < 6.0 {
                    8
                } else if ratio < 20.0 {
                    6
                } else {
                    4
                };
                return self.far_entry(i, j, order);
            }
        }
        self.near_entry(i, j)
    }
}

pub fn assemble_stray_matrix(grid: &Grid1D) -> Result<StrayMatrix> {
    let n = grid.len();
    for k in 0..grid.num_cells() {
        let h = grid.cell_len(k);
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::Assembly(format!("degenerate cell {k} of length {h}")));
        }
    }
    let ext = Extended::new(grid);
    let mut entries = vec![0.0; n * n];
    entries.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        for (j, v) in row.iter_mut().enumerate() {
            *v = ext.entry(i, j);
        }
    });
    Ok(StrayMatrix {
        grid: grid.clone(),
        n,
        entries,
    })
}

impl StrayMatrix {
    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    fn check(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.n {
            return param(format!("vector of length {} does not match matrix of size {}", u.len(), self.n));
        }
        Ok(())
    }

    /// `K u`, computed row by row.
    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check(u)?;
        Ok(self
            .entries
            .par_chunks(self.n)
            .map(|row| row.iter().zip(u).map(|(k, v)| k * v).sum())
            .collect())
    }

    pub fn bilinear(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        self.check(v)?;
        let ku = self.apply(u)?;
        Ok(ku.iter().zip(v).map(|(a, b)| a * b).sum())
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }
}

/// `uᵀKu`, one quarter-π of the squared Gagliardo seminorm of the zero-extended interpolant.
pub fn gagliardo_energy(k: &StrayMatrix, u: &[f64]) -> Result<f64> {
    k.bilinear(u, u)
}

fn check_half_laplacian_input(grid: &Grid1D, u: &[f64]) -> Result<()> {
    let n = grid.len();
    if u.len() != n {
        return param(format!("{} values for a grid of {n} nodes", u.len()));
    }
    let scale = u.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if u[0].abs() > 1e-12 * scale || u[n - 1].abs() > 1e-12 * scale {
        return param(format!(
            "half-Laplacian requires u to vanish at the endpoints (u0 = {}, uN = {})",
            u[0],
            u[n - 1]
        ));
    }
    Ok(())
}

/// `(1/π) PV∫ (u(x)-u(y))/(x-y)² dy + b u(x)/(π x (b-x))` at interior node `i`.
///
/// The interpolant is piecewise quadratic: the two cells next to `x_i` use the
/// parabola through `x_{i-1}, x_i, x_{i+1}` (whose principal value is closed
/// form), every other cell uses a parabola through itself and one neighbour,
/// integrated exactly against the kernel.
pub fn half_laplacian(grid: &Grid1D, u: &[f64], i: usize) -> Result<f64> {
    check_half_laplacian_input(grid, u)?;
    if i == 0 || i + 1 >= grid.len() {
        return Err(Error::Domain(format!("half-Laplacian needs an interior node, got {i}")));
    }
    Ok(half_laplacian_unchecked(grid, u, i))
}

/// [`half_laplacian`] at every interior node; endpoint entries are zero.
pub fn half_laplacian_all(grid: &Grid1D, u: &[f64]) -> Result<Vec<f64>> {
    check_half_laplacian_input(grid, u)?;
    let n = grid.len();
    Ok((0..n)
        .into_par_iter()
        .map(|i| if i == 0 || i + 1 == n { 0.0 } else { half_laplacian_unchecked(grid, u, i) })
        .collect())
}

fn half_laplacian_unchecked(grid: &Grid1D, u: &[f64], i: usize) -> f64 {
    let x = grid.nodes();
    let n = x.len();
    let xi = x[i];
    let ui = u[i];
    let (hl, hr) = (xi - x[i - 1], x[i + 1] - xi);
    let dl = (ui - u[i - 1]) / hl;
    let dr = (u[i + 1] - ui) / hr;
    let q = (dr - dl) / (hl + hr);
    let a = (dr * hl + dl * hr) / (hl + hr);
    let mut pv = -a * (hr / hl).ln() - q * (hl + hr);

    for k in 0..n - 1 {
        if k + 1 == i || k == i {
            continue;
        }
        // stencil of three nodes containing cell k
        let s0 = if k < i {
            if k >= 1 {
                k - 1
            } else {
                k
            }
        } else if k + 2 <= n - 1 {
            k
        } else {
            k - 1
        };
        let (ya, yb, yc) = (x[s0], x[s0 + 1], x[s0 + 2]);
        let (fa, fb, fc) = (u[s0], u[s0 + 1], u[s0 + 2]);
        let fab = (fb - fa) / (yb - ya);
        let fbc = (fc - fb) / (yc - yb);
        let fabc = (fbc - fab) / (yc - ya);
        let (ta, tb) = (ya - xi, yb - xi);
        let p2 = fabc;
        let p1 = fab - fabc * (ta + tb);
        let p0 = fa - fab * ta + fabc * ta * tb;
        let (t0, t1) = (x[k] - xi, x[k + 1] - xi);
        let c = ui - p0;
        pv += c * (t1 - t0) / (t0 * t1) - p1 * (t1 / t0).ln() - p2 * (t1 - t0);
    }
    let b = grid.domain_length();
    let (dl_edge, dr_edge) = (xi - grid.left(), grid.right() - xi);
    pv / PI + b * ui / (PI * dl_edge * dr_edge)
}

/// Truncated mode sum `(1/a) Σₙ ∫ |q·c|²/|q| dξ` of the periodic strip, with
/// `q = (2πn/a, ξ)` and `c(n, ξ)` the transform of `m_δ` over one period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierStray {
    pub value: f64,
    /// Largest mode index kept, `|n| ≤ n_max`.
    pub n_max: usize,
    /// Quadrature cut in `ξ`; the remainder is the asymptotic `tail`.
    pub xi_max: f64,
    pub tail: f64,
}

const XI_ORDER: usize = 8;
const XI_RESOLUTION: f64 = 32.0;

/// Transform of a piecewise-linear function given by cell averages and slopes:
/// per cell the weights multiplying the midpoint value and the slope.
fn cell_transform(x: &[f64], xi: f64, out: &mut Vec<(Complex64, Complex64)>) {
    out.clear();
    for w in x.windows(2) {
        let d = 0.5 * (w[1] - w[0]);
        let m = 0.5 * (w[1] + w[0]);
        let z = xi * d;
        let (sm, cm) = (xi * m).sin_cos();
        let phase = Complex64::new(cm, -sm);
        let (even, odd) = if z.abs() < 1e-3 {
            let z2 = z * z;
            (2.0 * d * (1.0 - z2 / 6.0 + z2 * z2 / 120.0), xi * d.powi(3) / 3.0 * (1.0 - z2 / 10.0))
        } else {
            let (s, c) = z.sin_cos();
            (2.0 * s / xi, (s - z * c) / (xi * xi))
        };
        out.push((phase * even, phase * Complex64::new(0.0, -2.0 * odd)));
    }
}

/// Stray double integral of the strip field with the cutoff applied in `x₂`.
pub fn fourier_stray_2d(field: &Strip2DField, cutoff: &CutoffSpec) -> Result<FourierStray> {
    let a = field.period();
    let gx2 = field.grid_x2();
    let x = gx2.nodes();
    let eta = eta_delta_nodes(cutoff, gx2)?;
    let (cols, rows) = (field.cells_x1(), gx2.len());

    // x₁ transform of each row of m_δ, (a/M)·DFT
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(cols);
    let n_max = cols / 2;
    let modes = n_max + 1;
    let mut c1 = vec![vec![Complex64::new(0.0, 0.0); rows]; modes];
    let mut c2 = c1.clone();
    let mut buf = vec![Complex64::new(0.0, 0.0); cols];
    for j in 0..rows {
        for (comp, target) in [(0usize, &mut c1), (1, &mut c2)] {
            for (i, b) in buf.iter_mut().enumerate() {
                let m = if comp == 0 { field.m1_at(i, j) } else { field.m2_at(i, j) };
                *b = Complex64::new(eta[j] * m, 0.0);
            }
            fft.process(&mut buf);
            for n in 0..modes {
                target[n][j] = buf[n] * (a / cols as f64);
            }
        }
    }
    let mode_weight = |n: usize| if n == 0 || (cols % 2 == 0 && n == n_max) { 1.0 } else { 2.0 };

    // cell midpoints and slopes per mode
    let cells = rows - 1;
    let split = |v: &[Complex64]| -> Vec<(Complex64, Complex64)> {
        (0..cells).map(|k| (0.5 * (v[k] + v[k + 1]), (v[k + 1] - v[k]) / gx2.cell_len(k))).collect()
    };
    let p1: Vec<_> = c1.iter().map(|v| split(v)).collect();
    let p2: Vec<_> = c2.iter().map(|v| split(v)).collect();

    let xi_max = XI_RESOLUTION / gx2.min_spacing();
    let k1 = 2.0 * PI / a;
    let width = (0.5 * PI / gx2.domain_length()).min(0.5 * k1);
    let panels = (xi_max / width).ceil() as usize;
    let width = xi_max / panels as f64;
    let rule = gauss_legendre(XI_ORDER);

    let integral: f64 = (0..2 * panels)
        .into_par_iter()
        .map(|p| {
            let left = -xi_max + p as f64 * width;
            let mut table = Vec::with_capacity(cells);
            let mut acc = 0.0;
            for &(t, wq) in rule {
                let xi = left + 0.5 * width * (t + 1.0);
                cell_transform(x, xi, &mut table);
                for n in 0..modes {
                    let k = k1 * n as f64;
                    let q = k.hypot(xi);
                    if q == 0.0 {
                        continue;
                    }
                    let mut s1 = Complex64::new(0.0, 0.0);
                    let mut s2 = Complex64::new(0.0, 0.0);
                    for (c, (e, o)) in table.iter().enumerate() {
                        s1 += e * p1[n][c].0 + o * p1[n][c].1;
                        s2 += e * p2[n][c].0 + o * p2[n][c].1;
                    }
                    let qc = s1 * k + s2 * xi;
                    acc += mode_weight(n) * 0.5 * width * wq * qc.norm_sqr() / q;
                }
            }
            acc
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();

    // |c₂|² ≈ Σ|slope jumps|²/ξ⁴ beyond the cut, integrated against |ξ| on both sides
    let mut tail = 0.0;
    for n in 0..modes {
        let s = &p2[n];
        let mut jumps = s[0].1.norm_sqr() + s[cells - 1].1.norm_sqr();
        for k in 1..cells {
            jumps += (s[k].1 - s[k - 1].1).norm_sqr();
        }
        tail += mode_weight(n) * jumps / (xi_max * xi_max);
    }
    Ok(FourierStray { value: (integral + tail) / a, n_max, xi_max, tail: tail / a })
}
