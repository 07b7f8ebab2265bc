//! The periodic strip energy in two dimensions and the averaging competitor
//! used to reduce it to one dimension.

use serde::{Deserialize, Serialize};

use std::f64::consts::PI;

use crate::cutoff::CutoffSpec;
use crate::energy::{check_resolution, EnergyBreakdown, PhysicalParams};
use crate::error::{param, Result};
use crate::grid::{AngleProfile, Grid1D};
use crate::nonlocal::fourier_stray_2d;

const UNIT_TOL: f64 = 1e-12;

/// Magnetization on a tensor grid: uniform and periodic in `x₁`, arbitrary in `x₂`.
///
/// Values are stored row by row in `x₁`, `m[i * n2 + j]`, including the
/// periodic copy `i = M` of the column `i = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Strip2DField {
    grid_x1: Grid1D,
    grid_x2: Grid1D,
    m1: Vec<f64>,
    m2: Vec<f64>,
}

impl Strip2DField {
    pub fn new(grid_x1: Grid1D, grid_x2: Grid1D, m1: Vec<f64>, m2: Vec<f64>) -> Result<Self> {
        let (n1, n2) = (grid_x1.len(), grid_x2.len());
        if n1 < 3 || n2 < 2 {
            return param(format!("tensor grid {n1}x{n2} is too small"));
        }
        let h = grid_x1.domain_length() / (n1 - 1) as f64;
        if (0..n1 - 1).any(|k| (grid_x1.cell_len(k) - h).abs() > 1e-10 * h) {
            return param("x1 grid must be uniform");
        }
        if m1.len() != n1 * n2 || m2.len() != n1 * n2 {
            return param(format!("field needs {} values per component", n1 * n2));
        }
        for (k, (a, b)) in m1.iter().zip(&m2).enumerate() {
            if !((a * a + b * b - 1.0).abs() <= UNIT_TOL) {
                return param(format!("|m| = {} at node {k}", a.hypot(*b)));
            }
        }
        let last = (n1 - 1) * n2;
        for j in 0..n2 {
            if (m1[j] - m1[last + j]).abs() > UNIT_TOL || (m2[j] - m2[last + j]).abs() > UNIT_TOL {
                return param(format!("field is not periodic in x1 at x2 node {j}"));
            }
        }
        Ok(Self { grid_x1, grid_x2, m1, m2 })
    }

    /// Field with angle `θ(x₁, x₂)` on `cells` uniform cells of period `a`.
    pub fn from_angle_fn(a: f64, cells: usize, grid_x2: Grid1D, theta: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let grid_x1 = Grid1D::uniform(0.0, a, cells + 1)?;
        let n2 = grid_x2.len();
        let mut m1 = Vec::with_capacity((cells + 1) * n2);
        let mut m2 = Vec::with_capacity((cells + 1) * n2);
        for i in 0..=cells {
            let x1 = grid_x1.nodes()[i % cells];
            for &x2 in grid_x2.nodes() {
                let t = theta(x1, x2);
                m1.push(-t.sin());
                m2.push(t.cos());
            }
        }
        Self::new(grid_x1, grid_x2, m1, m2)
    }

    /// `x₁`-independent extension of a one-dimensional profile.
    pub fn from_profile(p: &AngleProfile, a: f64, cells: usize) -> Result<Self> {
        let grid = p.grid.clone();
        Self::from_angle_fn(a, cells, grid, |_, x2| {
            let j = p.grid.nodes().partition_point(|&x| x < x2);
            p.theta[j]
        })
    }

    pub fn grid_x1(&self) -> &Grid1D {
        &self.grid_x1
    }

    pub fn grid_x2(&self) -> &Grid1D {
        &self.grid_x2
    }

    pub fn period(&self) -> f64 {
        self.grid_x1.domain_length()
    }

    pub fn cells_x1(&self) -> usize {
        self.grid_x1.len() - 1
    }

    pub fn m1(&self) -> &[f64] {
        &self.m1
    }

    pub fn m2(&self) -> &[f64] {
        &self.m2
    }

    pub fn m1_at(&self, i: usize, j: usize) -> f64 {
        self.m1[i * self.grid_x2.len() + j]
    }

    pub fn m2_at(&self, i: usize, j: usize) -> f64 {
        self.m2[i * self.grid_x2.len() + j]
    }

    /// The field shifted by `cells` grid cells in `x₁`.
    pub fn translated(&self, cells: usize) -> Self {
        let m = self.cells_x1();
        let n2 = self.grid_x2.len();
        let pick = |v: &[f64]| -> Vec<f64> {
            (0..=m)
                .flat_map(|i| {
                    let src = (i + cells) % m;
                    v[src * n2..(src + 1) * n2].to_vec()
                })
                .collect()
        };
        Self {
            grid_x1: self.grid_x1.clone(),
            grid_x2: self.grid_x2.clone(),
            m1: pick(&self.m1),
            m2: pick(&self.m2),
        }
    }

    /// Largest nodal deviation from `x₁`-independence.
    pub fn x1_variation(&self) -> f64 {
        let n2 = self.grid_x2.len();
        (0..self.m1.len())
            .map(|k| (self.m1[k] - self.m1[k % n2]).abs().max((self.m2[k] - self.m2[k % n2]).abs()))
            .fold(0.0, f64::max)
    }
}

/// Energy per period `½∫(|∇m|² + h|m − e₂|²) + (δ/8π)∬ div m_δ div m_δ/|x − y|`.
pub fn energy_2d(f: &Strip2DField, params: &PhysicalParams, cutoff: &CutoffSpec) -> Result<EnergyBreakdown> {
    if (f.period() - params.a).abs() > 1e-12 * params.a {
        return param(format!("field period {} does not match a = {}", f.period(), params.a));
    }
    let g2 = f.grid_x2();
    if g2.left().abs() > 1e-12 * params.b || (g2.right() - params.b).abs() > 1e-12 * params.b {
        return param(format!("x2 grid [{}, {}] does not span [0, {}]", g2.left(), g2.right(), params.b));
    }
    if (cutoff.delta - params.delta).abs() > 1e-14 * params.delta {
        return param(format!("cutoff width {} must equal delta = {}", cutoff.delta, params.delta));
    }
    check_resolution(cutoff, g2)?;

    let (cells, n2) = (f.cells_x1(), g2.len());
    let h1 = f.period() / cells as f64;
    let w2 = g2.weights();
    let mut exchange = 0.0;
    let mut zeeman = 0.0;
    for i in 0..cells {
        for j in 0..n2 {
            let (d1, d2) = (f.m1_at(i + 1, j) - f.m1_at(i, j), f.m2_at(i + 1, j) - f.m2_at(i, j));
            exchange += w2[j] * (d1 * d1 + d2 * d2) / h1;
            zeeman += h1 * w2[j] * (1.0 - f.m2_at(i, j));
        }
        for j in 0..n2 - 1 {
            let (d1, d2) = (f.m1_at(i, j + 1) - f.m1_at(i, j), f.m2_at(i, j + 1) - f.m2_at(i, j));
            exchange += h1 * (d1 * d1 + d2 * d2) / g2.cell_len(j);
        }
    }
    let stray = params.delta / (8.0 * PI) * fourier_stray_2d(f, cutoff)?.value;
    let (exchange, zeeman) = (0.5 * exchange, params.h * zeeman);
    Ok(EnergyBreakdown {
        exchange,
        zeeman,
        stray,
        total: exchange + zeeman + stray,
        normalization_subtracted: 0.0,
    })
}

/// `m̄₂(x₂) = (1/a)∫ m₂ dx₁`, `m̄₁ = √(1 − m̄₂²)`.
pub fn average_competitor(f: &Strip2DField) -> Strip2DField {
    let (cells, n2) = (f.cells_x1(), f.grid_x2().len());
    let mean: Vec<f64> = (0..n2)
        .map(|j| ((0..cells).map(|i| f.m2_at(i, j)).sum::<f64>() / cells as f64).clamp(-1.0, 1.0))
        .collect();
    let m2: Vec<f64> = (0..=cells).flat_map(|_| mean.iter().copied()).collect();
    let m1 = m2.iter().map(|v| (1.0 - v * v).max(0.0).sqrt()).collect();
    Strip2DField {
        grid_x1: f.grid_x1.clone(),
        grid_x2: f.grid_x2.clone(),
        m1,
        m2,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReductionCheck {
    pub e_full: f64,
    pub e_avg: f64,
    pub gap: f64,
    pub exchange_gap: f64,
    pub stray_gap: f64,
}

/// Energies of a field and of its average, and their difference.
pub fn reduction_check(f: &Strip2DField, params: &PhysicalParams, cutoff: &CutoffSpec) -> Result<ReductionCheck> {
    let full = energy_2d(f, params, cutoff)?;
    let avg = energy_2d(&average_competitor(f), params, cutoff)?;
    Ok(ReductionCheck {
        e_full: full.total,
        e_avg: avg.total,
        gap: full.total - avg.total,
        exchange_gap: full.exchange - avg.exchange,
        stray_gap: full.stray - avg.stray,
    })
}
