//! The one-dimensional edge-wall energies: the physical strip energy per unit
//! period and the rescaled thin-film regime energy, with analytic gradients
//! and the Euler–Lagrange residual.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::cutoff::{cells_in_cutoff, eta_delta_nodes, CutoffKind, CutoffSpec};
use crate::error::{param, Error, Result};
use crate::grid::{build_layer_grid, AngleProfile, Grid1D, LayerMesh};
use crate::nonlocal::{half_laplacian_all, StrayMatrix};

/// Largest grid accepted for regime computations.
pub const MAX_NODES: usize = 8192;
/// Minimum number of cells inside each cutoff band.
pub const MIN_CUTOFF_CELLS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub a: f64,
    pub b: f64,
    pub delta: f64,
    pub h: f64,
}

impl PhysicalParams {
    pub fn new(a: f64, b: f64, delta: f64, h: f64) -> Result<Self> {
        if !(a > 0.0) || !(b > 0.0) || !a.is_finite() || !b.is_finite() {
            return param(format!("a and b must be positive (a = {a}, b = {b})"));
        }
        if !(delta > 0.0) {
            return param(format!("delta must be positive, got {delta}"));
        }
        if delta >= 0.5 * b {
            return param(format!("delta must satisfy delta < b/2 (delta = {delta}, b = {b})"));
        }
        if !(h >= 0.0) || !h.is_finite() {
            return param(format!("h must be nonnegative, got {h}"));
        }
        Ok(Self { a, b, delta, h })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeParams {
    pub epsilon: f64,
    pub lambda: f64,
    pub beta: f64,
    pub b: f64,
    pub delta_eps: f64,
    pub h_eps: f64,
    #[serde(rename = "L_eps")]
    pub l_eps: f64,
    pub rescaled_width: f64,
    pub normalization: f64,
}

impl RegimeParams {
    /// `ln|ln ε|`.
    pub fn lnln(&self) -> f64 {
        self.epsilon.ln().abs().ln()
    }

    /// Cutoff width `δ_ε / L_ε` in rescaled units.
    pub fn rescaled_cutoff(&self) -> f64 {
        self.delta_eps / self.l_eps
    }
}

pub fn derive_regime(epsilon: f64, lambda: f64, beta: f64, b: f64) -> Result<RegimeParams> {
    if !(epsilon > 0.0) {
        return Err(Error::Regime(format!("epsilon must be positive, got {epsilon}")));
    }
    if epsilon >= 1.0 / E {
        return Err(Error::Regime(format!(
            "epsilon must satisfy epsilon < 1/e so that ln|ln epsilon| > 0, got {epsilon}"
        )));
    }
    if !(lambda > 0.0) || !(beta > 0.0) || !(b > 0.0) {
        return param(format!("lambda, beta, b must be positive (got {lambda}, {beta}, {b})"));
    }
    let ln = epsilon.ln().abs();
    let lnln = ln.ln();
    let l_eps = ln / lnln;
    Ok(RegimeParams {
        epsilon,
        lambda,
        beta,
        b,
        delta_eps: lambda / ln,
        h_eps: beta * (lnln / ln).powi(2),
        l_eps,
        rescaled_width: b / (epsilon * l_eps),
        normalization: lambda * ln / (2.0 * PI * lnln),
    })
}

/// `E^#_{ε,1d} = λ/2π + F_{ε,1d} / L_ε`.
pub fn physical_from_rescaled(f: f64, regime: &RegimeParams) -> f64 {
    regime.lambda / (2.0 * PI) + f / regime.l_eps
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub exchange: f64,
    pub zeeman: f64,
    pub stray: f64,
    pub total: f64,
    pub normalization_subtracted: f64,
}

impl EnergyBreakdown {
    /// Local (exchange plus bias) part.
    pub fn local(&self) -> f64 {
        self.exchange + self.zeeman
    }

    /// Stray part after subtracting the normalization.
    pub fn stray_normalized(&self) -> f64 {
        self.stray - self.normalization_subtracted
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnergyKind {
    Physical,
    Rescaled,
}

/// `E(θ) = c_x ½∫|θ'|² + c_z ∫(1 - cos θ) + c_s uᵀKu - N`, `u = η cos θ`.
#[derive(Debug, Clone)]
pub struct EnergyModel<'a> {
    grid: &'a Grid1D,
    k: &'a StrayMatrix,
    eta: Vec<f64>,
    c_exchange: f64,
    c_zeeman: f64,
    c_stray: f64,
    normalization: f64,
    kind: EnergyKind,
}

fn check_matrix(grid: &Grid1D, k: &StrayMatrix) -> Result<()> {
    if k.grid() != grid {
        return param("stray matrix was assembled on a different grid");
    }
    Ok(())
}

impl<'a> EnergyModel<'a> {
    /// Physical energy `E^#_{1d}` per unit period on `[0, b]`.
    pub fn physical(params: &PhysicalParams, cutoff: &CutoffSpec, k: &'a StrayMatrix) -> Result<Self> {
        let grid = k.grid();
        if (cutoff.delta - params.delta).abs() > 1e-14 * params.delta {
            return param(format!(
                "cutoff width {} must equal delta = {}",
                cutoff.delta, params.delta
            ));
        }
        if (grid.domain_length() - params.b).abs() > 1e-12 * params.b {
            return param(format!(
                "grid length {} does not match b = {}",
                grid.domain_length(),
                params.b
            ));
        }
        check_resolution(cutoff, grid)?;
        Ok(Self {
            grid,
            k,
            eta: eta_delta_nodes(cutoff, grid)?,
            c_exchange: 1.0,
            c_zeeman: params.h,
            c_stray: 0.5 * params.delta,
            normalization: 0.0,
            kind: EnergyKind::Physical,
        })
    }

    /// Rescaled regime energy `F_{ε,1d}` on `[0, b/(ε L_ε)]`.
    pub fn rescaled(regime: &RegimeParams, kind: CutoffKind, k: &'a StrayMatrix) -> Result<Self> {
        let grid = k.grid();
        let w = regime.rescaled_width;
        if grid.left().abs() > 1e-12 * w || (grid.right() - w).abs() > 1e-9 * w {
            return param(format!(
                "grid [{}, {}] does not span the rescaled domain [0, {w}]",
                grid.left(),
                grid.right()
            ));
        }
        let cutoff = CutoffSpec::new(kind, regime.rescaled_cutoff())?;
        check_resolution(&cutoff, grid)?;
        Ok(Self {
            grid,
            k,
            eta: eta_delta_nodes(&cutoff, grid)?,
            c_exchange: 1.0,
            c_zeeman: regime.beta,
            c_stray: regime.lambda / (2.0 * regime.lnln()),
            normalization: regime.normalization,
            kind: EnergyKind::Rescaled,
        })
    }

    /// Unscaled regime energy `E^#_{ε,1d}` on `[0, b]`, with exchange weight `ε`,
    /// bias `h_ε/ε` and cutoff width `ε δ_ε`.
    pub fn regime_physical(regime: &RegimeParams, kind: CutoffKind, k: &'a StrayMatrix) -> Result<Self> {
        let grid = k.grid();
        if (grid.domain_length() - regime.b).abs() > 1e-12 * regime.b {
            return param("grid must span [0, b]");
        }
        let cutoff = CutoffSpec::new(kind, regime.epsilon * regime.delta_eps)?;
        check_resolution(&cutoff, grid)?;
        Ok(Self {
            grid,
            k,
            eta: eta_delta_nodes(&cutoff, grid)?,
            c_exchange: regime.epsilon,
            c_zeeman: regime.h_eps / regime.epsilon,
            c_stray: 0.5 * regime.delta_eps,
            normalization: 0.0,
            kind: EnergyKind::Physical,
        })
    }

    pub fn grid(&self) -> &Grid1D {
        self.grid
    }

    pub fn matrix(&self) -> &StrayMatrix {
        self.k
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    pub fn kind(&self) -> EnergyKind {
        self.kind
    }

    pub fn zeeman_coefficient(&self) -> f64 {
        self.c_zeeman
    }

    pub fn stray_coefficient(&self) -> f64 {
        self.c_stray
    }

    pub fn exchange_coefficient(&self) -> f64 {
        self.c_exchange
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    fn check(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.grid.len() {
            return param(format!(
                "profile has {} values for a grid of {} nodes",
                theta.len(),
                self.grid.len()
            ));
        }
        Ok(())
    }

    /// Nodal charge density `u = η cos θ`.
    pub fn charge(&self, theta: &[f64]) -> Vec<f64> {
        theta.iter().zip(&self.eta).map(|(t, e)| e * t.cos()).collect()
    }

    fn local_parts(&self, theta: &[f64]) -> (f64, f64) {
        let g = self.grid;
        let mut exchange = 0.0;
        for k in 0..g.num_cells() {
            let d = theta[k + 1] - theta[k];
            exchange += d * d / g.cell_len(k);
        }
        let zeeman: f64 = g.weights().iter().zip(theta).map(|(w, t)| w * (1.0 - t.cos())).sum();
        (0.5 * self.c_exchange * exchange, self.c_zeeman * zeeman)
    }

    fn breakdown(&self, exchange: f64, zeeman: f64, stray: f64) -> EnergyBreakdown {
        EnergyBreakdown {
            exchange,
            zeeman,
            stray,
            total: exchange + zeeman + stray - self.normalization,
            normalization_subtracted: self.normalization,
        }
    }

    pub fn evaluate(&self, theta: &[f64]) -> Result<EnergyBreakdown> {
        self.check(theta)?;
        let (exchange, zeeman) = self.local_parts(theta);
        let u = self.charge(theta);
        let ku = self.k.apply(&u)?;
        let stray = self.c_stray * ku.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>();
        Ok(self.breakdown(exchange, zeeman, stray))
    }

    /// Energy and its gradient with respect to the nodal angles.
    pub fn evaluate_with_gradient(&self, theta: &[f64]) -> Result<(EnergyBreakdown, Vec<f64>)> {
        self.check(theta)?;
        let g = self.grid;
        let n = g.len();
        let (exchange, zeeman) = self.local_parts(theta);
        let u = self.charge(theta);
        let ku = self.k.apply(&u)?;
        let stray = self.c_stray * ku.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>();
        let mut grad = vec![0.0; n];
        for k in 0..g.num_cells() {
            let flux = self.c_exchange * (theta[k + 1] - theta[k]) / g.cell_len(k);
            grad[k] -= flux;
            grad[k + 1] += flux;
        }
        for i in 0..n {
            let s = theta[i].sin();
            grad[i] += self.c_zeeman * g.weights()[i] * s - 2.0 * self.c_stray * ku[i] * self.eta[i] * s;
        }
        Ok((self.breakdown(exchange, zeeman, stray), grad))
    }

    /// Hessian of the energy at `theta`, as an operator.
    pub fn hessian_at(&self, theta: &[f64]) -> Result<Hessian<'_>> {
        self.check(theta)?;
        let g = self.grid;
        let u = self.charge(theta);
        let ku = self.k.apply(&u)?;
        let s: Vec<f64> = theta.iter().zip(&self.eta).map(|(t, e)| e * t.sin()).collect();
        let diag = (0..g.len())
            .map(|i| {
                let c = theta[i].cos();
                self.c_zeeman * g.weights()[i] * c - 2.0 * self.c_stray * ku[i] * self.eta[i] * c
            })
            .collect();
        Ok(Hessian { model: self, s, diag })
    }

    /// Diagonal of the Hessian of the stray term at `θ ≡ 0`, used for preconditioning.
    pub fn stray_curvature(&self) -> Vec<f64> {
        (0..self.grid.len())
            .map(|i| 2.0 * self.c_stray * self.k.get(i, i) * self.eta[i] * self.eta[i])
            .collect()
    }

    /// `R = c_x θ'' - c_z sin θ + c_s η sin θ (-Δ)^{1/2}(η cos θ)` at interior
    /// nodes; entries 0 and N-1 hold the one-sided slopes `θ'(0)`, `θ'(b)`.
    pub fn el_residual(&self, theta: &[f64]) -> Result<Vec<f64>> {
        self.check(theta)?;
        let x = self.grid.nodes();
        let n = x.len();
        let u = self.charge(theta);
        let hl = half_laplacian_all(self.grid, &u)?;
        let mut r = vec![0.0; n];
        for i in 1..n - 1 {
            let (hl_, hr) = (x[i] - x[i - 1], x[i + 1] - x[i]);
            let d2 = 2.0 * ((theta[i + 1] - theta[i]) / hr - (theta[i] - theta[i - 1]) / hl_) / (hl_ + hr);
            let s = theta[i].sin();
            r[i] = self.c_exchange * d2 - self.c_zeeman * s + self.c_stray * self.eta[i] * s * hl[i];
        }
        r[0] = one_sided_slope(x[0], x[1], x[2], theta[0], theta[1], theta[2]);
        r[n - 1] = one_sided_slope(x[n - 1], x[n - 2], x[n - 3], theta[n - 1], theta[n - 2], theta[n - 3]);
        Ok(r)
    }
}

/// Second derivative of an [`EnergyModel`] at a fixed profile.
pub struct Hessian<'m> {
    model: &'m EnergyModel<'m>,
    s: Vec<f64>,
    diag: Vec<f64>,
}

impl Hessian<'_> {
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let m = self.model;
        let g = m.grid;
        let sv: Vec<f64> = self.s.iter().zip(v).map(|(a, b)| a * b).collect();
        let ksv = m.k.apply(&sv)?;
        let mut out: Vec<f64> = (0..v.len())
            .map(|i| self.diag[i] * v[i] + 2.0 * m.c_stray * self.s[i] * ksv[i])
            .collect();
        for k in 0..g.num_cells() {
            let flux = m.c_exchange * (v[k + 1] - v[k]) / g.cell_len(k);
            out[k] -= flux;
            out[k + 1] += flux;
        }
        Ok(out)
    }
}

/// Derivative at `x0` of the parabola through three points.
fn one_sided_slope(x0: f64, x1: f64, x2: f64, f0: f64, f1: f64, f2: f64) -> f64 {
    let (h1, h2) = (x1 - x0, x2 - x0);
    (f1 - f0) * h2 / (h1 * (h2 - h1)) - (f2 - f0) * h1 / (h2 * (h2 - h1))
}

pub(crate) fn check_resolution(cutoff: &CutoffSpec, grid: &Grid1D) -> Result<()> {
    let cells = cells_in_cutoff(cutoff, grid);
    if cells < MIN_CUTOFF_CELLS {
        return Err(Error::Resolution(format!(
            "cutoff band of width {} is resolved by {cells} cells, at least {MIN_CUTOFF_CELLS} are required",
            cutoff.delta
        )));
    }
    if grid.len() > MAX_NODES {
        return Err(Error::Resolution(format!(
            "grid has {} nodes, above the limit of {MAX_NODES}",
            grid.len()
        )));
    }
    Ok(())
}

/// Mesh controls for the rescaled domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeMesh {
    pub cells_in_cutoff: usize,
    pub layer_spacing: f64,
    /// Extent of the uniformly resolved wall layer, in units of `1/√β`.
    pub layer_extent: f64,
    pub growth: f64,
}

impl Default for RegimeMesh {
    fn default() -> Self {
        Self {
            cells_in_cutoff: 16,
            layer_spacing: 0.05,
            layer_extent: 12.0,
            growth: 1.1,
        }
    }
}

/// Graded mesh on `[0, b/(ε L_ε)]` for the rescaled energy.
pub fn regime_grid(regime: &RegimeParams, mesh: &RegimeMesh) -> Result<Grid1D> {
    let w = regime.rescaled_width;
    let cutoff = regime.rescaled_cutoff();
    let hc = cutoff / mesh.cells_in_cutoff.max(1) as f64;
    if w * f64::EPSILON * 1e4 > hc {
        return Err(Error::Resolution(format!(
            "rescaled width {w:e} cannot resolve cutoff cells of size {hc:e} in double precision"
        )));
    }
    let layer = LayerMesh {
        cutoff_width: cutoff,
        cells_in_cutoff: mesh.cells_in_cutoff,
        layer_spacing: mesh.layer_spacing,
        layer_extent: mesh.layer_extent / regime.beta.sqrt(),
        growth: mesh.growth,
    };
    let grid = build_layer_grid(w, &layer)?;
    if grid.len() > MAX_NODES {
        return Err(Error::Resolution(format!(
            "regime grid needs {} nodes, above the limit of {MAX_NODES}",
            grid.len()
        )));
    }
    Ok(grid)
}

/// Physical energy of `p`.
pub fn energy_physical(
    p: &AngleProfile,
    params: &PhysicalParams,
    cutoff: &CutoffSpec,
    k: &StrayMatrix,
) -> Result<EnergyBreakdown> {
    if k.grid() != &p.grid {
        return param("stray matrix was assembled on a different grid");
    }
    EnergyModel::physical(params, cutoff, k)?.evaluate(&p.theta)
}

/// Rescaled regime energy of `p`.
pub fn energy_rescaled(
    p: &AngleProfile,
    regime: &RegimeParams,
    kind: CutoffKind,
    k: &StrayMatrix,
) -> Result<EnergyBreakdown> {
    check_matrix(&p.grid, k)?;
    EnergyModel::rescaled(regime, kind, k)?.evaluate(&p.theta)
}
