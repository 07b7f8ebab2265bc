//! Regime sweeps in `ε`: energy bracketing, edge traces and blow-up profiles
//! against the limit model, and finite-`ε` bifurcation scans in `β`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{bound_report, BoundReport};
use crate::cutoff::CutoffKind;
use crate::energy::{derive_regime, physical_from_rescaled, regime_grid, EnergyModel, RegimeMesh, RegimeParams};
use crate::error::{param, Result};
use crate::grid::AngleProfile;
use crate::limit::{beta_critical, minimize_f0, LimitRegime, WallProfile};
use crate::minimize::{extract_edge_trace, minimize_theta, MinimizeOptions, MinimizeResult};
use crate::nonlocal::assemble_stray_matrix;

/// A trace equal to 1 within this tolerance counts as monodomain.
pub const MONODOMAIN_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub b: f64,
    pub cutoff: CutoffKind,
    pub mesh: RegimeMesh,
    pub minimize: MinimizeOptions,
    /// Truncation length of the upper-bound profile; `6/√β` when absent.
    pub k_trunc: Option<f64>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            b: 1.0,
            cutoff: CutoffKind::default(),
            mesh: RegimeMesh::default(),
            minimize: MinimizeOptions::default(),
            k_trunc: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub epsilon: f64,
    pub regime: RegimeParams,
    /// Minimum of the rescaled energy `F_{ε,1d}`.
    pub min_energy: f64,
    /// The same minimum as the physical energy `λ/2π + F/L_ε`.
    pub physical_energy: f64,
    pub target_2f0: f64,
    pub n_eps: f64,
    pub n0: f64,
    /// `L²` distance between `|θ_ε|` and `θ_∞` on `[0, X]`.
    pub profile_l2_gap: f64,
    /// Sup of `||θ_ε| - θ_∞|` over `[0, w/2]`.
    pub profile_sup_gap: f64,
    /// Blow-up window `X = min(w/2, 12/√β)`.
    pub window: f64,
    pub converged: bool,
    pub nodes: usize,
    pub theta_sup: f64,
    pub bounds: BoundReport,
}

impl SweepPoint {
    /// Whether the computed minimum lies between the lower bounds and the
    /// upper-bound profile energy.
    pub fn bracketed(&self) -> bool {
        self.bounds.lower_total <= self.min_energy && self.min_energy <= self.bounds.upper_test + 1e-10
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepFailure {
    pub epsilon: f64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub lambda: f64,
    pub beta: f64,
    pub n0: f64,
    pub target_2f0: f64,
    /// Successful points in sweep order.
    pub points: Vec<SweepPoint>,
    pub failures: Vec<SweepFailure>,
}

impl Sweep {
    /// `|n_ε - n₀|` along the sweep.
    pub fn trace_errors(&self) -> Vec<f64> {
        self.points.iter().map(|p| (p.n_eps - p.n0).abs()).collect()
    }

    pub fn l2_gaps(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.profile_l2_gap).collect()
    }

    pub fn sup_gaps(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.profile_sup_gap).collect()
    }
}

/// Whether `v` never increases by more than `tol`.
pub fn non_increasing(v: &[f64], tol: f64) -> bool {
    v.windows(2).all(|w| w[1] <= w[0] + tol)
}

/// Distances of `|θ|` to the limit wall: `L²` on `[0, window]` and sup over the
/// lower half of the domain.
pub fn blow_up_gaps(p: &AngleProfile, wall: &WallProfile, window: f64) -> (f64, f64) {
    let x = p.grid.nodes();
    let l = p.grid.left();
    let half = 0.5 * p.grid.domain_length();
    let d = |i: usize| p.theta[i].abs() - wall.value(x[i] - l);
    let mut l2 = 0.0;
    let mut sup: f64 = 0.0;
    for i in 0..p.grid.len() {
        if x[i] - l > half + 1e-12 * half {
            break;
        }
        sup = sup.max(d(i).abs());
        if i + 1 < p.grid.len() && x[i] - l < window {
            let (a, b) = (x[i] - l, x[i + 1] - l);
            let (da, db) = (d(i), d(i + 1));
            if b <= window {
                l2 += 0.5 * (da * da + db * db) * (b - a);
            } else {
                let t = (window - a) / (b - a);
                let th = p.theta[i] + t * (p.theta[i + 1] - p.theta[i]);
                let dw = th.abs() - wall.value(window);
                l2 += 0.5 * (da * da + dw * dw) * (window - a);
            }
        }
    }
    (l2.sqrt(), sup)
}

fn solve_point(epsilon: f64, lambda: f64, beta: f64, opts: &SweepOptions) -> Result<(RegimeParams, MinimizeResult, BoundReport, usize)> {
    let regime = derive_regime(epsilon, lambda, beta, opts.b)?;
    let grid = regime_grid(&regime, &opts.mesh)?;
    let k = assemble_stray_matrix(&grid)?;
    let model = EnergyModel::rescaled(&regime, opts.cutoff, &k)?;
    let report = minimize_theta(&model, &opts.minimize)?;
    let best = report.best().clone();
    let bounds = bound_report(&best.profile, &regime, opts.cutoff, &k, opts.k_trunc)?;
    Ok((regime, best, bounds, grid.len()))
}

/// Solves one regime point and compares it with the limit model.
pub fn sweep_point(epsilon: f64, lambda: f64, beta: f64, opts: &SweepOptions) -> Result<SweepPoint> {
    let limit = minimize_f0(beta, lambda)?;
    let (regime, best, bounds, nodes) = solve_point(epsilon, lambda, beta, opts)?;
    let trace = extract_edge_trace(&best, &regime)?;
    let wall = WallProfile::new(limit.theta0, beta)?;
    let window = (0.5 * regime.rescaled_width).min(12.0 / beta.sqrt());
    let (l2, sup) = blow_up_gaps(&best.profile, &wall, window);
    Ok(SweepPoint {
        epsilon,
        regime,
        min_energy: best.energy.total,
        physical_energy: physical_from_rescaled(best.energy.total, &regime),
        target_2f0: 2.0 * limit.f0_min,
        n_eps: trace.n_eps,
        n0: limit.n0,
        profile_l2_gap: l2,
        profile_sup_gap: sup,
        window,
        converged: best.converged,
        nodes,
        theta_sup: best.profile.theta.iter().fold(0.0, |m: f64, t| m.max(t.abs())),
        bounds,
    })
}

/// Solves the rescaled problem at every `ε` and compares with the limit model.
/// Points whose grid or solve fails are recorded and skipped.
pub fn run_sweep(eps_list: &[f64], lambda: f64, beta: f64, opts: &SweepOptions) -> Result<Sweep> {
    if eps_list.len() < 3 {
        return param(format!("a sweep needs at least 3 epsilon values, got {}", eps_list.len()));
    }
    if !eps_list.windows(2).all(|w| w[1] < w[0]) {
        return param("epsilon list must be strictly decreasing");
    }
    for &e in eps_list {
        derive_regime(e, lambda, beta, opts.b)?;
    }
    let limit = minimize_f0(beta, lambda)?;
    let outcomes: Vec<Result<SweepPoint>> =
        eps_list.par_iter().map(|&e| sweep_point(e, lambda, beta, opts)).collect();
    let mut points = Vec::new();
    let mut failures = Vec::new();
    for (&epsilon, outcome) in eps_list.iter().zip(outcomes) {
        match outcome {
            Ok(p) => points.push(p),
            Err(e) => failures.push(SweepFailure {
                epsilon,
                error: e.to_string(),
            }),
        }
    }
    Ok(Sweep {
        lambda,
        beta,
        n0: limit.n0,
        target_2f0: 2.0 * limit.f0_min,
        points,
        failures,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationRow {
    pub beta: f64,
    pub n0: f64,
    pub theta0_deg: f64,
    pub f0_min: f64,
    pub regime: LimitRegime,
    /// Finite-`ε` edge trace, when a regime `ε` was given.
    pub n_eps: Option<f64>,
    pub min_energy: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationScan {
    pub lambda: f64,
    pub epsilon: Option<f64>,
    pub beta_c: f64,
    pub rows: Vec<BifurcationRow>,
    /// Adjacent scan values `(β_lo, β_hi)` between which `n_ε` reaches 1.
    pub bracket: Option<(f64, f64)>,
    /// Crossing estimate inside the bracket.
    pub crossing: Option<f64>,
}

/// Limit-model rows for each `β`, and the finite-`ε` trace when `epsilon` is
/// given.
pub fn bifurcation_scan(
    beta_list: &[f64],
    lambda: f64,
    epsilon: Option<f64>,
    opts: &SweepOptions,
) -> Result<BifurcationScan> {
    if beta_list.is_empty() || !beta_list.windows(2).all(|w| w[1] > w[0]) {
        return param("beta list must be nonempty and strictly increasing");
    }
    if let Some(e) = epsilon {
        for &b in beta_list {
            derive_regime(e, lambda, b, opts.b)?;
        }
    }
    let rows = beta_list
        .par_iter()
        .map(|&beta| -> Result<BifurcationRow> {
            let limit = minimize_f0(beta, lambda)?;
            let mut row = BifurcationRow {
                beta,
                n0: limit.n0,
                theta0_deg: limit.theta0.to_degrees(),
                f0_min: limit.f0_min,
                regime: limit.regime,
                n_eps: None,
                min_energy: None,
                error: None,
            };
            if let Some(e) = epsilon {
                match solve_point(e, lambda, beta, opts)
                    .and_then(|(regime, best, _, _)| Ok((extract_edge_trace(&best, &regime)?, best)))
                {
                    Ok((trace, best)) => {
                        row.n_eps = Some(trace.n_eps);
                        row.min_energy = Some(best.energy.total);
                    }
                    Err(err) => row.error = Some(err.to_string()),
                }
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    let (bracket, crossing) = locate_crossing(&rows);
    Ok(BifurcationScan {
        lambda,
        epsilon,
        beta_c: beta_critical(lambda),
        rows,
        bracket,
        crossing,
    })
}

/// Brackets the smallest `β` from which `n_ε` stays at 1, and estimates the
/// crossing by extrapolating `1 - n_ε` linearly from the two largest departed
/// values.
fn locate_crossing(rows: &[BifurcationRow]) -> (Option<(f64, f64)>, Option<f64>) {
    let pts: Vec<(f64, f64)> = rows.iter().filter_map(|r| r.n_eps.map(|n| (r.beta, 1.0 - n))).collect();
    let departed = |d: f64| d > MONODOMAIN_TOL;
    let Some(first_mono) = (0..pts.len()).rev().take_while(|&i| !departed(pts[i].1)).last() else {
        return (None, None);
    };
    if first_mono == 0 {
        return (None, None);
    }
    let (lo, hi) = (pts[first_mono - 1].0, pts[first_mono].0);
    let mut estimate = 0.5 * (lo + hi);
    if first_mono >= 2 {
        let (b1, d1) = pts[first_mono - 2];
        let (b2, d2) = pts[first_mono - 1];
        if d1 > d2 {
            let root = b2 + d2 * (b2 - b1) / (d1 - d2);
            estimate = root.clamp(lo, hi);
        }
    }
    (Some((lo, hi)), Some(estimate))
}

/// Default `ε` values of a sweep.
pub fn default_eps_list() -> Vec<f64> {
    vec![1e-2, 1e-3, 1e-4, 1e-6]
}

/// `λ/2π`, the leading order of the physical minimum.
pub fn leading_energy(lambda: f64) -> f64 {
    lambda / (2.0 * PI)
}
