//! Seeded verification batteries: dimensional reduction on strip fields and
//! structure of one-dimensional minimizers.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use edgewall_core::cutoff::{CutoffKind, CutoffSpec};
use edgewall_core::energy::{energy_physical, EnergyModel, PhysicalParams};
use edgewall_core::grid::{AngleProfile, Grid1D};
use edgewall_core::minimize::{l2_distance, minimize_theta, MinimizeOptions, STRUCTURE_TOL};
use edgewall_core::nonlocal::assemble_stray_matrix;
use edgewall_core::strip2d::{energy_2d, reduction_check, Strip2DField};
use edgewall_core::Result;

pub const GAP_FLOOR: f64 = -1e-8;
pub const STRICT_GAP: f64 = 1e-6;
pub const CONSISTENCY_TOL: f64 = 1e-3;
pub const EL_TOL: f64 = 1e-3;
pub const MIRROR_TOL: f64 = 1e-10;
pub const MAX_MINIMIZERS: usize = 3;

const MODULATIONS: [f64; 5] = [0.1, 0.2, 0.4, 0.7, 1.0];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Strip2dRow {
    pub field: String,
    pub kind: String,
    pub e_full: f64,
    pub e_avg: f64,
    pub gap: f64,
    pub criterion: String,
    pub pass: bool,
}

/// Edge-localized angle profile across the strip of width `b`.
pub fn edge_profile(x2: f64, b: f64) -> f64 {
    let w = 0.175 * b;
    1.2 * (-(x2 / w)).exp() - 1.2 * (-((b - x2) / w)).exp()
}

pub fn random_field(rng: &mut ChaCha8Rng, a: f64, cells: usize, grid: &Grid1D) -> Result<Strip2DField> {
    let b = grid.domain_length();
    let c: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Strip2DField::from_angle_fn(a, cells, grid.clone(), |x1, x2| {
        let t = 2.0 * PI * x1 / a;
        c[0] * edge_profile(x2, b)
            + c[1] * t.cos() * (PI * x2 / b).sin()
            + c[2] * (2.0 * t).sin() * (2.0 * PI * x2 / b).cos()
            + c[3] * (t + c[4]).sin()
            + c[5]
    })
}

pub fn modulated_field(k: usize, a: f64, cells: usize, grid: &Grid1D) -> Result<Strip2DField> {
    let b = grid.domain_length();
    let amp = MODULATIONS[k % MODULATIONS.len()];
    let harmonic = (k % (cells / 2).max(1) + 1) as f64;
    Strip2DField::from_angle_fn(a, cells, grid.clone(), |x1, x2| {
        0.5 + edge_profile(x2, b) + amp * (harmonic * 2.0 * PI * x1 / a).sin()
    })
}

fn independent_angle(x2: f64, b: f64) -> f64 {
    1.0 + 0.5 * edge_profile(x2, b)
}

/// Random, modulated and `x₁`-independent fields with their reduction gaps,
/// and the consistency of the strip energy with the one-dimensional energy.
pub fn strip2d_battery(
    params: &PhysicalParams,
    cutoff: &CutoffSpec,
    cells: usize,
    nodes_x2: usize,
    random_fields: usize,
    modulated_fields: usize,
    seed: u64,
) -> Result<Vec<Strip2dRow>> {
    let grid = Grid1D::uniform(0.0, params.b, nodes_x2)?;
    let mut rows = Vec::new();
    let gap_row = |field: String, kind: &str, f: &Strip2DField, criterion: &str, ok: &dyn Fn(f64) -> bool| {
        reduction_check(f, params, cutoff).map(|r| Strip2dRow {
            field,
            kind: kind.into(),
            e_full: r.e_full,
            e_avg: r.e_avg,
            gap: r.gap,
            criterion: criterion.into(),
            pass: ok(r.gap),
        })
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..random_fields {
        let f = random_field(&mut rng, params.a, cells, &grid)?;
        rows.push(gap_row(format!("random_{k}"), "random", &f, "gap >= -1e-8", &|g| g >= GAP_FLOOR)?);
    }
    for k in 0..modulated_fields {
        let f = modulated_field(k, params.a, cells, &grid)?;
        rows.push(gap_row(format!("modulated_{k}"), "modulated", &f, "gap > 1e-6", &|g| g > STRICT_GAP)?);
    }
    let b = params.b;
    let profile = AngleProfile::from_fn(grid.clone(), |x| independent_angle(x, b))?;
    let f = Strip2DField::from_profile(&profile, params.a, cells)?;
    rows.push(gap_row("independent".into(), "independent", &f, "|gap| <= 1e-8", &|g| g.abs() <= -GAP_FLOOR)?);

    let k = assemble_stray_matrix(&grid)?;
    let e1 = energy_physical(&profile, params, cutoff, &k)?.total * params.a;
    let e2 = energy_2d(&f, params, cutoff)?.total;
    rows.push(Strip2dRow {
        field: "independent".into(),
        kind: "consistency".into(),
        e_full: e2,
        e_avg: e1,
        gap: e2 - e1,
        criterion: "|E2d - a*E1d| <= 1e-3*|a*E1d|".into(),
        pass: (e2 - e1).abs() <= CONSISTENCY_TOL * e1.abs(),
    });
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElRow {
    pub h: f64,
    pub delta: f64,
    pub start: String,
    pub converged: bool,
    pub energy: f64,
    pub el_residual_sup: f64,
    pub m2_min: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    /// Distinct critical points found for this `(h, δ)`.
    pub distinct: usize,
    /// Energy difference to the mirror image `-θ`.
    pub mirror_gap: f64,
    /// Energy of the symmetrized profile minus the lowest energy found.
    pub symmetrized_excess: f64,
    pub pass: bool,
}

/// Minimizes the physical energy at every `(h, δ)` and checks the structure
/// of each distinct result.
pub fn el_check(
    a: f64,
    b: f64,
    nodes: usize,
    kind: CutoffKind,
    h_list: &[f64],
    delta_list: &[f64],
    opts: &MinimizeOptions,
) -> Result<Vec<ElRow>> {
    let grid = Grid1D::uniform(0.0, b, nodes)?;
    let k = assemble_stray_matrix(&grid)?;
    let mut rows = Vec::new();
    for &h in h_list {
        for &delta in delta_list {
            let params = PhysicalParams::new(a, b, delta, h)?;
            let cutoff = CutoffSpec::new(kind, delta)?;
            let model = EnergyModel::physical(&params, &cutoff, &k)?;
            let report = minimize_theta(&model, opts)?;
            let best = report.best().energy.total;
            let distinct = report.results.len();
            for r in &report.results {
                let theta = &r.profile.theta;
                let neg: Vec<f64> = theta.iter().map(|t| -t).collect();
                let mirror = report
                    .results
                    .iter()
                    .find(|o| l2_distance(&grid, &o.profile.theta, &neg) < 1e-6)
                    .map(|o| o.energy.total);
                let mirror_energy = match mirror {
                    Some(e) => e,
                    None => model.evaluate(&neg)?.total,
                };
                let d = &r.diagnostics;
                let m2_min = theta.iter().map(|t| t.cos()).fold(f64::INFINITY, f64::min);
                let row = ElRow {
                    h,
                    delta,
                    start: r.start_used.clone(),
                    converged: r.converged,
                    energy: r.energy.total,
                    el_residual_sup: r.el_residual_sup,
                    m2_min,
                    theta_min: d.theta_min,
                    theta_max: d.theta_max,
                    distinct,
                    mirror_gap: (mirror_energy - r.energy.total).abs(),
                    symmetrized_excess: d.symmetrized_energy - best,
                    pass: false,
                };
                let pass = row.converged
                    && row.el_residual_sup < EL_TOL
                    && row.m2_min >= -STRUCTURE_TOL
                    && row.theta_min >= -PI / 2.0 - STRUCTURE_TOL
                    && row.theta_max <= PI / 2.0 + STRUCTURE_TOL
                    && row.distinct <= MAX_MINIMIZERS
                    && row.mirror_gap <= MIRROR_TOL
                    && row.symmetrized_excess <= STRUCTURE_TOL;
                rows.push(ElRow { pass, ..row });
            }
        }
    }
    Ok(rows)
}
