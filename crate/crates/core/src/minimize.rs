//! Multi-start minimization of the edge-wall energies over the angle `θ`,
//! Euler–Lagrange verification and the structural diagnostics of minimizers.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cutoff::CutoffSpec;
use crate::energy::{EnergyBreakdown, EnergyKind, EnergyModel, Hessian, PhysicalParams, RegimeParams};
use crate::error::{param, Error, Result};
use crate::grid::{AngleProfile, Grid1D};
use crate::nonlocal::StrayMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Start {
    Monodomain,
    WallPlus,
    WallMinus,
    /// Smooth random profile drawn from the given seed.
    Random(u64),
    Custom(AngleProfile),
}

impl Start {
    pub fn label(&self) -> String {
        match self {
            Self::Monodomain => "monodomain".into(),
            Self::WallPlus => "wall_plus".into(),
            Self::WallMinus => "wall_minus".into(),
            Self::Random(seed) => format!("random_{seed}"),
            Self::Custom(_) => "custom".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LineSearch {
    #[default]
    Armijo,
    ExactQuadratic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizeOptions {
    pub max_iters: usize,
    /// Tolerance on `max_i |∂E/∂θ_i| / w_i`, the sup norm of the gradient
    /// density, which approximates the Euler–Lagrange residual.
    pub grad_tol: f64,
    pub starts: Vec<Start>,
    pub line_search: LineSearch,
    pub symmetrize: bool,
    pub memory: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            max_iters: 5000,
            grad_tol: 1e-8,
            starts: vec![Start::Monodomain, Start::WallPlus, Start::WallMinus],
            line_search: LineSearch::Armijo,
            symmetrize: false,
            memory: 12,
        }
    }
}

impl MinimizeOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.grad_tol > 0.0) {
            return param(format!("grad_tol must be positive, got {}", self.grad_tol));
        }
        if self.starts.is_empty() {
            return param("at least one start is required");
        }
        if self.max_iters == 0 || self.memory == 0 {
            return param("max_iters and memory must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub symmetric: bool,
    pub symmetry_defect: f64,
    pub symmetrized_energy: f64,
    pub winding_free: bool,
    pub m2_nonneg: bool,
    pub m1_sign_constant: bool,
    pub theta_min: f64,
    pub theta_max: f64,
    /// Width of the band at each end excluded from the residual sup.
    pub residual_skip_band: f64,
    /// `max(|θ'(0)|, |θ'(b)|)` from one-sided differences.
    pub neumann_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizeResult {
    pub profile: AngleProfile,
    pub energy: EnergyBreakdown,
    pub el_residual_sup: f64,
    pub grad_sup: f64,
    pub iterations: usize,
    pub converged: bool,
    pub start_used: String,
    pub diagnostics: Diagnostics,
    pub history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizeReport {
    /// Results with duplicates removed, in start order.
    pub results: Vec<MinimizeResult>,
    /// Number of raw results, one per start.
    pub raw_count: usize,
    /// Set when more than three distinct critical points were found.
    pub flagged: bool,
}

impl MinimizeReport {
    /// The lowest-energy result.
    pub fn best(&self) -> &MinimizeResult {
        self.results
            .iter()
            .min_by(|a, b| a.energy.total.total_cmp(&b.energy.total))
            .expect("report holds at least one result")
    }

    /// All results whose energy is within `tol` of the lowest.
    pub fn minimizers(&self, tol: f64) -> Vec<&MinimizeResult> {
        let e = self.best().energy.total;
        self.results.iter().filter(|r| r.energy.total <= e + tol).collect()
    }
}

/// Discrete `L²` distance between two nodal profiles on the same grid.
pub fn l2_distance(grid: &Grid1D, a: &[f64], b: &[f64]) -> f64 {
    grid.weights()
        .iter()
        .zip(a.iter().zip(b))
        .map(|(w, (x, y))| w * (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub const DEDUP_TOL: f64 = 1e-6;

/// Symmetric positive definite tridiagonal matrix with a Thomas solver.
#[derive(Debug, Clone)]
struct Tridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl Tridiagonal {
    fn preconditioner(model: &EnergyModel) -> Self {
        let g = model.grid();
        let n = g.len();
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n - 1];
        for k in 0..n - 1 {
            let s = model.exchange_coefficient() / g.cell_len(k);
            diag[k] += s;
            diag[k + 1] += s;
            off[k] = -s;
        }
        let stray = model.stray_curvature();
        for i in 0..n {
            diag[i] += model.zeeman_coefficient() * g.weights()[i] + stray[i];
        }
        let scale = diag.iter().fold(0.0f64, |m, v| m.max(*v));
        for (i, d) in diag.iter_mut().enumerate() {
            *d += 1e-10 * scale * g.weights()[i] / g.max_spacing();
        }
        Self { diag, off }
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        c[0] = self.off.first().copied().unwrap_or(0.0) / self.diag[0];
        d[0] = rhs[0] / self.diag[0];
        for i in 1..n {
            let m = self.diag[i] - self.off[i - 1] * c[i - 1];
            if i < n - 1 {
                c[i] = self.off[i] / m;
            }
            d[i] = (rhs[i] - self.off[i - 1] * d[i - 1]) / m;
        }
        let mut x = vec![0.0; n];
        x[n - 1] = d[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = d[i] - c[i] * x[i + 1];
        }
        x
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn mirror_average(v: &mut [f64]) {
    let n = v.len();
    for i in 0..n / 2 {
        let m = 0.5 * (v[i] + v[n - 1 - i]);
        v[i] = m;
        v[n - 1 - i] = m;
    }
}

/// `max_i |g_i| / w_i`.
pub fn gradient_density_sup(grid: &Grid1D, grad: &[f64]) -> f64 {
    grad.iter().zip(grid.weights()).map(|(g, w)| (g / w).abs()).fold(0.0, f64::max)
}

struct Objective<'m, 'a> {
    model: &'m EnergyModel<'a>,
    symmetrize: bool,
}

impl Objective<'_, '_> {
    fn eval(&self, theta: &[f64]) -> Result<(f64, Vec<f64>)> {
        let (e, mut g) = self.model.evaluate_with_gradient(theta)?;
        if self.symmetrize {
            mirror_average(&mut g);
        }
        Ok((e.total, g))
    }
}

struct Run {
    theta: Vec<f64>,
    iterations: usize,
    converged: bool,
    grad_sup: f64,
    history: Vec<f64>,
}

fn line_search(
    obj: &Objective,
    kind: LineSearch,
    theta: &[f64],
    f: f64,
    dir: &[f64],
    slope: f64,
) -> Result<Option<(f64, Vec<f64>, Vec<f64>, f64)>> {
    const C1: f64 = 1e-4;
    let step = |alpha: f64| -> Vec<f64> { theta.iter().zip(dir).map(|(t, d)| t + alpha * d).collect() };
    let accepts = |alpha: f64, fa: f64, ga: &[f64]| {
        let armijo = fa <= f + C1 * alpha * slope;
        // approximate Wolfe conditions for steps whose decrease is below rounding
        let dphi = dot(ga, dir);
        let approx = fa <= f + 1e-13 * f.abs().max(1e-300) && dphi >= 0.9 * slope && dphi <= -0.8 * slope;
        armijo || approx
    };
    let max_move = dir.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let mut alpha = if max_move > 1.0 { 1.0 / max_move } else { 1.0 };
    if kind == LineSearch::ExactQuadratic {
        let t1 = step(alpha);
        let (f1, g1) = obj.eval(&t1)?;
        let d1 = dot(&g1, dir);
        let curvature = (d1 - slope) / alpha;
        if curvature > 0.0 {
            let star = (-slope / curvature).min(4.0 * alpha);
            if (star - alpha).abs() > 1e-3 * alpha {
                let ts = step(star);
                let (fs, gs) = obj.eval(&ts)?;
                if accepts(star, fs, &gs) && (fs <= f1 || !accepts(alpha, f1, &g1)) {
                    return Ok(Some((fs, ts, gs, star)));
                }
            }
        }
        if accepts(alpha, f1, &g1) {
            return Ok(Some((f1, t1, g1, alpha)));
        }
        alpha *= 0.5;
    }
    for _ in 0..60 {
        let ta = step(alpha);
        let (fa, ga) = obj.eval(&ta)?;
        if fa.is_finite() && accepts(alpha, fa, &ga) {
            return Ok(Some((fa, ta, ga, alpha)));
        }
        alpha *= 0.5;
    }
    Ok(None)
}

const STALL_LIMIT: usize = 3;

/// Preconditioned conjugate gradients for `H d = rhs`. Returns `None` on
/// negative curvature.
fn pcg(h: &Hessian, precond: &Tridiagonal, rhs: &[f64], rel_tol: f64, max_iters: usize, sym: bool) -> Result<Option<Vec<f64>>> {
    let n = rhs.len();
    let mut x = vec![0.0; n];
    let mut r = rhs.to_vec();
    let mut z = precond.solve(&r);
    if sym {
        mirror_average(&mut z);
    }
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let stop = rel_tol * rel_tol * rz;
    for _ in 0..max_iters {
        if rz <= stop {
            break;
        }
        let hp = h.apply(&p)?;
        let php = dot(&p, &hp);
        if !(php > 0.0) {
            return Ok(None);
        }
        let a = rz / php;
        for i in 0..n {
            x[i] += a * p[i];
            r[i] -= a * hp[i];
        }
        z = precond.solve(&r);
        if sym {
            mirror_average(&mut z);
        }
        let rz_new = dot(&r, &z);
        let b = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + b * p[i];
        }
    }
    Ok(Some(x))
}

/// Newton steps with exact Hessian products, for the final stage where energy
/// differences fall below rounding. A step is accepted when it reduces the
/// gradient density without raising the energy beyond rounding. Returns
/// whether any step was taken.
fn newton_polish(
    obj: &Objective,
    precond: &Tridiagonal,
    state: &mut (&mut Vec<f64>, &mut f64, &mut Vec<f64>),
    opts: &MinimizeOptions,
    iterations: &mut usize,
    history: &mut Vec<f64>,
) -> Result<bool> {
    let grid = obj.model.grid();
    let mut moved = false;
    let mut gsup = gradient_density_sup(grid, state.2);
    for _ in 0..NEWTON_STEPS {
        if gsup < opts.grad_tol || *iterations >= opts.max_iters {
            break;
        }
        let h = obj.model.hessian_at(state.0)?;
        let rhs: Vec<f64> = state.2.iter().map(|v| -v).collect();
        let Some(dir) = pcg(&h, precond, &rhs, 1e-8, 400, obj.symmetrize)? else {
            break;
        };
        let f0 = *state.1;
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..8 {
            let t: Vec<f64> = state.0.iter().zip(&dir).map(|(a, d)| a + alpha * d).collect();
            let (ft, gt) = obj.eval(&t)?;
            let gs = gradient_density_sup(grid, &gt);
            if ft <= f0 + 1e-12 * f0.abs().max(1.0) && gs < gsup {
                accepted = Some((t, ft, gt, gs));
                break;
            }
            alpha *= 0.5;
        }
        let Some((t, ft, gt, gs)) = accepted else {
            break;
        };
        *state.0 = t;
        *state.1 = ft;
        *state.2 = gt;
        gsup = gs;
        history.push(ft);
        *iterations += 1;
        moved = true;
    }
    Ok(moved)
}

const NEWTON_STEPS: usize = 12;

fn lbfgs(obj: &Objective, theta0: Vec<f64>, opts: &MinimizeOptions) -> Result<Run> {
    let grid = obj.model.grid();
    let precond = Tridiagonal::preconditioner(obj.model);
    let mut theta = theta0;
    if obj.symmetrize {
        mirror_average(&mut theta);
    }
    let (mut f, mut g) = obj.eval(&theta)?;
    let mut history = vec![f];
    let mut s_hist: Vec<Vec<f64>> = Vec::new();
    let mut y_hist: Vec<Vec<f64>> = Vec::new();
    let mut rho_hist: Vec<f64> = Vec::new();
    let mut gamma = 1.0;
    let mut iterations = 0;
    let mut grad_sup = gradient_density_sup(grid, &g);
    let mut stalled = 0;
    while grad_sup >= opts.grad_tol && iterations < opts.max_iters {
        let direction = |s_hist: &[Vec<f64>], y_hist: &[Vec<f64>], rho_hist: &[f64], gamma: f64| {
            let mut q: Vec<f64> = g.iter().map(|v| -v).collect();
            let m = s_hist.len();
            let mut alphas = vec![0.0; m];
            for k in (0..m).rev() {
                alphas[k] = rho_hist[k] * dot(&s_hist[k], &q);
                for (qi, yi) in q.iter_mut().zip(&y_hist[k]) {
                    *qi -= alphas[k] * yi;
                }
            }
            let mut r: Vec<f64> = precond.solve(&q).into_iter().map(|v| gamma * v).collect();
            for k in 0..m {
                let beta = rho_hist[k] * dot(&y_hist[k], &r);
                for (ri, si) in r.iter_mut().zip(&s_hist[k]) {
                    *ri += (alphas[k] - beta) * si;
                }
            }
            if obj.symmetrize {
                mirror_average(&mut r);
            }
            r
        };
        let mut dir = direction(&s_hist, &y_hist, &rho_hist, gamma);
        let mut slope = dot(&g, &dir);
        if !(slope < 0.0) {
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            gamma = 1.0;
            dir = direction(&s_hist, &y_hist, &rho_hist, gamma);
            slope = dot(&g, &dir);
        }
        let mut found = line_search(obj, opts.line_search, &theta, f, &dir, slope)?;
        if found.is_none() && !s_hist.is_empty() {
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            gamma = 1.0;
            dir = direction(&s_hist, &y_hist, &rho_hist, gamma);
            slope = dot(&g, &dir);
            found = line_search(obj, opts.line_search, &theta, f, &dir, slope)?;
        }
        let Some((f_new, theta_new, g_new, _)) = found else {
            let mut state = (&mut theta, &mut f, &mut g);
            newton_polish(obj, &precond, &mut state, opts, &mut iterations, &mut history)?;
            grad_sup = gradient_density_sup(grid, &g);
            if grad_sup < opts.grad_tol {
                break;
            }
            return Err(Error::Optimization {
                reason: format!("line search failed to decrease the energy (gradient density {grad_sup:.3e})"),
                iterations,
                last: Box::new(AngleProfile::new(grid.clone(), theta)?),
            });
        };
        let s: Vec<f64> = theta_new.iter().zip(&theta).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            let py = precond.solve(&y);
            gamma = sy / dot(&y, &py);
            if s_hist.len() == opts.memory {
                s_hist.remove(0);
                y_hist.remove(0);
                rho_hist.remove(0);
            }
            s_hist.push(s);
            y_hist.push(y);
            rho_hist.push(1.0 / sy);
        }
        stalled = if f_new > f - 1e-13 * f.abs().max(1.0) { stalled + 1 } else { 0 };
        theta = theta_new;
        f = f_new;
        g = g_new;
        history.push(f);
        iterations += 1;
        grad_sup = gradient_density_sup(grid, &g);
        if stalled >= STALL_LIMIT && grad_sup >= opts.grad_tol {
            let mut state = (&mut theta, &mut f, &mut g);
            if newton_polish(obj, &precond, &mut state, opts, &mut iterations, &mut history)? {
                s_hist.clear();
                y_hist.clear();
                rho_hist.clear();
                gamma = 1.0;
            }
            grad_sup = gradient_density_sup(grid, &g);
            stalled = 0;
        }
    }
    Ok(Run {
        converged: grad_sup < opts.grad_tol,
        theta,
        iterations,
        grad_sup,
        history,
    })
}

fn wall_length(model: &EnergyModel) -> f64 {
    let b = model.grid().domain_length();
    let c = model.zeeman_coefficient() / model.exchange_coefficient();
    if c > 0.0 {
        (1.0 / c.sqrt()).min(b / 6.0)
    } else {
        b / 6.0
    }
}

/// Initial profile for a start on the model's grid.
pub fn initial_profile(model: &EnergyModel, start: &Start) -> Result<Vec<f64>> {
    let grid = model.grid();
    let (l, r) = (grid.left(), grid.right());
    let ell = wall_length(model);
    let wall = |sign: f64| -> Vec<f64> {
        grid.nodes()
            .iter()
            .map(|&x| sign * (PI / 3.0) * (-(x - l).min(r - x) / ell).exp())
            .collect()
    };
    Ok(match start {
        Start::Monodomain => vec![0.0; grid.len()],
        Start::WallPlus => wall(1.0),
        Start::WallMinus => wall(-1.0),
        Start::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let len = r - l;
            let modes: Vec<(f64, f64, f64)> = (0..4)
                .map(|k| {
                    let freq = (k + 1) as f64 * PI / len;
                    (rng.gen_range(-0.6..0.6), freq, rng.gen_range(0.0..2.0 * PI))
                })
                .collect();
            let edge: f64 = rng.gen_range(-1.2..1.2);
            grid.nodes()
                .iter()
                .map(|&x| {
                    let bulk: f64 = modes.iter().map(|(a, f, p)| a * (f * (x - l) + p).sin()).sum();
                    let e = edge * (-(x - l).min(r - x) / ell).exp();
                    (bulk * (-(x - l).min(r - x) / len).exp() + e).clamp(-FRAC_PI_2, FRAC_PI_2)
                })
                .collect()
        }
        Start::Custom(p) => {
            if &p.grid != grid {
                return param("custom start must live on the solver grid");
            }
            p.theta.clone()
        }
    })
}

fn escape_direction(grid: &Grid1D) -> Vec<f64> {
    let (l, len) = (grid.left(), grid.domain_length());
    grid.nodes()
        .iter()
        .map(|&x| {
            let t = (x - l) / len;
            1e-2 * (1.0 + 0.5 * (PI * t).cos() + 0.25 * (3.0 * PI * t).sin())
        })
        .collect()
}

/// Shift by a multiple of `2π` so that the midpoint angle lies in `(-π, π]`.
fn canonical_winding(theta: &mut [f64]) {
    let mid = theta[theta.len() / 2];
    let k = ((mid + PI) / (2.0 * PI)).floor();
    let mut shift = -k * 2.0 * PI;
    if mid + shift <= -PI {
        shift += 2.0 * PI;
    }
    if shift != 0.0 {
        for t in theta.iter_mut() {
            *t += shift;
        }
    }
}

pub const STRUCTURE_TOL: f64 = 1e-8;

/// Sup of the Euler–Lagrange residual over interior nodes outside the skip band,
/// the skip band width, and the Neumann defect.
pub fn residual_summary(model: &EnergyModel, theta: &[f64]) -> Result<(f64, f64, f64)> {
    let r = model.el_residual(theta)?;
    let g = model.grid();
    let n = g.len();
    let band = 2.0 * g.cell_len(0).max(g.cell_len(n - 2));
    let (l, rr) = (g.left(), g.right());
    let sup = (1..n - 1)
        .filter(|&i| {
            let x = g.nodes()[i];
            x - l > band && rr - x > band
        })
        .map(|i| r[i].abs())
        .fold(0.0, f64::max);
    Ok((sup, band, r[0].abs().max(r[n - 1].abs())))
}

pub fn diagnose(model: &EnergyModel, theta: &[f64], energy: f64) -> Result<Diagnostics> {
    let grid = model.grid();
    let n = theta.len();
    let (theta_min, theta_max) = theta
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &t| (a.min(t), b.max(t)));
    let (symmetry_defect, symmetrized_energy) = if grid.is_symmetric(1e-12) {
        let defect = (0..n).map(|i| (theta[i] - theta[n - 1 - i]).abs()).fold(0.0, f64::max);
        let mut sym = theta.to_vec();
        mirror_average(&mut sym);
        (defect, model.evaluate(&sym)?.total)
    } else {
        (f64::NAN, f64::NAN)
    };
    let m1_sup = theta.iter().map(|t| t.sin().abs()).fold(0.0, f64::max);
    let m1_pos = theta.iter().all(|t| -t.sin() >= -STRUCTURE_TOL);
    let m1_neg = theta.iter().all(|t| -t.sin() <= STRUCTURE_TOL);
    let (_, band, neumann) = residual_summary(model, theta)?;
    Ok(Diagnostics {
        symmetric: symmetrized_energy <= energy + STRUCTURE_TOL,
        symmetry_defect,
        symmetrized_energy,
        winding_free: theta_min >= -FRAC_PI_2 - STRUCTURE_TOL && theta_max <= FRAC_PI_2 + STRUCTURE_TOL,
        m2_nonneg: theta.iter().all(|t| t.cos() >= -STRUCTURE_TOL),
        m1_sign_constant: m1_sup < STRUCTURE_TOL || m1_pos || m1_neg,
        theta_min,
        theta_max,
        residual_skip_band: band,
        neumann_defect: neumann,
    })
}

fn run_start(model: &EnergyModel, start: &Start, opts: &MinimizeOptions) -> Result<MinimizeResult> {
    let obj = Objective {
        model,
        symmetrize: opts.symmetrize,
    };
    let theta0 = initial_profile(model, start)?;
    let mut run = lbfgs(&obj, theta0, opts)?;
    let mut total_iterations = run.iterations;
    // Critical points that are not minima (for instance θ ≡ π, reachable from
    // starts sharing one of the energy's symmetries) are left by perturbing and
    // descending again. The perturbation is odd in θ so that mirror starts
    // keep exactly mirrored trajectories.
    for _ in 0..3 {
        if !run.converged {
            break;
        }
        let f = *run.history.last().unwrap();
        let sign = if run.theta.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
        let perturbed: Vec<f64> = run
            .theta
            .iter()
            .zip(escape_direction(model.grid()))
            .map(|(t, p)| t + sign * p)
            .collect();
        let next = lbfgs(&obj, perturbed, opts)?;
        total_iterations += next.iterations;
        let f_next = *next.history.last().unwrap();
        if next.converged && f_next < f - 1e-9 * f.abs().max(1.0) {
            run = next;
        } else {
            break;
        }
    }
    run.iterations = total_iterations;
    let mut theta = run.theta;
    canonical_winding(&mut theta);
    let energy = model.evaluate(&theta)?;
    let (el_residual_sup, _, _) = residual_summary(model, &theta)?;
    let diagnostics = diagnose(model, &theta, energy.total)?;
    Ok(MinimizeResult {
        profile: AngleProfile::new(model.grid().clone(), theta)?,
        energy,
        el_residual_sup,
        grad_sup: run.grad_sup,
        iterations: run.iterations,
        converged: run.converged,
        start_used: start.label(),
        diagnostics,
        history: run.history,
    })
}

/// Minimize from every start in parallel and deduplicate the results.
pub fn minimize_theta(model: &EnergyModel, opts: &MinimizeOptions) -> Result<MinimizeReport> {
    opts.validate()?;
    if opts.symmetrize && !model.grid().is_symmetric(1e-12) {
        return param("symmetrize requires a reflection-symmetric grid");
    }
    let raw: Vec<Result<MinimizeResult>> = opts.starts.par_iter().map(|s| run_start(model, s, opts)).collect();
    let raw: Vec<MinimizeResult> = raw.into_iter().collect::<Result<_>>()?;
    let raw_count = raw.len();
    let mut results: Vec<MinimizeResult> = Vec::new();
    for r in raw {
        let dup = results
            .iter()
            .any(|k| l2_distance(model.grid(), &k.profile.theta, &r.profile.theta) < DEDUP_TOL);
        if !dup {
            results.push(r);
        }
    }
    let flagged = results.len() > 3;
    Ok(MinimizeReport {
        results,
        raw_count,
        flagged,
    })
}

/// Euler–Lagrange residual of the physical energy at every node.
pub fn el_residual(
    p: &AngleProfile,
    params: &PhysicalParams,
    cutoff: &CutoffSpec,
    k: &StrayMatrix,
) -> Result<Vec<f64>> {
    if k.grid() != &p.grid {
        return param("stray matrix was assembled on a different grid");
    }
    EnergyModel::physical(params, cutoff, k)?.el_residual(&p.theta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeTrace {
    /// `m₂` at `x = δ_ε/L_ε`.
    pub n_eps: f64,
    /// `m₂` at `x = w - δ_ε/L_ε`.
    pub n_eps_top: f64,
    pub symmetry_defect: f64,
}

pub fn extract_edge_trace(result: &MinimizeResult, regime: &RegimeParams) -> Result<EdgeTrace> {
    let p = &result.profile;
    let r = regime.rescaled_cutoff();
    let (l, w) = (p.grid.left(), p.grid.right());
    let m2: Vec<f64> = p.m2();
    let bottom = p.grid.interpolate(&m2, l + r)?;
    let top = p.grid.interpolate(&m2, w - r)?;
    Ok(EdgeTrace {
        n_eps: bottom,
        n_eps_top: top,
        symmetry_defect: (bottom - top).abs(),
    })
}

/// Whether a model is the rescaled energy (edge traces are meaningful).
pub fn is_rescaled(model: &EnergyModel) -> bool {
    model.kind() == EnergyKind::Rescaled
}
