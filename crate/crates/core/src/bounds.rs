//! Computable bracketing of the rescaled minimum energy: a Modica–Mortola
//! lower bound for the local part, a dual-potential lower bound for the stray
//! part, and the truncated optimal-profile upper bound.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::cutoff::{eta, CutoffKind, CutoffSpec};
use crate::energy::{energy_rescaled, EnergyModel, RegimeParams};
use crate::error::{param, Result};
use crate::grid::{AngleProfile, Grid1D};
use crate::limit::{minimize_f0, WallProfile};
use crate::nonlocal::StrayMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub lower_mm: f64,
    pub lower_dual: f64,
    /// `lower_mm + lower_dual`, a lower bound for the full energy.
    pub lower_total: f64,
    pub upper_test: f64,
    pub bracket_width: f64,
    pub regime: RegimeParams,
    pub k_trunc: f64,
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    /// Edge trace used to build the dual potential.
    pub n_eps: f64,
}

fn surd(m2: f64) -> f64 {
    1.0 - ((1.0 + m2.clamp(-1.0, 1.0)) / 2.0).sqrt()
}

fn m2_at(p: &AngleProfile, x: f64) -> Result<f64> {
    Ok(p.grid.interpolate(&p.theta, x)?.cos())
}

/// Modica–Mortola lower bound for the local part of the rescaled energy,
/// using `m₂` at `r`, `w - r` and `R`.
pub fn mm_lower_bound(p: &AngleProfile, r: f64, big_r: f64, beta: f64) -> Result<f64> {
    let (l, w) = (p.grid.left(), p.grid.right());
    let half = 0.5 * (w - l);
    if !(beta > 0.0) {
        return param(format!("beta must be positive, got {beta}"));
    }
    if !(r >= 0.0) || r > big_r {
        return param(format!("need 0 <= r <= R, got r = {r}, R = {big_r}"));
    }
    if big_r > half * (1.0 + 1e-12) {
        return param(format!("R = {big_r} exceeds half the width {half}"));
    }
    let sb = beta.sqrt();
    Ok(4.0 * sb * surd(m2_at(p, l + r)?) + 4.0 * sb * surd(m2_at(p, w - r)?)
        - 8.0 * sb * surd(m2_at(p, l + big_r)?))
}

/// The node in `[w/4, w/2]` with the largest `m₂`, ties to the leftmost.
pub fn default_big_r(p: &AngleProfile) -> f64 {
    let (l, w) = (p.grid.left(), p.grid.right());
    let len = w - l;
    let mut best = (f64::NEG_INFINITY, l + 0.5 * len);
    for (x, t) in p.grid.nodes().iter().zip(&p.theta) {
        let off = x - l;
        if off >= 0.25 * len && off <= 0.5 * len && t.cos() > best.0 {
            best = (t.cos(), off);
        }
    }
    best.1
}

/// Radial piece `amp · ln(c / max(ρ, ρ₀))` for `ρ ≤ c`, zero beyond.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogPiece {
    pub amp: f64,
    pub rho0: f64,
    pub c: f64,
}

impl LogPiece {
    pub fn value(&self, rho: f64) -> f64 {
        if rho >= self.c {
            0.0
        } else {
            self.amp * (self.c / rho.max(self.rho0)).ln()
        }
    }

    pub fn derivative(&self, rho: f64) -> f64 {
        if rho <= self.rho0 || rho >= self.c {
            0.0
        } else {
            -self.amp / rho
        }
    }

    /// `∫₀^x value(ρ) dρ` for `x ≥ 0`.
    pub fn antiderivative(&self, x: f64) -> f64 {
        let (a, c) = (self.rho0, self.c);
        if x <= a {
            self.amp * (c / a).ln() * x
        } else if x <= c {
            self.amp * (x * (c / x).ln() + x - a)
        } else {
            self.amp * (c - a)
        }
    }
}

/// Test potential `v = V(|(x,z)|) - V(|(w - x, z)|)` with `V = v₁ + v₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualPotential {
    pub n_eps: f64,
    pub v1: LogPiece,
    pub v2: LogPiece,
    pub width: f64,
}

impl DualPotential {
    /// Radial breakpoints `δ_ε/L_ε`, `1` and `b/(2ε L_ε)`.
    pub fn breakpoints(&self) -> [f64; 3] {
        [self.v1.rho0, self.v2.rho0, self.v1.c]
    }

    pub fn radial(&self, rho: f64) -> f64 {
        self.v1.value(rho) + self.v2.value(rho)
    }

    pub fn radial_derivative(&self, rho: f64) -> f64 {
        self.v1.derivative(rho) + self.v2.derivative(rho)
    }

    pub fn value(&self, x: f64, z: f64) -> f64 {
        self.radial(x.hypot(z)) - self.radial((self.width - x).hypot(z))
    }

    /// Trace `v(x, 0)`.
    pub fn trace(&self, x: f64) -> f64 {
        self.value(x, 0.0)
    }

    /// `∫₀^x v(s, 0) ds` for `0 ≤ x ≤ w`.
    fn trace_antiderivative(&self, x: f64) -> f64 {
        let radial = |s: f64| self.v1.antiderivative(s) + self.v2.antiderivative(s);
        radial(x) - (radial(self.width) - radial(self.width - x))
    }

    /// `∬ |∇v|²`, in closed form.
    pub fn dirichlet_energy(&self) -> f64 {
        let n = self.n_eps;
        n * n / PI * (self.v2.rho0 / self.v1.rho0).ln() + (self.v1.c / self.v2.rho0).ln() / PI
    }

    /// `∫₀^w v(x, 0) u'(x) dx` for the piecewise-linear interpolant of `u`.
    pub fn pairing(&self, grid: &Grid1D, u: &[f64]) -> Result<f64> {
        if u.len() != grid.len() {
            return param(format!("{} values for a grid of {} nodes", u.len(), grid.len()));
        }
        let x = grid.nodes();
        let l = grid.left();
        let mut sum = 0.0;
        for k in 0..grid.num_cells() {
            let du = u[k + 1] - u[k];
            if du == 0.0 {
                continue;
            }
            let (p, q) = (x[k] - l, x[k + 1] - l);
            let integral = self.trace_antiderivative(q) - self.trace_antiderivative(p);
            sum += du / (q - p) * integral;
        }
        Ok(sum)
    }
}

/// Builds the logarithmic test potential for the edge trace `n_eps`.
pub fn dual_potential(regime: &RegimeParams, n_eps: f64) -> Result<DualPotential> {
    if !(0.0..=1.0).contains(&n_eps) {
        return param(format!("n_eps must lie in [0, 1], got {n_eps}"));
    }
    let a = regime.rescaled_cutoff();
    let c = 0.5 * regime.rescaled_width;
    if !(a < 1.0 && 1.0 < c) {
        return param(format!(
            "dual potential needs delta_eps/L_eps < 1 < b/(2 eps L_eps), got {a} and {c}"
        ));
    }
    Ok(DualPotential {
        n_eps,
        v1: LogPiece { amp: -n_eps / (2.0 * PI), rho0: a, c },
        v2: LogPiece { amp: (n_eps - 1.0) / (2.0 * PI), rho0: 1.0, c },
        width: regime.rescaled_width,
    })
}

fn check_grid(p: &AngleProfile, regime: &RegimeParams) -> Result<()> {
    let w = regime.rescaled_width;
    if p.grid.left().abs() > 1e-12 * w || (p.grid.right() - w).abs() > 1e-9 * w {
        return param("profile is not defined on the rescaled domain [0, b/(eps L_eps)]");
    }
    Ok(())
}

/// Edge trace `m₂(δ_ε/L_ε)` clamped to `[0, 1]`.
pub fn edge_trace(p: &AngleProfile, regime: &RegimeParams) -> Result<f64> {
    Ok(m2_at(p, p.grid.left() + regime.rescaled_cutoff())?.clamp(0.0, 1.0))
}

/// Dual lower bound for the stray part `F^S` of the rescaled energy at
/// a given potential.
pub fn dual_bound_with(p: &AngleProfile, regime: &RegimeParams, kind: CutoffKind, v: &DualPotential) -> Result<f64> {
    check_grid(p, regime)?;
    let cutoff = CutoffSpec::new(kind, regime.rescaled_cutoff())?;
    let eta = crate::cutoff::eta_delta_nodes(&cutoff, &p.grid)?;
    let u: Vec<f64> = p.theta.iter().zip(&eta).map(|(t, e)| t.cos() * e).collect();
    let lnln = regime.lnln();
    let lambda = regime.lambda;
    Ok(-regime.normalization - lambda / (2.0 * lnln) * v.dirichlet_energy()
        - lambda / lnln * v.pairing(&p.grid, &u)?)
}

/// Dual lower bound for `F^S` with the potential built at the profile's own
/// edge trace.
pub fn dual_stray_lower_bound(p: &AngleProfile, regime: &RegimeParams, kind: CutoffKind) -> Result<f64> {
    let v = dual_potential(regime, edge_trace(p, regime)?)?;
    dual_bound_with(p, regime, kind, &v)
}

/// Default truncation length `6/√β`.
pub fn default_k_trunc(beta: f64) -> f64 {
    6.0 / beta.sqrt()
}

/// Largest truncation length compatible with the domain.
fn k_limit(regime: &RegimeParams) -> f64 {
    0.5 * (0.5 * regime.rescaled_width - regime.rescaled_cutoff())
}

/// Truncated optimal wall profile at both edges, sampled on `grid`.
pub fn upper_bound_profile(
    regime: &RegimeParams,
    k_trunc: f64,
    kind: CutoffKind,
    grid: &Grid1D,
) -> Result<AngleProfile> {
    if !(k_trunc > 1.0) {
        return param(format!("K_trunc must exceed 1, got {k_trunc}"));
    }
    if k_trunc >= k_limit(regime) {
        return param(format!(
            "K_trunc = {k_trunc} too large: need 2K + delta_eps/L_eps < b/(2 eps L_eps)"
        ));
    }
    let w = regime.rescaled_width;
    if grid.left().abs() > 1e-12 * w || (grid.right() - w).abs() > 1e-9 * w {
        return param("grid does not span the rescaled domain");
    }
    let theta0 = minimize_f0(regime.beta, regime.lambda)?.theta0;
    let wall = WallProfile::new(theta0, regime.beta)?;
    let a = regime.rescaled_cutoff();
    let spec = CutoffSpec::new(kind, 1.0)?;
    let glide_start = wall.value(k_trunc);
    let bar = |x: f64| -> Result<f64> {
        if x <= a {
            Ok(theta0)
        } else if x <= a + k_trunc {
            Ok(wall.value(x - a))
        } else if x <= a + 2.0 * k_trunc {
            Ok(glide_start * (1.0 - eta(&spec, x / k_trunc - 1.0 - a / k_trunc)?))
        } else {
            Ok(0.0)
        }
    };
    let theta = grid
        .nodes()
        .iter()
        .map(|&x| bar(x.min(w - x).max(0.0)))
        .collect::<Result<Vec<_>>>()?;
    AngleProfile::new(grid.clone(), theta)
}

/// Resolves the truncation length: the requested value, or `6/√β` clamped to
/// fit the domain.
pub fn resolve_k_trunc(regime: &RegimeParams, requested: Option<f64>) -> f64 {
    match requested {
        Some(k) => k,
        None => default_k_trunc(regime.beta).min(0.99 * k_limit(regime)),
    }
}

/// All bounds for `p` on the rescaled grid of `k`.
pub fn bound_report(
    p: &AngleProfile,
    regime: &RegimeParams,
    kind: CutoffKind,
    k: &StrayMatrix,
    k_trunc: Option<f64>,
) -> Result<BoundReport> {
    check_grid(p, regime)?;
    let r = regime.rescaled_cutoff();
    let big_r = default_big_r(p);
    let lower_mm = mm_lower_bound(p, r, big_r, regime.beta)?;
    let n_eps = edge_trace(p, regime)?;
    let lower_dual = dual_bound_with(p, regime, kind, &dual_potential(regime, n_eps)?)?;
    let k_trunc = resolve_k_trunc(regime, k_trunc);
    let test = upper_bound_profile(regime, k_trunc, kind, &p.grid)?;
    let upper_test = energy_rescaled(&test, regime, kind, k)?.total;
    let lower_total = lower_mm + lower_dual;
    Ok(BoundReport {
        lower_mm,
        lower_dual,
        lower_total,
        upper_test,
        bracket_width: upper_test - lower_total,
        regime: *regime,
        k_trunc,
        r,
        big_r,
        n_eps,
    })
}

/// Local and stray parts of the rescaled energy, `(F^MM, F^S)`.
pub fn energy_split(model: &EnergyModel, theta: &[f64]) -> Result<(f64, f64)> {
    let e = model.evaluate(theta)?;
    Ok((e.local(), e.stray_normalized()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::{derive_regime, regime_grid, RegimeMesh};
    use crate::nonlocal::assemble_stray_matrix;
    use crate::quad::integrate_composite;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(eps: f64, beta: f64) -> (RegimeParams, StrayMatrix) {
        let regime = derive_regime(eps, PI, beta, 1.0).unwrap();
        let grid = regime_grid(&regime, &RegimeMesh::default()).unwrap();
        (regime, assemble_stray_matrix(&grid).unwrap())
    }

    fn polar_dirichlet(v: &DualPotential) -> f64 {
        // 2D quadrature of |∇v|² over the disk around the left edge, doubled,
        // with the gradient taken by central differences of the potential.
        let c = v.v1.c;
        let mut cuts = vec![1e-300, v.v1.rho0, 1.0, c];
        cuts.dedup();
        let mut total = 0.0;
        for win in cuts.windows(2) {
            let (lo, hi) = (win[0].max(1e-12), win[1]);
            let panels = ((hi / lo).ln().ceil() as usize * 4).max(4);
            let llo = lo.ln();
            let lhi = hi.ln();
            total += integrate_composite(16, llo, lhi, panels, |s| {
                let rho = s.exp();
                let ang = integrate_composite(8, 0.0, 2.0 * PI, 4, |phi| {
                    let (x, z) = (rho * phi.cos(), rho * phi.sin());
                    let hs = 1e-6 * rho;
                    let gx = (v.value(x + hs, z) - v.value(x - hs, z)) / (2.0 * hs);
                    let gz = (v.value(x, z + hs) - v.value(x, z - hs)) / (2.0 * hs);
                    gx * gx + gz * gz
                });
                ang * rho * rho
            });
        }
        2.0 * total
    }

    #[test]
    fn dirichlet_closed_form_special_cases() {
        let (regime, _) = setup(1e-3, 1.0);
        let w2 = regime.b / (2.0 * regime.epsilon * regime.l_eps);
        let v0 = dual_potential(&regime, 0.0).unwrap();
        assert_eq!(v0.v1.value(0.1), 0.0);
        assert!((v0.dirichlet_energy() - w2.ln() / PI).abs() < 1e-13);
        let v1 = dual_potential(&regime, 1.0).unwrap();
        assert_eq!(v1.v2.value(0.5), 0.0);
        let expect = ((regime.l_eps / regime.delta_eps).ln() + w2.ln()) / PI;
        assert!((v1.dirichlet_energy() - expect).abs() < 1e-13);
        assert!(dual_potential(&regime, 1.5).is_err());
    }

    #[test]
    fn dirichlet_matches_polar_quadrature() {
        let (regime, _) = setup(1e-3, 1.0);
        let v = dual_potential(&regime, 0.5).unwrap();
        let q = polar_dirichlet(&v);
        assert!((q - v.dirichlet_energy()).abs() < 1e-6 * v.dirichlet_energy(), "{q} {}", v.dirichlet_energy());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let eps = 10f64.powf(rng.gen_range(-6.0..-1.5));
            let regime = derive_regime(eps, PI, 1.0, 1.0).unwrap();
            let v = dual_potential(&regime, rng.gen_range(0.0..1.0)).unwrap();
            let q = polar_dirichlet(&v);
            assert!((q - v.dirichlet_energy()).abs() < 1e-6 * v.dirichlet_energy());
        }
    }

    #[test]
    fn potential_is_continuous() {
        let (regime, _) = setup(1e-4, 0.25);
        let v = dual_potential(&regime, 0.3).unwrap();
        for rho in v.breakpoints() {
            let (lo, hi) = (v.radial(rho * (1.0 - 1e-14)), v.radial(rho * (1.0 + 1e-14)));
            assert!((lo - hi).abs() < 1e-12, "{rho}: {lo} {hi}");
        }
    }

    #[test]
    fn pairing_matches_quadrature() {
        let (regime, k) = setup(1e-3, 0.25);
        let g = k.grid();
        let v = dual_potential(&regime, 0.6).unwrap();
        let u: Vec<f64> = g.nodes().iter().map(|&x| (x / 3.0).sin() * (-x / 5.0).exp()).collect();
        let exact = v.pairing(g, &u).unwrap();
        let mut q = 0.0;
        let x = g.nodes();
        for c in 0..g.num_cells() {
            let s = (u[c + 1] - u[c]) / g.cell_len(c);
            let mut cuts = vec![x[c], x[c + 1]];
            for b in v.breakpoints() {
                for p in [b, regime.rescaled_width - b] {
                    if p > x[c] && p < x[c + 1] {
                        cuts.push(p);
                    }
                }
            }
            cuts.sort_by(f64::total_cmp);
            for win in cuts.windows(2) {
                q += s * integrate_composite(12, win[0], win[1], 4, |t| v.trace(t));
            }
        }
        assert!((exact - q).abs() < 1e-10 * (1.0 + q.abs()), "{exact} {q}");
    }

    #[test]
    fn mm_bound_examples() {
        let (regime, k) = setup(1e-3, 0.25);
        let g = k.grid().clone();
        let flat = AngleProfile::constant(g.clone(), 0.0);
        let r = regime.rescaled_cutoff();
        assert_eq!(mm_lower_bound(&flat, r, 0.5 * regime.rescaled_width, 0.25).unwrap(), 0.0);
        assert!(mm_lower_bound(&flat, 2.0, 1.0, 0.25).is_err());
        let kt = resolve_k_trunc(&regime, None);
        let test = upper_bound_profile(&regime, kt, CutoffKind::Smoothstep, &g).unwrap();
        let n0 = minimize_f0(0.25, PI).unwrap().n0;
        let b = mm_lower_bound(&test, r, default_big_r(&test), 0.25).unwrap();
        let expect = 8.0 * 0.5 * (1.0 - ((1.0 + n0) / 2.0).sqrt());
        assert!((b - expect).abs() < 1e-8, "{b} {expect}");
    }

    #[test]
    fn mm_bound_below_local_energy() {
        let (regime, k) = setup(1e-3, 0.25);
        let model = EnergyModel::rescaled(&regime, CutoffKind::Smoothstep, &k).unwrap();
        let g = k.grid();
        let w = regime.rescaled_width;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let amp = rng.gen_range(0.0..1.5);
            let decay = rng.gen_range(0.2..5.0);
            let wobble = rng.gen_range(0.0..0.3);
            let freq = rng.gen_range(0.1..3.0);
            let p = AngleProfile::from_fn(g.clone(), |x| {
                let d = x.min(w - x);
                (amp * (-d / decay).exp() + wobble * (freq * x).sin() * (-d / 20.0).exp()).clamp(-1.5, 1.5)
            })
            .unwrap();
            let (local, _) = energy_split(&model, &p.theta).unwrap();
            let big_r = rng.gen_range(0.25..0.5) * w;
            let r = rng.gen_range(0.0..big_r.min(10.0));
            let b = mm_lower_bound(&p, r, big_r, 0.25).unwrap();
            assert!(b <= local + 1e-10, "{b} {local}");
        }
    }

    #[test]
    fn dual_bound_below_stray_energy() {
        let (regime, k) = setup(1e-3, 0.25);
        let model = EnergyModel::rescaled(&regime, CutoffKind::Smoothstep, &k).unwrap();
        let g = k.grid();
        let w = regime.rescaled_width;
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..50 {
            let amp = rng.gen_range(-1.5..1.5);
            let decay = rng.gen_range(0.2..5.0);
            let freq = rng.gen_range(0.1..3.0);
            let p = AngleProfile::from_fn(g.clone(), |x| {
                let d = x.min(w - x);
                amp * (-d / decay).exp() + 0.2 * (freq * x).cos()
            })
            .unwrap();
            let (_, stray) = energy_split(&model, &p.theta).unwrap();
            let n = rng.gen_range(0.0..1.0);
            let b = dual_bound_with(&p, &regime, CutoffKind::Smoothstep, &dual_potential(&regime, n).unwrap()).unwrap();
            assert!(b <= stray + 1e-9, "{b} {stray}");
            let b = dual_stray_lower_bound(&p, &regime, CutoffKind::Smoothstep).unwrap();
            assert!(b <= stray + 1e-9, "{b} {stray}");
        }
    }

    #[test]
    fn dual_bound_without_charge() {
        let (regime, k) = setup(1e-3, 0.25);
        let g = k.grid().clone();
        let p = AngleProfile::constant(g, PI / 2.0);
        let v = dual_potential(&regime, 0.4).unwrap();
        let b = dual_bound_with(&p, &regime, CutoffKind::Smoothstep, &v).unwrap();
        let expect = -regime.normalization - regime.lambda / (2.0 * regime.lnln()) * v.dirichlet_energy();
        assert!((b - expect).abs() < 1e-12 * expect.abs());
    }

    #[test]
    fn monodomain_dual_gap_shrinks() {
        let mut last = f64::INFINITY;
        for eps in [1e-2, 1e-3, 1e-4] {
            let (regime, k) = setup(eps, 4.0);
            let model = EnergyModel::rescaled(&regime, CutoffKind::Smoothstep, &k).unwrap();
            let p = AngleProfile::constant(k.grid().clone(), 0.0);
            let (_, stray) = energy_split(&model, &p.theta).unwrap();
            let b = dual_stray_lower_bound(&p, &regime, CutoffKind::Smoothstep).unwrap();
            let gap = stray - b;
            assert!(gap >= 0.0 && gap < last, "{eps}: {gap}");
            last = gap;
        }
    }

    #[test]
    fn upper_profile_shape() {
        let (regime, k) = setup(1e-3, 0.25);
        let g = k.grid().clone();
        let kt = resolve_k_trunc(&regime, None);
        let p = upper_bound_profile(&regime, kt, CutoffKind::Smoothstep, &g).unwrap();
        let theta0 = minimize_f0(0.25, PI).unwrap().theta0;
        assert!((p.theta[0] - theta0).abs() < 1e-15);
        assert!((theta0 - 0.970_123_422_5).abs() < 1e-9);
        assert!(p.theta[g.len() / 2].abs() == 0.0);
        for i in 0..g.len() {
            assert!((p.theta[i] - p.theta[g.mirror(i)]).abs() < 1e-12);
        }
        let (regime4, k4) = setup(1e-3, 4.0);
        let p4 = upper_bound_profile(&regime4, 2.0, CutoffKind::Smoothstep, k4.grid()).unwrap();
        assert!(p4.theta.iter().all(|&t| t == 0.0));
        assert!(upper_bound_profile(&regime, 1e6, CutoffKind::Smoothstep, &g).is_err());
        assert!(upper_bound_profile(&regime, 0.5, CutoffKind::Smoothstep, &g).is_err());
    }

    #[test]
    fn report_brackets_test_profile() {
        let (regime, k) = setup(1e-3, 0.25);
        let kt = resolve_k_trunc(&regime, None);
        let p = upper_bound_profile(&regime, kt, CutoffKind::Smoothstep, k.grid()).unwrap();
        let rep = bound_report(&p, &regime, CutoffKind::Smoothstep, &k, None).unwrap();
        let f = energy_rescaled(&p, &regime, CutoffKind::Smoothstep, &k).unwrap().total;
        assert!(rep.lower_total <= f);
        assert!(f <= rep.upper_test + 1e-10);
        assert!(rep.bracket_width >= 0.0);
    }
}
