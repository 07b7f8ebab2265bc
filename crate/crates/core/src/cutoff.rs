//! Edge cutoff profiles `η` and their scaled, two-sided versions `η_δ`.

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::grid::Grid1D;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CutoffKind {
    #[default]
    Smoothstep,
    Linear,
    Exponential,
}

impl std::str::FromStr for CutoffKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "smoothstep" => Ok(Self::Smoothstep),
            "linear" => Ok(Self::Linear),
            "exponential" => Ok(Self::Exponential),
            other => param(format!("unknown cutoff kind '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub kind: CutoffKind,
    pub delta: f64,
}

impl CutoffSpec {
    pub fn new(kind: CutoffKind, delta: f64) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return param(format!("cutoff delta must be positive, got {delta}"));
        }
        Ok(Self { kind, delta })
    }

    /// Bound on `|η_δ'|`.
    pub fn lipschitz(&self) -> f64 {
        let slope = match self.kind {
            CutoffKind::Smoothstep => 1.5,
            CutoffKind::Linear => 1.0,
            CutoffKind::Exponential => EXP_MAX_SLOPE,
        };
        slope / self.delta
    }
}

// max over (0,1) of the derivative of exp(1 - 1/(1-(1-t)^2))
const EXP_MAX_SLOPE: f64 = 2.170_357_085_710_338;

fn profile(kind: CutoffKind, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    match kind {
        CutoffKind::Smoothstep => t * t * (3.0 - 2.0 * t),
        CutoffKind::Linear => t,
        CutoffKind::Exponential => {
            let s = t * (2.0 - t);
            (1.0 - 1.0 / s).exp()
        }
    }
}

fn profile_prime(kind: CutoffKind, t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    match kind {
        CutoffKind::Smoothstep => 6.0 * t * (1.0 - t),
        CutoffKind::Linear => 1.0,
        CutoffKind::Exponential => {
            let s = t * (2.0 - t);
            (1.0 - 1.0 / s).exp() * 2.0 * (1.0 - t) / (s * s)
        }
    }
}

pub fn eta(spec: &CutoffSpec, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return param(format!("cutoff argument must be >= 0, got {t}"));
    }
    Ok(profile(spec.kind, t))
}

pub fn eta_prime(spec: &CutoffSpec, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return param(format!("cutoff argument must be >= 0, got {t}"));
    }
    Ok(profile_prime(spec.kind, t))
}

fn check_width(spec: &CutoffSpec, length: f64) -> Result<()> {
    if spec.delta >= 0.5 * length {
        return param(format!(
            "cutoff delta must satisfy delta < b/2 (delta = {}, b = {length})",
            spec.delta
        ));
    }
    Ok(())
}

/// `η(min(x - l, r - x) / δ)` on `[l, r]`, zero outside.
pub fn eta_on_interval(spec: &CutoffSpec, left: f64, right: f64, x: f64) -> Result<f64> {
    check_width(spec, right - left)?;
    if x <= left || x >= right {
        return Ok(0.0);
    }
    Ok(profile(spec.kind, (x - left).min(right - x) / spec.delta))
}

pub fn eta_delta(spec: &CutoffSpec, grid: &Grid1D, x: f64) -> Result<f64> {
    eta_on_interval(spec, grid.left(), grid.right(), x)
}

/// `η_δ` sampled at every node of `grid`.
pub fn eta_delta_nodes(spec: &CutoffSpec, grid: &Grid1D) -> Result<Vec<f64>> {
    check_width(spec, grid.domain_length())?;
    let (l, r) = (grid.left(), grid.right());
    Ok(grid
        .nodes()
        .iter()
        .map(|&x| profile(spec.kind, (x - l).min(r - x).max(0.0) / spec.delta))
        .collect())
}

/// Number of cells lying within `delta` of the nearer endpoint, counted at the
/// less resolved of the two edges.
pub fn cells_in_cutoff(spec: &CutoffSpec, grid: &Grid1D) -> usize {
    let (l, r) = (grid.left(), grid.right());
    let tol = 1e-12 * spec.delta;
    let left = grid.nodes().iter().filter(|&&x| x > l && x <= l + spec.delta + tol).count();
    let right = grid.nodes().iter().filter(|&&x| x < r && x >= r - spec.delta - tol).count();
    left.min(right)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use proptest::prelude::*;

    const KINDS: [CutoffKind; 3] = [CutoffKind::Smoothstep, CutoffKind::Linear, CutoffKind::Exponential];

    #[test]
    fn smoothstep_values() {
        let s = CutoffSpec::new(CutoffKind::Smoothstep, 1.0).unwrap();
        assert_eq!(eta(&s, 0.0).unwrap(), 0.0);
        assert_eq!(eta(&s, 1.7).unwrap(), 1.0);
        assert_eq!(eta(&s, 0.5).unwrap(), 0.5);
        assert!(eta(&s, -0.1).is_err());
    }

    #[test]
    fn endpoint_values_all_kinds() {
        for kind in KINDS {
            let s = CutoffSpec::new(kind, 0.3).unwrap();
            assert_eq!(eta(&s, 0.0).unwrap(), 0.0);
            assert_eq!(eta(&s, 1.0).unwrap(), 1.0);
            let mut prev = 0.0;
            for k in 1..1000 {
                let v = eta(&s, k as f64 / 1000.0).unwrap();
                assert!(v > prev && v < 1.0, "{kind:?} at {k}");
                prev = v;
            }
        }
    }

    #[test]
    fn exponential_slope_constant() {
        let s = CutoffSpec::new(CutoffKind::Exponential, 1.0).unwrap();
        let max = (1..200_000)
            .map(|k| eta_prime(&s, k as f64 / 200_000.0).unwrap())
            .fold(0.0, f64::max);
        assert!((max - EXP_MAX_SLOPE).abs() < 1e-8, "{max}");
    }

    #[test]
    fn eta_delta_examples() {
        let g = build_grid(0.0, 1.0, 11, None).unwrap();
        let s = CutoffSpec::new(CutoffKind::Smoothstep, 0.1).unwrap();
        assert_eq!(eta_delta(&s, &g, 0.5).unwrap(), 1.0);
        assert_eq!(eta_delta(&s, &g, 0.0).unwrap(), 0.0);
        assert_eq!(eta_delta(&s, &g, 1.0).unwrap(), 0.0);
        assert_eq!(eta_delta(&s, &g, -0.2).unwrap(), 0.0);
        assert_eq!(eta_delta(&s, &g, 1.3).unwrap(), 0.0);
        let wide = CutoffSpec::new(CutoffKind::Smoothstep, 0.5).unwrap();
        assert!(eta_delta(&wide, &g, 0.5).is_err());
        assert!(eta_delta_nodes(&wide, &g).is_err());
    }

    #[test]
    fn cutoff_cell_count() {
        let g = build_grid(0.0, 1.0, 101, None).unwrap();
        let s = CutoffSpec::new(CutoffKind::Linear, 0.08).unwrap();
        assert_eq!(cells_in_cutoff(&s, &g), 8);
    }

    proptest! {
        #[test]
        fn symmetric_monotone_lipschitz(kind_ix in 0usize..3, delta in 0.01f64..0.45,
                                        x in 0.0f64..1.0, y in 0.0f64..1.0) {
            let s = CutoffSpec::new(KINDS[kind_ix], delta).unwrap();
            let g = build_grid(0.0, 1.0, 5, None).unwrap();
            let ex = eta_delta(&s, &g, x).unwrap();
            prop_assert!((ex - eta_delta(&s, &g, 1.0 - x).unwrap()).abs() <= 1e-15 * (1.0 + s.lipschitz()));
            prop_assert!((0.0..=1.0).contains(&ex));
            let ey = eta_delta(&s, &g, y).unwrap();
            prop_assert!((ex - ey).abs() <= s.lipschitz() * (x - y).abs() * (1.0 + 1e-9) + 1e-15);
            if x <= y && y <= delta {
                prop_assert!(ex <= ey);
            }
            if x >= delta && x <= 1.0 - delta {
                prop_assert_eq!(ex, 1.0);
            }
        }
    }
}
