//! Closed-form limit objects: the edge-trace energy `F₀`, its minimizer `n₀`,
//! the critical bias `β_c`, and the optimal Modica–Mortola wall `θ_∞`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LimitRegime {
    Monodomain,
    Wall,
}

impl LimitRegime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Monodomain => "monodomain",
            Self::Wall => "wall",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitResult {
    pub beta: f64,
    pub lambda: f64,
    pub beta_c: f64,
    pub n0: f64,
    pub theta0: f64,
    pub f0_min: f64,
    pub regime: LimitRegime,
}

pub fn beta_critical(lambda: f64) -> f64 {
    lambda * lambda / (PI * PI)
}

fn check_positive(beta: f64, lambda: f64) -> Result<()> {
    if !(beta > 0.0) || !(lambda > 0.0) || !beta.is_finite() || !lambda.is_finite() {
        return Err(Error::Parameter(format!(
            "beta and lambda must be positive (beta = {beta}, lambda = {lambda})"
        )));
    }
    Ok(())
}

/// `F₀(n) = 4√β (1 - √((1+n)/2)) + (λ/4π)(2n² - 1)`.
pub fn f0(n: f64, beta: f64, lambda: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&n) {
        return Err(Error::Domain(format!("F0 is defined for n in [0, 1], got {n}")));
    }
    check_positive(beta, lambda)?;
    Ok(4.0 * beta.sqrt() * (1.0 - ((1.0 + n) / 2.0).sqrt()) + lambda / (4.0 * PI) * (2.0 * n * n - 1.0))
}

pub fn f0_prime(n: f64, beta: f64, lambda: f64) -> f64 {
    -(2.0 * beta).sqrt() / (1.0 + n).sqrt() + lambda * n / PI
}

pub fn minimize_f0(beta: f64, lambda: f64) -> Result<LimitResult> {
    check_positive(beta, lambda)?;
    let beta_c = beta_critical(lambda);
    let target = (2.0 * beta).sqrt();
    let g = |n: f64| lambda / PI * n * (1.0 + n).sqrt() - target;
    let (n0, regime) = if g(1.0) <= 0.0 || beta >= beta_c {
        (1.0, LimitRegime::Monodomain)
    } else {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        while hi - lo > 1e-15 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        (0.5 * (lo + hi), LimitRegime::Wall)
    };
    Ok(LimitResult {
        beta,
        lambda,
        beta_c,
        n0,
        theta0: n0.acos(),
        f0_min: f0(n0, beta, lambda)?,
        regime,
    })
}

/// The optimal half-line wall with boundary angle `θ₀`:
/// `θ_∞(x) = 4 arctan(e^{√β (x₀ - x)})`, `x₀ = ln tan(θ₀/4) / √β`.
///
/// It solves `θ' + 2√β sin(θ/2) = 0` with `θ(0) = θ₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WallProfile {
    pub theta0: f64,
    pub beta: f64,
    /// `None` when `θ₀ = 0`, where the profile is identically zero.
    pub x0: Option<f64>,
}

impl WallProfile {
    pub fn new(theta0: f64, beta: f64) -> Result<Self> {
        if !(0.0..=FRAC_PI_2 + 1e-15).contains(&theta0) {
            return Err(Error::Domain(format!("theta0 must lie in [0, pi/2], got {theta0}")));
        }
        if !(beta > 0.0) {
            return Err(Error::Parameter(format!("beta must be positive, got {beta}")));
        }
        let x0 = (theta0 > 0.0).then(|| (theta0 / 4.0).tan().ln() / beta.sqrt());
        Ok(Self { theta0, beta, x0 })
    }

    pub fn is_degenerate(&self) -> bool {
        self.x0.is_none()
    }

    pub fn value(&self, x: f64) -> f64 {
        match self.x0 {
            None => 0.0,
            Some(x0) => 4.0 * (self.beta.sqrt() * (x0 - x)).exp().atan(),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self.x0 {
            None => 0.0,
            Some(x0) => {
                let s = self.beta.sqrt();
                let z = (s * (x0 - x)).exp();
                -4.0 * s * z / (1.0 + z * z)
            }
        }
    }

    /// `E^∞(θ_∞) = 8√β sin²(θ₀/4)`.
    pub fn energy(&self) -> f64 {
        8.0 * self.beta.sqrt() * (self.theta0 / 4.0).sin().powi(2)
    }
}

pub fn theta_infinity(x: f64, theta0: f64, beta: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("theta_infinity needs x >= 0, got {x}")));
    }
    Ok(WallProfile::new(theta0, beta)?.value(x))
}

pub fn wall_energy(theta0: f64, beta: f64) -> Result<f64> {
    Ok(WallProfile::new(theta0, beta)?.energy())
}
