//! Complex Gamma, Barnes double Gamma Γ_{γ/2}, double sine, Υ, l(z),
//! Dedekind eta and partition numbers, plus the coupling constants they
//! are parametrized by.

mod double_gamma;
mod eta;
mod gamma;
mod upsilon;

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{LiouvilleError, Result};
use crate::numerics::ComplexValue;

pub use double_gamma::{
    double_gamma, double_sine, ln_double_gamma_times_x, log_double_gamma,
    log_double_gamma_with_order, log_double_sine, ShiftOrder,
};
pub use eta::{dedekind_eta, ln_dedekind_eta, partition_count, partition_counts};
pub use gamma::{
    gamma_complex, is_nonpositive_integer, l_ratio, ln_gamma, ln_l_ratio, rgamma, sin_pi,
};
pub use upsilon::{log_upsilon, upsilon, upsilon_prime_zero, UpsilonLog};

/// The boundary cosmological constant, or the equivalent FZZ parameter θ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryParam {
    MuBoundary(f64),
    Theta(ComplexValue),
}

/// Couplings of boundary Liouville theory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LiouvilleParams {
    gamma: f64,
    mu: f64,
    boundary: Option<BoundaryParam>,
}

impl LiouvilleParams {
    pub fn new(gamma: f64, mu: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 2.0) {
            return Err(LiouvilleError::domain(format!(
                "gamma must lie in (0, 2), got {gamma}"
            )));
        }
        if !(mu >= 0.0) || !mu.is_finite() {
            return Err(LiouvilleError::domain(format!(
                "mu must be finite and >= 0, got {mu}"
            )));
        }
        Ok(LiouvilleParams {
            gamma,
            mu,
            boundary: None,
        })
    }

    pub fn with_mu_boundary(mut self, mu_b: f64) -> Result<Self> {
        if !(mu_b > 0.0) || !mu_b.is_finite() {
            return Err(LiouvilleError::domain(format!(
                "mu_boundary must be finite and > 0, got {mu_b}"
            )));
        }
        self.boundary = Some(BoundaryParam::MuBoundary(mu_b));
        Ok(self)
    }

    pub fn with_theta(mut self, theta: ComplexValue) -> Result<Self> {
        if !theta.re.is_finite() || !theta.im.is_finite() {
            return Err(LiouvilleError::domain("theta must be finite"));
        }
        self.boundary = Some(BoundaryParam::Theta(theta));
        Ok(self)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn boundary(&self) -> Option<BoundaryParam> {
        self.boundary
    }

    /// Background charge Q = γ/2 + 2/γ.
    pub fn q(&self) -> f64 {
        self.gamma / 2.0 + 2.0 / self.gamma
    }

    /// Liouville central charge 1 + 6Q².
    pub fn c_l(&self) -> f64 {
        1.0 + 6.0 * self.q() * self.q()
    }

    /// Matter central charge 25 − 6Q².
    pub fn c_m(&self) -> f64 {
        25.0 - 6.0 * self.q() * self.q()
    }

    pub fn weight(&self, charge: ComplexValue) -> ConformalWeight {
        ConformalWeight::of_charge(charge, self.q())
    }

    fn require_mu(&self, what: &str) -> Result<()> {
        if self.mu > 0.0 {
            Ok(())
        } else {
            Err(LiouvilleError::domain(format!("{what} requires mu > 0")))
        }
    }

    /// (μ_B²/μ)·sin(πγ²/4); equals cos²(πγθ/2).
    fn cos_sq_ratio(&self, mu_b: f64) -> f64 {
        mu_b * mu_b * (PI * self.gamma * self.gamma / 4.0).sin() / self.mu
    }

    /// θ, either stored or resolved from μ_B through
    /// cos(πγθ/2) = (μ_B/√μ)·√(sin(πγ²/4)): real in [0, 1/γ) below the
    /// junction, purely imaginary above it.
    pub fn theta(&self) -> Result<ComplexValue> {
        match self.boundary {
            Some(BoundaryParam::Theta(t)) => Ok(t),
            Some(BoundaryParam::MuBoundary(mu_b)) => {
                self.require_mu("resolving theta from mu_boundary")?;
                let k2 = self.cos_sq_ratio(mu_b);
                if (k2 - 1.0).abs() < 1e-12 {
                    return Err(LiouvilleError::Branch {
                        message: format!(
                            "mu_B^2 sin(pi gamma^2/4)/mu = {k2} is at the branch junction 1"
                        ),
                    });
                }
                let k = k2.sqrt();
                let scale = 2.0 / (PI * self.gamma);
                if k < 1.0 {
                    Ok(ComplexValue::new(scale * k.acos(), 0.0))
                } else {
                    Ok(ComplexValue::new(0.0, scale * k.acosh()))
                }
            }
            None => Err(LiouvilleError::domain(
                "no boundary parameter (mu_boundary or theta) given",
            )),
        }
    }

    /// μ_B, stored or recovered from θ (complex in general).
    pub fn mu_boundary(&self) -> Result<ComplexValue> {
        match self.boundary {
            Some(BoundaryParam::MuBoundary(mu_b)) => Ok(ComplexValue::new(mu_b, 0.0)),
            Some(BoundaryParam::Theta(t)) => {
                self.require_mu("recovering mu_boundary from theta")?;
                let s = (PI * self.gamma * self.gamma / 4.0).sin();
                Ok((t * (PI * self.gamma / 2.0)).cos() * (self.mu / s).sqrt())
            }
            None => Err(LiouvilleError::domain(
                "no boundary parameter (mu_boundary or theta) given",
            )),
        }
    }

    /// ∂θ/∂μ_B from differentiating the cosine relation.
    pub fn dtheta_dmu_b(&self) -> Result<ComplexValue> {
        self.require_mu("d theta / d mu_B")?;
        let theta = self.theta()?;
        let sin_arg = (theta * (PI * self.gamma / 2.0)).sin();
        if sin_arg.norm() < 1e-300 {
            return Err(LiouvilleError::Branch {
                message: "theta = 0: d theta / d mu_B is singular".to_string(),
            });
        }
        let s = (PI * self.gamma * self.gamma / 4.0).sin();
        Ok(-(2.0 / (PI * self.gamma)) * (s / self.mu).sqrt() / sin_arg)
    }
}

/// Δ = (x/2)(Q − x/2) for a bulk or boundary charge x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConformalWeight {
    pub value: ComplexValue,
    pub source_charge: ComplexValue,
}

impl ConformalWeight {
    pub fn of_charge(charge: ComplexValue, q: f64) -> Self {
        let half = charge / 2.0;
        ConformalWeight {
            value: half * (q - half),
            source_charge: charge,
        }
    }
}
