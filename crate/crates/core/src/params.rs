use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Smoothness and weak-quasi-convexity constants of an objective.
///
/// `lipschitz` is the gradient Lipschitz constant L, `gamma` the
/// weak-quasi-convexity constant, `mu` the strong-convexity-like constant.
/// `tau` is the gradient-domination constant and `zeta` the constant of the
/// gradient-norm growth condition; both are optional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassParams {
    #[serde(rename = "L")]
    pub lipschitz: f64,
    pub gamma: f64,
    pub mu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<f64>,
}

impl ClassParams {
    pub fn new(lipschitz: f64, gamma: f64, mu: f64) -> Result<Self> {
        let p = Self {
            lipschitz,
            gamma,
            mu,
            tau: None,
            zeta: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = Some(tau);
        self
    }

    pub fn with_zeta(mut self, zeta: f64) -> Self {
        self.zeta = Some(zeta);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let Self {
            lipschitz: l,
            gamma,
            mu,
            ..
        } = *self;
        if !(l > 0.0 && l.is_finite()) {
            return invalid(format!("L must be positive and finite, got {l}"));
        }
        if !(gamma > 0.0 && gamma <= 1.0) {
            return invalid(format!("gamma must lie in (0, 1], got {gamma}"));
        }
        if !(mu >= 0.0 && mu.is_finite()) {
            return invalid(format!("mu must be nonnegative, got {mu}"));
        }
        if mu > l {
            return invalid(format!("mu = {mu} exceeds L = {l}"));
        }
        if let Some(t) = self.tau {
            if !(t > 0.0) {
                return invalid(format!("tau must be positive, got {t}"));
            }
        }
        if let Some(z) = self.zeta {
            if !(z > 0.0) {
                return invalid(format!("zeta must be positive, got {z}"));
            }
        }
        Ok(())
    }
}
