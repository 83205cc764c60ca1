//! Gradient descent with class-specific stepsizes, and its rate envelopes.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::objective::{Oracle, Point};
use crate::params::ClassParams;
use crate::trajectory::{Stopwatch, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    /// h = 1/L
    OneOverL,
    /// h = γ/L
    GammaOverL,
    /// h = γ/(2L)
    GammaOver2L,
    Fixed(f64),
}

impl StepRule {
    pub fn stepsize(&self, params: &ClassParams) -> f64 {
        match *self {
            StepRule::OneOverL => 1.0 / params.lipschitz,
            StepRule::GammaOverL => params.gamma / params.lipschitz,
            StepRule::GammaOver2L => params.gamma / (2.0 * params.lipschitz),
            StepRule::Fixed(h) => h,
        }
    }

    /// The envelope that applies to this rule under `params`, if any.
    pub fn envelope_variant(&self, params: &ClassParams) -> Option<GdEnvelope> {
        match self {
            StepRule::OneOverL if params.mu > 0.0 => Some(GdEnvelope::GradDomLinear),
            StepRule::OneOverL => Some(GdEnvelope::WqcSublinear),
            StepRule::GammaOverL if params.mu > 0.0 => Some(GdEnvelope::WqscLinear),
            StepRule::GammaOver2L if params.mu > 0.0 => Some(GdEnvelope::WqGrowthLinear),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GdConfig {
    pub rule: StepRule,
    pub max_iter: usize,
    pub grad_tol: f64,
    /// Stop once f(x_k) is at or below this value.
    pub stop_below: Option<f64>,
}

impl GdConfig {
    pub fn new(rule: StepRule, max_iter: usize) -> Self {
        Self {
            rule,
            max_iter,
            grad_tol: 0.0,
            stop_below: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GdEnvelope {
    /// L‖x₀ − x*‖² / (γ(k+1)) on f(x_k) − f*
    WqcSublinear,
    /// (1 − γ²μ/L)^k ‖x₀ − x*‖² on ‖x_k − x*‖²
    WqscLinear,
    /// (1 − γ²μ/(4L))^k ‖x₀ − x*‖² on ‖x_k − x*‖²
    WqGrowthLinear,
    /// (1 − μγ²/L)^k (f(x₀) − f*) on f(x_k) − f*
    GradDomLinear,
}

impl GdEnvelope {
    /// Whether the envelope bounds the squared distance (otherwise the f-gap).
    pub fn bounds_distance(&self) -> bool {
        matches!(self, GdEnvelope::WqscLinear | GdEnvelope::WqGrowthLinear)
    }
}

/// Rate envelope for gradient descent at iteration `k`.
///
/// The exponent is k for the linear variants and the denominator is
/// γ(k+1) for the sublinear one; each bounds the iterate x_k.
pub fn gd_envelope(params: &ClassParams, variant: GdEnvelope, k: usize, r0sq: f64, f0gap: f64) -> Result<f64> {
    if !(r0sq >= 0.0 && f0gap >= 0.0) {
        return invalid("initial distance and gap must be nonnegative");
    }
    let ClassParams {
        lipschitz: l,
        gamma,
        mu,
        ..
    } = *params;
    if variant != GdEnvelope::WqcSublinear && !(mu > 0.0) {
        return invalid(format!("{variant:?} envelope needs mu > 0"));
    }
    let k_f = k as f64;
    Ok(match variant {
        GdEnvelope::WqcSublinear => l * r0sq / (gamma * (k_f + 1.0)),
        GdEnvelope::WqscLinear => (1.0 - gamma * gamma * mu / l).powi(k as i32) * r0sq,
        GdEnvelope::WqGrowthLinear => (1.0 - gamma * gamma * mu / (4.0 * l)).powi(k as i32) * r0sq,
        GdEnvelope::GradDomLinear => (1.0 - mu * gamma * gamma / l).powi(k as i32) * f0gap,
    })
}

/// Run x_{k+1} = x_k − h ∇f(x_k).
///
/// The trajectory logs every iterate including x₀. When the oracle knows
/// its minimizer and the rule has an envelope, the envelope column is filled.
pub fn gd_run(oracle: &Oracle, params: &ClassParams, x0: &Point, config: &GdConfig) -> Result<Trajectory> {
    params.validate()?;
    let h = config.rule.stepsize(params);
    if !(h > 0.0 && h.is_finite()) {
        return invalid(format!("resolved stepsize must be positive, got {h}"));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return invalid("x0 has non-finite entries");
    }
    let clock = Stopwatch::start();
    let envelope = config.rule.envelope_variant(params);
    let mut x = x0.clone();
    let (mut fx, mut g) = oracle.eval_grad(&x)?;
    let reference = match (oracle.known_minimizer(), oracle.known_minimum()) {
        (Some(xs), Some(fs)) => Some(((x0 - xs).norm_squared(), fx - fs)),
        _ => None,
    };
    let env_at = |k: usize| -> Result<Option<f64>> {
        match (envelope, reference) {
            (Some(v), Some((r0sq, f0gap))) => gd_envelope(params, v, k, r0sq, f0gap.max(0.0)).map(Some),
            _ => Ok(None),
        }
    };

    let mut traj = Trajectory::default();
    traj.push(&x, fx, &g, env_at(0)?, clock.nanos());
    for k in 0..config.max_iter {
        if g.norm() <= config.grad_tol || config.stop_below.is_some_and(|t| fx <= t) {
            break;
        }
        x -= &g * h;
        let (f_next, g_next) = oracle.eval_grad(&x)?;
        if !(f_next <= fx + 1e6 * (1.0 + fx.abs())) {
            return Err(Error::Diverged {
                k: k + 1,
                from: fx,
                to: f_next,
            });
        }
        fx = f_next;
        g = g_next;
        traj.push(&x, fx, &g, env_at(k + 1)?, clock.nanos());
    }
    Ok(traj)
}
