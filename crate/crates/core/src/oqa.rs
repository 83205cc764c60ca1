//! Optimal quadratic averaging for weakly-quasi-strongly-convex objectives.
//!
//! At any x̄ the quadratic
//! q(x; x̄) = f(x̄) + (1/γ)⟨∇f(x̄), x − x̄⟩ + (μ/2)‖x − x̄‖²
//! satisfies q(x*; x̄) ≤ f*, so its minimum value is a lower bound on f*
//! whenever the minimizer of the model is allowed to be x*. The method
//! keeps a running model Q_k (an optimal convex combination of such
//! quadratics) whose minimum m_k rises towards f* while the gradient
//! steps x⁺ bring f down; the gap f(x_k⁺) − m_k certifies progress.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linesearch::{segment_min, SEGMENT_TOL};
use crate::objective::{Oracle, Point};
use crate::params::ClassParams;
use crate::trajectory::{Stopwatch, Trajectory};

/// q(x) = m + (κ/2)‖x − c‖²
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quadratic {
    pub m: f64,
    pub c: Point,
    pub kappa: f64,
}

impl Quadratic {
    pub fn eval(&self, x: &Point) -> f64 {
        self.m + 0.5 * self.kappa * (x - &self.c).norm_squared()
    }
}

/// x − (1/L)∇f(x)
pub fn grad_step(oracle: &Oracle, lipschitz: f64, x: &Point) -> Result<Point> {
    if !(lipschitz > 0.0) {
        return invalid("L must be positive");
    }
    Ok(x - oracle.grad(x)? / lipschitz)
}

fn lower_from(f: f64, g: &Point, x_bar: &Point, gamma: f64, mu: f64) -> Quadratic {
    Quadratic {
        m: f - g.norm_squared() / (2.0 * mu * gamma * gamma),
        c: x_bar - g / (mu * gamma),
        kappa: mu,
    }
}

/// Completed-square form of f(x̄) + (1/γ)⟨∇f(x̄), x − x̄⟩ + (μ/2)‖x − x̄‖².
pub fn lower_quadratic(oracle: &Oracle, gamma: f64, mu: f64, x_bar: &Point) -> Result<Quadratic> {
    if !(mu > 0.0) {
        return invalid("lower quadratic needs mu > 0");
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return invalid(format!("gamma must lie in (0, 1], got {gamma}"));
    }
    let (f, g) = oracle.eval_grad(x_bar)?;
    Ok(lower_from(f, &g, x_bar, gamma, mu))
}

/// Minimum value of λA + (1 − λ)B.
pub fn averaged_minimum(a: &Quadratic, b: &Quadratic, lambda: f64) -> f64 {
    let d2 = (&a.c - &b.c).norm_squared();
    lambda * a.m + (1.0 - lambda) * b.m + 0.5 * a.kappa * lambda * (1.0 - lambda) * d2
}

/// The convex combination λA + (1 − λ)B with the largest minimum value.
///
/// Returns the combined quadratic and λ. When the centers coincide the
/// larger minimum wins, with ties going to `b`.
pub fn optimal_average(a: &Quadratic, b: &Quadratic) -> Result<(Quadratic, f64)> {
    if !(a.kappa > 0.0) || (a.kappa - b.kappa).abs() > 1e-12 * a.kappa.max(b.kappa) {
        return invalid(format!(
            "quadratics must share a positive curvature, got {} and {}",
            a.kappa, b.kappa
        ));
    }
    if a.c.len() != b.c.len() {
        return invalid("quadratic centers have different dimensions");
    }
    let d2 = (&a.c - &b.c).norm_squared();
    let lambda = if d2 == 0.0 {
        if a.m > b.m {
            1.0
        } else {
            0.0
        }
    } else {
        (0.5 + (a.m - b.m) / (a.kappa * d2)).clamp(0.0, 1.0)
    };
    let q = if lambda == 0.0 {
        b.clone()
    } else if lambda == 1.0 {
        a.clone()
    } else {
        Quadratic {
            m: averaged_minimum(a, b, lambda),
            c: &a.c * lambda + &b.c * (1.0 - lambda),
            kappa: a.kappa,
        }
    };
    Ok((q, lambda))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OqaState {
    pub k: usize,
    pub x: Point,
    pub x_plus: Point,
    pub f_plus: f64,
    pub q: Quadratic,
    pub best_value: f64,
    /// Averaging weight given to the newest quadratic (1 at k = 0).
    pub lambda: f64,
}

impl OqaState {
    /// f(x_k⁺) − m_k
    pub fn gap(&self) -> f64 {
        self.f_plus - self.q.m
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OqaRun {
    pub trajectory: Trajectory,
    pub states: Vec<OqaState>,
}

/// (1 − √(μγ²/L))^k · gap₀
pub fn oqa_envelope(params: &ClassParams, k: usize, gap0: f64) -> f64 {
    let rate = 1.0 - (params.mu * params.gamma * params.gamma / params.lipschitz).sqrt();
    rate.powi(k as i32) * gap0
}

/// Run optimal quadratic averaging from `x0`.
///
/// The trajectory logs x_k⁺ and f(x_k⁺); the envelope column holds the
/// gap bound. Stops once the gap is at most `gap_tol`.
pub fn oqa_run(oracle: &Oracle, params: &ClassParams, x0: &Point, max_iter: usize, gap_tol: f64) -> Result<OqaRun> {
    params.validate()?;
    let ClassParams {
        lipschitz: l,
        gamma,
        mu,
        ..
    } = *params;
    if !(mu > 0.0) {
        return invalid("optimal quadratic averaging needs mu > 0");
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return invalid("x0 has non-finite entries");
    }
    let clock = Stopwatch::start();

    let (f0, g0) = oracle.eval_grad(x0)?;
    let q0 = lower_from(f0, &g0, x0, gamma, mu);
    let x_plus = x0 - &g0 / l;
    let (f_plus, g_plus) = oracle.eval_grad(&x_plus)?;
    let mut state = OqaState {
        k: 0,
        x: x0.clone(),
        x_plus,
        f_plus,
        q: q0,
        best_value: f_plus,
        lambda: 1.0,
    };
    let gap0 = state.gap();
    let mut run = OqaRun {
        trajectory: Trajectory::default(),
        states: Vec::new(),
    };
    run.trajectory
        .push(&state.x_plus, f_plus, &g_plus, Some(oqa_envelope(params, 0, gap0)), clock.nanos());
    run.states.push(state.clone());

    for k in 1..=max_iter {
        if state.gap() <= gap_tol {
            break;
        }
        let x = segment_min(oracle, &state.q.c, &state.x_plus, SEGMENT_TOL)?.point;
        let (fx, gx) = oracle.eval_grad(&x)?;
        let fresh = lower_from(fx, &gx, &x, gamma, mu);
        let (q, lambda) = optimal_average(&fresh, &state.q)?;
        let x_plus = &x - &gx / l;
        let (f_plus, g_plus) = oracle.eval_grad(&x_plus)?;
        let next = OqaState {
            k,
            x,
            x_plus,
            f_plus,
            q,
            best_value: state.best_value.min(f_plus),
            lambda,
        };
        let (prev_gap, gap) = (state.gap(), next.gap());
        if gap > prev_gap + 1e-9 * (1.0 + prev_gap.abs()) {
            return Err(Error::InvariantViolation {
                k,
                what: format!("gap rose from {prev_gap:e} to {gap:e}; L, gamma or mu do not hold here"),
                state: serde_json::to_string(&next).unwrap_or_default(),
            });
        }
        state = next;
        run.trajectory
            .push(&state.x_plus, f_plus, &g_plus, Some(oqa_envelope(params, k, gap0)), clock.nanos());
        run.states.push(state.clone());
    }
    Ok(run)
}
