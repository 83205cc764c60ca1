//! Accelerated gradient descent driven by a weak estimate sequence.
//!
//! The method keeps an isotropic quadratic model
//! φₖ(x) = φ*ₖ + (γₖ/2)‖x − vₖ‖² and an iterate xₖ with f(xₖ) ≤ φ*ₖ.
//! Each step mixes φₖ with the lower model
//! qₖ(x) = f(yₖ) + (1/γ)⟨∇f(yₖ), x − yₖ⟩ + (μ/2)‖x − yₖ‖²
//! with weight αₖ, where αₖ solves s·L·α²/γ² = (1 − α)γₖ + αμ. Because
//! qₖ(x*) ≤ f* for (γ, μ)-weakly-quasi-strongly-convex f, the models only
//! need to underestimate at the minimizer, and
//! f(xₖ) − f* ≤ λₖ (φ₀(x*) − f*) with λₖ = Πᵢ (1 − αᵢ).
//!
//! Scale s = 1 is the plain method. Scale s = 4 is the variant for
//! functions with distance-form quadratic growth; it behaves as the plain
//! method run with γ/2, which is why [`WesVariant::weak_gamma`] exists.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linesearch::{segment_min_with, SegmentMode, YConditionCoeffs, SEGMENT_TOL};
use crate::objective::{Oracle, Point};
use crate::params::ClassParams;
use crate::trajectory::{Stopwatch, Trajectory};

/// Relative tolerance for the certificate and weak-estimate checks.
pub const CERT_TOL: f64 = 1e-9;

/// Objective values at or above this are treated as "outside the domain"
/// (used by safeguarded oracles such as the LQR cost).
pub const DOMAIN_SENTINEL: f64 = 1e300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WesVariant {
    /// 1 for the plain method, 4 for the quadratic-growth variant.
    pub scale: f64,
    pub segment_mode: SegmentMode,
}

impl WesVariant {
    pub fn plain() -> Self {
        Self {
            scale: 1.0,
            segment_mode: SegmentMode::EndpointFirst,
        }
    }

    pub fn quadratic_growth() -> Self {
        Self {
            scale: 4.0,
            segment_mode: SegmentMode::Exact,
        }
    }

    pub fn with_segment_mode(mut self, mode: SegmentMode) -> Self {
        self.segment_mode = mode;
        self
    }

    /// The γ that enters the lower models: γ/√scale.
    pub fn weak_gamma(&self, gamma: f64) -> f64 {
        gamma / self.scale.sqrt()
    }

    fn validate(&self) -> Result<()> {
        if self.scale != 1.0 && self.scale != 4.0 {
            return invalid(format!("variant scale must be 1 or 4, got {}", self.scale));
        }
        Ok(())
    }
}

/// Positive root of (s·L/γ²)α² + (γₖ − μ)α − γₖ = 0.
///
/// The product of the roots is negative, so exactly one root is positive;
/// it lies in (0, 1) iff s·L/γ² > μ.
pub fn solve_alpha(lipschitz: f64, gamma: f64, mu: f64, gamma_k: f64, scale: f64) -> Result<f64> {
    if !(lipschitz > 0.0 && gamma_k > 0.0) {
        return invalid("solve_alpha needs L > 0 and gamma_k > 0");
    }
    if !(gamma > 0.0 && gamma <= 1.0) || !(mu >= 0.0) {
        return invalid("solve_alpha needs gamma in (0, 1] and mu >= 0");
    }
    let a = scale * lipschitz / (gamma * gamma);
    if !(a > mu) {
        return Err(Error::ParameterRegime(format!(
            "scale*L/gamma^2 = {a} does not exceed mu = {mu}; the step weight would be >= 1"
        )));
    }
    let b = gamma_k - mu;
    let disc = (b * b + 4.0 * a * gamma_k).sqrt();
    // pick the cancellation-free form of the same root
    let alpha = if b >= 0.0 {
        2.0 * gamma_k / (b + disc)
    } else {
        (disc - b) / (2.0 * a)
    };
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::ParameterRegime(format!("step weight {alpha} is outside (0, 1)")));
    }
    Ok(alpha)
}

/// What one accelerated step consumed from the objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub y: Vec<f64>,
    pub grad_y: Vec<f64>,
    pub f_y: f64,
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WesState {
    pub k: usize,
    pub x: Point,
    pub f_x: f64,
    /// Minimizer of φₖ.
    pub v: Point,
    /// Point used by the step that produced this state (x₀ at k = 0).
    pub y: Point,
    pub gamma_k: f64,
    /// Step weight of the step that produced this state (0 at k = 0).
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    pub phi_star: f64,
}

impl WesState {
    pub fn initial(x0: Point, f_x0: f64, gamma0: f64) -> Self {
        Self {
            k: 0,
            v: x0.clone(),
            y: x0.clone(),
            x: x0,
            f_x: f_x0,
            gamma_k: gamma0,
            alpha: 0.0,
            beta: 1.0,
            lambda: 1.0,
            phi_star: f_x0,
        }
    }

    /// φₖ(x) in canonical form.
    pub fn phi_at(&self, x: &Point) -> f64 {
        self.phi_star + 0.5 * self.gamma_k * (x - &self.v).norm_squared()
    }
}

/// Canonical-form parameters (φ*, γₖ, vₖ) of the estimate function.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Canonical {
    pub phi_star: f64,
    pub gamma_k: f64,
    pub v: Point,
}

/// Update (φ*, γ, v) after mixing in the lower model at y with weight α.
///
/// `weak_gamma` is the γ in the lower model, `mu` its curvature.
pub(crate) fn canonical_update(
    cur: &Canonical,
    alpha: f64,
    y: &Point,
    f_y: f64,
    grad_y: &Point,
    weak_gamma: f64,
    mu: f64,
) -> Canonical {
    let keep = 1.0 - alpha;
    let gamma_next = keep * cur.gamma_k + alpha * mu;
    let v = (&cur.v * (keep * cur.gamma_k) + y * (alpha * mu) - grad_y * (alpha / weak_gamma)) / gamma_next;
    let d = &cur.v - y;
    let phi_star = keep * cur.phi_star + alpha * f_y
        - alpha * alpha / (2.0 * weak_gamma * weak_gamma * gamma_next) * grad_y.norm_squared()
        + alpha * keep * cur.gamma_k / gamma_next
            * (0.5 * mu * d.norm_squared() + grad_y.dot(&d) / weak_gamma);
    Canonical {
        phi_star,
        gamma_k: gamma_next,
        v,
    }
}

/// Knobs that are not part of the method itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WesOptions {
    /// Re-verify f(xₖ₊₁) ≤ φ*ₖ₊₁ and fail on violation.
    pub enforce_certificate: bool,
    /// How many times the gradient step may be halved when it leaves the
    /// objective's domain. Zero disables the safeguard.
    pub max_halvings: u32,
}

impl Default for WesOptions {
    fn default() -> Self {
        Self {
            enforce_certificate: true,
            max_halvings: 0,
        }
    }
}

/// Outcome of one step.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: WesState,
    pub record: StepRecord,
    /// Number of times the gradient step was halved (safeguard).
    pub halvings: u32,
}

fn tol_at(v: f64) -> f64 {
    CERT_TOL * (1.0 + v.abs())
}

fn out_of_domain(r: &Result<f64>) -> bool {
    match r {
        Ok(v) => !v.is_finite() || *v >= DOMAIN_SENTINEL,
        Err(Error::Instability(_)) => true,
        Err(_) => false,
    }
}

fn violation(k: usize, what: String, state: &WesState) -> Error {
    Error::InvariantViolation {
        k,
        what,
        state: serde_json::to_string(state).unwrap_or_default(),
    }
}

/// One step of the accelerated method from `state`.
///
/// `grad_x` is ∇f(xₖ) when already known; it is only needed for the
/// endpoint-first segment mode.
pub fn wes_step(
    oracle: &Oracle,
    params: &ClassParams,
    state: &WesState,
    variant: &WesVariant,
    options: &WesOptions,
    grad_x: Option<&Point>,
) -> Result<StepOutcome> {
    variant.validate()?;
    let l = params.lipschitz;
    let mu = params.mu;
    let wg = variant.weak_gamma(params.gamma);
    let alpha = solve_alpha(l, params.gamma, mu, state.gamma_k, variant.scale)?;
    let gamma_next = (1.0 - alpha) * state.gamma_k + alpha * mu;
    let coeffs = YConditionCoeffs {
        alpha,
        gamma_k: state.gamma_k,
        gamma_next,
        gamma: wg,
        mu,
    };

    // y = v + β (x − v): search from v (t = 0) to x (t = 1)
    let gx_owned;
    let gx = match (variant.segment_mode, grad_x) {
        (SegmentMode::EndpointFirst, Some(g)) => Some(g),
        (SegmentMode::EndpointFirst, None) => {
            gx_owned = oracle.grad(&state.x)?;
            Some(&gx_owned)
        }
        (SegmentMode::Exact, _) => None,
    };
    let f_x = state.f_x;
    let seg = segment_min_with(oracle, &state.v, &state.x, SEGMENT_TOL, variant.segment_mode, |x, fx| {
        let g = gx.expect("endpoint-first mode has the gradient at x");
        Ok(coeffs.slack(fx, fx, g, &state.v, x) >= 0.0)
    })?;
    let y = seg.point;
    let beta = seg.t;
    let f_y = seg.value;
    let g_y = if beta == 1.0 && gx.is_some() {
        gx.cloned().unwrap()
    } else {
        oracle.grad(&y)?
    };
    let slack = coeffs.slack(f_x, f_y, &g_y, &state.v, &y);
    if slack < -tol_at(f_x) {
        return Err(violation(
            state.k,
            format!("line-search condition fails at beta = {beta} (slack {slack:e})"),
            state,
        ));
    }

    // gradient step, halved while it leaves the domain
    let mut step = 1.0 / l;
    let mut halvings = 0;
    let (x_next, f_next) = loop {
        let cand = &y - &g_y * step;
        let fc = oracle.eval(&cand);
        if !out_of_domain(&fc) {
            break (cand, fc?);
        }
        if halvings >= options.max_halvings {
            return match fc {
                Err(e) => Err(e),
                Ok(v) => Err(Error::Instability(format!(
                    "gradient step at k = {} left the domain (f = {v:e}) after {halvings} halvings",
                    state.k
                ))),
            };
        }
        step *= 0.5;
        halvings += 1;
    };

    let next = canonical_update(
        &Canonical {
            phi_star: state.phi_star,
            gamma_k: state.gamma_k,
            v: state.v.clone(),
        },
        alpha,
        &y,
        f_y,
        &g_y,
        wg,
        mu,
    );
    let new_state = WesState {
        k: state.k + 1,
        x: x_next,
        f_x: f_next,
        v: next.v,
        y: y.clone(),
        gamma_k: next.gamma_k,
        alpha,
        beta,
        lambda: (1.0 - alpha) * state.lambda,
        phi_star: next.phi_star,
    };
    if options.enforce_certificate && f_next > new_state.phi_star + tol_at(new_state.phi_star) {
        return Err(violation(
            new_state.k,
            format!(
                "certificate f(x) = {f_next:e} exceeds phi* = {:e}; L, gamma or mu do not hold here",
                new_state.phi_star
            ),
            &new_state,
        ));
    }
    Ok(StepOutcome {
        state: new_state,
        record: StepRecord {
            y: y.iter().copied().collect(),
            grad_y: g_y.iter().copied().collect(),
            f_y,
            alpha,
            beta,
        },
        halvings,
    })
}

/// Full record of an accelerated run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WesRun {
    pub trajectory: Trajectory,
    pub states: Vec<WesState>,
    pub history: Vec<StepRecord>,
    pub gamma0: f64,
    pub weak_gamma: f64,
    pub mu: f64,
    pub variant: WesVariant,
    /// (k, halvings) for every step where the safeguard fired.
    pub safeguard_events: Vec<(usize, u32)>,
}

impl WesRun {
    pub fn x0(&self) -> &Point {
        &self.states[0].x
    }

    /// Max discrepancy between the unrolled recursion and the canonical form.
    pub fn phi_consistency(&self, probes: &[Point]) -> Result<f64> {
        let s0 = &self.states[0];
        phi_consistency_probe(&self.history, self.gamma0, s0.phi_star, &s0.v, self.weak_gamma, self.mu, probes)
    }
}

/// Default γ₀ = max(L, μ/γ_w) where γ_w is the variant's weak γ.
pub fn default_gamma0(params: &ClassParams, variant: &WesVariant) -> f64 {
    params.lipschitz.max(params.mu / variant.weak_gamma(params.gamma))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgdConfig {
    pub gamma0: Option<f64>,
    pub max_iter: usize,
    pub grad_tol: f64,
    /// Stop once f(x_k) is at or below this value.
    pub stop_below: Option<f64>,
    pub variant: WesVariant,
    pub options: WesOptions,
}

impl AgdConfig {
    pub fn new(variant: WesVariant, max_iter: usize) -> Self {
        Self {
            gamma0: None,
            max_iter,
            grad_tol: 0.0,
            stop_below: None,
            variant,
            options: WesOptions::default(),
        }
    }
}

/// Run the accelerated method and keep every state.
///
/// The envelope column holds λₖ (f(x₀) − f* + (γ₀/2)‖x₀ − x*‖²) when the
/// oracle knows its minimizer.
pub fn agd_run_recorded(oracle: &Oracle, params: &ClassParams, x0: &Point, config: &AgdConfig) -> Result<WesRun> {
    params.validate()?;
    config.variant.validate()?;
    if x0.iter().any(|v| !v.is_finite()) {
        return invalid("x0 has non-finite entries");
    }
    let gamma0 = config.gamma0.unwrap_or_else(|| default_gamma0(params, &config.variant));
    if !(gamma0 > 0.0) {
        return invalid(format!("gamma0 must be positive, got {gamma0}"));
    }
    let clock = Stopwatch::start();
    let (f0, g0) = oracle.eval_grad(x0)?;
    if out_of_domain(&Ok(f0)) {
        return invalid("x0 lies outside the objective's domain");
    }
    let env_scale = match (oracle.known_minimizer(), oracle.known_minimum()) {
        (Some(xs), Some(fs)) => Some(f0 - fs + 0.5 * gamma0 * (x0 - xs).norm_squared()),
        _ => None,
    };

    let mut state = WesState::initial(x0.clone(), f0, gamma0);
    let mut g = g0;
    let mut run = WesRun {
        trajectory: Trajectory::default(),
        states: Vec::with_capacity(config.max_iter + 1),
        history: Vec::with_capacity(config.max_iter),
        gamma0,
        weak_gamma: config.variant.weak_gamma(params.gamma),
        mu: params.mu,
        variant: config.variant,
        safeguard_events: Vec::new(),
    };
    run.trajectory
        .push(&state.x, state.f_x, &g, env_scale.map(|s| s * state.lambda), clock.nanos());
    run.states.push(state.clone());
    for _ in 0..config.max_iter {
        if g.norm() <= config.grad_tol || config.stop_below.is_some_and(|t| state.f_x <= t) {
            break;
        }
        let out = wes_step(oracle, params, &state, &config.variant, &config.options, Some(&g))?;
        if out.halvings > 0 {
            run.safeguard_events.push((out.state.k, out.halvings));
        }
        state = out.state;
        g = oracle.grad(&state.x)?;
        run.trajectory
            .push(&state.x, state.f_x, &g, env_scale.map(|s| s * state.lambda), clock.nanos());
        run.states.push(state.clone());
        run.history.push(out.record);
    }
    Ok(run)
}

/// Run the accelerated method and return its trajectory.
pub fn agd_run(oracle: &Oracle, params: &ClassParams, x0: &Point, config: &AgdConfig) -> Result<Trajectory> {
    agd_run_recorded(oracle, params, x0, config).map(|r| r.trajectory)
}

/// Rate bound for the quadratic-growth variant:
/// (1 − ½√(μγ²/L))^k · L‖x₀ − x*‖².
pub fn qg_rate_envelope(params: &ClassParams, k: usize, r0sq: f64) -> f64 {
    let ClassParams {
        lipschitz: l,
        gamma,
        mu,
        ..
    } = *params;
    (1.0 - 0.5 * (mu * gamma * gamma / l).sqrt()).powi(k as i32) * l * r0sq
}

/// Upper bound on λₖ:
/// min((1 − √(μγ²/L))^k, 4L / (2√L + γk√γ₀)²).
///
/// Requires γ₀ ≥ μ/γ.
pub fn lambda_envelope(params: &ClassParams, gamma0: f64, k: usize) -> Result<f64> {
    let ClassParams {
        lipschitz: l,
        gamma,
        mu,
        ..
    } = *params;
    if !(gamma0 >= mu / gamma) || !(gamma0 > 0.0) {
        return invalid(format!("gamma0 = {gamma0} is below mu/gamma = {}", mu / gamma));
    }
    let k_f = k as f64;
    let sublinear = 4.0 * l / (2.0 * l.sqrt() + gamma * k_f * gamma0.sqrt()).powi(2);
    let linear = (1.0 - (mu * gamma * gamma / l).sqrt()).powi(k as i32);
    Ok(linear.min(sublinear))
}

/// Rate bound on f(xₖ) − f* for γ₀ = max(L, μ/γ):
/// min((1 − √(μγ²/L))^k, 4/(2 + γk)²) · L‖x₀ − x*‖².
pub fn agd_rate_envelope(params: &ClassParams, k: usize, r0sq: f64) -> f64 {
    let ClassParams {
        lipschitz: l,
        gamma,
        mu,
        ..
    } = *params;
    let k_f = k as f64;
    let linear = (1.0 - (mu * gamma * gamma / l).sqrt()).powi(k as i32);
    let sublinear = 4.0 / (2.0 + gamma * k_f).powi(2);
    linear.min(sublinear) * l * r0sq
}

/// Evaluate φₖ at each probe by unrolling
/// φₖ₊₁ = (1 − αₖ)φₖ + αₖ qₖ and by the canonical form, and return the
/// largest absolute difference over all k and probes.
pub fn phi_consistency_probe(
    history: &[StepRecord],
    gamma0: f64,
    phi0_star: f64,
    v0: &Point,
    weak_gamma: f64,
    mu: f64,
    probes: &[Point],
) -> Result<f64> {
    if probes.is_empty() {
        return invalid("no probe points");
    }
    if !(gamma0 > 0.0 && weak_gamma > 0.0) {
        return invalid("gamma0 and gamma must be positive");
    }
    // recursion: value of φₖ at every probe
    let mut unrolled: Vec<f64> = probes
        .iter()
        .map(|x| phi0_star + 0.5 * gamma0 * (x - v0).norm_squared())
        .collect();
    let mut canon = Canonical {
        phi_star: phi0_star,
        gamma_k: gamma0,
        v: v0.clone(),
    };
    let mut worst: f64 = 0.0;
    let mut compare = |unrolled: &[f64], canon: &Canonical| {
        for (x, &u) in probes.iter().zip(unrolled) {
            let c = canon.phi_star + 0.5 * canon.gamma_k * (x - &canon.v).norm_squared();
            worst = worst.max((u - c).abs());
        }
    };
    compare(&unrolled, &canon);
    for step in history {
        let y = Point::from_column_slice(&step.y);
        let g = Point::from_column_slice(&step.grad_y);
        if y.len() != v0.len() || g.len() != v0.len() {
            return invalid("history entry has the wrong dimension");
        }
        for (x, u) in probes.iter().zip(unrolled.iter_mut()) {
            let d = x - &y;
            let q = step.f_y + g.dot(&d) / weak_gamma + 0.5 * mu * d.norm_squared();
            *u = (1.0 - step.alpha) * *u + step.alpha * q;
        }
        canon = canonical_update(&canon, step.alpha, &y, step.f_y, &g, weak_gamma, mu);
        compare(&unrolled, &canon);
    }
    Ok(worst)
}
