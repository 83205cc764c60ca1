//! Sampled verification and estimation of function-class constants.
//!
//! Every check evaluates one inequality literally at caller-supplied
//! sample points, relative to a known minimizer x*:
//!
//! | kind      | inequality (lhs ≤ rhs)                                   |
//! |-----------|----------------------------------------------------------|
//! | `WQC`     | γ (f(x) − f*) ≤ ⟨∇f(x), x − x*⟩                          |
//! | `WQSC`    | f(x) − f* ≤ (1/γ)⟨∇f(x), x − x*⟩ − (μ/2)‖x − x*‖²        |
//! | `QG_def2` | (ζ/2)‖∇f(x)‖² ≤ f(x) − f*                                |
//! | `QG_dist` | (μ/2)‖x − x*‖² ≤ f(x) − f*                               |
//! | `GradDom` | τ (f(x) − f*) ≤ ½‖∇f(x)‖²                                |
//!
//! Samples are never drawn here; callers pass deterministic grids (see
//! [`crate::sampling`]).

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::objective::{Oracle, Point};
use crate::params::ClassParams;

/// Absolute slack tolerance used when none is given.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Samples whose gap f(x) − f* is at or below this are skipped by the ratio estimators.
const GAP_FLOOR: f64 = 1e-12;

const MU_BISECTION_STEPS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassKind {
    #[serde(rename = "WQC")]
    Wqc,
    #[serde(rename = "WQSC")]
    Wqsc,
    #[serde(rename = "QG_def2")]
    QgDef2,
    #[serde(rename = "QG_dist")]
    QgDist,
    #[serde(rename = "GradDom")]
    GradDom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub point: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub class_kind: ClassKind,
    pub params: ClassParams,
    pub n_points: usize,
    pub violations: Vec<Violation>,
    /// Minimum of rhs − lhs over all samples.
    pub worst_slack: f64,
}

impl MembershipReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }

    /// Combine reports computed on disjoint sample blocks.
    pub fn merge(mut self, other: MembershipReport) -> Result<Self> {
        if self.class_kind != other.class_kind || self.params != other.params {
            return invalid("cannot merge reports for different classes or constants");
        }
        self.n_points += other.n_points;
        self.violations.extend(other.violations);
        self.worst_slack = self.worst_slack.min(other.worst_slack);
        Ok(self)
    }
}

/// First-order data of one sample relative to x*.
#[derive(Debug, Clone)]
struct Sample {
    x: Point,
    gap: f64,
    inner: f64,
    grad_sq: f64,
    dist_sq: f64,
}

fn collect(oracle: &Oracle, x_star: &Point, samples: &[Point]) -> Result<(f64, Vec<Sample>)> {
    if samples.is_empty() {
        return invalid("sample set is empty");
    }
    let f_star = oracle.eval(x_star)?;
    let data = samples
        .iter()
        .map(|x| {
            let (fx, g) = oracle.eval_grad(x)?;
            let d = x - x_star;
            Ok(Sample {
                x: x.clone(),
                gap: fx - f_star,
                inner: g.dot(&d),
                grad_sq: g.norm_squared(),
                dist_sq: d.norm_squared(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((f_star, data))
}

fn sides(kind: ClassKind, p: &ClassParams, s: &Sample) -> (f64, f64) {
    match kind {
        ClassKind::Wqc => (p.gamma * s.gap, s.inner),
        ClassKind::Wqsc => (s.gap, s.inner / p.gamma - 0.5 * p.mu * s.dist_sq),
        ClassKind::QgDef2 => (0.5 * p.zeta.unwrap_or(0.0) * s.grad_sq, s.gap),
        ClassKind::QgDist => (0.5 * p.mu * s.dist_sq, s.gap),
        ClassKind::GradDom => (p.tau.unwrap_or(0.0) * s.gap, 0.5 * s.grad_sq),
    }
}

fn report(kind: ClassKind, params: ClassParams, data: &[Sample], tol: f64) -> MembershipReport {
    let mut violations = Vec::new();
    let mut worst = f64::INFINITY;
    for s in data {
        let (lhs, rhs) = sides(kind, &params, s);
        worst = worst.min(rhs - lhs);
        if lhs > rhs + tol || lhs.is_nan() || rhs.is_nan() {
            violations.push(Violation {
                point: s.x.iter().copied().collect(),
                lhs,
                rhs,
            });
        }
    }
    MembershipReport {
        class_kind: kind,
        params,
        n_points: data.len(),
        violations,
        worst_slack: worst,
    }
}

fn check_constants(kind: ClassKind, p: &ClassParams, tol: f64) -> Result<()> {
    if !(tol >= 0.0) {
        return invalid(format!("tolerance must be nonnegative, got {tol}"));
    }
    if !(p.gamma > 0.0) {
        return invalid("gamma must be positive");
    }
    match kind {
        ClassKind::QgDef2 if p.zeta.is_none() => invalid("QG_def2 needs zeta"),
        ClassKind::GradDom if p.tau.is_none() => invalid("GradDom needs tau"),
        _ => Ok(()),
    }
}

/// Evaluate one class inequality at every sample and report violations beyond `tol`.
pub fn verify_membership(
    oracle: &Oracle,
    x_star: &Point,
    kind: ClassKind,
    params: &ClassParams,
    samples: &[Point],
    tol: f64,
) -> Result<MembershipReport> {
    check_constants(kind, params, tol)?;
    let (_, data) = collect(oracle, x_star, samples)?;
    Ok(report(kind, *params, &data, tol))
}

fn gamma_from(data: &[Sample]) -> Result<f64> {
    let mut gamma = f64::INFINITY;
    let mut used = 0usize;
    for s in data.iter().filter(|s| s.gap > GAP_FLOOR) {
        gamma = gamma.min(s.inner / s.gap);
        used += 1;
    }
    if used == 0 {
        return invalid("every sample sits at the minimizer; class constants are undefined");
    }
    if !(gamma > 0.0) {
        return invalid(format!(
            "objective is not weakly quasi-convex on these samples (min ratio {gamma})"
        ));
    }
    Ok(gamma.min(1.0))
}

fn wqsc_feasible(data: &[Sample], gamma: f64, mu: f64) -> bool {
    data.iter()
        .all(|s| s.inner / gamma - 0.5 * mu * s.dist_sq - s.gap >= 0.0)
}

/// Largest μ in [0, L] for which the WQSC inequality at `gamma` holds on
/// every sample, by bisection.
fn mu_by_bisection(data: &[Sample], gamma: f64, lipschitz: f64) -> f64 {
    if wqsc_feasible(data, gamma, lipschitz) {
        return lipschitz;
    }
    if !wqsc_feasible(data, gamma, 0.0) {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, lipschitz);
    for _ in 0..MU_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if wqsc_feasible(data, gamma, mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Largest μ ∈ [0, L] such that the WQSC inequality at a fixed `gamma`
/// holds on every sample (bisection, 60 steps).
pub fn estimate_wqsc_mu(
    oracle: &Oracle,
    x_star: &Point,
    samples: &[Point],
    gamma: f64,
    lipschitz: f64,
) -> Result<f64> {
    if !(gamma > 0.0 && gamma <= 1.0) || !(lipschitz > 0.0) {
        return invalid("need gamma in (0, 1] and L > 0");
    }
    let (_, data) = collect(oracle, x_star, samples)?;
    Ok(mu_by_bisection(&data, gamma, lipschitz))
}

/// Sampled Lipschitz estimate for ∇f: the largest secant ratio between
/// consecutive samples and between each sample and x*.
pub fn estimate_lipschitz(oracle: &Oracle, x_star: &Point, samples: &[Point]) -> Result<f64> {
    if samples.is_empty() {
        return invalid("sample set is empty");
    }
    let g_star = oracle.grad(x_star)?;
    let grads = samples.iter().map(|x| oracle.grad(x)).collect::<Result<Vec<_>>>()?;
    let mut best: f64 = 0.0;
    let mut secant = |xa: &Point, ga: &Point, xb: &Point, gb: &Point| {
        let dx = (xa - xb).norm();
        if dx > 1e-12 {
            best = best.max((ga - gb).norm() / dx);
        }
    };
    for (x, g) in samples.iter().zip(&grads) {
        secant(x, g, x_star, &g_star);
    }
    for i in 1..samples.len() {
        secant(&samples[i], &grads[i], &samples[i - 1], &grads[i - 1]);
    }
    if !(best > 0.0) {
        return invalid("could not estimate a positive Lipschitz constant");
    }
    Ok(best)
}

/// Certify (γ, μ, τ, ζ) on the samples with a sampled estimate of L.
pub fn estimate_params(oracle: &Oracle, x_star: &Point, samples: &[Point]) -> Result<ClassParams> {
    let l = estimate_lipschitz(oracle, x_star, samples)?;
    estimate_params_with_lipschitz(oracle, x_star, samples, l)
}

/// Certify (γ, μ, τ, ζ) on the samples for a known L.
///
/// γ is the smallest ratio ⟨∇f(x), x − x*⟩ / (f(x) − f*) capped at 1; μ is
/// then the largest WQSC constant at that γ found by bisection on [0, L];
/// τ and ζ are the smallest gradient-domination and gradient-growth ratios.
/// Samples with f(x) − f* ≤ 1e−12 are ignored by the ratio estimates.
pub fn estimate_params_with_lipschitz(
    oracle: &Oracle,
    x_star: &Point,
    samples: &[Point],
    lipschitz: f64,
) -> Result<ClassParams> {
    if !(lipschitz > 0.0) {
        return invalid("L must be positive");
    }
    let (_, data) = collect(oracle, x_star, samples)?;
    let gamma = gamma_from(&data)?;
    let mu = mu_by_bisection(&data, gamma, lipschitz);

    let tau = data
        .iter()
        .filter(|s| s.gap > GAP_FLOOR)
        .map(|s| 0.5 * s.grad_sq / s.gap)
        .fold(f64::INFINITY, f64::min);
    let zeta = data
        .iter()
        .filter(|s| s.grad_sq > GAP_FLOOR * GAP_FLOOR)
        .map(|s| 2.0 * s.gap / s.grad_sq)
        .fold(f64::INFINITY, f64::min);

    let mut p = ClassParams {
        lipschitz,
        gamma,
        mu,
        tau: None,
        zeta: None,
    };
    if tau > 0.0 && tau.is_finite() {
        p.tau = Some(tau);
    }
    if zeta > 0.0 && zeta.is_finite() {
        p.zeta = Some(zeta);
    }
    Ok(p)
}

/// Largest μ with f(x) − f* ≥ (μ/2)‖x − x*‖² on every sample (the
/// distance-form growth constant of the WQ class).
pub fn estimate_quadratic_growth(oracle: &Oracle, x_star: &Point, samples: &[Point]) -> Result<f64> {
    let (_, data) = collect(oracle, x_star, samples)?;
    let mu = data
        .iter()
        .filter(|s| s.dist_sq > GAP_FLOOR)
        .map(|s| 2.0 * s.gap / s.dist_sq)
        .fold(f64::INFINITY, f64::min);
    if !mu.is_finite() {
        return invalid("every sample sits at the minimizer; growth constant is undefined");
    }
    Ok(mu.max(0.0))
}

/// Check that WQ(γ, μ) membership implies W(γ', a) with
/// γ' = 1 / (1/γ + a/(μγ)), by evaluating the implied WQSC inequality.
pub fn check_wq_to_w_embedding(
    oracle: &Oracle,
    x_star: &Point,
    params: &ClassParams,
    a: f64,
    samples: &[Point],
    tol: f64,
) -> Result<MembershipReport> {
    if !(params.mu > 0.0) {
        return invalid("embedding needs mu > 0");
    }
    if !(a > 0.0) {
        return invalid(format!("embedding parameter a must be positive, got {a}"));
    }
    let embedded = ClassParams {
        gamma: embedded_gamma(params.gamma, params.mu, a),
        mu: a,
        tau: None,
        zeta: None,
        ..*params
    };
    verify_membership(oracle, x_star, ClassKind::Wqsc, &embedded, samples, tol)
}

/// γ' = 1 / (1/γ + a/(μγ)).
pub fn embedded_gamma(gamma: f64, mu: f64, a: f64) -> f64 {
    1.0 / (1.0 / gamma + a / (mu * gamma))
}

/// Gradient domination implied by W(γ, μ): μγ²(f − f*) ≤ ½‖∇f‖².
pub fn check_gradient_domination_consequence(
    oracle: &Oracle,
    x_star: &Point,
    params: &ClassParams,
    samples: &[Point],
    tol: f64,
) -> Result<MembershipReport> {
    let p = params.with_tau(params.mu * params.gamma * params.gamma);
    if !(p.mu > 0.0) {
        return invalid("gradient domination consequence needs mu > 0");
    }
    verify_membership(oracle, x_star, ClassKind::GradDom, &p, samples, tol)
}

/// Distance-form growth claimed to follow from W(γ, μ):
/// f − f* ≥ 2μγ²‖x − x*‖², i.e. QG_dist with constant 4μγ².
pub fn check_quadratic_growth_consequence(
    oracle: &Oracle,
    x_star: &Point,
    params: &ClassParams,
    samples: &[Point],
    tol: f64,
) -> Result<MembershipReport> {
    check_quadratic_growth_with(oracle, x_star, params, 4.0 * params.mu * params.gamma.powi(2), samples, tol)
}

/// QG_dist check with an explicit constant `mu_growth`.
pub fn check_quadratic_growth_with(
    oracle: &Oracle,
    x_star: &Point,
    params: &ClassParams,
    mu_growth: f64,
    samples: &[Point],
    tol: f64,
) -> Result<MembershipReport> {
    if !(params.mu > 0.0) {
        return invalid("quadratic growth consequence needs mu > 0");
    }
    let p = ClassParams {
        mu: mu_growth,
        ..*params
    };
    verify_membership(oracle, x_star, ClassKind::QgDist, &p, samples, tol)
}
