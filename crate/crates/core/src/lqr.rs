//! Discrete-time LQR as a policy-optimization testbed.
//!
//! For a static gain K (m×n) with closed loop M = A − BK stable, the cost is
//! f(K) = tr(X_K Σ₀) where X_K solves MᵀXM − X + Q + KᵀRK = 0, and
//!
//! ∇f(K) = 2 [(R + BᵀX_K B) K − BᵀX_K A] Σ_K,
//!
//! with Σ_K solving MΣMᵀ − Σ + Σ₀ = 0. The oracle flattens K row-major.

use std::path::Path;

use nalgebra::linalg::LU;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classcheck::{self, ClassKind, MembershipReport, DEFAULT_TOL};
use crate::error::{invalid, Error, Result};
use crate::objective::{is_symmetric, Matrix, Objective, Oracle, Point};
use crate::params::ClassParams;

/// Closed loops with spectral radius at or above 1 − this are rejected.
pub const STABILITY_MARGIN: f64 = 1e-9;
/// Cost returned by the safeguarded oracle outside the stable set.
pub const UNSTABLE_COST: f64 = 1e300;

const RICCATI_MAX_ITER: usize = 100_000;
const RICCATI_TOL: f64 = 1e-12;
const LYAPUNOV_RESIDUAL_TOL: f64 = 1e-10;

/// A feedback gain K (m×n); u = −Kx.
pub type Gain = Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct LqrProblem {
    pub a: Matrix,
    pub b: Matrix,
    pub q: Matrix,
    pub r: Matrix,
    pub sigma0: Matrix,
}

/// Value and covariance matrices at one gain, with cost and gradient.
#[derive(Debug, Clone)]
pub struct LqrDerived {
    pub x_k: Matrix,
    pub sigma_k: Matrix,
    pub cost: f64,
    pub grad: Matrix,
}

fn min_eigenvalue(m: &Matrix) -> f64 {
    m.clone().symmetric_eigen().eigenvalues.min()
}

fn max_eigenvalue(m: &Matrix) -> f64 {
    m.clone().symmetric_eigen().eigenvalues.max()
}

impl LqrProblem {
    pub fn new(a: Matrix, b: Matrix, q: Matrix, r: Matrix, sigma0: Matrix) -> Result<Self> {
        let n = a.nrows();
        let m = b.ncols();
        if n == 0 || m == 0 {
            return invalid("LQR problem needs n ≥ 1 states and m ≥ 1 inputs");
        }
        let shape = |name: &str, x: &Matrix, rows: usize, cols: usize| -> Result<()> {
            if x.shape() != (rows, cols) {
                return invalid(format!("{name} is {}x{}, expected {rows}x{cols}", x.nrows(), x.ncols()));
            }
            if x.iter().any(|v| !v.is_finite()) {
                return invalid(format!("{name} has non-finite entries"));
            }
            Ok(())
        };
        shape("A", &a, n, n)?;
        shape("B", &b, n, m)?;
        shape("Q", &q, n, n)?;
        shape("R", &r, m, m)?;
        shape("Sigma0", &sigma0, n, n)?;
        for (name, x) in [("Q", &q), ("R", &r), ("Sigma0", &sigma0)] {
            if !is_symmetric(x, 1e-12) {
                return invalid(format!("{name} is not symmetric"));
            }
        }
        if min_eigenvalue(&r) <= 0.0 {
            return invalid("R must be positive definite");
        }
        if min_eigenvalue(&sigma0) <= 0.0 {
            return invalid("Sigma0 must be positive definite");
        }
        if min_eigenvalue(&q) < -1e-12 * (1.0 + q.amax()) {
            return invalid("Q must be positive semidefinite");
        }
        Ok(Self { a, b, q, r, sigma0 })
    }

    pub fn states(&self) -> usize {
        self.a.nrows()
    }

    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn closed_loop(&self, k: &Gain) -> Result<Matrix> {
        if k.shape() != (self.inputs(), self.states()) {
            return invalid(format!(
                "gain is {}x{}, expected {}x{}",
                k.nrows(),
                k.ncols(),
                self.inputs(),
                self.states()
            ));
        }
        Ok(&self.a - &self.b * k)
    }

    pub fn is_stabilizing(&self, k: &Gain) -> Result<bool> {
        Ok(spectral_radius(&self.closed_loop(k)?) < 1.0 - STABILITY_MARGIN)
    }

    /// Scalar example: A = 0.5, B = Q = R = Σ₀ = 1.
    pub fn scalar_example() -> Self {
        let one = Matrix::from_element(1, 1, 1.0);
        Self {
            a: Matrix::from_element(1, 1, 0.5),
            b: one.clone(),
            q: one.clone(),
            r: one.clone(),
            sigma0: one,
        }
    }

    /// Fixed two-state, one-input problem with an open-loop unstable mode.
    /// K₀ = [1, 1] stabilizes it.
    pub fn two_state_example() -> Self {
        Self {
            a: Matrix::from_row_slice(2, 2, &[1.1, 0.3, 0.2, 0.7]),
            b: Matrix::from_row_slice(2, 1, &[0.2, 1.0]),
            q: Matrix::from_row_slice(2, 2, &[1.0, 0.1, 0.1, 0.5]),
            r: Matrix::from_element(1, 1, 0.8),
            sigma0: Matrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 0.6]),
        }
    }

    pub fn two_state_k0() -> Gain {
        Matrix::from_row_slice(1, 2, &[1.0, 1.0])
    }

    /// Random problem with a stable A (ρ(A) = 0.9), Q = I, R = I, Σ₀ = I.
    /// K₀ = 0 stabilizes it.
    pub fn random_stable(n: usize, m: usize, seed: u64) -> Result<Self> {
        if n == 0 || m == 0 {
            return invalid("need n, m ≥ 1");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = Matrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let rho = spectral_radius(&a);
        if rho > 0.0 {
            a *= 0.9 / rho;
        }
        let b = Matrix::from_fn(n, m, |_, _| rng.gen_range(-1.0..1.0));
        Self::new(a, b, Matrix::identity(n, n), Matrix::identity(m, m), Matrix::identity(n, n))
    }
}

/// Largest eigenvalue modulus.
pub fn spectral_radius(m: &Matrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Solve MᵀXM − X + W = 0 through the n²-sized Kronecker system.
pub fn solve_discrete_lyapunov(m: &Matrix, w: &Matrix) -> Result<Matrix> {
    let n = m.nrows();
    if !m.is_square() || w.shape() != (n, n) {
        return invalid("Lyapunov solve needs square M and W of the same size");
    }
    if !is_symmetric(w, 1e-10) {
        return invalid("W must be symmetric");
    }
    let rho = spectral_radius(m);
    if !(rho < 1.0 - STABILITY_MARGIN) {
        return Err(Error::Instability(format!("spectral radius {rho} ≥ 1")));
    }
    // vec(MᵀXM) = (Mᵀ ⊗ Mᵀ) vec(X) in column-major vec.
    let mt = m.transpose();
    let sys = Matrix::identity(n * n, n * n) - mt.kronecker(&mt);
    let rhs = Point::from_column_slice(w.as_slice());
    let sol = LU::new(sys)
        .solve(&rhs)
        .ok_or_else(|| Error::Instability("Lyapunov system is singular".into()))?;
    let x = Matrix::from_column_slice(n, n, sol.as_slice());
    let x = (&x + x.transpose()) * 0.5;
    let residual = lyapunov_residual(m, w, &x);
    if residual > LYAPUNOV_RESIDUAL_TOL * (1.0 + w.norm()) {
        return Err(Error::Instability(format!(
            "Lyapunov residual {residual:e} too large (spectral radius {rho})"
        )));
    }
    Ok(x)
}

/// ‖MᵀXM − X + W‖_F.
pub fn lyapunov_residual(m: &Matrix, w: &Matrix, x: &Matrix) -> f64 {
    (m.transpose() * x * m - x + w).norm()
}

fn stage_cost(problem: &LqrProblem, k: &Gain) -> Matrix {
    &problem.q + k.transpose() * &problem.r * k
}

fn value_matrix(problem: &LqrProblem, k: &Gain) -> Result<Matrix> {
    let cl = problem.closed_loop(k)?;
    solve_discrete_lyapunov(&cl, &stage_cost(problem, k))
}

pub fn lqr_cost(problem: &LqrProblem, k: &Gain) -> Result<f64> {
    let x = value_matrix(problem, k)?;
    Ok((x * &problem.sigma0).trace())
}

pub fn lqr_derived(problem: &LqrProblem, k: &Gain) -> Result<LqrDerived> {
    let cl = problem.closed_loop(k)?;
    let x_k = solve_discrete_lyapunov(&cl, &stage_cost(problem, k))?;
    let sigma_k = solve_discrete_lyapunov(&cl.transpose(), &problem.sigma0)?;
    let cost = (&x_k * &problem.sigma0).trace();
    let btx = problem.b.transpose() * &x_k;
    let grad = ((&problem.r + &btx * &problem.b) * k - &btx * &problem.a) * &sigma_k * 2.0;
    Ok(LqrDerived { x_k, sigma_k, cost, grad })
}

pub fn lqr_grad(problem: &LqrProblem, k: &Gain) -> Result<Matrix> {
    lqr_derived(problem, k).map(|d| d.grad)
}

/// Fixed-point iteration of the discrete Riccati map from P = Q.
pub fn riccati_solve(problem: &LqrProblem) -> Result<Gain> {
    let (a, b, r) = (&problem.a, &problem.b, &problem.r);
    let at = a.transpose();
    let bt = b.transpose();
    let gain = |p: &Matrix| -> Result<Matrix> {
        let lhs = r + &bt * p * b;
        let rhs = &bt * p * a;
        LU::new(lhs)
            .solve(&rhs)
            .ok_or_else(|| Error::InvalidInput("R + BᵀPB is singular".into()))
    };
    let mut p = problem.q.clone();
    for _ in 0..RICCATI_MAX_ITER {
        let k = gain(&p)?;
        // Qc + AᵀPA − AᵀPB(R + BᵀPB)⁻¹BᵀPA, with the last factor already in k.
        let next = &problem.q + &at * &p * a - &at * &p * b * &k;
        let next = (&next + next.transpose()) * 0.5;
        if next.iter().any(|v| !v.is_finite()) {
            break;
        }
        let delta = (&next - &p).norm();
        p = next;
        if delta <= RICCATI_TOL * p.norm().max(1.0) {
            let k = gain(&p)?;
            if !problem.is_stabilizing(&k)? {
                return Err(Error::NotStabilizable(RICCATI_MAX_ITER));
            }
            return Ok(k);
        }
    }
    Err(Error::NotStabilizable(RICCATI_MAX_ITER))
}

/// Row-major coordinates of K.
pub fn flatten_gain(k: &Gain) -> Point {
    Point::from_column_slice(k.transpose().as_slice())
}

pub fn unflatten_gain(x: &Point, m: usize, n: usize) -> Result<Gain> {
    if x.len() != m * n {
        return invalid(format!("expected {} coordinates for a {m}x{n} gain, got {}", m * n, x.len()));
    }
    Ok(Matrix::from_row_slice(m, n, x.as_slice()))
}

struct LqrObjective {
    problem: LqrProblem,
    safeguard: bool,
}

impl LqrObjective {
    fn gain(&self, x: &Point) -> Result<Gain> {
        unflatten_gain(x, self.problem.inputs(), self.problem.states())
    }
}

impl Objective for LqrObjective {
    fn dimension(&self) -> usize {
        self.problem.inputs() * self.problem.states()
    }

    fn value(&self, x: &Point) -> Result<f64> {
        let k = self.gain(x)?;
        match lqr_cost(&self.problem, &k) {
            Err(Error::Instability(_)) if self.safeguard => Ok(UNSTABLE_COST),
            other => other,
        }
    }

    fn gradient(&self, x: &Point) -> Result<Point> {
        let k = self.gain(x)?;
        lqr_grad(&self.problem, &k).map(|g| flatten_gain(&g))
    }
}

/// Oracle over row-major-flattened gains, with K* and f* from the Riccati solve.
pub fn lqr_oracle(problem: &LqrProblem, safeguard: bool) -> Result<Oracle> {
    let k_star = riccati_solve(problem)?;
    let f_star = lqr_cost(problem, &k_star)?;
    let obj = LqrObjective {
        problem: problem.clone(),
        safeguard,
    };
    Ok(Oracle::new("lqr", obj).with_minimizer(flatten_gain(&k_star), f_star))
}

/// Per-variant outcome of the lemma inequality
/// f(K*) ≥ f(K) + c⟨∇f(K), K − K*⟩ + λ(R + BᵀX_K B)‖K − K*‖²_F.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaVariant {
    pub violations: usize,
    pub worst_slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaDiagnostics {
    /// c = ‖Σ_{K*}‖₂.
    pub y_star_norm: f64,
    /// Literal inequality with the smallest eigenvalue of R + BᵀX_K B.
    pub literal_lambda_min: LemmaVariant,
    /// Literal inequality with the largest eigenvalue.
    pub literal_lambda_max: LemmaVariant,
    /// f(K) − f(K*) ≤ c⟨∇f(K), K − K*⟩ − λ_min‖K − K*‖²_F.
    pub reversed_lambda_min: LemmaVariant,
    /// Smallest c for which the reversed form holds on every sample.
    pub best_coefficient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LqrWqscCheck {
    pub gamma_hat: f64,
    pub mu_hat: f64,
    /// WQSC check at (L̂, γ̂, μ̂) on the flattened oracle.
    pub report: MembershipReport,
    pub lemma: LemmaDiagnostics,
}

/// Estimate WQSC constants of the LQR cost on `samples` and evaluate the
/// policy-gradient lemma inequality at each of them.
pub fn check_lqr_wqsc(problem: &LqrProblem, samples: &[Gain]) -> Result<LqrWqscCheck> {
    if samples.is_empty() {
        return invalid("no sample gains");
    }
    let k_star = riccati_solve(problem)?;
    let star = lqr_derived(problem, &k_star)?;
    let c = max_eigenvalue(&star.sigma_k);

    let mut variants = [(0usize, f64::INFINITY); 3];
    let mut best = f64::NEG_INFINITY;
    let mut points = Vec::with_capacity(samples.len());
    for (i, k) in samples.iter().enumerate() {
        let d = lqr_derived(problem, k).map_err(|e| match e {
            Error::Instability(msg) => Error::Instability(format!("sample {i}: {msg}")),
            other => other,
        })?;
        let diff = k - &k_star;
        let inner = d.grad.dot(&diff);
        let dist_sq = diff.norm_squared();
        let h = &problem.r + problem.b.transpose() * &d.x_k * &problem.b;
        let (lmin, lmax) = (min_eigenvalue(&h), max_eigenvalue(&h));
        let gap = d.cost - star.cost;
        let slacks = [
            -gap - c * inner - lmin * dist_sq,
            -gap - c * inner - lmax * dist_sq,
            c * inner - lmin * dist_sq - gap,
        ];
        for (v, s) in variants.iter_mut().zip(slacks) {
            let tol = DEFAULT_TOL * (1.0 + d.cost.abs());
            if s < -tol {
                v.0 += 1;
            }
            v.1 = v.1.min(s);
        }
        if dist_sq > 0.0 {
            if inner > 0.0 {
                best = best.max((gap + lmin * dist_sq) / inner);
            } else {
                best = f64::INFINITY;
            }
        }
        points.push(flatten_gain(k));
    }
    let variant = |(violations, worst_slack): (usize, f64)| LemmaVariant { violations, worst_slack };
    let lemma = LemmaDiagnostics {
        y_star_norm: c,
        literal_lambda_min: variant(variants[0]),
        literal_lambda_max: variant(variants[1]),
        reversed_lambda_min: variant(variants[2]),
        best_coefficient: best,
    };

    let oracle = lqr_oracle(problem, false)?;
    let x_star = flatten_gain(&k_star);
    let params = classcheck::estimate_params(&oracle, &x_star, &points)?;
    let report = classcheck::verify_membership(&oracle, &x_star, ClassKind::Wqsc, &params, &points, DEFAULT_TOL)?;
    Ok(LqrWqscCheck {
        gamma_hat: params.gamma,
        mu_hat: params.mu,
        report,
        lemma,
    })
}

/// Stabilizing gains in the sublevel set {K : f(K) ≤ f(K₀)}, drawn along
/// random rays from K* with uniformly distributed radius.
pub fn sample_sublevel_gains(problem: &LqrProblem, k0: &Gain, n: usize, seed: u64) -> Result<Vec<Gain>> {
    let level = lqr_cost(problem, k0).map_err(|_| Error::InvalidInput("K0 is not stabilizing".into()))?;
    let k_star = riccati_solve(problem)?;
    let reach = (k0 - &k_star).norm().max(1e-3);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inside = |k: &Gain| matches!(lqr_cost(problem, k), Ok(f) if f <= level);
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0usize;
    while out.len() < n {
        attempts += 1;
        if attempts > 100 * n + 100 {
            return invalid("could not draw enough gains from the sublevel set");
        }
        let dir = Matrix::from_fn(k0.nrows(), k0.ncols(), |_, _| rng.gen_range(-1.0..1.0));
        let norm = dir.norm();
        if norm < 1e-6 {
            continue;
        }
        let dir = dir / norm;
        // Largest radius along the ray that stays in the set, by bisection.
        let (mut lo, mut hi) = (0.0, 4.0 * reach);
        if inside(&(&k_star + &dir * hi)) {
            lo = hi;
        } else {
            for _ in 0..50 {
                let mid = 0.5 * (lo + hi);
                if inside(&(&k_star + &dir * mid)) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        }
        let t: f64 = rng.gen_range(0.0..1.0);
        let k = &k_star + &dir * (t * lo);
        if inside(&k) {
            out.push(k);
        }
    }
    Ok(out)
}

/// Largest finite-difference curvature ‖∇f(K + hD) − ∇f(K − hD)‖/(2h)
/// along one random unit direction D per sample.
pub fn estimate_lqr_lipschitz(problem: &LqrProblem, samples: &[Gain], seed: u64) -> Result<f64> {
    if samples.is_empty() {
        return invalid("no sample gains");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: f64 = 0.0;
    for k in samples {
        let dir = Matrix::from_fn(k.nrows(), k.ncols(), |_, _| rng.gen_range(-1.0..1.0));
        let norm = dir.norm();
        if norm < 1e-6 {
            continue;
        }
        let dir = dir / norm;
        let h = 1e-5 * (1.0 + k.norm());
        let (Ok(gp), Ok(gm)) = (lqr_grad(problem, &(k + &dir * h)), lqr_grad(problem, &(k - &dir * h))) else {
            continue;
        };
        best = best.max((gp - gm).norm() / (2.0 * h));
    }
    if !(best > 0.0) {
        return invalid("no usable curvature samples");
    }
    Ok(best)
}

/// Constants for running first-order methods on the LQR cost, estimated on
/// the sublevel set of K₀: L̂ from finite-difference curvature, (γ̂, μ̂)
/// from [`check_lqr_wqsc`]. K₀ itself is always among the samples.
pub fn estimate_lqr_params(
    problem: &LqrProblem,
    k0: &Gain,
    n_samples: usize,
    seed: u64,
) -> Result<(ClassParams, LqrWqscCheck)> {
    if !problem.is_stabilizing(k0)? {
        return invalid(format!(
            "K0 is not stabilizing (spectral radius {})",
            spectral_radius(&problem.closed_loop(k0)?)
        ));
    }
    let mut samples = sample_sublevel_gains(problem, k0, n_samples, seed)?;
    samples.push(k0.clone());
    let l_hat = estimate_lqr_lipschitz(problem, &samples, seed.wrapping_add(1))?;
    let check = check_lqr_wqsc(problem, &samples)?;
    let lipschitz = l_hat.max(check.report.params.lipschitz);
    let params = ClassParams::new(lipschitz, check.gamma_hat, check.mu_hat.min(lipschitz))?;
    Ok((params, check))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ProblemFile {
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    b: Vec<Vec<f64>>,
    #[serde(rename = "Q")]
    q: Vec<Vec<f64>>,
    #[serde(rename = "R")]
    r: Vec<Vec<f64>>,
    #[serde(rename = "Sigma0")]
    sigma0: Vec<Vec<f64>>,
    #[serde(rename = "K0")]
    k0: Vec<Vec<f64>>,
}

fn from_rows(name: &str, rows: &[Vec<f64>]) -> Result<Matrix> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
        return invalid(format!("{name} must be a non-empty rectangular array of rows"));
    }
    Ok(Matrix::from_row_slice(r, c, &rows.concat()))
}

fn to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|row| row.iter().copied().collect()).collect()
}

/// Parse a problem definition (row-major nested arrays) and its K₀.
pub fn parse_problem(json: &str) -> Result<(LqrProblem, Gain)> {
    let f: ProblemFile = serde_json::from_str(json)?;
    let problem = LqrProblem::new(
        from_rows("A", &f.a)?,
        from_rows("B", &f.b)?,
        from_rows("Q", &f.q)?,
        from_rows("R", &f.r)?,
        from_rows("Sigma0", &f.sigma0)?,
    )?;
    let k0 = from_rows("K0", &f.k0)?;
    problem.closed_loop(&k0).map_err(|e| match e {
        Error::InvalidInput(msg) => Error::InvalidInput(format!("K0: {msg}")),
        other => other,
    })?;
    Ok((problem, k0))
}

pub fn load_problem(path: &Path) -> Result<(LqrProblem, Gain)> {
    let text = std::fs::read_to_string(path)?;
    parse_problem(&text)
}

pub fn problem_to_json(problem: &LqrProblem, k0: &Gain) -> Result<String> {
    let f = ProblemFile {
        a: to_rows(&problem.a),
        b: to_rows(&problem.b),
        q: to_rows(&problem.q),
        r: to_rows(&problem.r),
        sigma0: to_rows(&problem.sigma0),
        k0: to_rows(k0),
    };
    Ok(serde_json::to_string_pretty(&f)?)
}
