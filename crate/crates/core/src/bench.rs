//! The `default` bench suite: rate envelopes and class checks on the
//! catalogue and the LQR examples.
//!
//! Tasks run in parallel (bounded by `WQC_OPTIM_THREADS`, 0 = automatic),
//! but results and files are collected in task order so the output is
//! byte-identical across runs and thread counts.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalogue::{self, CatalogueEntry};
use crate::classcheck::{self, MembershipReport, DEFAULT_TOL};
use crate::error::{invalid, Result};
use crate::gd::StepRule;
use crate::harness::{self, Algorithm, Experiment, ExperimentConfig, SCHEMA_VERSION};
use crate::lqr::{self, LqrProblem};
use crate::objective::{Oracle, Point};
use crate::oqa::{averaged_minimum, optimal_average, Quadratic};
use crate::params::ClassParams;
use crate::sampling::halton;
use crate::linesearch::SegmentMode;
use crate::wes::{self, agd_run_recorded, AgdConfig, WesRun, WesVariant};

pub const THREADS_ENV: &str = "WQC_OPTIM_THREADS";

const MAX_ITER: usize = 500;
const CERT_RTOL: f64 = 1e-9;
const PHI_PROBES: usize = 20;
const PHI_TOL: f64 = 1e-8;
const ALPHA_TOL: f64 = 1e-12;
const LAMBDA_RTOL: f64 = 1e-15;
const EQUALITY_TOL: f64 = 1e-12;
const CLASS_GRID: usize = 1000;
const AVERAGE_PAIRS: usize = 100;
const AVERAGE_GRID: usize = 10_000;
const AVERAGE_TOL: f64 = 1e-9;
const LQR_FD_SAMPLES: usize = 50;
const LQR_FD_RTOL: f64 = 1e-5;
const LQR_TARGET_GAP: f64 = 1e-6;
const LQR_MAX_ITER: usize = 200;

/// One pass/fail line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub criterion: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(criterion: u8, name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            criterion,
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }

    pub fn line(&self) -> String {
        format!(
            "[{}] criterion {:>2} {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.criterion,
            self.name,
            self.detail
        )
    }
}

#[derive(Debug, Clone, Default)]
struct TaskOutput {
    results: Vec<CheckResult>,
    files: Vec<(String, String)>,
}

impl TaskOutput {
    fn check(&mut self, criterion: u8, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.results.push(CheckResult::new(criterion, name, passed, detail));
    }

    fn experiment(&mut self, stem: &str, exp: &Experiment) -> Result<()> {
        self.files.push((format!("{stem}.csv"), harness::trajectory_csv(&exp.trajectory)));
        self.files.push((format!("{stem}.json"), harness::report_json(&exp.report)?));
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchSummary {
    pub schema_version: u32,
    pub suite: String,
    pub passed: usize,
    pub failed: usize,
    pub results: Vec<CheckResult>,
}

/// Everything a bench run produces, in deterministic order.
#[derive(Debug, Clone)]
pub struct BenchOutput {
    pub summary: BenchSummary,
    /// (relative path, contents)
    pub files: Vec<(String, String)>,
}

impl BenchOutput {
    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn lines(&self) -> Vec<String> {
        self.summary.results.iter().map(CheckResult::line).collect()
    }

    /// Write every file plus `summary.json` under `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, body) in &self.files {
            std::fs::write(dir.join(name), body)?;
        }
        let mut s = serde_json::to_string_pretty(&self.summary)?;
        s.push('\n');
        std::fs::write(dir.join("summary.json"), s)?;
        Ok(())
    }
}

/// Thread count from `WQC_OPTIM_THREADS` (unset or 0 = automatic).
pub fn threads_from_env() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(0),
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| crate::error::Error::InvalidInput(format!("{THREADS_ENV} must be a nonnegative integer, got '{v}'"))),
    }
}

type Task = fn() -> Result<TaskOutput>;

fn tasks() -> Vec<(&'static str, u8, Task)> {
    vec![
        ("agd1 sublinear on flat_quartic", 1, task_sublinear),
        ("agd1 linear on quadratics", 2, task_linear),
        ("gd rates", 3, task_gd),
        ("estimate-sequence certificates", 4, task_certificates),
        ("alpha root and lambda recursion", 5, task_alpha_lambda),
        ("agd2 on WQ objectives", 6, task_agd2),
        ("optimal quadratic averaging", 7, task_oqa),
        ("class inclusions", 8, task_inclusions),
        ("LQR testbed", 9, task_lqr),
    ]
}

/// Run a named suite. Only `default` exists.
pub fn run_suite(suite: &str, threads: usize) -> Result<BenchOutput> {
    if suite != "default" {
        return invalid(format!("unknown bench suite '{suite}' (known: default)"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| crate::error::Error::InvalidInput(format!("cannot build thread pool: {e}")))?;
    let list = tasks();
    let outputs: Vec<TaskOutput> = pool.install(|| {
        list.par_iter()
            .map(|(name, criterion, task)| {
                task().unwrap_or_else(|e| TaskOutput {
                    results: vec![CheckResult::new(*criterion, *name, false, format!("error: {e}"))],
                    files: Vec::new(),
                })
            })
            .collect()
    });
    let mut results = Vec::new();
    let mut files = Vec::new();
    for out in outputs {
        results.extend(out.results);
        files.extend(out.files);
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    Ok(BenchOutput {
        summary: BenchSummary {
            schema_version: SCHEMA_VERSION,
            suite: suite.to_string(),
            passed: results.len() - failed,
            failed,
            results,
        },
        files,
    })
}

fn report_check(out: &mut TaskOutput, criterion: u8, name: String, exp: &Experiment) {
    let r = &exp.report;
    out.check(
        criterion,
        name,
        r.dominated(),
        format!(
            "{} rows, max measured/envelope {:.6e}, first violation {:?}",
            r.rows.len(),
            r.max_ratio,
            r.first_violation
        ),
    );
}

fn quad_config(alg: Algorithm, c: f64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new("quad", alg);
    cfg.diag = Some(vec![1.0, c]);
    cfg.max_iter = MAX_ITER;
    cfg
}

fn quartic_config(alg: Algorithm, dim: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new("flat_quartic", alg);
    cfg.dimension = Some(dim);
    cfg.max_iter = MAX_ITER;
    cfg
}

const QUAD_CONDITIONS: [f64; 3] = [4.0, 10.0, 100.0];
const QUARTIC_DIMS: [usize; 2] = [1, 5];

fn task_sublinear() -> Result<TaskOutput> {
    let mut out = TaskOutput::default();
    for dim in QUARTIC_DIMS {
        let exp = harness::execute(&quartic_config(Algorithm::Agd1, dim))?;
        report_check(&mut out, 1, format!("agd1 flat_quartic {dim}D, 4L r0²/(2+γk)²"), &exp);
        out.experiment(&format!("c1_agd1_flat_quartic_{dim}d"), &exp)?;
    }
    Ok(out)
}

fn task_linear() -> Result<TaskOutput> {
    let mut out = TaskOutput::default();
    for c in QUAD_CONDITIONS {
        let exp = harness::execute(&quad_config(Algorithm::Agd1, c))?;
        report_check(&mut out, 2, format!("agd1 quad diag(1,{c})"), &exp);
        out.experiment(&format!("c2_agd1_quad_{c}"), &exp)?;
    }
    Ok(out)
}

fn task_gd() -> Result<TaskOutput> {
    let mut out = TaskOutput::default();
    let mut runs: Vec<(String, ExperimentConfig)> = Vec::new();
    for c in [10.0, 100.0] {
        let mut cfg = quad_config(Algorithm::Gd, c);
        cfg.step_rule = Some(StepRule::GammaOverL);
        runs.push((format!("gd γ/L quad diag(1,{c}), W class"), cfg.clone()));
        cfg.step_rule = Some(StepRule::GammaOver2L);
        runs.push((format!("gd γ/2L quad diag(1,{c}), WQ class"), cfg));
    }
    let mut cfg = ExperimentConfig::new("sinsq", Algorithm::Gd);
    cfg.max_iter = MAX_ITER;
    cfg.step_rule = Some(StepRule::GammaOverL);
    runs.push(("gd γ/L sinsq, W class".into(), cfg.clone()));
    cfg.step_rule = Some(StepRule::GammaOver2L);
    runs.push(("gd γ/2L sinsq, WQ class".into(), cfg));
    for dim in QUARTIC_DIMS {
        let mut cfg = quartic_config(Algorithm::Gd, dim);
        cfg.step_rule = Some(StepRule::OneOverL);
        runs.push((format!("gd 1/L flat_quartic {dim}D, μ = 0"), cfg));
    }
    for (i, (name, cfg)) in runs.into_iter().enumerate() {
        let exp = harness::execute(&cfg)?;
        report_check(&mut out, 3, name, &exp);
        out.experiment(&format!("c3_gd_{i}"), &exp)?;
    }
    Ok(out)
}

/// Accelerated runs of criteria 1 and 2 with full state.
fn criterion_runs() -> Result<Vec<(String, CatalogueEntry, ClassParams, WesRun)>> {
    let mut entries = Vec::new();
    for dim in QUARTIC_DIMS {
        entries.push((format!("flat_quartic {dim}D"), catalogue::flat_quartic(dim, 1.0)?));
    }
    for c in QUAD_CONDITIONS {
        entries.push((format!("quad diag(1,{c})"), catalogue::quad(&[1.0, c])?));
    }
    entries
        .into_iter()
        .map(|(name, e)| {
            let params = e.params;
            let run = agd_run_recorded(&e.oracle, &params, &e.default_x0, &AgdConfig::new(WesVariant::plain(), MAX_ITER))?;
            Ok((name, e, params, run))
        })
        .collect()
}

/// Deterministic probes in the box spanned by x₀ and x*.
fn probes(e: &CatalogueEntry, n: usize) -> Vec<Point> {
    halton(e.dimension(), e.lo, e.hi, n)
}

/// Worst slacks of the two certificate inequalities over a run.
pub fn certificate_slacks(run: &WesRun, f_star: f64, x_star: &Point) -> (f64, f64) {
    let s0 = &run.states[0];
    let phi0_star = s0.phi_at(x_star);
    let mut worst_upper = f64::INFINITY;
    let mut worst_lower = f64::INFINITY;
    for s in &run.states {
        worst_upper = worst_upper.min(s.phi_star + CERT_RTOL * (1.0 + s.phi_star.abs()) - s.f_x);
        let bound = (1.0 - s.lambda) * f_star + s.lambda * phi0_star + CERT_RTOL;
        worst_lower = worst_lower.min(bound - s.phi_at(x_star));
    }
    (worst_upper, worst_lower)
}

fn task_certificates() -> Result<TaskOutput> {
    let mut out = TaskOutput::default();
    for (name, e, _, run) in criterion_runs()? {
        let f_star = e.oracle.known_minimum().unwrap_or(0.0);
        let (upper, lower) = certificate_slacks(&run, f_star, e.x_star());
        out.check(
            4,
            format!("f(x_k) ≤ φ*_k, {name}"),
            upper >= 0.0,
            format!("min slack {upper:.3e} over {} states", run.states.len()),
        );
        out.check(
            4,
            format!("φ_k(x*) ≤ (1−λ_k)f* + λ_k φ_0(x*), {name}"),
            lower >= 0.0,
            format!("min slack {lower:.3e}"),
        );
        let err = run.phi_consistency(&probes(&e, PHI_PROBES))?;
        out.check(
            4,
            format!("φ_k recursion vs canonical form, {name}"),
            err <= PHI_TOL,
            format!("max error {err:.3e} over {PHI_PROBES} probes"),
        );
    }
    Ok(out)
}

/// (max scaled α residual, max λ relative error vs running product, max λ/bound).
pub fn alpha_lambda_stats(run: &WesRun, params: &ClassParams) -> Result<(f64, f64, f64)> {
    let scale = run.variant.scale;
    let (l, gamma, mu) = (params.lipschitz, params.gamma, params.mu);
    let mut alpha_res: f64 = 0.0;
    let mut lambda_err: f64 = 0.0;
    let mut lambda_ratio: f64 = 0.0;
    let mut product = 1.0;
    for (k, pair) in run.states.windows(2).enumerate() {
        let (prev, next) = (&pair[0], &pair[1]);
        let a = next.alpha;
        let lhs = scale * l * a * a / (gamma * gamma);
        let rhs = (1.0 - a) * prev.gamma_k + a * mu;
        alpha_res = alpha_res.max((lhs - rhs).abs() / (1.0 + lhs.abs().max(rhs.abs())));
        product *= 1.0 - a;
        lambda_err = lambda_err.max((next.lambda - product).abs() / product.abs().max(f64::MIN_POSITIVE));
        let bound = wes::lambda_envelope(params, run.gamma0, k + 1)?;
        lambda_ratio = lambda_ratio.max(next.lambda / bound);
    }
    Ok((alpha_res, lambda_err, lambda_ratio))
}

fn task_alpha_lambda() -> Result<TaskOutput> {
    let mut out = TaskOutput::default();
    for (name, _, params, run) in criterion_runs()? {
        let (res, err, ratio) = alpha_lambda_stats(&run, &params)?;
        out.check(5, format!("α equation residual, {name}"), res <= ALPHA_TOL, format!("max scaled residual {res:.3e}"));
        out.check(
            5,
            format!("λ_k = ∏(1−α_i), {name}"),
            err <= LAMBDA_RTOL,
            format!("max relative error {err:.3e}"),
        );
        out.check(
            5,
            format!("λ_k ≤ λ bound, {name}"),
            ratio <= 1.0 + CERT_RTOL,
            format!("max λ_k / bound {ratio:.6}"),
        );
    }
    Ok(out)
}

/// Largest |difference| between two accelerated runs, scaled per entry.
pub fn max_run_difference(a: &WesRun, b: &WesRun) -> f64 {
    if a.states.len() != b.states.len() {
        return f64::INFINITY;
    }
    let mut worst: f64 = 0.0;
    for (s, t) in a.states.iter().zip(&b.states) {
        for (u, v) in s.x.iter().zip(t.x.iter()).chain(s.v.iter().zip(t.v.iter())) {
            worst = worst.max((u - v).abs() / (1.0 + u.abs()));
        }
        worst = worst.max((s.f_x - t.f_x).abs() / (1.0 + s.f_x.abs()));
    }
    worst
}

fn task_agd2() -> Result<TaskOutput> {
    let mut out = TaskOutput::default();
    let entries = [
        ("sinsq".to_string(), catalogue::sinsq(1)?),
        ("quad diag(1,10)".to_string(), catalogue::quad(&[1.0, 10.0])?),
    ];
    for (i, (name, e)) in entries.iter().enumerate() {
        let mut cfg = ExperimentConfig::new(e.id, Algorithm::Agd2);
        cfg.max_iter = MAX_ITER;
        if e.id == "quad" {
            cfg.diag = Some(vec![1.0, 10.0]);
        }
        let exp = harness::execute(&cfg)?;
        report_check(&mut out, 6, format!("agd2 {name}, (1−½√(μγ²/L))^k L r0²"), &exp);
        out.experiment(&format!("c6_agd2_{i}"), &exp)?;

        let wq = e.wq_params();
        let two = agd_run_recorded(&e.oracle, &wq, &e.default_x0, &AgdConfig::new(WesVariant::quadratic_growth(), MAX_ITER))?;
        let halved = ClassParams {
            gamma: wq.gamma / 2.0,
            ..wq
        };
        let one_variant = WesVariant::plain().with_segment_mode(SegmentMode::Exact);
        let one = agd_run_recorded(&e.oracle, &halved, &e.default_x0, &AgdConfig::new(one_variant, MAX_ITER))?;
        let diff = max_run_difference(&two, &one);
        out.check(
            6,
            format!("agd2 equals agd1 at (γ/2, μ), {name}"),
            diff <= EQUALITY_TOL,
            format!("max scaled difference {diff:.3e}"),
        );
    }
    Ok(out)
}

/// Deterministic pairs of lower quadratics for the averaging check. The
/// curvature κ‖c_A − c_B‖² stays below 1, so a 10⁴-point λ grid resolves
/// the best average to better than 1e−9.
pub fn averaging_pairs(n: usize, seed: u64) -> Vec<(Quadratic, Quadratic)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let kappa = rng.gen_range(0.1..1.0);
            let mut q = || Quadratic {
                m: rng.gen_range(-1.0..1.0),
                c: Point::from_fn(2, |_, _| rng.gen_range(-0.3..0.3)),
                kappa,
            };
            let a = q();
            let b = q();
            (a, b)
        })
        .collect()
}

/// Closed-form best average minus the best value on a λ grid of `grid` + 1 points.
pub fn averaging_vs_grid(a: &Quadratic, b: &Quadratic, grid: usize) -> Result<f64> {
    let (q, _) = optimal_average(a, b)?;
    let best = (0..=grid)
        .map(|i| averaged_minimum(a, b, i as f64 / grid as f64))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(q.m - best)
}

fn task_oqa() -> Result<TaskOutput> {
    let mut out = TaskOutput::default();
    for c in QUAD_CONDITIONS {
        let cfg = quad_config(Algorithm::Oqa, c);
        let exp = harness::execute(&cfg)?;
        report_check(&mut out, 7, format!("oqa quad diag(1,{c}), gap envelope"), &exp);
        out.experiment(&format!("c7_oqa_quad_{c}"), &exp)?;

        let e = catalogue::quad(&[1.0, c])?;
        let run = crate::oqa::oqa_run(&e.oracle, &e.params, &e.default_x0, MAX_ITER, 0.0)?;
        let ms: Vec<f64> = run.states.iter().map(|s| s.q.m).collect();
        let drop = ms.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max);
        out.check(7, format!("m_k nondecreasing, quad diag(1,{c})"), drop <= 0.0, format!("largest decrease {drop:.3e}"));
        let f_star = e.oracle.known_minimum().unwrap_or(0.0);
        let over = ms.iter().map(|m| m - f_star).fold(f64::NEG_INFINITY, f64::max);
        out.check(
            7,
            format!("m_k ≤ f*, quad diag(1,{c})"),
            over <= 1e-9,
            format!("max m_k − f* {over:.3e}"),
        );
    }
    let mut worst: f64 = 0.0;
    let mut lowest: f64 = 0.0;
    for (a, b) in averaging_pairs(AVERAGE_PAIRS, 17) {
        let diff = averaging_vs_grid(&a, &b, AVERAGE_GRID)?;
        worst = worst.max(diff.abs());
        lowest = lowest.min(diff);
    }
    out.check(
        7,
        "optimal_average vs λ grid search",
        worst <= AVERAGE_TOL && lowest >= -1e-12,
        format!("max |closed form − grid best| {worst:.3e} over {AVERAGE_PAIRS} pairs"),
    );
    Ok(out)
}

fn grid_for(e: &CatalogueEntry) -> Vec<Point> {
    e.samples(CLASS_GRID)
}

fn violations_detail(r: &MembershipReport) -> String {
    format!("{} of {} points violate, worst slack {:.3e}", r.violations.len(), r.n_points, r.worst_slack)
}

fn task_inclusions() -> Result<TaskOutput> {
    let mut out = TaskOutput::default();
    let mut entries = Vec::new();
    for c in QUAD_CONDITIONS {
        entries.push((format!("quad diag(1,{c})"), catalogue::quad(&[1.0, c])?));
    }
    entries.push(("sinsq".to_string(), catalogue::sinsq(1)?));
    for (name, e) in &entries {
        let grid = grid_for(e);
        let x_star = e.x_star();
        let wq = e.wq_params();
        let mut worst_embed = 0usize;
        let mut detail = Vec::new();
        for factor in [0.1, 1.0, 10.0] {
            let a = factor * wq.mu;
            let r = classcheck::check_wq_to_w_embedding(&e.oracle, x_star, &wq, a, &grid, DEFAULT_TOL)?;
            worst_embed += r.violations.len();
            detail.push(format!("a = {a:.4}: {}", r.violations.len()));
        }
        out.check(8, format!("WQ ⊂ W embedding, {name}"), worst_embed == 0, detail.join(", "));

        let w = e.params;
        let r = classcheck::check_gradient_domination_consequence(&e.oracle, x_star, &w, &grid, DEFAULT_TOL)?;
        out.check(8, format!("gradient domination τ = μγ², {name}"), r.holds(), violations_detail(&r));

        let r = classcheck::check_quadratic_growth_consequence(&e.oracle, x_star, &w, &grid, DEFAULT_TOL)?;
        let weaker = classcheck::check_quadratic_growth_with(&e.oracle, x_star, &w, w.mu * w.gamma.powi(2), &grid, DEFAULT_TOL)?;
        out.check(
            8,
            format!("quadratic growth f − f* ≥ 2μγ²‖x − x*‖², {name}"),
            r.holds(),
            format!(
                "{}; with (μγ²/2)‖x − x*‖² instead: {} violations",
                violations_detail(&r),
                weaker.violations.len()
            ),
        );
    }
    Ok(out)
}

/// Max relative error between the analytic LQR gradient and central
/// differences of the cost, over `samples`.
pub fn lqr_gradient_error(problem: &LqrProblem, samples: &[lqr::Gain]) -> Result<f64> {
    let oracle = lqr::lqr_oracle(problem, false)?;
    let mut worst: f64 = 0.0;
    for k in samples {
        let x = lqr::flatten_gain(k);
        let g = oracle.grad(&x)?;
        let h = 1e-6 * (1.0 + x.amax());
        let fd = crate::objective::finite_difference_gradient(&oracle, &x, h)?;
        worst = worst.max((&g - &fd).norm() / g.norm().max(1e-6));
    }
    Ok(worst)
}

/// Lyapunov residual of X_K and Σ_K, scaled by 1 + ‖W‖_F, maximized over samples.
pub fn lqr_lyapunov_residual(problem: &LqrProblem, samples: &[lqr::Gain]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in samples {
        let d = lqr::lqr_derived(problem, k)?;
        let cl = problem.closed_loop(k)?;
        let w = &problem.q + k.transpose() * &problem.r * k;
        worst = worst.max(lqr::lyapunov_residual(&cl, &w, &d.x_k) / (1.0 + w.norm()));
        let s = &problem.sigma0;
        worst = worst.max(lqr::lyapunov_residual(&cl.transpose(), s, &d.sigma_k) / (1.0 + s.norm()));
    }
    Ok(worst)
}

/// The two fixed LQR problems with their K₀ and 50 stabilizing samples.
pub fn lqr_cases() -> Result<Vec<(String, LqrProblem, lqr::Gain, Vec<lqr::Gain>)>> {
    let scalar = LqrProblem::scalar_example();
    let grid: Vec<lqr::Gain> = (0..LQR_FD_SAMPLES)
        .map(|i| lqr::Gain::from_element(1, 1, -0.45 + 1.9 * i as f64 / (LQR_FD_SAMPLES - 1) as f64))
        .collect();
    let two = LqrProblem::two_state_example();
    let k0 = LqrProblem::two_state_k0();
    let samples = lqr::sample_sublevel_gains(&two, &k0, LQR_FD_SAMPLES, 7)?;
    Ok(vec![
        ("scalar".to_string(), scalar, lqr::Gain::zeros(1, 1), grid),
        ("two-state".to_string(), two, k0, samples),
    ])
}

fn task_lqr() -> Result<TaskOutput> {
    let mut out = TaskOutput::default();
    for (name, problem, k0, samples) in lqr_cases()? {
        let res = lqr_lyapunov_residual(&problem, &samples)?;
        out.check(9, format!("Lyapunov residuals, {name}"), res <= 1e-10, format!("max scaled residual {res:.3e}"));
        let err = lqr_gradient_error(&problem, &samples)?;
        out.check(
            9,
            format!("gradient vs central differences, {name}"),
            err <= LQR_FD_RTOL,
            format!("max relative error {err:.3e} at {} gains", samples.len()),
        );
        let k_star = lqr::riccati_solve(&problem)?;
        let d = lqr::lqr_derived(&problem, &k_star)?;
        let gnorm = d.grad.norm();
        out.check(
            9,
            format!("‖∇f(K*)‖_F, {name}"),
            gnorm <= 1e-8 * (1.0 + d.cost),
            format!("{gnorm:.3e} with f* = {:.12}", d.cost),
        );
        let mut all = samples.clone();
        all.push(k0.clone());
        let check = lqr::check_lqr_wqsc(&problem, &all)?;
        out.check(
            9,
            format!("WQSC at estimated constants, {name}"),
            check.report.holds(),
            format!(
                "γ̂ = {:.6}, μ̂ = {:.6}, {}; lemma as stated: {} violations (λ_min), {} (λ_max); sign-reversed form: {} violations",
                check.gamma_hat,
                check.mu_hat,
                violations_detail(&check.report),
                check.lemma.literal_lambda_min.violations,
                check.lemma.literal_lambda_max.violations,
                check.lemma.reversed_lambda_min.violations
            ),
        );
        out.files.push((
            format!("c9_lqr_{}_check.json", name.replace('-', "_")),
            serde_json::to_string_pretty(&check)? + "\n",
        ));
    }

    let problem = LqrProblem::scalar_example();
    let k0 = lqr::Gain::zeros(1, 1);
    let (params, _) = lqr::estimate_lqr_params(&problem, &k0, 100, 0)?;
    let oracle: Oracle = lqr::lqr_oracle(&problem, true)?;
    let mut cfg = AgdConfig::new(WesVariant::plain(), LQR_MAX_ITER);
    cfg.options.max_halvings = 60;
    let run = agd_run_recorded(&oracle, &params, &lqr::flatten_gain(&k0), &cfg)?;
    let f_star = oracle.known_minimum().unwrap_or(0.0);
    let hit = run.trajectory.records.iter().position(|r| r.f - f_star <= LQR_TARGET_GAP);
    out.check(
        9,
        "agd1 on safeguarded scalar LQR reaches gap 1e−6",
        hit.is_some(),
        format!("first k = {hit:?} of {LQR_MAX_ITER}, {} safeguard events", run.safeguard_events.len()),
    );
    Ok(out)
}
