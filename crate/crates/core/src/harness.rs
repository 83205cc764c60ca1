//! Experiment configuration, envelope reports and file outputs.
//!
//! A run writes `<prefix>.csv` (header `k,f,grad_norm,envelope,wall_nanos`)
//! and `<prefix>.json` (an [`EnvelopeReport`]). Wall-clock time is written
//! as 0 unless `record_wall_time` is set, so repeated runs are byte-identical.

use std::fmt;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::catalogue::{self, CatalogueEntry};
use crate::classcheck;
use crate::error::{invalid, Error, Result};
use crate::gd::{gd_envelope, gd_run, GdConfig, StepRule};
use crate::lqr::{self, LqrWqscCheck};
use crate::objective::{Oracle, Point};
use crate::oqa::{oqa_envelope, oqa_run};
use crate::params::ClassParams;
use crate::trajectory::Trajectory;
use crate::wes::{agd_rate_envelope, agd_run_recorded, qg_rate_envelope, AgdConfig, WesVariant};

pub const SCHEMA_VERSION: u32 = 1;
pub const CSV_HEADER: &str = "k,f,grad_norm,envelope,wall_nanos";
/// Relative slack allowed when comparing a measurement with its envelope.
pub const ENVELOPE_RTOL: f64 = 1e-9;
/// Gap thresholds used by [`compare_algorithms`].
pub const COMPARE_THRESHOLDS: [f64; 3] = [1e-2, 1e-4, 1e-6];

const DEFAULT_SAMPLES: usize = 1000;
const DEFAULT_LQR_SAMPLES: usize = 100;
const LQR_MAX_HALVINGS: u32 = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Gd,
    Agd1,
    Agd2,
    Oqa,
}

impl Algorithm {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "gd" => Ok(Self::Gd),
            "agd1" => Ok(Self::Agd1),
            "agd2" => Ok(Self::Agd2),
            "oqa" => Ok(Self::Oqa),
            other => invalid(format!("unknown algorithm '{other}' (expected gd, agd1, agd2 or oqa)")),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Gd => "gd",
            Self::Agd1 => "agd1",
            Self::Agd2 => "agd2",
            Self::Oqa => "oqa",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimateKeyword {
    Estimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DefaultKeyword {
    Default,
}

/// Class constants: explicit, or `"estimate"` to run the sampled estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamsSpec {
    Estimate(EstimateKeyword),
    Given(ClassParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum X0Spec {
    Default(DefaultKeyword),
    Given(Vec<f64>),
}

impl Default for X0Spec {
    fn default() -> Self {
        X0Spec::Default(DefaultKeyword::Default)
    }
}

fn default_max_iter() -> usize {
    500
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Catalogue id (`quad`, `sinsq`, `flat_quartic`) or path to an LQR problem file.
    pub objective: String,
    pub algorithm: Algorithm,
    /// Absent: the catalogue's certified constants (estimated for LQR).
    #[serde(default)]
    pub params: Option<ParamsSpec>,
    #[serde(default)]
    pub x0: X0Spec,
    #[serde(default)]
    pub gamma0: Option<f64>,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub grad_tol: f64,
    /// Stop once the measured gap is at or below this (0 disables).
    #[serde(default)]
    pub gap_tol: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_prefix: Option<String>,
    /// Dimension for `sinsq` and `flat_quartic` (default 1).
    #[serde(default)]
    pub dimension: Option<usize>,
    /// Hessian diagonal for `quad` (default [1, 10]).
    #[serde(default)]
    pub diag: Option<Vec<f64>>,
    /// Ball radius for `flat_quartic` (default 1).
    #[serde(default)]
    pub radius: Option<f64>,
    /// Gradient-descent stepsize rule (default 1/L when μ = 0, γ/L otherwise).
    #[serde(default)]
    pub step_rule: Option<StepRule>,
    /// Sample count for estimated constants.
    #[serde(default)]
    pub samples: Option<usize>,
    /// Step-halving budget when an accelerated step leaves the domain
    /// (default 60 for LQR, 0 otherwise).
    #[serde(default)]
    pub max_halvings: Option<u32>,
    #[serde(default)]
    pub record_wall_time: bool,
}

impl ExperimentConfig {
    pub fn new(objective: impl Into<String>, algorithm: Algorithm) -> Self {
        Self {
            objective: objective.into(),
            algorithm,
            params: None,
            x0: X0Spec::default(),
            gamma0: None,
            max_iter: default_max_iter(),
            grad_tol: 0.0,
            gap_tol: 0.0,
            seed: 0,
            output_prefix: None,
            dimension: None,
            diag: None,
            radius: None,
            step_rule: None,
            samples: None,
            max_halvings: None,
            record_wall_time: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.objective.is_empty() {
            return invalid("objective is empty");
        }
        if !(self.grad_tol >= 0.0) || !(self.gap_tol >= 0.0) {
            return invalid("grad_tol and gap_tol must be nonnegative");
        }
        if let Some(g) = self.gamma0 {
            if !(g > 0.0 && g.is_finite()) {
                return invalid(format!("gamma0 must be positive, got {g}"));
            }
        }
        if let Some(ParamsSpec::Given(p)) = &self.params {
            p.validate()?;
        }
        if self.samples == Some(0) {
            return invalid("samples must be positive");
        }
        Ok(())
    }

    /// Everything that pins down the objective, for comparing configs.
    fn objective_key(&self) -> (String, Option<usize>, Option<Vec<u64>>, Option<u64>) {
        (
            self.objective.clone(),
            self.dimension,
            self.diag.as_ref().map(|d| d.iter().map(|v| v.to_bits()).collect()),
            self.radius.map(f64::to_bits),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamsSource {
    Given,
    Catalogue,
    Estimated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measured {
    /// f(x_k) − f*
    FGap,
    /// ‖x_k − x*‖²
    DistSq,
    /// f(x_k⁺) − m_k
    ModelGap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeRow {
    pub k: usize,
    pub measured: f64,
    pub envelope: f64,
    pub dominated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SafeguardEvent {
    pub k: usize,
    pub halvings: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub schema_version: u32,
    pub objective: String,
    pub algorithm: Algorithm,
    pub params: ClassParams,
    pub params_source: ParamsSource,
    pub gamma0: Option<f64>,
    pub measured: Measured,
    pub envelope_kind: String,
    pub rows: Vec<EnvelopeRow>,
    pub first_violation: Option<usize>,
    pub max_ratio: f64,
    pub safeguard_events: Vec<SafeguardEvent>,
    pub notes: Vec<String>,
    pub lqr: Option<LqrWqscCheck>,
}

impl EnvelopeReport {
    pub fn dominated(&self) -> bool {
        self.first_violation.is_none()
    }
}

/// Build rows from paired measurements and envelopes.
pub fn envelope_rows(measured: &[f64], envelope: &[f64]) -> Result<(Vec<EnvelopeRow>, Option<usize>, f64)> {
    if measured.len() != envelope.len() {
        return invalid("measured and envelope columns differ in length");
    }
    let mut rows = Vec::with_capacity(measured.len());
    let mut first = None;
    let mut max_ratio: f64 = 0.0;
    for (k, (&m, &e)) in measured.iter().zip(envelope).enumerate() {
        let dominated = m <= e * (1.0 + ENVELOPE_RTOL);
        if !dominated && first.is_none() {
            first = Some(k);
        }
        let ratio = if e > 0.0 {
            m / e
        } else if m > 0.0 {
            f64::MAX
        } else {
            0.0
        };
        max_ratio = max_ratio.max(ratio);
        rows.push(EnvelopeRow {
            k,
            measured: m,
            envelope: e,
            dominated,
        });
    }
    Ok((rows, first, max_ratio))
}

enum Target {
    Catalogue(CatalogueEntry),
    Lqr {
        problem: lqr::LqrProblem,
        k0: lqr::Gain,
    },
}

/// A config resolved to a concrete oracle, start point and constants.
pub struct Resolved {
    pub oracle: Oracle,
    pub x0: Point,
    pub params: ClassParams,
    pub params_source: ParamsSource,
    pub lqr: Option<LqrWqscCheck>,
    pub is_lqr: bool,
}

fn target(config: &ExperimentConfig) -> Result<Target> {
    let dim = config.dimension.unwrap_or(1);
    match config.objective.as_str() {
        "quad" => Ok(Target::Catalogue(catalogue::quad(config.diag.as_deref().unwrap_or(&[1.0, 10.0]))?)),
        "sinsq" => Ok(Target::Catalogue(catalogue::sinsq(dim)?)),
        "flat_quartic" => Ok(Target::Catalogue(catalogue::flat_quartic(dim, config.radius.unwrap_or(1.0))?)),
        path if path.ends_with(".json") || Path::new(path).exists() => {
            let (problem, k0) = lqr::load_problem(Path::new(path)).map_err(|e| match e {
                Error::Io(io) => Error::InvalidInput(format!("cannot read LQR problem {path}: {io}")),
                other => other,
            })?;
            Ok(Target::Lqr { problem, k0 })
        }
        other => invalid(format!(
            "unknown objective '{other}' (expected quad, sinsq, flat_quartic or an LQR problem .json)"
        )),
    }
}

/// Whether the algorithm's guarantee is stated for the WQ class (WQC plus
/// distance growth) rather than the WQSC class.
fn uses_growth_class(config: &ExperimentConfig) -> bool {
    config.algorithm == Algorithm::Agd2 || (config.algorithm == Algorithm::Gd && config.step_rule == Some(StepRule::GammaOver2L))
}

pub fn resolve(config: &ExperimentConfig) -> Result<Resolved> {
    config.validate()?;
    match target(config)? {
        Target::Catalogue(entry) => {
            let x0 = match &config.x0 {
                X0Spec::Default(_) => entry.default_x0.clone(),
                X0Spec::Given(v) => Point::from_column_slice(v),
            };
            if x0.len() != entry.dimension() {
                return invalid(format!("x0 has length {}, objective has dimension {}", x0.len(), entry.dimension()));
            }
            let growth = uses_growth_class(config);
            let (params, params_source) = match config.params {
                Some(ParamsSpec::Given(p)) => (p, ParamsSource::Given),
                None => (if growth { entry.wq_params() } else { entry.params }, ParamsSource::Catalogue),
                Some(ParamsSpec::Estimate(_)) => {
                    let samples = entry.samples(config.samples.unwrap_or(DEFAULT_SAMPLES));
                    let l = entry.params.lipschitz;
                    let mut p = classcheck::estimate_params_with_lipschitz(&entry.oracle, entry.x_star(), &samples, l)?;
                    if growth {
                        p.mu = classcheck::estimate_quadratic_growth(&entry.oracle, entry.x_star(), &samples)?.min(l);
                    }
                    (p, ParamsSource::Estimated)
                }
            };
            Ok(Resolved {
                oracle: entry.oracle.clone(),
                x0,
                params,
                params_source,
                lqr: None,
                is_lqr: false,
            })
        }
        Target::Lqr { problem, k0 } => {
            let k_start = match &config.x0 {
                X0Spec::Default(_) => k0.clone(),
                X0Spec::Given(v) => lqr::unflatten_gain(&Point::from_column_slice(v), problem.inputs(), problem.states())?,
            };
            let rho = lqr::spectral_radius(&problem.closed_loop(&k_start)?);
            if !(rho < 1.0 - lqr::STABILITY_MARGIN) {
                return invalid(format!("K0 is not stabilizing: spectral radius of A - B K0 is {rho}"));
            }
            let oracle = lqr::lqr_oracle(&problem, true)?;
            let (params, params_source, check) = match config.params {
                Some(ParamsSpec::Given(p)) => (p, ParamsSource::Given, None),
                _ => {
                    let n = config.samples.unwrap_or(DEFAULT_LQR_SAMPLES);
                    let (p, check) = lqr::estimate_lqr_params(&problem, &k_start, n, config.seed)?;
                    (p, ParamsSource::Estimated, Some(check))
                }
            };
            Ok(Resolved {
                oracle,
                x0: lqr::flatten_gain(&k_start),
                params,
                params_source,
                lqr: check,
                is_lqr: true,
            })
        }
    }
}

/// Output of one experiment.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub trajectory: Trajectory,
    pub report: EnvelopeReport,
}

fn check_compatible(config: &ExperimentConfig, params: &ClassParams) -> Result<()> {
    let needs_mu = match config.algorithm {
        Algorithm::Oqa | Algorithm::Agd2 => true,
        Algorithm::Gd => matches!(config.step_rule, Some(StepRule::GammaOverL | StepRule::GammaOver2L)),
        Algorithm::Agd1 => false,
    };
    if needs_mu && !(params.mu > 0.0) {
        return invalid(format!(
            "{} with these settings has a linear envelope and needs mu > 0, got mu = {}",
            config.algorithm.name(),
            params.mu
        ));
    }
    if let Some(StepRule::Fixed(_)) = config.step_rule {
        return invalid("fixed stepsizes have no envelope; use one_over_l, gamma_over_l or gamma_over2_l");
    }
    Ok(())
}

/// Resolve and run one experiment in memory.
pub fn execute(config: &ExperimentConfig) -> Result<Experiment> {
    let resolved = resolve(config)?;
    execute_resolved(config, resolved)
}

fn execute_resolved(config: &ExperimentConfig, resolved: Resolved) -> Result<Experiment> {
    let Resolved {
        oracle,
        x0,
        params,
        params_source,
        lqr: lqr_check,
        is_lqr,
    } = resolved;
    params.validate()?;
    check_compatible(config, &params)?;
    let (x_star, f_star) = match (oracle.known_minimizer(), oracle.known_minimum()) {
        (Some(x), Some(f)) => (x.clone(), f),
        _ => return invalid("objective has no known minimizer; envelopes need one"),
    };
    let stop_below = (config.gap_tol > 0.0).then_some(f_star + config.gap_tol);
    let r0sq = (&x0 - &x_star).norm_squared();
    let halvings = config.max_halvings.unwrap_or(if is_lqr { LQR_MAX_HALVINGS } else { 0 });
    let mut notes = Vec::new();
    if is_lqr {
        notes.push(format!(
            "LQR: accelerated gradient steps that leave the stabilizing set are halved up to {halvings} times"
        ));
    }

    let mut safeguard_events = Vec::new();
    let mut gamma0_used = None;
    let (mut trajectory, measured, envelope, kind, measured_kind) = match config.algorithm {
        Algorithm::Gd => {
            let rule = config
                .step_rule
                .unwrap_or(if params.mu > 0.0 { StepRule::GammaOverL } else { StepRule::OneOverL });
            let variant = rule
                .envelope_variant(&params)
                .ok_or_else(|| Error::InvalidInput(format!("step rule {rule:?} has no envelope for mu = {}", params.mu)))?;
            let mut cfg = GdConfig::new(rule, config.max_iter);
            cfg.grad_tol = config.grad_tol;
            cfg.stop_below = stop_below;
            let traj = gd_run(&oracle, &params, &x0, &cfg)?;
            let f0gap = (traj.records[0].f - f_star).max(0.0);
            let mut measured = Vec::with_capacity(traj.len());
            let mut envelope = Vec::with_capacity(traj.len());
            for r in &traj.records {
                let x = Point::from_column_slice(&r.x);
                measured.push(if variant.bounds_distance() { (&x - &x_star).norm_squared() } else { r.f - f_star });
                envelope.push(gd_envelope(&params, variant, r.k, r0sq, f0gap)?);
            }
            let m = if variant.bounds_distance() { Measured::DistSq } else { Measured::FGap };
            (traj, measured, envelope, format!("gd_{}", serde_plain(&variant)), m)
        }
        Algorithm::Agd1 | Algorithm::Agd2 => {
            let variant = if config.algorithm == Algorithm::Agd1 {
                WesVariant::plain()
            } else {
                WesVariant::quadratic_growth()
            };
            let mut cfg = AgdConfig::new(variant, config.max_iter);
            cfg.gamma0 = config.gamma0;
            cfg.grad_tol = config.grad_tol;
            cfg.stop_below = stop_below;
            cfg.options.max_halvings = halvings;
            let run = agd_run_recorded(&oracle, &params, &x0, &cfg)?;
            gamma0_used = Some(run.gamma0);
            safeguard_events = run
                .safeguard_events
                .iter()
                .map(|&(k, halvings)| SafeguardEvent { k, halvings })
                .collect();
            let measured: Vec<f64> = run.trajectory.records.iter().map(|r| r.f - f_star).collect();
            let (envelope, kind): (Vec<f64>, &str) = match (config.gamma0, config.algorithm) {
                (None, Algorithm::Agd1) => (
                    (0..measured.len()).map(|k| agd_rate_envelope(&params, k, r0sq)).collect(),
                    "agd_rate",
                ),
                (None, _) => (
                    (0..measured.len()).map(|k| qg_rate_envelope(&params, k, r0sq)).collect(),
                    "qg_rate",
                ),
                (Some(g0), _) => {
                    let scale = measured[0] + 0.5 * g0 * r0sq;
                    (run.states.iter().map(|s| s.lambda * scale).collect(), "lambda_scaled")
                }
            };
            (run.trajectory, measured, envelope, kind.to_string(), Measured::FGap)
        }
        Algorithm::Oqa => {
            let run = oqa_run(&oracle, &params, &x0, config.max_iter, config.gap_tol)?;
            let measured: Vec<f64> = run.states.iter().map(|s| s.gap()).collect();
            let gap0 = measured[0];
            let envelope = (0..measured.len()).map(|k| oqa_envelope(&params, k, gap0)).collect();
            (run.trajectory, measured, envelope, "oqa_rate".to_string(), Measured::ModelGap)
        }
    };
    for (r, e) in trajectory.records.iter_mut().zip(&envelope) {
        r.envelope = Some(*e);
    }
    if !config.record_wall_time {
        trajectory.strip_timing();
    }
    let (rows, first_violation, max_ratio) = envelope_rows(&measured, &envelope)?;
    let report = EnvelopeReport {
        schema_version: SCHEMA_VERSION,
        objective: config.objective.clone(),
        algorithm: config.algorithm,
        params,
        params_source,
        gamma0: gamma0_used,
        measured: measured_kind,
        envelope_kind: kind,
        rows,
        first_violation,
        max_ratio,
        safeguard_events,
        notes,
        lqr: lqr_check,
    };
    Ok(Experiment { trajectory, report })
}

fn serde_plain<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}

/// Trajectory as CSV text.
pub fn trajectory_csv(trajectory: &Trajectory) -> String {
    let mut out = String::with_capacity(64 * (trajectory.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in &trajectory.records {
        let env = r.envelope.map(|e| format!("{e:e}")).unwrap_or_default();
        let _ = writeln!(out, "{},{:e},{:e},{},{}", r.k, r.f, r.grad_norm, env, r.wall_nanos);
    }
    out
}

pub fn report_json(report: &EnvelopeReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

/// Paths written for `prefix`: (`<prefix>.csv`, `<prefix>.json`).
pub fn output_paths(prefix: &str) -> (PathBuf, PathBuf) {
    (PathBuf::from(format!("{prefix}.csv")), PathBuf::from(format!("{prefix}.json")))
}

pub fn write_outputs(prefix: &str, experiment: &Experiment) -> Result<()> {
    let (csv, json) = output_paths(prefix);
    if let Some(dir) = csv.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(csv, trajectory_csv(&experiment.trajectory))?;
    std::fs::write(json, report_json(&experiment.report)?)?;
    Ok(())
}

/// Run one experiment and write its outputs under `output_prefix`, if set.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Experiment> {
    let exp = execute(config)?;
    if let Some(prefix) = &config.output_prefix {
        write_outputs(prefix, &exp)?;
    }
    Ok(exp)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub algorithm: Algorithm,
    /// First k with f − f* ≤ threshold, per threshold.
    pub iterations: Vec<Option<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub schema_version: u32,
    pub objective: String,
    pub thresholds: Vec<f64>,
    pub rows: Vec<ComparisonRow>,
}

impl fmt::Display for ComparisonTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:<6}", "alg")?;
        for t in &self.thresholds {
            write!(f, " {:>8}", format!("{t:e}"))?;
        }
        writeln!(f)?;
        for row in &self.rows {
            write!(f, "{:<6}", row.algorithm.name())?;
            for it in &row.iterations {
                match it {
                    Some(k) => write!(f, " {k:>8}")?,
                    None => write!(f, " {:>8}", "-")?,
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Iterations each configured algorithm needs to reach f-gaps 1e−2, 1e−4, 1e−6.
pub fn compare_algorithms(configs: &[ExperimentConfig]) -> Result<ComparisonTable> {
    let Some(first) = configs.first() else {
        return invalid("no configurations to compare");
    };
    let key = first.objective_key();
    let mut x0_ref: Option<Point> = None;
    let mut rows = Vec::with_capacity(configs.len());
    for cfg in configs {
        if cfg.objective_key() != key {
            return invalid(format!(
                "configs target different objectives ('{}' vs '{}')",
                first.objective, cfg.objective
            ));
        }
        let resolved = resolve(cfg)?;
        match &x0_ref {
            None => x0_ref = Some(resolved.x0.clone()),
            Some(x) if *x != resolved.x0 => return invalid("configs use different starting points"),
            _ => {}
        }
        let f_star = resolved.oracle.known_minimum().unwrap_or(0.0);
        let exp = execute_resolved(cfg, resolved)?;
        let iterations = COMPARE_THRESHOLDS
            .iter()
            .map(|&eps| exp.trajectory.records.iter().position(|r| r.f - f_star <= eps))
            .collect();
        rows.push(ComparisonRow {
            algorithm: cfg.algorithm,
            iterations,
        });
    }
    Ok(ComparisonTable {
        schema_version: SCHEMA_VERSION,
        objective: first.objective.clone(),
        thresholds: COMPARE_THRESHOLDS.to_vec(),
        rows,
    })
}
