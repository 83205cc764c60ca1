use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use wqc_optim::bench;
use wqc_optim::catalogue;
use wqc_optim::classcheck;
use wqc_optim::harness::{self, Algorithm, ExperimentConfig, X0Spec};
use wqc_optim::lqr;
use wqc_optim::sampling::{tensor_grid, uniform_grid};
use wqc_optim::Error;

#[derive(Parser)]
#[command(name = "wqc-optim", version, about = "Accelerated methods for weakly-quasi-convex objectives")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Estimate class constants of a catalogue objective on a box grid.
    Verify {
        #[arg(long)]
        objective: String,
        /// Box bounds applied to every coordinate.
        #[arg(long = "box", num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
        bounds: Vec<f64>,
        /// Grid points per axis.
        #[arg(long)]
        grid: usize,
        #[arg(long)]
        dimension: Option<usize>,
    },
    /// Check an LQR problem and optimize its gain.
    Lqr {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        algorithm: String,
        #[arg(long, default_value_t = 500)]
        max_iter: usize,
        #[arg(long, default_value_t = 1e-10)]
        gap_tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output_prefix: Option<String>,
    },
    /// Run a benchmark suite; exits 1 if any check fails.
    Bench {
        #[arg(long)]
        suite: String,
        /// Directory for per-experiment CSV/JSON and summary.json.
        #[arg(long, default_value = "bench_out")]
        out: PathBuf,
    },
}

enum Failure {
    Usage(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(_) | Error::Json(_) => Failure::Usage(e.to_string()),
            other => Failure::Check(other.to_string()),
        }
    }
}

fn print_json<T: Serialize>(out: &mut dyn Write, v: &T) -> Result<(), Failure> {
    let s = serde_json::to_string_pretty(v).map_err(|e| Failure::Check(e.to_string()))?;
    say(out, &s);
    Ok(())
}

/// Write a line, ignoring a closed stdout.
fn say(out: &mut dyn Write, line: &str) {
    let _ = writeln!(out, "{line}");
}

fn summarize(out: &mut dyn Write, exp: &harness::Experiment) {
    let r = &exp.report;
    let last = r.rows.last();
    say(out, &format!(
        "{} on {}: {} iterations, final {:?} = {:.6e}, envelope {}, max measured/envelope {:.6e}",
        r.algorithm.name(),
        r.objective,
        r.rows.len().saturating_sub(1),
        r.measured,
        last.map_or(f64::NAN, |row| row.measured),
        match r.first_violation {
            None => "dominated at every k".to_string(),
            Some(k) => format!("violated first at k = {k}"),
        },
        r.max_ratio
    ));
}

fn run(out: &mut dyn Write, config: PathBuf) -> Result<bool, Failure> {
    let cfg = ExperimentConfig::load(&config)?;
    let exp = harness::run_experiment(&cfg)?;
    summarize(out, &exp);
    Ok(exp.report.dominated())
}

fn verify(out: &mut dyn Write, objective: String, bounds: Vec<f64>, grid: usize, dimension: Option<usize>) -> Result<bool, Failure> {
    let (lo, hi) = (bounds[0], bounds[1]);
    if !(lo < hi) || grid < 2 {
        return Err(Failure::Usage("need lo < hi and --grid ≥ 2".into()));
    }
    let entry = match objective.as_str() {
        "quad" => catalogue::quad(&[1.0, 10.0])?,
        other => catalogue::make_nonconvex_test_objective(other, dimension.unwrap_or(1))?,
    };
    let dim = entry.dimension();
    if dimension.is_some_and(|d| d != dim) {
        return Err(Failure::Usage(format!("{objective} has dimension {dim} here")));
    }
    let samples = if dim == 1 {
        uniform_grid(lo, hi, grid)
    } else {
        tensor_grid(dim, lo, hi, grid)
    };
    let params = classcheck::estimate_params(&entry.oracle, entry.x_star(), &samples)?;
    print_json(out, &params)?;
    Ok(true)
}

#[derive(Serialize)]
struct LqrSummary {
    schema_version: u32,
    f_star: f64,
    k_star: Vec<Vec<f64>>,
    check: Option<lqr::LqrWqscCheck>,
    report_dominated: bool,
    iterations: usize,
    final_gap: f64,
}

fn lqr_cmd(
    out: &mut dyn Write,
    problem: PathBuf,
    algorithm: String,
    max_iter: usize,
    gap_tol: f64,
    seed: u64,
    output_prefix: Option<String>,
) -> Result<bool, Failure> {
    let algorithm = Algorithm::parse(&algorithm)?;
    let path = problem
        .to_str()
        .ok_or_else(|| Failure::Usage("problem path is not valid UTF-8".into()))?
        .to_string();
    let (prob, _) = lqr::load_problem(&problem).map_err(|e| match e {
        Error::Io(io) => Failure::Usage(format!("cannot read {path}: {io}")),
        other => other.into(),
    })?;
    let k_star = lqr::riccati_solve(&prob)?;
    let mut cfg = ExperimentConfig::new(path, algorithm);
    cfg.max_iter = max_iter;
    cfg.gap_tol = gap_tol;
    cfg.seed = seed;
    cfg.x0 = X0Spec::default();
    cfg.output_prefix = output_prefix;
    let exp = harness::run_experiment(&cfg)?;
    let wqsc_ok = exp.report.lqr.as_ref().is_none_or(|c| c.report.holds());
    let summary = LqrSummary {
        schema_version: harness::SCHEMA_VERSION,
        f_star: lqr::lqr_cost(&prob, &k_star)?,
        k_star: k_star.row_iter().map(|r| r.iter().copied().collect()).collect(),
        check: exp.report.lqr.clone(),
        report_dominated: exp.report.dominated(),
        iterations: exp.report.rows.len().saturating_sub(1),
        final_gap: exp.report.rows.last().map_or(f64::NAN, |r| r.measured),
    };
    print_json(out, &summary)?;
    Ok(exp.report.dominated() && wqsc_ok)
}

fn bench_cmd(out: &mut dyn Write, suite: String, dir: PathBuf) -> Result<bool, Failure> {
    let threads = bench::threads_from_env()?;
    let result = bench::run_suite(&suite, threads)?;
    for line in result.lines() {
        say(out, &line);
    }
    result.write(&dir)?;
    say(out, &format!("{} passed, {} failed", result.summary.passed, result.summary.failed));
    Ok(result.all_passed())
}

/// Run a parsed command and return the process exit code.
fn dispatch(cli: Cli, out: &mut dyn Write) -> u8 {
    let outcome = match cli.command {
        Command::Run { config } => run(out, config),
        Command::Verify {
            objective,
            bounds,
            grid,
            dimension,
        } => verify(out, objective, bounds, grid, dimension),
        Command::Lqr {
            problem,
            algorithm,
            max_iter,
            gap_tol,
            seed,
            output_prefix,
        } => lqr_cmd(out, problem, algorithm, max_iter, gap_tol, seed, output_prefix),
        Command::Bench { suite, out: dir } => bench_cmd(out, suite, dir),
    };
    match outcome {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("run `wqc-optim --help` for usage");
            2
        }
        Err(Failure::Check(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    ExitCode::from(dispatch(cli, &mut std::io::stdout().lock()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;
    use std::path::Path;

    fn workspace() -> PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
    }

    fn cli(args: &[&str]) -> (u8, String) {
        let argv = std::iter::once("wqc-optim").chain(args.iter().copied());
        match Cli::try_parse_from(argv) {
            Ok(parsed) => {
                let mut out = Vec::new();
                let code = dispatch(parsed, &mut out);
                (code, String::from_utf8(out).unwrap())
            }
            Err(e) => (e.exit_code() as u8, String::new()),
        }
    }

    /// Copy a shipped config with paths made absolute and outputs sent to `dir`.
    fn redirected_config(name: &str, dir: &Path) -> PathBuf {
        let text = std::fs::read_to_string(workspace().join("configs").join(name)).unwrap();
        let mut cfg: Value = serde_json::from_str(&text).unwrap();
        let objective = cfg["objective"].as_str().unwrap().to_string();
        if objective.ends_with(".json") {
            cfg["objective"] = Value::String(workspace().join(objective).to_str().unwrap().into());
        }
        cfg["output_prefix"] = Value::String(dir.join("run").to_str().unwrap().into());
        let path = dir.join(name);
        std::fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
        path
    }

    #[test]
    fn verify_quad_reports_unit_gamma() {
        let (code, out) = cli(&["verify", "--objective", "quad", "--box", "-1", "1", "--grid", "11"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["gamma"], 1.0);
        assert!((v["L"].as_f64().unwrap() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(cli(&["run", "--config", "no/such/config.json"]).0, 2);
        assert_eq!(cli(&["run", "--frobnicate"]).0, 2);
        assert_eq!(cli(&["verify", "--objective", "quad", "--box", "1", "-1", "--grid", "11"]).0, 2);
        assert_eq!(cli(&["bench", "--suite", "nope", "--out", "/nonexistent/x"]).0, 2);
        assert_eq!(cli(&["lqr", "--problem", "data/absent.json", "--algorithm", "agd1"]).0, 2);
    }

    #[test]
    fn unknown_config_key_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(&path, r#"{"objective": "quad", "algorithm": "agd1", "stepsize": 3}"#).unwrap();
        assert_eq!(cli(&["run", "--config", path.to_str().unwrap()]).0, 2);
    }

    #[test]
    fn shipped_configs_run_and_write_outputs() {
        for name in ["agd1_quad.json", "gd_sinsq_estimate.json", "agd1_lqr_two_state.json"] {
            let dir = tempfile::tempdir().unwrap();
            let cfg = redirected_config(name, dir.path());
            assert_eq!(cli(&["run", "--config", cfg.to_str().unwrap()]).0, 0, "{name}");
            let csv = std::fs::read_to_string(dir.path().join("run.csv")).unwrap();
            assert!(csv.starts_with("k,f,grad_norm,envelope,wall_nanos\n"));
            let report: Value =
                serde_json::from_str(&std::fs::read_to_string(dir.path().join("run.json")).unwrap()).unwrap();
            assert_eq!(report["first_violation"], Value::Null, "{name}");
        }
    }

    #[test]
    fn run_is_deterministic() {
        let once = || {
            let dir = tempfile::tempdir().unwrap();
            let cfg = redirected_config("agd1_quad.json", dir.path());
            let (code, out) = cli(&["run", "--config", cfg.to_str().unwrap()]);
            assert_eq!(code, 0);
            (
                out,
                std::fs::read(dir.path().join("run.csv")).unwrap(),
                std::fs::read(dir.path().join("run.json")).unwrap(),
            )
        };
        assert_eq!(once(), once());
    }

    #[test]
    fn lqr_subcommand_reaches_riccati_optimum() {
        let problem = workspace().join("data/lqr_scalar.json");
        let (code, out) = cli(&["lqr", "--problem", problem.to_str().unwrap(), "--algorithm", "agd1", "--max-iter", "100"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert!(v["final_gap"].as_f64().unwrap() <= 1e-6);
        assert_eq!(v["check"]["report"]["violations"].as_array().unwrap().len(), 0);
    }
}
