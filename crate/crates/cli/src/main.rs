//! `budgetopt`: generate instances, solve them, run sweeps and lemma checks.
//!
//! Exit codes: 0 success, 2 invalid input, 3 capacity or resource limit,
//! 4 instance kind does not fit the problem, 10 no feasible solution found,
//! 11 a lemma check was flagged.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use budgetopt_core::exact::{exact_matching, exact_tsp, pareto_shortest_path, ExactLimits};
use budgetopt_core::experiments::{
    capexp_check, lemma_suite, points_table, run_sweep_with, solve, summary_json, trials_csv, LemmaSuiteConfig, Problem,
    RunOptions, SolverSettings, SweepConfig,
};
use budgetopt_core::heuristic::{CmwpConfig, DEFAULT_SEARCH_BUDGET};
use budgetopt_core::instance::io::{load, write_binary, write_json};
use budgetopt_core::{generate, json, BudgetVector, DistributionParams, Error, GenerateOptions, GraphKind};
use clap::{Parser, Subcommand, ValueEnum};
use output::Manifest;
use serde_json::{json, Value};

const EXIT_INPUT: u8 = 2;
const EXIT_RESOURCE: u8 = 3;
const EXIT_KIND: u8 = 4;
const EXIT_INFEASIBLE: u8 = 10;
const EXIT_FLAGGED: u8 = 11;

#[derive(Parser, Debug)]
#[command(name = "budgetopt", version, about = "Budget-constrained random optimization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    Complete,
    Bipartite,
    Digraph,
}

impl From<KindArg> for GraphKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Complete => GraphKind::Complete,
            KindArg::Bipartite => GraphKind::Bipartite,
            KindArg::Digraph => GraphKind::Digraph,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ProblemArg {
    Cmwp,
    Cap,
    Cmp,
    Cstsp,
    Catsp,
}

impl From<ProblemArg> for Problem {
    fn from(p: ProblemArg) -> Self {
        match p {
            ProblemArg::Cmwp => Problem::Cmwp,
            ProblemArg::Cap => Problem::Cap,
            ProblemArg::Cmp => Problem::Cmp,
            ProblemArg::Cstsp => Problem::Cstsp,
            ProblemArg::Catsp => Problem::Catsp,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a random instance
    Gen {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// packed little-endian format instead of JSON
        #[arg(long)]
        binary: bool,
        #[arg(long)]
        gamma: Option<f64>,
        /// omit the per-edge split values (the path solvers do not need them)
        #[arg(long)]
        no_splits: bool,
    },
    /// Solve an instance with a heuristic or, with --exact, an exact oracle
    Solve {
        #[arg(long, value_enum)]
        problem: ProblemArg,
        #[arg(long = "in")]
        input: PathBuf,
        /// budget components C_1,...,C_r; a single value applies to every component
        #[arg(long, value_delimiter = ',', required_unless_present = "budget_product", conflicts_with = "budget_product")]
        budget: Vec<f64>,
        /// budget product; each component gets its r-th root
        #[arg(long)]
        budget_product: Option<f64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        exact: bool,
        /// double L up to three times when the path heuristic fails
        #[arg(long)]
        relax: bool,
        #[arg(long, default_value_t = DEFAULT_SEARCH_BUDGET)]
        search_budget: u64,
        #[arg(long = "L")]
        l: Option<f64>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        source: Option<usize>,
        #[arg(long)]
        target: Option<usize>,
    },
    /// Run a parameter sweep from a TOML or JSON config
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// worker threads; falls back to BUDGETOPT_JOBS, then to all cores
        #[arg(long, env = "BUDGETOPT_JOBS")]
        jobs: Option<usize>,
        /// fill the elapsed_ms column (makes the CSV run-dependent)
        #[arg(long)]
        timings: bool,
        /// also write points.dat with whitespace-separated per-point columns
        #[arg(long)]
        gnuplot_style: bool,
    },
    /// Monte-Carlo checks of the order-statistic, split and CDF-bound formulas
    Lemmas {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 500)]
        capexp_n: usize,
        #[arg(long, default_value_t = 10)]
        capexp_trials: usize,
        #[arg(long, default_value_t = 0.5)]
        capexp_alpha: f64,
    },
}

/// An error with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Capacity { .. } | Error::Resource(_) => EXIT_RESOURCE,
            Error::KindMismatch(_) => EXIT_KIND,
            _ => EXIT_INPUT,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: EXIT_INPUT, message: format!("io error: {e}") }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cmd: Command) -> Result<u8, Failure> {
    match cmd {
        Command::Gen { kind, n, alpha, beta, r, seed, out, binary, gamma, no_splits } => {
            let mut params = DistributionParams::new(alpha, beta, r)?;
            if let Some(g) = gamma {
                params = params.with_gamma(g)?;
            }
            let opts = if no_splits { GenerateOptions::without_splits() } else { GenerateOptions::default() };
            let inst = generate(kind.into(), n, params, seed, opts)?;
            let mut bytes = Vec::new();
            if binary {
                write_binary(&inst, &mut bytes)?;
            } else {
                write_json(&inst, &mut bytes)?;
            }
            let config = json!({
                "kind": GraphKind::from(kind).name(), "n": n, "alpha": alpha, "beta": beta, "r": r,
                "seed": seed, "binary": binary, "gamma": gamma, "no_splits": no_splits,
                "out": out.display().to_string(),
            });
            let mut manifest = Manifest::new("gen", config, Some(seed));
            manifest.write(&out, &bytes)?;
            manifest.finish(&Manifest::path_for(&out))?;
            Ok(0)
        }
        Command::Solve { problem, input, budget, budget_product, out, exact, relax, search_budget, l, m, source, target } => {
            let inst = load(&input)?;
            let r = inst.r();
            let budgets = match budget_product {
                Some(delta) => BudgetVector::from_product(delta, r)?,
                None if budget.len() == 1 => BudgetVector::new(vec![budget[0]; r])?,
                None => BudgetVector::new(budget.clone())?,
            };
            if budgets.len() != r {
                return Err(Error::Dimension { expected: r, got: budgets.len() }.into());
            }
            let problem = Problem::from(problem);
            let n = inst.n();
            let (s, t) = (source.unwrap_or(0), target.unwrap_or(n - 1));
            let expected = match problem {
                Problem::Cap => GraphKind::Bipartite,
                Problem::Catsp => GraphKind::Digraph,
                _ => GraphKind::Complete,
            };
            if inst.kind() != expected {
                return Err(Error::KindMismatch(format!(
                    "{} needs a {} instance, got {}",
                    problem.name(),
                    expected.name(),
                    inst.kind().name()
                ))
                .into());
            }
            let mut doc = if exact {
                let limits = ExactLimits::default();
                let (optimum, sol) = match problem {
                    Problem::Cmwp => pareto_shortest_path(&inst, &budgets, s, t, &limits)?,
                    Problem::Cap | Problem::Cmp => exact_matching(&inst, &budgets, &limits)?,
                    _ => exact_tsp(&inst, &budgets, &limits)?,
                };
                let mut doc = sol.to_json(&inst);
                doc["optimum"] = optimum.value().map_or(Value::Null, Value::from);
                doc
            } else {
                let solver = SolverSettings {
                    cmwp: CmwpConfig { l, m, relax, source, target, ..CmwpConfig::default() },
                    l_per_ln_n: None,
                    search_budget,
                };
                solve(problem, &inst, &budgets, &solver)?.to_json(&inst)
            };
            doc["problem"] = Value::from(problem.name());
            let feasible = doc["feasible"].as_bool().unwrap_or(false);
            let config = json!({
                "problem": problem.name(), "in": input.display().to_string(), "budget": budgets.components(),
                "exact": exact, "relax": relax, "search_budget": search_budget, "L": l, "m": m,
                "source": s, "target": t, "out": out.display().to_string(),
            });
            let mut manifest = Manifest::new("solve", config, Some(inst.seed()));
            manifest.write(&out, json::to_string(&doc).as_bytes())?;
            manifest.finish(&Manifest::path_for(&out))?;
            Ok(if feasible { 0 } else { EXIT_INFEASIBLE })
        }
        Command::Sweep { config, out_dir, jobs, timings, gnuplot_style } => {
            let cfg = SweepConfig::load(&config)?;
            std::fs::create_dir_all(&out_dir)?;
            let run = run_sweep_with(&cfg, RunOptions { jobs: jobs.unwrap_or(0), timings })?;
            let echo = serde_json::to_value(&cfg).expect("config serializes");
            let mut manifest = Manifest::new("sweep", json!({ "sweep": echo, "timings": timings }), Some(cfg.base_seed));
            manifest.write(&out_dir.join("trials.csv"), trials_csv(&cfg, &run.trials).as_bytes())?;
            manifest.write(&out_dir.join("summary.json"), json::to_string(&summary_json(&cfg, &run.result)).as_bytes())?;
            if gnuplot_style {
                manifest.write(&out_dir.join("points.dat"), points_table(&run.result).as_bytes())?;
            }
            manifest.finish(&out_dir.join("manifest.json"))?;
            println!(
                "fitted slope {:.4} (stderr {:.4}), predicted {}",
                run.result.fitted_slope,
                run.result.slope_stderr,
                run.result.predicted_slope.map_or("n/a".to_string(), |p| format!("{p:.4}"))
            );
            Ok(0)
        }
        Command::Lemmas { seed, samples, out, capexp_n, capexp_trials, capexp_alpha } => {
            let suite = LemmaSuiteConfig { seed, samples, ..LemmaSuiteConfig::default() };
            let report = lemma_suite(&suite)?;
            let ds: Vec<f64> = [0.05, 0.1, 0.2, 0.4].iter().map(|f| f * capexp_n as f64).collect();
            let capexp = capexp_check(capexp_n, &ds, capexp_alpha, seed, capexp_trials)?;
            let doc = json!({
                "lemmas": serde_json::to_value(&report).expect("report serializes"),
                "capexp": serde_json::to_value(&capexp).expect("report serializes"),
            });
            let config = json!({
                "seed": seed, "samples": samples, "capexp_n": capexp_n, "capexp_trials": capexp_trials,
                "capexp_alpha": capexp_alpha, "out": out.display().to_string(),
            });
            let mut manifest = Manifest::new("lemmas", config, Some(seed));
            manifest.write(&out, json::to_string(&doc).as_bytes())?;
            manifest.finish(&Manifest::path_for(&out))?;
            if report.flags > 0 {
                eprintln!("{} lemma checks flagged", report.flags);
                return Ok(EXIT_FLAGGED);
            }
            Ok(0)
        }
    }
}

