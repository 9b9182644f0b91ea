//! Parameter sweeps: instances per (point, trial), heuristic solves, per-point
//! medians and a least-squares log-log slope.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::distributions::DistributionParams;
use crate::error::{Error, Result};
use crate::heuristic::{cap_solve, catsp_solve, cmp_solve, cmwp_solve, cstsp_solve, CmwpConfig, DEFAULT_SEARCH_BUDGET};
use crate::instance::rng::derive_seed;
use crate::instance::{generate, BudgetVector, GenerateOptions, GraphKind};
use crate::json::fmt_f64;
use crate::numeric::{median, quantile};
use crate::solution::Solution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    Cmwp,
    Cap,
    Cmp,
    Cstsp,
    Catsp,
    /// Deterministic power law `exp(intercept) x^slope`; exercises the fitter.
    Synthetic,
}

impl Problem {
    pub fn name(self) -> &'static str {
        match self {
            Problem::Cmwp => "cmwp",
            Problem::Cap => "cap",
            Problem::Cmp => "cmp",
            Problem::Cstsp => "cstsp",
            Problem::Catsp => "catsp",
            Problem::Synthetic => "synthetic",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        [Problem::Cmwp, Problem::Cap, Problem::Cmp, Problem::Cstsp, Problem::Catsp, Problem::Synthetic]
            .into_iter()
            .find(|p| p.name() == name)
    }

    pub fn graph_kind(self) -> Option<GraphKind> {
        match self {
            Problem::Cmwp | Problem::Cmp | Problem::Cstsp => Some(GraphKind::Complete),
            Problem::Cap => Some(GraphKind::Bipartite),
            Problem::Catsp => Some(GraphKind::Digraph),
            Problem::Synthetic => None,
        }
    }

    fn needs_splits(self) -> bool {
        !matches!(self, Problem::Cmwp | Problem::Synthetic)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    N,
    Delta,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::N => "n",
            Axis::Delta => "delta",
        }
    }
}

/// Exponent of the swept axis in the predicted rate. `None` for the
/// synthetic problem, which has no prediction.
pub fn theorem_prediction(problem: Problem, params: &DistributionParams, axis: Axis) -> Option<f64> {
    let (a, b, r) = (params.alpha, params.beta, params.r as f64);
    match (problem, axis) {
        (Problem::Synthetic, _) => None,
        (_, Axis::Delta) => Some(-a / b),
        (Problem::Cmwp, Axis::N) => Some(-a),
        (_, Axis::N) => Some(1.0 + r * a / b - a),
    }
}

/// Predicted rate with constant 1 at size `n` and budget product `delta`:
/// `ln^(r a/b + 1) n / (n^a delta^(a/b))` for paths and
/// `n^(1 + r a/b - a) / delta^(a/b)` for the other problems.
pub fn theta_expression(problem: Problem, params: &DistributionParams, n: f64, ln_delta: f64) -> Option<f64> {
    let (a, b, r) = (params.alpha, params.beta, params.r as f64);
    let ln_n = n.ln();
    let ln_theta = match problem {
        Problem::Synthetic => return None,
        Problem::Cmwp => (r * a / b + 1.0) * ln_n.ln() - a * ln_n - a / b * ln_delta,
        _ => (1.0 + r * a / b - a) * ln_n - a / b * ln_delta,
    };
    Some(ln_theta.exp())
}

/// How each budget component depends on `n` when sweeping the size axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "lowercase", deny_unknown_fields)]
pub enum BudgetRule {
    /// `C_i = kappa ln n`
    Path {
        #[serde(default = "one")]
        kappa: f64,
    },
    /// `C_i = kappa n`
    Dense {
        #[serde(default = "one")]
        kappa: f64,
    },
    /// `C_i = kappa n^exponent`
    Power {
        #[serde(default = "one")]
        kappa: f64,
        exponent: f64,
    },
    /// `C_i = kappa`
    Constant { kappa: f64 },
}

fn one() -> f64 {
    1.0
}

impl BudgetRule {
    pub fn component(&self, n: f64) -> f64 {
        match *self {
            BudgetRule::Path { kappa } => kappa * n.ln(),
            BudgetRule::Dense { kappa } => kappa * n,
            BudgetRule::Power { kappa, exponent } => kappa * n.powf(exponent),
            BudgetRule::Constant { kappa } => kappa,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    pub cmwp: CmwpConfig,
    /// When set, the path solver uses `L = l_per_ln_n * ln n` at every point.
    pub l_per_ln_n: Option<f64>,
    pub search_budget: u64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { cmwp: CmwpConfig::default(), l_per_ln_n: None, search_budget: DEFAULT_SEARCH_BUDGET }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticLaw {
    pub intercept: f64,
    pub slope: f64,
}

fn default_work_limit() -> f64 {
    2e10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub problem: Problem,
    pub params: DistributionParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget_rule: Option<BudgetRule>,
    pub sweep_axis: Axis,
    pub axis_values: Vec<f64>,
    /// Instance size for delta sweeps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_n: Option<usize>,
    pub trials_per_point: usize,
    pub base_seed: u64,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<SyntheticLaw>,
    /// Upper limit on the total number of generated edges.
    #[serde(default = "default_work_limit")]
    pub work_limit: f64,
}

impl SweepConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Format(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Format(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads TOML, or JSON when the file name ends in `.json`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_json_str(&text)
        } else {
            Self::from_toml_str(&text)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Parameter(msg));
        self.params.validate()?;
        if self.axis_values.len() < 3 {
            return bad(format!("axis_values needs at least 3 entries, got {}", self.axis_values.len()));
        }
        if self.axis_values.windows(2).any(|w| !(w[0] < w[1])) || self.axis_values.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return bad("axis_values must be positive and strictly increasing".into());
        }
        if self.trials_per_point == 0 {
            return bad("trials_per_point must be at least 1".into());
        }
        if self.problem == Problem::Synthetic {
            if self.synthetic.is_none() {
                return bad("problem 'synthetic' needs a [synthetic] table with intercept and slope".into());
            }
            return Ok(());
        }
        match self.sweep_axis {
            Axis::N => {
                if self.budget_rule.is_none() {
                    return bad("an n sweep needs a budget_rule".into());
                }
                if self.fixed_n.is_some() {
                    return bad("fixed_n only applies to delta sweeps".into());
                }
                for &x in &self.axis_values {
                    if x.fract() != 0.0 || x < 2.0 {
                        return bad(format!("n values must be integers >= 2, got {x}"));
                    }
                }
            }
            Axis::Delta => {
                if self.fixed_n.is_none_or(|n| n < 2) {
                    return bad("a delta sweep needs fixed_n >= 2".into());
                }
                if self.budget_rule.is_some() {
                    return bad("budget_rule only applies to n sweeps; delta sweeps spread each axis value equally over the r components".into());
                }
            }
        }
        for i in 0..self.axis_values.len() {
            let n = self.point_n(i);
            if self.problem == Problem::Cmp && n % 2 == 1 {
                return bad(format!("cmp needs even n, got {n}"));
            }
            if self.problem == Problem::Cstsp && n < 3 {
                return bad("cstsp needs n >= 3".into());
            }
            let b = self.point_budgets(i)?;
            if b.components().iter().any(|c| !(*c > 0.0 && c.is_finite())) {
                return bad(format!("budget rule gives a non-positive budget at n = {n}"));
            }
        }
        let work = self.estimated_edges();
        if work > self.work_limit {
            return bad(format!("sweep would generate {work:.3e} edges, above work_limit {:.3e}", self.work_limit));
        }
        Ok(())
    }

    pub fn point_n(&self, point: usize) -> usize {
        match self.sweep_axis {
            Axis::N => self.axis_values[point] as usize,
            Axis::Delta => self.fixed_n.unwrap_or(2),
        }
    }

    pub fn point_budgets(&self, point: usize) -> Result<BudgetVector> {
        let r = self.params.r;
        match (self.sweep_axis, &self.budget_rule) {
            (Axis::Delta, _) => BudgetVector::from_product(self.axis_values[point], r),
            (Axis::N, Some(rule)) => BudgetVector::new(vec![rule.component(self.point_n(point) as f64); r]),
            (Axis::N, None) => Err(Error::Parameter("an n sweep needs a budget_rule".into())),
        }
    }

    pub fn estimated_edges(&self) -> f64 {
        let Some(kind) = self.problem.graph_kind() else { return 0.0 };
        (0..self.axis_values.len())
            .map(|i| kind.edge_count(self.point_n(i)) as f64 * self.trials_per_point as f64)
            .sum()
    }

    pub fn trial_seed(&self, point: usize, trial: usize) -> u64 {
        derive_seed(self.base_seed, &[point as u64, trial as u64])
    }
}

/// Execution settings that never change results, except `timings`, which
/// fills the elapsed column with wall-clock readings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    /// Worker threads; 0 uses the global pool.
    pub jobs: usize,
    pub timings: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub point: usize,
    pub trial: usize,
    pub seed: u64,
    pub weight: f64,
    pub feasible: bool,
    pub costs: Vec<f64>,
    pub method: String,
    pub elapsed_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub axis_value: f64,
    pub n: usize,
    pub delta: f64,
    /// Median weight over feasible trials; NaN when none was feasible.
    pub median_weight: f64,
    pub iqr: f64,
    pub feasible_fraction: f64,
    pub theta: Option<f64>,
    pub included_in_fit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    pub fitted_slope: f64,
    pub slope_stderr: f64,
    pub intercept: f64,
    pub predicted_slope: Option<f64>,
    /// Slope of the predicted rate itself over the fitted points, which folds
    /// in how the budget rule moves the budget product with `n`.
    pub rule_adjusted_slope: Option<f64>,
    /// Coefficient of `ln ln n` removed before fitting (path problem on the n axis).
    pub loglog_offset: f64,
}

/// Least-squares line through `(x, y)` pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() {
        return Err(Error::Dimension { expected: x.len(), got: y.len() });
    }
    let k = x.len();
    if k < 2 {
        return Err(Error::State(format!("a line fit needs at least 2 points, got {k}")));
    }
    let kf = k as f64;
    let mx = x.iter().sum::<f64>() / kf;
    let my = y.iter().sum::<f64>() / kf;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::State("a line fit needs at least two distinct x values".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_stderr = if k > 2 {
        let ssr: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
        (ssr / (kf - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    Ok(LineFit { slope, intercept, slope_stderr })
}

/// Results of a sweep together with the per-trial records.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRun {
    pub result: SweepResult,
    pub trials: Vec<TrialRecord>,
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    Ok(run_sweep_with(cfg, RunOptions::default())?.result)
}

pub fn run_sweep_with(cfg: &SweepConfig, opts: RunOptions) -> Result<SweepRun> {
    cfg.validate()?;
    let tasks: Vec<(usize, usize)> = (0..cfg.axis_values.len())
        .flat_map(|p| (0..cfg.trials_per_point).map(move |t| (p, t)))
        .collect();
    let work = || tasks.par_iter().map(|&(p, t)| run_trial(cfg, p, t, opts.timings)).collect::<Result<Vec<_>>>();
    let trials = if opts.jobs == 0 {
        work()?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            .build()
            .map_err(|e| Error::Resource(format!("thread pool: {e}")))?
            .install(work)?
    };
    let result = summarize(cfg, &trials)?;
    Ok(SweepRun { result, trials })
}

fn run_trial(cfg: &SweepConfig, point: usize, trial: usize, timings: bool) -> Result<TrialRecord> {
    let seed = cfg.trial_seed(point, trial);
    let x = cfg.axis_values[point];
    let r = cfg.params.r;
    if cfg.problem == Problem::Synthetic {
        let law = cfg.synthetic.as_ref().expect("validated");
        return Ok(TrialRecord {
            point,
            trial,
            seed,
            weight: (law.intercept + law.slope * x.ln()).exp(),
            feasible: true,
            costs: vec![0.0; r],
            method: "synthetic".into(),
            elapsed_ms: timings.then_some(0.0),
        });
    }
    let n = cfg.point_n(point);
    let budgets = cfg.point_budgets(point)?;
    let kind = cfg.problem.graph_kind().expect("solver problem");
    let opts = if cfg.problem.needs_splits() { GenerateOptions::default() } else { GenerateOptions::without_splits() };
    let inst = generate(kind, n, cfg.params, seed, opts)?;
    let start = Instant::now();
    let sol = solve(cfg.problem, &inst, &budgets, &cfg.solver)?;
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    Ok(TrialRecord {
        point,
        trial,
        seed,
        weight: sol.total_weight,
        feasible: sol.feasible,
        costs: sol.total_costs,
        method: sol.method,
        elapsed_ms: timings.then_some(elapsed),
    })
}

/// Runs the heuristic for `problem` with the sweep's solver settings.
pub fn solve(
    problem: Problem,
    inst: &crate::instance::Instance,
    budgets: &BudgetVector,
    solver: &SolverSettings,
) -> Result<Solution> {
    match problem {
        Problem::Cmwp => {
            let mut cfg = solver.cmwp.clone();
            if let Some(f) = solver.l_per_ln_n {
                cfg.l = Some(f * (inst.n() as f64).ln());
            }
            cmwp_solve(inst, budgets, &cfg)
        }
        Problem::Cap => cap_solve(inst, budgets),
        Problem::Cmp => cmp_solve(inst, budgets),
        Problem::Cstsp => cstsp_solve(inst, budgets, solver.search_budget),
        Problem::Catsp => catsp_solve(inst, budgets, solver.search_budget),
        Problem::Synthetic => Err(Error::Argument("the synthetic problem has no solver".into())),
    }
}

fn summarize(cfg: &SweepConfig, trials: &[TrialRecord]) -> Result<SweepResult> {
    let mut points = Vec::with_capacity(cfg.axis_values.len());
    for (i, &x) in cfg.axis_values.iter().enumerate() {
        let n = cfg.point_n(i);
        let delta = if cfg.problem == Problem::Synthetic { f64::NAN } else { cfg.point_budgets(i)?.delta() };
        let weights: Vec<f64> = trials.iter().filter(|t| t.point == i && t.feasible).map(|t| t.weight).collect();
        let feasible_fraction = weights.len() as f64 / cfg.trials_per_point as f64;
        let (median_weight, iqr) = match median(&weights) {
            Some(m) => (m, quantile(&weights, 0.75).unwrap() - quantile(&weights, 0.25).unwrap()),
            None => {
                log::warn!("all {} trials infeasible at {} = {x}; point excluded from the fit", cfg.trials_per_point, cfg.sweep_axis.name());
                (f64::NAN, f64::NAN)
            }
        };
        let ln_delta = if cfg.problem == Problem::Synthetic { f64::NAN } else { cfg.point_budgets(i)?.ln_delta() };
        points.push(SweepPoint {
            axis_value: x,
            n,
            delta,
            median_weight,
            iqr,
            feasible_fraction,
            theta: theta_expression(cfg.problem, &cfg.params, n as f64, ln_delta),
            included_in_fit: !weights.is_empty(),
        });
    }
    let used: Vec<&SweepPoint> = points.iter().filter(|p| p.included_in_fit).collect();
    let loglog_offset = if cfg.problem == Problem::Cmwp && cfg.sweep_axis == Axis::N {
        cfg.params.r as f64 * cfg.params.alpha / cfg.params.beta + 1.0
    } else {
        0.0
    };
    let xs: Vec<f64> = used.iter().map(|p| p.axis_value.ln()).collect();
    let corr = |p: &SweepPoint| if loglog_offset == 0.0 { 0.0 } else { loglog_offset * (p.n as f64).ln().ln() };
    let ys: Vec<f64> = used.iter().map(|p| p.median_weight.ln() - corr(p)).collect();
    let fit = if used.len() >= 2 {
        fit_line(&xs, &ys)?
    } else {
        log::warn!("only {} feasible points; no slope fitted", used.len());
        LineFit { slope: f64::NAN, intercept: f64::NAN, slope_stderr: f64::NAN }
    };
    let rule_adjusted_slope = if used.len() >= 2 && cfg.problem != Problem::Synthetic {
        let ts: Vec<f64> = used.iter().map(|p| p.theta.unwrap().ln() - corr(p)).collect();
        Some(fit_line(&xs, &ts)?.slope)
    } else {
        None
    };
    Ok(SweepResult {
        points,
        fitted_slope: fit.slope,
        slope_stderr: fit.slope_stderr,
        intercept: fit.intercept,
        predicted_slope: theorem_prediction(cfg.problem, &cfg.params, cfg.sweep_axis),
        rule_adjusted_slope,
        loglog_offset,
    })
}

fn csv_float(x: f64) -> String {
    if x.is_finite() {
        fmt_f64(x)
    } else {
        String::new()
    }
}

/// Per-trial CSV in (point, trial) order.
pub fn trials_csv(cfg: &SweepConfig, trials: &[TrialRecord]) -> String {
    let r = cfg.params.r;
    let mut out = String::from("problem,axis,axis_value,trial,seed,weight,feasible");
    for i in 1..=r {
        out.push_str(&format!(",cost_{i}"));
    }
    out.push_str(",method,elapsed_ms\n");
    for t in trials {
        let x = cfg.axis_values[t.point];
        let axis_value = if cfg.sweep_axis == Axis::N { format!("{}", x as u64) } else { fmt_f64(x) };
        out.push_str(&format!(
            "{},{},{},{},{},{},{}",
            cfg.problem.name(),
            cfg.sweep_axis.name(),
            axis_value,
            t.trial,
            t.seed,
            csv_float(t.weight),
            t.feasible
        ));
        for c in &t.costs {
            out.push(',');
            out.push_str(&csv_float(*c));
        }
        out.push(',');
        out.push_str(&t.method);
        out.push(',');
        if let Some(ms) = t.elapsed_ms {
            out.push_str(&format!("{ms:.3}"));
        }
        out.push('\n');
    }
    out
}

fn num(x: f64) -> Value {
    if x.is_finite() {
        serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
    } else {
        Value::Null
    }
}

/// Summary document: config echo, per-point statistics and the fit.
pub fn summary_json(cfg: &SweepConfig, result: &SweepResult) -> Value {
    let points: Vec<Value> = result
        .points
        .iter()
        .map(|p| {
            let mut m = Map::new();
            m.insert("axis_value".into(), num(p.axis_value));
            m.insert("n".into(), json!(p.n));
            m.insert("delta".into(), num(p.delta));
            m.insert("median_weight".into(), num(p.median_weight));
            m.insert("iqr".into(), num(p.iqr));
            m.insert("feasible_fraction".into(), num(p.feasible_fraction));
            m.insert("theta".into(), p.theta.map_or(Value::Null, num));
            m.insert("ratio_to_theta".into(), p.theta.map_or(Value::Null, |t| num(p.median_weight / t)));
            m.insert("included_in_fit".into(), json!(p.included_in_fit));
            Value::Object(m)
        })
        .collect();
    let mut m = Map::new();
    m.insert("config".into(), serde_json::to_value(cfg).expect("config serializes"));
    m.insert("points".into(), Value::Array(points));
    m.insert("fitted_slope".into(), num(result.fitted_slope));
    m.insert("slope_stderr".into(), num(result.slope_stderr));
    m.insert("intercept".into(), num(result.intercept));
    m.insert("predicted_slope".into(), result.predicted_slope.map_or(Value::Null, num));
    m.insert("rule_adjusted_slope".into(), result.rule_adjusted_slope.map_or(Value::Null, num));
    m.insert("loglog_offset".into(), num(result.loglog_offset));
    Value::Object(m)
}

/// Whitespace-separated per-point columns for plotting tools.
pub fn points_table(result: &SweepResult) -> String {
    let mut out = String::from("# axis_value median_weight iqr feasible_fraction theta\n");
    for p in &result.points {
        let f = |x: f64| if x.is_finite() { fmt_f64(x) } else { "NaN".into() };
        out.push_str(&format!(
            "{} {} {} {} {}\n",
            f(p.axis_value),
            f(p.median_weight),
            f(p.iqr),
            f(p.feasible_fraction),
            f(p.theta.unwrap_or(f64::NAN))
        ));
    }
    out
}
