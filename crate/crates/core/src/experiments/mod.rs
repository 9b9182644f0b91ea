//! Monte-Carlo harness: scaling sweeps, closed-form checks and k-out
//! structure rates.

mod lemmas;
mod structure;
mod sweep;

pub use lemmas::{
    capexp_check, capexp_prediction, erlang_bound_checks, erlang_t_grid, lemma_suite, order_stat_monte_carlo, AsymptoticCheck,
    CapexpReport, CapexpRow, CdfBoundCheck, LemmaReport, LemmaSuiteConfig, MeanCheck, SplitCheck,
};
pub use structure::{structure_present, success_rate, Structure};
pub use sweep::{
    fit_line, points_table, run_sweep, run_sweep_with, solve, summary_json, theorem_prediction, theta_expression,
    trials_csv, Axis, BudgetRule, LineFit, Problem, RunOptions, SolverSettings, SweepConfig, SweepPoint, SweepResult,
    SweepRun, SyntheticLaw, TrialRecord,
};
