//! Monte-Carlo checks of the order-statistic means, the split-variable
//! scaling and the Erlang-power CDF bound, plus the assignment-weight
//! prediction check.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::{
    erlang_power_tail_bound, exp_inverse_cdf, order_stat_mean_asymptotic, order_stat_mean_asymptotic_inverse_convention,
    order_stat_mean_exact, pow_fast, split_inverse_cdf, split_order_stat_mean, DistributionParams, OrderStatQuery,
};
use crate::error::{Error, Result};
use crate::heuristic::cap_solve;
use crate::instance::rng::{derive_seed, seeded_rng};
use crate::instance::{generate, BudgetVector, GenerateOptions, GraphKind};
use crate::numeric::mean_and_stderr;

const BLOCK: usize = 1 << 14;

/// Case grid and sample count for [`lemma_suite`].
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaSuiteConfig {
    pub seed: u64,
    pub samples: usize,
    pub order_ms: Vec<u64>,
    pub order_max_k: u64,
    pub alphas: Vec<f64>,
    pub asymptotic_m: u64,
    pub asymptotic_ks: Vec<u64>,
    pub asymptotic_alpha: f64,
    pub split_cases: Vec<(u64, u64)>,
    pub erlang_max_n: u64,
    pub erlang_alphas: Vec<f64>,
    pub erlang_t_points: usize,
}

impl Default for LemmaSuiteConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            samples: 1_000_000,
            order_ms: vec![1, 2, 3, 5, 10, 20, 50, 100],
            order_max_k: 5,
            alphas: vec![0.25, 0.5, 1.0],
            asymptotic_m: 10_000,
            asymptotic_ks: vec![1, 2, 3],
            asymptotic_alpha: 0.5,
            split_cases: vec![(1, 1), (3, 2), (10, 1), (10, 3)],
            erlang_max_n: 6,
            erlang_alphas: vec![0.5, 1.0],
            erlang_t_points: 20,
        }
    }
}

impl LemmaSuiteConfig {
    /// Every `m` from 1 to `max_m`.
    pub fn with_all_m_up_to(mut self, max_m: u64) -> Self {
        self.order_ms = (1..=max_m).collect();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanCheck {
    pub m: u64,
    pub k: u64,
    pub alpha: f64,
    pub closed_form: f64,
    pub mc_mean: f64,
    pub mc_stderr: f64,
    pub z_score: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticCheck {
    pub m: u64,
    pub k: u64,
    pub alpha: f64,
    pub closed_form: f64,
    pub inverse_convention: f64,
    pub mc_mean: f64,
    pub mc_stderr: f64,
    pub z_score: f64,
    pub relative_error: f64,
    pub inverse_relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitCheck {
    pub m: u64,
    pub k: u64,
    pub alpha: f64,
    pub ratio_to_plain: f64,
    pub expected_ratio: f64,
    pub closed_form: f64,
    pub mc_mean: f64,
    pub mc_stderr: f64,
    pub z_score: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CdfBoundCheck {
    pub n: u64,
    pub alpha: f64,
    pub t: f64,
    pub bound: f64,
    pub empirical_cdf: f64,
    pub stderr: f64,
    pub excess_in_stderr: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaReport {
    pub seed: u64,
    pub samples: usize,
    pub order_stat_exact: Vec<MeanCheck>,
    pub order_stat_asymptotic: Vec<AsymptoticCheck>,
    pub split_order_stat: Vec<SplitCheck>,
    pub erlang_power_bound: Vec<CdfBoundCheck>,
    pub flags: usize,
}

/// Sum and sum of squares per case, accumulated over fixed seeded blocks and
/// merged in block order so results do not depend on scheduling.
fn block_moments<F>(seed: u64, tag: u64, samples: usize, cases: usize, body: F) -> Vec<(f64, f64)>
where
    F: Fn(&mut rand_chacha::ChaCha8Rng, &mut [(f64, f64)]) + Sync,
{
    let blocks = samples.div_ceil(BLOCK);
    let parts: Vec<Vec<(f64, f64)>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = seeded_rng(derive_seed(seed, &[tag, b as u64]));
            let mut acc = vec![(0.0, 0.0); cases];
            let len = BLOCK.min(samples - b * BLOCK);
            for _ in 0..len {
                body(&mut rng, &mut acc);
            }
            acc
        })
        .collect();
    let mut total = vec![(0.0, 0.0); cases];
    for part in parts {
        for (t, p) in total.iter_mut().zip(part) {
            t.0 += p.0;
            t.1 += p.1;
        }
    }
    total
}

fn moments_to_mean(s: (f64, f64), count: usize) -> (f64, f64) {
    let n = count as f64;
    let mean = s.0 / n;
    let var = ((s.1 / n - mean * mean) * n / (n - 1.0)).max(0.0);
    (mean, (var / n).sqrt())
}

fn push(acc: &mut (f64, f64), x: f64) {
    acc.0 += x;
    acc.1 += x * x;
}

/// Mean and standard error of the k-th smallest of m samples of `Z^alpha`,
/// for every `(alpha, m, k)` with `k <= min(max_k, m)`. Uses the spacing
/// representation `X_(k) = sum_{j<k} E_j / (m - j)` with shared draws.
pub fn order_stat_monte_carlo(
    ms: &[u64],
    max_k: u64,
    alphas: &[f64],
    samples: usize,
    seed: u64,
) -> Vec<((u64, u64, f64), (f64, f64))> {
    let mut keys = Vec::new();
    for &a in alphas {
        for &m in ms {
            for k in 1..=max_k.min(m) {
                keys.push((m, k, a));
            }
        }
    }
    let kmax = max_k as usize;
    let moments = block_moments(seed, 1, samples, keys.len(), |rng, acc| {
        let e: Vec<f64> = (0..kmax).map(|_| exp_inverse_cdf(rng.random::<f64>())).collect();
        let mut idx = 0;
        for &a in alphas {
            for &m in ms {
                let mut partial = 0.0;
                for k in 1..=max_k.min(m) {
                    partial += e[k as usize - 1] / (m - k + 1) as f64;
                    push(&mut acc[idx], pow_fast(partial, a));
                    idx += 1;
                }
            }
        }
    });
    keys.into_iter().zip(moments).map(|(key, s)| (key, moments_to_mean(s, samples))).collect()
}

pub fn lemma_suite(cfg: &LemmaSuiteConfig) -> Result<LemmaReport> {
    if cfg.samples < 2 {
        return Err(Error::Parameter("the lemma suite needs at least 2 samples".into()));
    }
    let n = cfg.samples;
    let mut order_stat_exact = Vec::new();
    for ((m, k, alpha), (mean, se)) in order_stat_monte_carlo(&cfg.order_ms, cfg.order_max_k, &cfg.alphas, n, cfg.seed) {
        let cf = order_stat_mean_exact(&OrderStatQuery::new(m, k, alpha)?)?;
        let z = (mean - cf) / se;
        order_stat_exact.push(MeanCheck { m, k, alpha, closed_form: cf, mc_mean: mean, mc_stderr: se, z_score: z, flagged: z.abs() > 4.0 });
    }

    let max_k = cfg.asymptotic_ks.iter().copied().max().unwrap_or(1);
    let mut order_stat_asymptotic = Vec::new();
    for ((m, k, alpha), (mean, se)) in
        order_stat_monte_carlo(&[cfg.asymptotic_m], max_k, &[cfg.asymptotic_alpha], n, derive_seed(cfg.seed, &[2]))
    {
        if !cfg.asymptotic_ks.contains(&k) {
            continue;
        }
        let q = OrderStatQuery::new(m, k, alpha)?;
        let cf = order_stat_mean_asymptotic(&q);
        let inv = order_stat_mean_asymptotic_inverse_convention(&q);
        order_stat_asymptotic.push(AsymptoticCheck {
            m,
            k,
            alpha,
            closed_form: cf,
            inverse_convention: inv,
            mc_mean: mean,
            mc_stderr: se,
            z_score: (mean - cf) / se,
            relative_error: (mean - cf).abs() / cf,
            inverse_relative_error: (mean - inv).abs() / inv,
        });
    }

    let split_order_stat = split_checks(cfg)?;
    let erlang_power_bound = erlang_bound_checks(cfg)?;
    let flags = order_stat_exact.iter().filter(|c| c.flagged).count()
        + split_order_stat.iter().filter(|c| c.flagged).count()
        + erlang_power_bound.iter().filter(|c| c.flagged).count();
    Ok(LemmaReport {
        seed: cfg.seed,
        samples: cfg.samples,
        order_stat_exact,
        order_stat_asymptotic,
        split_order_stat,
        erlang_power_bound,
        flags,
    })
}

/// k-th smallest of m direct split-variable draws against `2^alpha` times
/// the plain order-statistic mean.
fn split_checks(cfg: &LemmaSuiteConfig) -> Result<Vec<SplitCheck>> {
    let max_m = cfg.split_cases.iter().map(|c| c.0).max().unwrap_or(1) as usize;
    let cases: Vec<(u64, u64, f64)> =
        cfg.alphas.iter().flat_map(|&a| cfg.split_cases.iter().map(move |&(m, k)| (m, k, a))).collect();
    let moments = block_moments(cfg.seed, 3, cfg.samples, cases.len(), |rng, acc| {
        let u: Vec<f64> = (0..max_m).map(|_| rng.random::<f64>()).collect();
        let mut buf = Vec::with_capacity(max_m);
        for (idx, &(m, k, a)) in cases.iter().enumerate() {
            buf.clear();
            buf.extend(u[..m as usize].iter().map(|&x| split_inverse_cdf(a, x)));
            let (_, kth, _) = buf.select_nth_unstable_by(k as usize - 1, f64::total_cmp);
            push(&mut acc[idx], *kth);
        }
    });
    let mut out = Vec::new();
    for (&(m, k, alpha), s) in cases.iter().zip(moments) {
        let q = OrderStatQuery::new(m, k, alpha)?;
        let cf = split_order_stat_mean(&q, true)?;
        let plain = order_stat_mean_exact(&q)?;
        let (mean, se) = moments_to_mean(s, cfg.samples);
        let z = (mean - cf) / se;
        out.push(SplitCheck {
            m,
            k,
            alpha,
            ratio_to_plain: cf / plain,
            expected_ratio: 2f64.powf(alpha),
            closed_form: cf,
            mc_mean: mean,
            mc_stderr: se,
            z_score: z,
            flagged: z.abs() > 4.0,
        });
    }
    Ok(out)
}

/// Evaluation points for the CDF bound: `t = j/10 * n Gamma(1+alpha)` for
/// `j = 1..points`, spanning the lower tail up to about twice the mean.
pub fn erlang_t_grid(n: u64, alpha: f64, points: usize) -> Vec<f64> {
    let mean = n as f64 * statrs::function::gamma::gamma(1.0 + alpha);
    (1..=points).map(|j| j as f64 / 10.0 * mean).collect()
}

/// Empirical CDF of `Y_1 + ... + Y_n` against the bound on the configured
/// `(n, alpha, t)` grid.
pub fn erlang_bound_checks(cfg: &LemmaSuiteConfig) -> Result<Vec<CdfBoundCheck>> {
    let mut out = Vec::new();
    let max_n = cfg.erlang_max_n as usize;
    for (ai, &alpha) in cfg.erlang_alphas.iter().enumerate() {
        let grids: Vec<Vec<f64>> = (1..=max_n).map(|n| erlang_t_grid(n as u64, alpha, cfg.erlang_t_points)).collect();
        let cases = max_n * cfg.erlang_t_points;
        let hits = block_moments(cfg.seed, 4 + ai as u64, cfg.samples, cases, |rng, acc| {
            let mut sum = 0.0;
            for (ni, grid) in grids.iter().enumerate() {
                sum += pow_fast(exp_inverse_cdf(rng.random::<f64>()), alpha);
                for (ti, &t) in grid.iter().enumerate() {
                    if sum <= t {
                        acc[ni * grid.len() + ti].0 += 1.0;
                    }
                }
            }
        });
        for (ni, grid) in grids.iter().enumerate() {
            for (ti, &t) in grid.iter().enumerate() {
                let n = ni as u64 + 1;
                let f = hits[ni * grid.len() + ti].0 / cfg.samples as f64;
                let se = (f * (1.0 - f) / cfg.samples as f64).sqrt();
                let bound = erlang_power_tail_bound(n, t, alpha)?.value();
                let excess = if se > 0.0 { (f - bound) / se } else if f > bound { f64::INFINITY } else { 0.0 };
                out.push(CdfBoundCheck {
                    n,
                    alpha,
                    t,
                    bound,
                    empirical_cdf: f,
                    stderr: se,
                    excess_in_stderr: excess,
                    flagged: f > bound + 3.0 * se,
                });
            }
        }
    }
    Ok(out)
}

/// Predicted assignment weight `2^alpha n / d^alpha (G(1+a') + G(2+a')) / 2`
/// with `a' = alpha` (`inverse = false`) or `a' = 1/alpha`.
pub fn capexp_prediction(n: usize, d: f64, alpha: f64, inverse: bool) -> f64 {
    use statrs::function::gamma::gamma;
    let a = if inverse { 1.0 / alpha } else { alpha };
    2f64.powf(alpha) * n as f64 / d.powf(alpha) * (gamma(1.0 + a) + gamma(2.0 + a)) / 2.0
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapexpRow {
    pub d: f64,
    pub budget: f64,
    pub trials: usize,
    pub feasible: usize,
    pub mean_weight: f64,
    pub stderr: f64,
    pub predicted: f64,
    pub predicted_inverse: f64,
    pub ratio: f64,
    pub ratio_inverse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapexpReport {
    pub n: usize,
    pub alpha: f64,
    pub seed: u64,
    pub rows: Vec<CapexpRow>,
    /// `"gamma_k_plus_alpha"`, `"gamma_k_plus_inverse_alpha"` or
    /// `"coincide"` when both forms give the same number.
    pub supported: String,
}

/// Solves bipartite instances whose cheap-edge degree `d = n p` is set
/// through the budget, and compares the realized weight with both forms of
/// the prediction.
pub fn capexp_check(n: usize, ds: &[f64], alpha: f64, seed: u64, trials: usize) -> Result<CapexpReport> {
    if n < 2 || n > 2000 {
        return Err(Error::Parameter(format!("capexp_check needs 2 <= n <= 2000, got {n}")));
    }
    if trials == 0 || ds.is_empty() || ds.iter().any(|&d| !(d > 0.0 && d < n as f64)) {
        return Err(Error::Parameter("capexp_check needs trials >= 1 and each d in (0, n)".into()));
    }
    let params = DistributionParams::new(alpha, 1.0, 1)?;
    let mut rows = Vec::new();
    for (di, &d) in ds.iter().enumerate() {
        // p = 1 - exp(-C/n) for r = 1, beta = 1
        let p = d / n as f64;
        let budget = n as f64 * -(-p).ln_1p();
        let budgets = BudgetVector::new(vec![budget])?;
        let weights: Vec<Option<f64>> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let s = derive_seed(seed, &[di as u64, t as u64]);
                let inst = generate(GraphKind::Bipartite, n, params, s, GenerateOptions::default())?;
                let sol = cap_solve(&inst, &budgets)?;
                Ok(sol.feasible.then_some(sol.total_weight))
            })
            .collect::<Result<_>>()?;
        let ok: Vec<f64> = weights.into_iter().flatten().collect();
        let (mean, se) = if ok.is_empty() { (f64::NAN, f64::NAN) } else { mean_and_stderr(ok.iter().copied()) };
        let predicted = capexp_prediction(n, d, alpha, false);
        let predicted_inverse = capexp_prediction(n, d, alpha, true);
        rows.push(CapexpRow {
            d,
            budget,
            trials,
            feasible: ok.len(),
            mean_weight: mean,
            stderr: se,
            predicted,
            predicted_inverse,
            ratio: mean / predicted,
            ratio_inverse: mean / predicted_inverse,
        });
    }
    let dist = |f: fn(&CapexpRow) -> f64| rows.iter().map(|r| f(r).ln().abs()).sum::<f64>();
    let a = dist(|r| r.ratio);
    let b = dist(|r| r.ratio_inverse);
    let supported = if (a - b).abs() <= 1e-9 * a.max(b) {
        "coincide"
    } else if a < b {
        "gamma_k_plus_alpha"
    } else {
        "gamma_k_plus_inverse_alpha"
    };
    Ok(CapexpReport { n, alpha, seed, rows, supported: supported.into() })
}
