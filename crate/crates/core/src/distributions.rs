//! Samplers and closed-form evaluators for powers of exponential variables.
//!
//! Weights are distributed as `Z^alpha` and costs as `Z^beta` with `Z ~ Exp(1)`.
//! Every sampler is an inverse-CDF transform of caller-supplied uniforms, so
//! the randomness source stays outside this module.

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};
use crate::instance::BudgetVector;
use crate::numeric::{LogValue, NeumaierSum};

/// Exponents and dimensions of the weight/cost laws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributionParams {
    pub alpha: f64,
    pub beta: f64,
    pub r: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff_eps: Option<f64>,
}

impl DistributionParams {
    pub fn new(alpha: f64, beta: f64, r: usize) -> Result<Self> {
        let params = Self { alpha, beta, r, gamma: None, cutoff_eps: None };
        params.validate()?;
        Ok(params)
    }

    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        self.gamma = Some(gamma);
        self.validate()?;
        Ok(self)
    }

    pub fn with_cutoff_eps(mut self, eps: f64) -> Result<Self> {
        self.cutoff_eps = Some(eps);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::Parameter(format!("alpha must lie in (0, 1], got {}", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::Parameter(format!("beta must lie in (0, 1], got {}", self.beta)));
        }
        if self.r == 0 {
            return Err(Error::Parameter("r must be at least 1".into()));
        }
        if let Some(g) = self.gamma {
            if !(g >= 0.0) {
                return Err(Error::Parameter(format!("gamma must be >= 0, got {g}")));
            }
        }
        if let Some(eps) = self.cutoff_eps {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(Error::Parameter(format!("cutoff_eps must be positive, got {eps}")));
            }
        }
        Ok(())
    }
}

/// Rank query for the k-th smallest of m i.i.d. copies of `Z^alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderStatQuery {
    pub m: u64,
    pub k: u64,
    pub alpha: f64,
}

impl OrderStatQuery {
    pub fn new(m: u64, k: u64, alpha: f64) -> Result<Self> {
        let q = Self { m, k, alpha };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 || self.k > self.m {
            return Err(Error::Parameter(format!("need 1 <= k <= m, got k={} m={}", self.k, self.m)));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::Parameter(format!("alpha must be positive, got {}", self.alpha)));
        }
        Ok(())
    }
}

fn check_unit(u: f64) -> Result<()> {
    if (0.0..1.0).contains(&u) {
        Ok(())
    } else {
        Err(Error::Domain(format!("uniform draw {u} outside [0, 1)")))
    }
}

/// `-ln(1 - u)`, the Exp(1) inverse CDF.
#[inline]
pub fn exp_inverse_cdf(u: f64) -> f64 {
    -(-u).ln_1p()
}

/// `x^p` with the common exponents special-cased; these dominate instance generation.
#[inline]
pub fn pow_fast(x: f64, p: f64) -> f64 {
    if p == 1.0 {
        x
    } else if p == 0.5 {
        x.sqrt()
    } else if p == 0.25 {
        x.sqrt().sqrt()
    } else {
        x.powf(p)
    }
}

pub fn sample_weight(params: &DistributionParams, u: f64) -> Result<f64> {
    check_unit(u)?;
    Ok(pow_fast(exp_inverse_cdf(u), params.alpha))
}

pub fn sample_cost_vector(params: &DistributionParams, u: &[f64]) -> Result<Vec<f64>> {
    if u.len() != params.r {
        return Err(Error::Dimension { expected: params.r, got: u.len() });
    }
    u.iter()
        .map(|&ui| {
            check_unit(ui)?;
            Ok(pow_fast(exp_inverse_cdf(ui), params.beta))
        })
        .collect()
}

/// Inverse CDF of the split variable `Z_W` with `P(Z_W >= x)^2 = P(Z^alpha >= x)`,
/// i.e. `Z_W = (2 Z)^alpha`.
#[inline]
pub fn split_inverse_cdf(alpha: f64, u: f64) -> f64 {
    pow_fast(2.0 * exp_inverse_cdf(u), alpha)
}

/// Two independent split copies; their minimum is distributed as `Z^alpha`.
pub fn sample_split_pair(alpha: f64, u1: f64, u2: f64) -> Result<(f64, f64)> {
    check_unit(u1)?;
    check_unit(u2)?;
    if !(alpha > 0.0) {
        return Err(Error::Parameter(format!("alpha must be positive, got {alpha}")));
    }
    Ok((split_inverse_cdf(alpha, u1), split_inverse_cdf(alpha, u2)))
}

/// Coupling cutoff `1 / (10 ln n)`.
pub fn coupling_cutoff(n: u64) -> Result<f64> {
    if n < 2 {
        return Err(Error::Parameter(format!("coupling cutoff needs n >= 2, got {n}")));
    }
    Ok(1.0 / (10.0 * (n as f64).ln()))
}

/// Inverse CDF given as a table of `(u, value)` rows with linear interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedInverseCdf {
    us: Vec<f64>,
    values: Vec<f64>,
}

impl TabulatedInverseCdf {
    pub const MIN_ROWS: usize = 64;

    pub fn from_rows(rows: Vec<(f64, f64)>) -> Result<Self> {
        if rows.len() < Self::MIN_ROWS {
            return Err(Error::Format(format!(
                "inverse-CDF table needs at least {} rows, got {}",
                Self::MIN_ROWS,
                rows.len()
            )));
        }
        for (i, w) in rows.windows(2).enumerate() {
            if !(w[1].0 > w[0].0 && w[1].1 > w[0].1) {
                return Err(Error::Format(format!("rows {} and {} are not strictly increasing", i + 1, i + 2)));
            }
        }
        let (first_u, first_v) = rows[0];
        let (last_u, _) = rows[rows.len() - 1];
        if first_u < 0.0 || last_u > 1.0 || first_v < 0.0 {
            return Err(Error::Format("u must lie in [0, 1] and values must be nonnegative".into()));
        }
        let (us, values) = rows.into_iter().unzip();
        Ok(Self { us, values })
    }

    /// Parses two whitespace-separated columns `u value`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut cols = line.split_whitespace();
            let parse = |s: Option<&str>| -> Result<f64> {
                s.ok_or_else(|| Error::Format(format!("line {}: expected two columns", lineno + 1)))?
                    .parse::<f64>()
                    .map_err(|e| Error::Format(format!("line {}: {e}", lineno + 1)))
            };
            let u = parse(cols.next())?;
            let v = parse(cols.next())?;
            if cols.next().is_some() {
                return Err(Error::Format(format!("line {}: expected two columns", lineno + 1)));
            }
            rows.push((u, v));
        }
        Self::from_rows(rows)
    }

    /// Multiplies every tabulated value by `factor`. Used to normalise a law with
    /// `F(t) ~ a t^(1/alpha)` to unit leading constant (`factor = a^alpha`).
    pub fn scaled(mut self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::Parameter(format!("scale factor must be positive, got {factor}")));
        }
        self.values.iter_mut().for_each(|v| *v *= factor);
        Ok(self)
    }

    /// Below the first row the law is interpolated towards the origin; above the
    /// last row it is clamped.
    pub fn eval(&self, u: f64) -> f64 {
        let n = self.us.len();
        if u <= self.us[0] {
            if self.us[0] == 0.0 {
                return self.values[0];
            }
            return self.values[0] * u / self.us[0];
        }
        if u >= self.us[n - 1] {
            return self.values[n - 1];
        }
        let hi = self.us.partition_point(|&x| x <= u);
        let lo = hi - 1;
        let t = (u - self.us[lo]) / (self.us[hi] - self.us[lo]);
        self.values[lo] + t * (self.values[hi] - self.values[lo])
    }
}

/// The law whose values are sandwiched by the coupling.
#[derive(Debug, Clone, PartialEq)]
pub enum GeneralLaw {
    /// `F(t) = min(t^(1/alpha), 1)`, so `F^{-1}(u) = u^alpha`.
    PowerLaw,
    Tabulated(TabulatedInverseCdf),
}

impl GeneralLaw {
    pub fn inverse_cdf(&self, alpha: f64, u: f64) -> f64 {
        match self {
            GeneralLaw::PowerLaw => pow_fast(u, alpha),
            GeneralLaw::Tabulated(t) => t.eval(u),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledTriple {
    pub lower: f64,
    pub value: f64,
    pub upper: f64,
}

impl CoupledTriple {
    pub fn sandwiched(&self) -> bool {
        self.lower <= self.value && self.value <= self.upper
    }
}

/// Common-uniform coupling of `Z^(alpha+eps)`, the general law and `Z^(alpha-eps)`
/// with the built-in power law.
pub fn sample_general_coupled(params: &DistributionParams, u: f64, n: u64) -> Result<CoupledTriple> {
    sample_general_coupled_with(&GeneralLaw::PowerLaw, params, u, n)
}

pub fn sample_general_coupled_with(
    law: &GeneralLaw,
    params: &DistributionParams,
    u: f64,
    n: u64,
) -> Result<CoupledTriple> {
    check_unit(u)?;
    if params.gamma.is_none() {
        return Err(Error::Parameter("general-law coupling requires gamma".into()));
    }
    let eps = match params.cutoff_eps {
        Some(eps) => eps,
        None => coupling_cutoff(n)?,
    };
    if params.alpha - eps <= 0.0 {
        return Err(Error::Parameter(format!(
            "alpha - eps_n = {} - {eps} <= 0; n is too small for the coupling",
            params.alpha
        )));
    }
    let z = exp_inverse_cdf(u);
    Ok(CoupledTriple {
        lower: z.powf(params.alpha + eps),
        value: law.inverse_cdf(params.alpha, u),
        upper: z.powf(params.alpha - eps),
    })
}

/// Exact mean of the k-th minimum of m copies of `Z^alpha`:
/// `Gamma(1+alpha) sum_{j<k} sum_{i<=j} C(m,j) C(j,i) (-1)^i (m+i-j)^(-alpha)`.
///
/// The inner alternating sums cancel heavily for large m, so the sum is
/// compensated and rejected when the result is within 10^3 rounding units of
/// the accumulated magnitude.
pub fn order_stat_mean_exact(q: &OrderStatQuery) -> Result<f64> {
    q.validate()?;
    let m = q.m;
    let mut sum = NeumaierSum::default();
    let mut magnitude = 0.0;
    for j in 0..q.k {
        let ln_cmj = ln_binomial(m, j);
        for i in 0..=j {
            let ln_term = ln_cmj + ln_binomial(j, i) - q.alpha * ((m + i - j) as f64).ln();
            let term = ln_term.exp();
            magnitude += term;
            if i % 2 == 0 {
                sum.add(term);
            } else {
                sum.add(-term);
            }
        }
    }
    let value = sum.total();
    let estimate = magnitude * f64::EPSILON;
    let ratio = value / estimate;
    if !(value > 0.0) || ratio < 1e3 {
        return Err(Error::PrecisionLoss { value, estimate, ratio });
    }
    Ok(gamma(1.0 + q.alpha) * value)
}

/// Large-m mean of the k-th minimum, `Gamma(k+alpha)/(k-1)! m^(-alpha)`.
pub fn order_stat_mean_asymptotic(q: &OrderStatQuery) -> f64 {
    let k = q.k as f64;
    (ln_gamma(k + q.alpha) - ln_gamma(k) - q.alpha * (q.m as f64).ln()).exp()
}

/// The alternative `Gamma(k+1/alpha)/(k-1)! m^(-alpha)` form, kept for comparison.
pub fn order_stat_mean_asymptotic_inverse_convention(q: &OrderStatQuery) -> f64 {
    let k = q.k as f64;
    (ln_gamma(k + 1.0 / q.alpha) - ln_gamma(k) - q.alpha * (q.m as f64).ln()).exp()
}

/// Same order statistic for split copies: `2^alpha` times the plain value.
pub fn split_order_stat_mean(q: &OrderStatQuery, exact: bool) -> Result<f64> {
    let base = if exact { order_stat_mean_exact(q)? } else { order_stat_mean_asymptotic(q) };
    Ok(2f64.powf(q.alpha) * base)
}

/// Upper bound `t^(n/alpha) / (alpha^n n! n^(n(1/alpha-1)))` on
/// `P(Y_1 + ... + Y_n <= t)` for `Y_i ~ Z^alpha`, `alpha <= 1`.
pub fn erlang_power_tail_bound(n: u64, t: f64, alpha: f64) -> Result<LogValue> {
    if n < 1 {
        return Err(Error::Parameter("n must be at least 1".into()));
    }
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("t must be nonnegative, got {t}")));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Parameter(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    let nf = n as f64;
    if t == 0.0 {
        return Ok(LogValue::ZERO);
    }
    let ln = (nf / alpha) * t.ln() - nf * alpha.ln() - ln_gamma(nf + 1.0) - nf * (1.0 / alpha - 1.0) * nf.ln();
    Ok(LogValue::from_ln(ln))
}

/// First-moment bound `(e^r Delta^(1/beta) / (beta n^(r/beta - 1)))^n` on the
/// expected number of budget-feasible assignments.
pub fn infeasibility_bound(n: u64, budgets: &BudgetVector, beta: f64, r: usize) -> Result<LogValue> {
    if budgets.len() != r {
        return Err(Error::Dimension { expected: r, got: budgets.len() });
    }
    if n < 1 {
        return Err(Error::Parameter("n must be at least 1".into()));
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::Parameter(format!("beta must lie in (0, 1], got {beta}")));
    }
    let nf = n as f64;
    let rf = r as f64;
    let base = rf + budgets.ln_delta() / beta - beta.ln() - (rf / beta - 1.0) * nf.ln();
    Ok(LogValue::from_ln(nf * base))
}

/// Union bound on the expected number of perfect assignments of `K_{n,n}` with
/// weight at most `weight_threshold` and every cost within budget:
/// `n! * B(n, L, alpha) * prod_i B(n, C_i, beta)` with `B` the Erlang-power bound.
pub fn lower_bound_count_estimate(
    n: u64,
    weight_threshold: f64,
    budgets: &BudgetVector,
    alpha: f64,
    beta: f64,
) -> Result<LogValue> {
    let mut ln = ln_gamma(n as f64 + 1.0);
    ln += erlang_power_tail_bound(n, weight_threshold, alpha)?.ln();
    for &c in budgets.components() {
        ln += erlang_power_tail_bound(n, c, beta)?.ln();
    }
    Ok(LogValue::from_ln(ln))
}
