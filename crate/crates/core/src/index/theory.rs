//! Closed forms for choosing the candidate count and for the distribution of
//! the longest circular co-substring between unrelated hash strings.

use crate::lsh::rho;
use crate::{Error, Result};

fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("probability must lie in (0, 1), got {p}")))
    }
}

/// Location shift `log_{1/p}(m(1-p))` of the match-length distribution.
fn location(m: usize, p: f64) -> f64 {
    (m as f64 * (1.0 - p)).ln() / (1.0 / p).ln()
}

/// Gumbel-type approximation of `Pr[|LCCS| < x]` for two length-`m` strings
/// whose symbols agree independently with probability `p`:
/// `exp(-p^(x - log_{1/p}(m(1-p))))`.
///
/// At integer `x` this tracks the strict `Pr[|LCCS| < x]`; the non-strict
/// `Pr[|LCCS| <= x]` is `extreme_value_cdf(x + 1, ..)`.
pub fn extreme_value_cdf(x: f64, m: usize, p: f64) -> Result<f64> {
    check_probability(p)?;
    if m == 0 {
        return Err(Error::invalid("string length m must be at least 1"));
    }
    Ok((-p.powf(x - location(m, p))).exp())
}

/// Level-`level` quantile of [`extreme_value_cdf`]:
/// `log_p(-ln level) + log_{1/p}(m(1-p))`.
pub fn extreme_value_quantile(level: f64, m: usize, p: f64) -> Result<f64> {
    check_probability(p)?;
    if m == 0 {
        return Err(Error::invalid("string length m must be at least 1"));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid(format!("quantile level must lie in (0, 1), got {level}")));
    }
    Ok((-level.ln()).ln() / p.ln() + location(m, p))
}

/// Median of [`extreme_value_cdf`]: `log_p(ln 2) + log_{1/p}(m(1-p))`.
pub fn extreme_value_median(m: usize, p: f64) -> Result<f64> {
    extreme_value_quantile(0.5, m, p)
}

/// Unrounded candidate count
/// `m^(1-1/rho) n (1-p1)^(-1/rho) (1-p2) (ln 2)^(1/rho) / p2`
/// under which a near neighbor is found with probability at least 1/4.
pub fn success_candidate_bound(m: usize, n: usize, p1: f64, p2: f64) -> Result<f64> {
    if m == 0 || n == 0 {
        return Err(Error::invalid("m and n must be at least 1"));
    }
    let r = rho(p1, p2)?;
    let inv = 1.0 / r;
    Ok((m as f64).powf(1.0 - inv) * n as f64 * (1.0 - p1).powf(-inv) * (1.0 - p2)
        * std::f64::consts::LN_2.powf(inv)
        / p2)
}

/// [`success_candidate_bound`] rounded up and clamped to `[1, n]`.
pub fn success_candidate_count(m: usize, n: usize, p1: f64, p2: f64) -> Result<usize> {
    let raw = success_candidate_bound(m, n, p1, p2)?;
    Ok((raw.ceil().min(n as f64) as usize).max(1))
}
