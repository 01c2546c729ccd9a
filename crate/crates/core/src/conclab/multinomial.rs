//! Concentration of the empirical sum of squared cell proportions.

use crate::bound::{self, BoundParams, CellCounts, GeneralParams};
use crate::error::{Error, Result};
use crate::exec;
use crate::seed::{self, streams};

use super::dist::{multinomial_outcomes, sample_multinomial};
use super::{fmt_list, CheckOutcome};

#[derive(Debug, Clone, PartialEq)]
pub struct MultinomialOutcome {
    /// Probability (exact) or frequency (sampled) of the failure event.
    pub failure_freq: f64,
    pub pass: bool,
    pub outcome: CheckOutcome,
}

/// Enumerable when `K <= 4` and `n <= 12`.
fn enumerable(n: u64, k: usize) -> bool {
    k <= 4 && n <= 12
}

fn check_p(p: &[f64]) -> Result<()> {
    GeneralParams::new(p.to_vec(), 0.5, 0.5).map(|_| ())
}

/// Failure event `sum p_i^2 > sum (n_i/n)^2 + 2 sqrt((2/n) ln(K/delta))`;
/// its probability must stay below `delta`.
///
/// `trials == 0` asks for exact enumeration (small `n` and `K` only);
/// otherwise at least `10^4` trials are drawn.
pub fn multinomial_square_check(n: u64, p: &[f64], delta: f64, trials: usize, seed: u64) -> Result<MultinomialOutcome> {
    check_p(p)?;
    if n == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("delta", "must lie in (0, 1)"));
    }
    let k = p.len();
    let nf = n as f64;
    let sum_p2: f64 = p.iter().map(|x| x * x).sum();
    let slack_term = 2.0 * (2.0 / nf * (k as f64 / delta).ln()).sqrt();
    let fails = |counts: &[u64]| {
        let sq: u128 = counts.iter().map(|&c| u128::from(c) * u128::from(c)).sum();
        sum_p2 > sq as f64 / (nf * nf) + slack_term
    };
    let params = format!("n={n};K={k};p={};delta={delta}", fmt_list(p));
    event_check("multinomial_square", params, n, p, delta, trials, seed, fails)
}

/// The same event written in terms of `u_hat`: the probability that
/// `gamma/(2n) + gamma^2/2 sum p_i^2` exceeds `u_hat(counts)` must stay
/// below `delta / 2`.
pub fn uhat_dominance_check(
    n: u64,
    p: &[f64],
    params: &BoundParams,
    trials: usize,
    seed: u64,
) -> Result<MultinomialOutcome> {
    check_p(p)?;
    if p.len() != params.k() {
        return Err(Error::DimensionMismatch {
            expected: params.k(),
            found: p.len(),
        });
    }
    if n == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    let gp = GeneralParams::new(p.to_vec(), 0.5, 0.5)?;
    let nf = n as f64;
    let target = gp.u(n, params.gamma()) / (2.0 * nf * nf);
    let fails = |counts: &[u64]| {
        let c = CellCounts::new(counts.to_vec()).expect("nonempty");
        target > bound::compute_uhat(&c, params).expect("matching K")
    };
    let desc = format!(
        "n={n};K={};p={};gamma={};delta={}",
        p.len(),
        fmt_list(p),
        params.gamma(),
        params.delta()
    );
    event_check("uhat_dominance", desc, n, p, params.delta() / 2.0, trials, seed, fails)
}

#[allow(clippy::too_many_arguments)]
fn event_check(
    check: &str,
    params: String,
    n: u64,
    p: &[f64],
    level: f64,
    trials: usize,
    seed: u64,
    fails: impl Fn(&[u64]) -> bool + Sync + Send,
) -> Result<MultinomialOutcome> {
    if trials == 0 {
        if !enumerable(n, p.len()) {
            return Err(Error::invalid(format!(
                "exact enumeration supports K <= 4 and n <= 12, got K = {} and n = {n}",
                p.len()
            )));
        }
        let prob: f64 = multinomial_outcomes(n, p)
            .into_iter()
            .filter(|(c, _)| fails(c))
            .map(|(_, q)| q)
            .sum();
        let outcome = CheckOutcome {
            check: check.to_string(),
            params: params + ";mode=exact",
            estimate: prob,
            bound: level,
            margin: level - prob,
            pass: prob < level,
            exact: true,
        };
        return Ok(MultinomialOutcome {
            failure_freq: prob,
            pass: outcome.pass,
            outcome,
        });
    }
    if trials < 10_000 {
        return Err(Error::param("trials", "sampling needs at least 10^4 trials"));
    }
    let hits = exec::map_range(trials, |i| {
        let mut rng = seed::rng(seed, streams::MULTINOMIAL, i as u64);
        u64::from(fails(&sample_multinomial(n, p, &mut rng)))
    });
    let freq = hits.iter().sum::<u64>() as f64 / trials as f64;
    let slack = 3.0 * (level / trials as f64).sqrt();
    let outcome = CheckOutcome {
        check: check.to_string(),
        params: format!("{params};mode=mc;trials={trials}"),
        estimate: freq,
        bound: level,
        margin: level + slack - freq,
        pass: freq < level + slack,
        exact: false,
    };
    Ok(MultinomialOutcome {
        failure_freq: freq,
        pass: outcome.pass,
        outcome,
    })
}
