//! Numerical verification of the concentration inequalities behind the
//! bound, against exact enumeration where the law is finite and small, and
//! against seeded Monte Carlo otherwise.
//!
//! Every check returns one [`CheckOutcome`] per inequality instance. Exact
//! outcomes pass only when the estimate is at most the bound with no slack;
//! Monte Carlo outcomes get a three-sigma one-sided allowance.

pub mod dist;
mod lemma;
mod mgf;
mod multinomial;
mod suite;
mod tail;

pub use dist::UnitDist;
pub use lemma::{hoeffding_lemma_conditional_check, ConditionalLaw};
pub use mgf::{exp_mix_check, exp_mix_lambda_max, mgf_lambda_max, mgf_square_check, ExpMixSpec, MgfCheckSpec, MgfRange};
pub use multinomial::{multinomial_square_check, uhat_dominance_check, MultinomialOutcome};
pub use suite::{run_suite, Suite};
pub use tail::{hoeffding_conditional_check, t_max, CountModel, LatentLaw, TailCheckSpec, TailRegime};

use crate::exec;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub check: String,
    /// `key=value` pairs separated by `;`.
    pub params: String,
    pub estimate: f64,
    pub bound: f64,
    /// `bound + slack - estimate`; negative means a violation.
    pub margin: f64,
    pub pass: bool,
    pub exact: bool,
}

impl CheckOutcome {
    pub(crate) fn exact(check: &str, params: String, estimate: f64, bound: f64) -> Self {
        Self {
            check: check.to_string(),
            params,
            estimate,
            bound,
            margin: bound - estimate,
            pass: estimate <= bound,
            exact: true,
        }
    }

    pub(crate) fn sampled(check: &str, params: String, estimate: f64, bound: f64, slack: f64) -> Self {
        Self {
            check: check.to_string(),
            params,
            estimate,
            bound,
            margin: bound + slack - estimate,
            pass: estimate <= bound + slack,
            exact: false,
        }
    }
}

/// Mean and standard error of `f(i)` over `trials` independent replicates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
}

pub fn mc_mean(trials: usize, f: impl Fn(usize) -> f64 + Sync + Send) -> McEstimate {
    let xs = exec::map_range(trials, f);
    let t = trials as f64;
    let mean = xs.iter().sum::<f64>() / t;
    let var = if trials > 1 {
        xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (t - 1.0)
    } else {
        0.0
    };
    McEstimate {
        mean,
        stderr: (var / t).sqrt(),
        trials,
    }
}

/// Three-sigma allowance for an empirical frequency whose true value is at
/// most `p`.
pub fn frequency_slack(p: f64, trials: usize) -> f64 {
    3.0 * (p * (1.0 - p) / trials as f64).max(0.0).sqrt()
}

fn fmt_list(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join("|")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stderr_shrinks_with_trials() {
        let f = |i: usize| {
            use rand::Rng;
            crate::seed::rng(3, 0, i as u64).random::<f64>()
        };
        let a = mc_mean(20_000, f);
        let b = mc_mean(40_000, f);
        let ratio = b.stderr / a.stderr;
        assert!((ratio - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.03, "{ratio}");
        assert!((a.mean - 0.5).abs() < 4.0 * a.stderr);
    }

    #[test]
    fn slack_vanishes_at_certainty() {
        assert_eq!(frequency_slack(1.0, 100), 0.0);
        assert_eq!(frequency_slack(0.0, 100), 0.0);
    }
}
