//! Fixed grids of checks covering every inequality, in exact and sampled
//! form.

use std::str::FromStr;

use crate::bound::BoundParams;
use crate::error::{Error, Result};

use super::dist::UnitDist;
use super::lemma::{hoeffding_lemma_conditional_check, ConditionalLaw};
use super::mgf::{exp_mix_check, exp_mix_lambda_max, mgf_lambda_max, mgf_square_check, ExpMixSpec, MgfCheckSpec, MgfRange};
use super::multinomial::{multinomial_square_check, uhat_dominance_check};
use super::tail::{hoeffding_conditional_check, t_max, CountModel, LatentLaw, TailCheckSpec, TailRegime};
use super::CheckOutcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    /// Every enumerable configuration, no sampling.
    Exact,
    /// Sampled configurations only.
    MonteCarlo,
    /// Both of the above.
    Full,
    /// A small slice of both, for smoke tests.
    Quick,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Suite::Exact),
            "mc" => Ok(Suite::MonteCarlo),
            "full" => Ok(Suite::Full),
            "quick" => Ok(Suite::Quick),
            other => Err(Error::invalid(format!("unknown suite `{other}` (exact, mc, full, quick)"))),
        }
    }
}

pub fn run_suite(suite: Suite, trials: usize, seed: u64) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    match suite {
        Suite::Exact => exact_checks(false, &mut out)?,
        Suite::MonteCarlo => mc_checks(false, trials, seed, &mut out)?,
        Suite::Full => {
            exact_checks(false, &mut out)?;
            mc_checks(false, trials, seed, &mut out)?;
        }
        Suite::Quick => {
            exact_checks(true, &mut out)?;
            mc_checks(true, trials, seed, &mut out)?;
        }
    }
    Ok(out)
}

/// Laws with mean at most `nu` on a dyadic grid, so exact sums stay small.
fn small_laws(nu: f64) -> Vec<UnitDist> {
    vec![
        UnitDist::Bernoulli(nu),
        UnitDist::Bernoulli(0.5 * nu),
        UnitDist::Discrete(vec![(0.0, 1.0 - nu), (0.5, 0.5 * nu), (1.0, 0.5 * nu)]),
        UnitDist::Discrete(vec![(0.0, 1.0 - nu), (0.25, nu)]),
    ]
}

fn pick<T: Clone>(items: &[T], quick: bool) -> Vec<T> {
    if quick {
        items.iter().step_by(2).cloned().collect()
    } else {
        items.to_vec()
    }
}

fn exact_checks(quick: bool, out: &mut Vec<CheckOutcome>) -> Result<()> {
    let ns = pick(&[1u64, 2, 3, 5, 8, 12, 16, 20], quick);
    let nus = [0.0, 0.05, 0.3, 0.5, 0.9, 1.0];
    let cs = [1.0, 1.5, 2.0, 4.0];

    // squared-sum mgf, Bernoulli and mixed finite laws, both lambda ranges
    for &n in &ns {
        for &nu in &nus {
            for &c in &cs {
                for range in [MgfRange::Basic, MgfRange::Regime] {
                    for lambda in lambda_points(n, nu, c, range) {
                        let mut s = MgfCheckSpec::bernoulli(n, nu, c, lambda);
                        s.range = range;
                        out.push(mgf_square_check(&s)?);
                        if n <= 12 {
                            let laws = small_laws(nu);
                            s.laws = Some((0..n as usize).map(|j| laws[j % laws.len()].clone()).collect());
                            out.push(mgf_square_check(&s)?);
                        }
                    }
                }
            }
        }
    }

    // single-variable exponential bounds
    for &a in &[0.0, 0.5, 2.0] {
        for &b in &[0.0, 1.0, 3.0] {
            for &c in &[1.0, 1.5, 3.0] {
                for &nu in &[0.0, 0.2, 0.5, 1.0] {
                    let lambdas: Vec<f64> = match exp_mix_lambda_max(a, b, c, nu) {
                        Some(m) => vec![0.0, 0.25 * m, 0.5 * m, m],
                        None => vec![0.0, 0.5, 2.0, 5.0],
                    };
                    for law in small_laws(nu) {
                        for &lambda in &lambdas {
                            let spec = ExpMixSpec {
                                law: law.clone(),
                                ..ExpMixSpec::bernoulli(a, b, c, nu, lambda)
                            };
                            out.push(exp_mix_check(&spec)?);
                        }
                    }
                }
            }
        }
    }

    // conditional Hoeffding lemma
    let lambdas = [-8.0, -2.0, -0.5, -0.1, 0.0, 0.1, 0.5, 2.0, 8.0];
    for &(a, b) in &[(0.0, 1.0), (-2.0, 3.0), (0.5, 0.5)] {
        let law = ConditionalLaw {
            a,
            b,
            branches: vec![
                UnitDist::Bernoulli(0.5),
                UnitDist::Bernoulli(0.1),
                UnitDist::Discrete(vec![(0.0, 0.2), (0.5, 0.3), (1.0, 0.5)]),
                UnitDist::Discrete(vec![(0.7, 1.0)]),
            ],
        };
        out.extend(hoeffding_lemma_conditional_check(&law, &lambdas, 0, 0)?);
    }

    // tail bound, independent counts and multinomial counts
    for cfg in tail_configs_exact(quick) {
        out.extend(hoeffding_conditional_check(&cfg)?);
    }

    // squared proportions
    let ps: Vec<Vec<f64>> = vec![
        vec![1.0],
        vec![0.5, 0.5],
        vec![0.9, 0.1],
        vec![0.2, 0.3, 0.5],
        vec![0.25; 4],
        vec![0.4, 0.3, 0.2, 0.1],
        vec![0.97, 0.01, 0.01, 0.01],
    ];
    for p in pick(&ps, quick) {
        for n in 1..=12u64 {
            for &delta in &[0.01, 0.1, 0.5] {
                out.push(multinomial_square_check(n, &p, delta, 0, 0)?.outcome);
            }
            for &gamma in &[1.1, 2.0] {
                let params = BoundParams::with_gamma(p.len(), 0.1, 1.0, gamma, 1.0)?;
                out.push(uhat_dominance_check(n, &p, &params, 0, 0)?.outcome);
            }
        }
    }
    Ok(())
}

fn lambda_points(n: u64, nu: f64, c: f64, range: MgfRange) -> Vec<f64> {
    match mgf_lambda_max(n, nu, c, range) {
        Some(m) if range == MgfRange::Basic => vec![0.0, 0.5 * m, m],
        Some(m) => vec![0.5 * m, m],
        None => [1e-3, 1e-2, 0.1].iter().map(|l| l / n as f64).collect(),
    }
}

fn tail_spec(n: u64, mu: Vec<f64>, gamma: f64, latent: LatentLaw, counts: CountModel, regime: TailRegime) -> TailCheckSpec {
    TailCheckSpec {
        n,
        mu,
        gamma,
        t_grid: Vec::new(),
        trials: 0,
        seed: 0,
        latent,
        counts,
        regime,
        force_mc: false,
    }
}

/// Deviations spread over the admissible range (or over a few multiples
/// of `sqrt(u)` when it is unbounded).
fn spread_t(spec: &mut TailCheckSpec, fractions: &[f64]) {
    let scale = t_max(spec).unwrap_or_else(|| 1.5 * spec.u().sqrt());
    spec.t_grid = fractions.iter().map(|f| f * scale).collect();
}

fn three_point(m: usize) -> LatentLaw {
    let law = |i: usize, s: f64| {
        let hi = (0.15 + s + 0.1 * i as f64).min(0.5);
        UnitDist::Discrete(vec![(0.0, 1.0 - hi - 0.1), (0.5, 0.1), (1.0, hi)])
    };
    LatentLaw {
        states: vec![
            (0.3, (0..m).map(|i| law(i, 0.0)).collect()),
            (0.7, (0..m).map(|i| law(i, 0.2)).collect()),
        ],
    }
}

fn tail_configs_exact(quick: bool) -> Vec<TailCheckSpec> {
    let fractions = [0.0, 0.25, 0.5, 0.75, 1.0];
    let indep: Vec<(u64, Vec<f64>, f64)> = vec![
        (5, vec![0.3], 1.5),
        (10, vec![0.3], 2.0),
        (20, vec![0.3], 4.0),
        (20, vec![0.05], 1.2),
        (4, vec![0.2, 0.6], 1.3),
        (8, vec![0.2, 0.6], 2.0),
        (12, vec![0.2, 0.6], 6.0),
        (3, vec![0.2, 0.3, 0.5], 2.0),
        (6, vec![0.2, 0.3, 0.5], 1.1),
        (10, vec![0.2, 0.3, 0.5], 2.0),
        (3, vec![0.1, 0.2, 0.3, 0.4], 3.0),
        (5, vec![0.1, 0.2, 0.3, 0.4], 1.5),
    ];
    let multi: Vec<(u64, Vec<f64>, f64)> = vec![
        (6, vec![0.5, 0.5], 1.5),
        (12, vec![0.5, 0.5], 2.5),
        (8, vec![0.2, 0.3, 0.5], 2.0),
        (12, vec![0.2, 0.3, 0.5], 1.2),
        (10, vec![0.1, 0.2, 0.3, 0.4], 2.0),
        (12, vec![0.7, 0.1, 0.1, 0.1], 1.5),
    ];
    let mut out = Vec::new();
    for (counts, list) in [(CountModel::Independent, pick(&indep, quick)), (CountModel::Multinomial, pick(&multi, quick))] {
        for (n, mu, gamma) in list {
            let m = mu.len();
            let mut latents = vec![LatentLaw::two_state_bernoulli(m)];
            if m <= 2 || counts == CountModel::Multinomial {
                latents.push(three_point(m));
            }
            for latent in latents {
                for regime in [TailRegime::Unified, TailRegime::Wide] {
                    let mut s = tail_spec(n, mu.clone(), gamma, latent.clone(), counts, regime);
                    spread_t(&mut s, &fractions);
                    out.push(s);
                }
            }
        }
    }
    out
}

fn mc_checks(quick: bool, trials: usize, seed: u64, out: &mut Vec<CheckOutcome>) -> Result<()> {
    if trials < 10_000 {
        return Err(Error::param("trials", "sampled suites need at least 10^4 trials"));
    }
    let mut stream = 0u64;
    let mut next_seed = || {
        stream += 1;
        crate::seed::derive(seed, 100, stream)
    };

    // tail bound over (m, n, mu, gamma, t)
    for mut spec in tail_configs_mc(quick) {
        spec.trials = trials;
        spec.seed = next_seed();
        out.extend(hoeffding_conditional_check(&spec)?);
    }

    // squared-sum mgf beyond enumeration
    for &n in &pick(&[30u64, 100, 500], quick) {
        for &nu in &[0.01, 0.1] {
            for &c in &[1.5, 3.0] {
                let max = mgf_lambda_max(n, nu, c, MgfRange::Regime).unwrap_or(1.0 / (n * n) as f64);
                for frac in [0.5, 1.0] {
                    let mut s = MgfCheckSpec::bernoulli(n, nu, c, frac * max);
                    s.trials = trials;
                    s.seed = next_seed();
                    out.push(mgf_square_check(&s)?);
                }
            }
        }
    }
    let continuous = |nu: f64| {
        vec![
            UnitDist::Uniform { lo: 0.0, hi: 2.0 * nu },
            UnitDist::Beta { a: 0.5, b: 0.5 / nu - 0.5 },
        ]
    };
    for &n in &[5u64, 30] {
        for &nu in &[0.1, 0.3] {
            let laws = continuous(nu);
            let mut s = MgfCheckSpec::bernoulli(n, nu, 2.0, mgf_lambda_max(n, nu, 2.0, MgfRange::Regime).unwrap_or(0.01));
            s.laws = Some((0..n as usize).map(|j| laws[j % 2].clone()).collect());
            s.trials = trials;
            s.seed = next_seed();
            out.push(mgf_square_check(&s)?);
        }
    }

    // single-variable bounds with continuous laws
    for &(a, b) in &[(0.0, 1.0), (1.0, 2.0)] {
        for &(c, nu) in &[(2.0, 0.2), (1.5, 0.3), (4.0, 0.3)] {
            let lambda = exp_mix_lambda_max(a, b, c, nu).unwrap_or(3.0);
            for law in continuous(nu) {
                out.push(exp_mix_check(&ExpMixSpec {
                    law,
                    trials,
                    seed: next_seed(),
                    ..ExpMixSpec::bernoulli(a, b, c, nu, lambda)
                })?);
            }
        }
    }

    // conditional Hoeffding lemma with continuous branches
    let law = ConditionalLaw {
        a: -1.0,
        b: 2.0,
        branches: vec![
            UnitDist::Uniform { lo: 0.0, hi: 1.0 },
            UnitDist::Beta { a: 0.3, b: 0.3 },
            UnitDist::Beta { a: 5.0, b: 1.0 },
        ],
    };
    out.extend(hoeffding_lemma_conditional_check(&law, &[-3.0, -0.5, 0.5, 3.0], trials, next_seed())?);

    // squared proportions
    let skewed = |k: usize| {
        let mut p = vec![0.01 / (k - 1) as f64; k - 1];
        p.insert(0, 0.99);
        p
    };
    let geometric = |k: usize| {
        let w: Vec<f64> = (0..k).map(|i| 0.7f64.powi(i as i32)).collect();
        let s: f64 = w.iter().sum();
        w.into_iter().map(|x| x / s).collect::<Vec<_>>()
    };
    let ps = vec![vec![1.0], vec![0.1; 10], skewed(10), geometric(20), vec![0.02; 50]];
    for p in pick(&ps, quick) {
        for &n in &[50u64, 1000] {
            for &delta in &[0.05, 0.2] {
                out.push(multinomial_square_check(n, &p, delta, trials, next_seed())?.outcome);
            }
            let params = BoundParams::with_gamma(p.len(), 0.2, 1.0, 1.5, 1.0)?;
            out.push(uhat_dominance_check(n, &p, &params, trials, next_seed())?.outcome);
        }
    }
    Ok(())
}

fn tail_configs_mc(quick: bool) -> Vec<TailCheckSpec> {
    let fractions = [0.25, 0.5, 1.0];
    let base: Vec<(u64, Vec<f64>, f64)> = vec![
        (10, vec![0.2, 0.3, 0.5], 2.0),
        (50, vec![0.5], 1.05),
        (50, vec![0.1, 0.9], 1.5),
        (200, vec![0.05; 5], 1.2),
        (200, vec![0.3, 0.3, 0.4], 4.0),
        (1000, vec![0.1; 10], 1.05),
        (1000, vec![0.02, 0.08, 0.9], 1.5),
        (100, vec![0.01, 0.04, 0.15, 0.3, 0.5], 3.0),
        (30, vec![0.25; 4], 1.01),
        (500, vec![0.5, 0.5], 2.0),
        (20, vec![0.5, 0.5], 1.5),
        (40, vec![0.1, 0.2, 0.3], 1.1),
        (100, vec![0.9], 1.2),
        (300, vec![0.01; 8], 2.0),
        (2000, vec![0.005, 0.01, 0.02], 1.02),
        (25, vec![0.3, 0.7], 5.0),
    ];
    let multi: Vec<(u64, Vec<f64>, f64)> = vec![
        (10, vec![0.2, 0.3, 0.5], 2.0),
        (100, vec![0.1; 10], 1.2),
        (1000, vec![0.5, 0.25, 0.25], 1.05),
        (200, vec![0.7, 0.1, 0.1, 0.1], 3.0),
    ];
    let mut out = Vec::new();
    for (counts, list) in [(CountModel::Independent, pick(&base, quick)), (CountModel::Multinomial, pick(&multi, quick))] {
        for (i, (n, mu, gamma)) in list.into_iter().enumerate() {
            let m = mu.len();
            let mut latents = vec![LatentLaw::two_state_bernoulli(m)];
            if n <= 50 {
                latents.push(LatentLaw {
                    states: vec![
                        (0.5, vec![UnitDist::Uniform { lo: 0.0, hi: 1.0 }; m]),
                        (0.5, vec![UnitDist::Beta { a: 0.4, b: 0.4 }; m]),
                    ],
                });
            }
            let regime = if i % 2 == 0 { TailRegime::Unified } else { TailRegime::Wide };
            for latent in latents {
                let mut s = tail_spec(n, mu.clone(), gamma, latent, counts, regime);
                spread_t(&mut s, &fractions);
                out.push(s);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_parse() {
        assert_eq!("full".parse::<Suite>().unwrap(), Suite::Full);
        assert!("everything".parse::<Suite>().is_err());
    }

    #[test]
    fn mc_grid_is_large_enough() {
        let t: usize = tail_configs_mc(false)
            .iter()
            .filter(|s| s.counts == CountModel::Independent)
            .map(|s| s.t_grid.len())
            .sum();
        assert!(t >= 50, "{t}");
    }

    #[test]
    fn quick_suite_passes() {
        let r = run_suite(Suite::Quick, 10_000, 1).unwrap();
        let failed: Vec<_> = r.iter().filter(|o| !o.pass).collect();
        assert!(failed.is_empty(), "{failed:#?}");
    }
}
