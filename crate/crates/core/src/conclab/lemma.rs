//! Hoeffding's lemma with conditioning:
//! `E[exp(lambda (X - E[X|Y])) | Y] <= exp(lambda^2 (b - a)^2 / 8)`.

use crate::error::{Error, Result};
use crate::seed::{self, streams};

use super::dist::UnitDist;
use super::{mc_mean, CheckOutcome};

/// `X | Y = y` is `a + (b - a) D_y` for each branch law `D_y` on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalLaw {
    pub a: f64,
    pub b: f64,
    pub branches: Vec<UnitDist>,
}

/// One outcome per (branch, lambda). Finite branch laws are evaluated
/// exactly; the rest use `trials` samples.
pub fn hoeffding_lemma_conditional_check(
    law: &ConditionalLaw,
    lambda_grid: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<CheckOutcome>> {
    let (a, b) = (law.a, law.b);
    if !(a.is_finite() && b.is_finite() && a <= b) {
        return Err(Error::invalid("need finite a <= b"));
    }
    if law.branches.is_empty() {
        return Err(Error::invalid("need at least one conditioning branch"));
    }
    if lambda_grid.iter().any(|l| !l.is_finite()) {
        return Err(Error::param("lambda", "must be finite"));
    }
    let width = b - a;
    let mut out = Vec::with_capacity(law.branches.len() * lambda_grid.len());
    for (y, d) in law.branches.iter().enumerate() {
        d.validate()?;
        let mu = a + width * d.mean();
        for (li, &lambda) in lambda_grid.iter().enumerate() {
            let exponent = lambda * lambda * width * width / 8.0;
            let params = format!("a={a};b={b};y={y};law={d:?};lambda={lambda}");
            let outcome = match d.atoms() {
                Some(atoms) => {
                    let est_m1: f64 = atoms
                        .iter()
                        .map(|&(v, p)| p * (lambda * (a + width * v - mu)).exp_m1())
                        .sum();
                    let bound_m1 = exponent.exp_m1();
                    CheckOutcome {
                        check: "hoeffding_lemma_conditional".into(),
                        params: params + ";mode=exact",
                        estimate: 1.0 + est_m1,
                        bound: 1.0 + bound_m1,
                        margin: bound_m1 - est_m1,
                        pass: est_m1 <= bound_m1,
                        exact: true,
                    }
                }
                None => {
                    if trials < 2 {
                        return Err(Error::param("trials", "sampling needs at least 2 trials"));
                    }
                    let stream = (y * lambda_grid.len() + li) as u64;
                    let est = mc_mean(trials, |i| {
                        let mut rng = seed::rng(seed, streams::LEMMA, (stream << 32) | i as u64);
                        (lambda * (a + width * d.sample(&mut rng) - mu)).exp()
                    });
                    CheckOutcome::sampled(
                        "hoeffding_lemma_conditional",
                        format!("{params};mode=mc;trials={trials}"),
                        est.mean,
                        exponent.exp(),
                        3.0 * est.stderr,
                    )
                }
            };
            out.push(outcome);
        }
    }
    Ok(out)
}
