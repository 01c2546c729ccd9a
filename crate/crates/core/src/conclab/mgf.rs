//! Moment generating function bounds for sums of small bounded variables.

use crate::error::{Error, Result};
use crate::seed::{self, streams};

use super::dist::UnitDist;
use super::{mc_mean, CheckOutcome};

/// Which admissible `lambda` interval the check enforces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MgfRange {
    /// `lambda <= ln c / (4n - 3)` for any mean bound.
    Basic,
    /// `lambda <= ln c / ((1 - c nu)(4n - 3))` when `c nu < 1`, any
    /// `lambda >= 0` when `c nu >= 1`.
    Regime,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MgfCheckSpec {
    pub n: u64,
    pub nu: f64,
    pub c: f64,
    pub lambda: f64,
    pub trials: usize,
    pub seed: u64,
    pub range: MgfRange,
    /// Per-variable laws with means at most `nu`; `None` means every
    /// variable is Bernoulli(`nu`).
    pub laws: Option<Vec<UnitDist>>,
    /// Sample even when the sum is small enough to enumerate.
    pub force_mc: bool,
}

impl MgfCheckSpec {
    pub fn bernoulli(n: u64, nu: f64, c: f64, lambda: f64) -> Self {
        Self {
            n,
            nu,
            c,
            lambda,
            trials: 0,
            seed: 0,
            range: MgfRange::Regime,
            laws: None,
            force_mc: false,
        }
    }

    fn laws(&self) -> Vec<UnitDist> {
        match &self.laws {
            Some(l) => l.clone(),
            None => vec![UnitDist::Bernoulli(self.nu); self.n as usize],
        }
    }
}

/// Largest admissible `lambda`, or `None` when every `lambda >= 0` is.
pub fn mgf_lambda_max(n: u64, nu: f64, c: f64, range: MgfRange) -> Option<f64> {
    let denom = (4 * n - 3) as f64;
    match range {
        MgfRange::Basic => Some(c.ln() / denom),
        MgfRange::Regime if c * nu >= 1.0 => None,
        MgfRange::Regime => Some(c.ln() / ((1.0 - c * nu) * denom)),
    }
}

fn regime_name(cnu: f64, range: MgfRange) -> &'static str {
    match range {
        MgfRange::Basic => "basic",
        MgfRange::Regime if cnu >= 1.0 => "large-mean",
        MgfRange::Regime => "small-mean",
    }
}

fn check_unit_params(nu: f64, c: f64, lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&nu) {
        return Err(Error::param("nu", "must lie in [0, 1]"));
    }
    if !(c >= 1.0 && c.is_finite()) {
        return Err(Error::param("c", "must be finite and at least 1"));
    }
    if !lambda.is_finite() {
        return Err(Error::param("lambda", "must be finite"));
    }
    Ok(())
}

fn check_lambda(regime: &'static str, lambda: f64, max: Option<f64>) -> Result<()> {
    if lambda < 0.0 || max.is_some_and(|m| lambda > m) {
        return Err(Error::LambdaOutOfRange {
            regime,
            lambda,
            max: max.unwrap_or(f64::INFINITY),
        });
    }
    Ok(())
}

/// Exact law of a sum of independent finitely supported variables, as
/// sorted `(value, probability)` atoms with equal values merged.
pub(crate) fn convolve(a: &[(f64, f64)], b: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = a
        .iter()
        .flat_map(|&(x, p)| b.iter().map(move |&(y, q)| (x + y, p * q)))
        .filter(|a| a.1 > 0.0)
        .collect();
    merge_atoms(&mut out);
    out
}

pub(crate) fn merge_atoms(atoms: &mut Vec<(f64, f64)>) {
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut w = 0;
    for r in 0..atoms.len() {
        if w > 0 && atoms[w - 1].0 == atoms[r].0 {
            atoms[w - 1].1 += atoms[r].1;
        } else {
            atoms[w] = atoms[r];
            w += 1;
        }
    }
    atoms.truncate(w);
}

/// Largest number of atoms an exact sum may reach before sampling is used.
const EXACT_ATOM_LIMIT: usize = 1 << 20;

fn exact_sum_law(laws: &[UnitDist]) -> Option<Vec<(f64, f64)>> {
    if laws.len() > 20 {
        return None;
    }
    let mut acc = vec![(0.0, 1.0)];
    for law in laws {
        let atoms = law.atoms()?;
        if acc.len() * atoms.len() > EXACT_ATOM_LIMIT {
            return None;
        }
        acc = convolve(&acc, &atoms);
    }
    Some(acc)
}

/// `E exp(lambda (x_1 + ... + x_n)^2) <= exp(lambda c n nu (1 + c n nu))`.
pub fn mgf_square_check(spec: &MgfCheckSpec) -> Result<CheckOutcome> {
    check_unit_params(spec.nu, spec.c, spec.lambda)?;
    if spec.n == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    let laws = spec.laws();
    if laws.len() as u64 != spec.n {
        return Err(Error::DimensionMismatch {
            expected: spec.n as usize,
            found: laws.len(),
        });
    }
    for law in &laws {
        law.validate()?;
        if law.mean() > spec.nu + 1e-15 {
            return Err(Error::invalid(format!("variable mean {} exceeds nu = {}", law.mean(), spec.nu)));
        }
    }
    let cnu = spec.c * spec.nu;
    let max = mgf_lambda_max(spec.n, spec.nu, spec.c, spec.range);
    check_lambda(regime_name(cnu, spec.range), spec.lambda, max)?;

    let n = spec.n as f64;
    let exponent = spec.lambda * spec.c * n * spec.nu * (1.0 + spec.c * n * spec.nu);
    let params = format!(
        "n={};nu={};c={};lambda={};regime={};laws={}",
        spec.n,
        spec.nu,
        spec.c,
        spec.lambda,
        regime_name(cnu, spec.range),
        if spec.laws.is_some() { "mixed" } else { "bernoulli" }
    );
    let exact = if spec.force_mc { None } else { exact_sum_law(&laws) };
    match exact {
        Some(atoms) => {
            let est_m1: f64 = atoms.iter().map(|&(y, p)| p * (spec.lambda * y * y).exp_m1()).sum();
            Ok(exact_m1("mgf_square", params + ";mode=exact", est_m1, exponent.exp_m1()))
        }
        None => {
            if spec.trials < 2 {
                return Err(Error::param("trials", "sampling needs at least 2 trials"));
            }
            let lambda = spec.lambda;
            let homogeneous = spec.laws.is_none();
            let est = mc_mean(spec.trials, |i| {
                let mut rng = seed::rng(spec.seed, streams::MGF, i as u64);
                let y = if homogeneous {
                    laws[0].sample_sum(spec.n, &mut rng)
                } else {
                    laws.iter().map(|l| l.sample(&mut rng)).sum()
                };
                (lambda * y * y).exp()
            });
            let bound = exponent.exp();
            let slack = 3.0 * est.stderr * bound / est.mean;
            Ok(CheckOutcome::sampled(
                "mgf_square",
                format!("{params};mode=mc;trials={}", spec.trials),
                est.mean,
                bound,
                slack,
            ))
        }
    }
}

/// Exact comparison carried out on `E - 1` and `bound - 1` so values near
/// one keep their precision.
fn exact_m1(check: &str, params: String, est_m1: f64, bound_m1: f64) -> CheckOutcome {
    CheckOutcome {
        check: check.to_string(),
        params,
        estimate: 1.0 + est_m1,
        bound: 1.0 + bound_m1,
        margin: bound_m1 - est_m1,
        pass: est_m1 <= bound_m1,
        exact: true,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpMixSpec {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub nu: f64,
    pub lambda: f64,
    pub law: UnitDist,
    pub trials: usize,
    pub seed: u64,
}

impl ExpMixSpec {
    /// Bernoulli(`nu`) variable, checked exactly.
    pub fn bernoulli(a: f64, b: f64, c: f64, nu: f64, lambda: f64) -> Self {
        Self {
            a,
            b,
            c,
            nu,
            lambda,
            law: UnitDist::Bernoulli(nu),
            trials: 0,
            seed: 0,
        }
    }
}

/// `None` means every `lambda >= 0` is admissible.
pub fn exp_mix_lambda_max(a: f64, b: f64, c: f64, nu: f64) -> Option<f64> {
    if c * nu >= 1.0 || a + b == 0.0 {
        None
    } else {
        Some(c.ln() / ((1.0 - c * nu) * (a + b)))
    }
}

/// `E exp(lambda (a X^2 + b X)) <= exp(c (a + b) nu lambda)`.
pub fn exp_mix_check(spec: &ExpMixSpec) -> Result<CheckOutcome> {
    check_unit_params(spec.nu, spec.c, spec.lambda)?;
    if !(spec.a >= 0.0 && spec.b >= 0.0 && spec.a.is_finite() && spec.b.is_finite()) {
        return Err(Error::param("a, b", "must be finite and nonnegative"));
    }
    spec.law.validate()?;
    if spec.law.mean() > spec.nu + 1e-15 {
        return Err(Error::invalid(format!("variable mean {} exceeds nu = {}", spec.law.mean(), spec.nu)));
    }
    let cnu = spec.c * spec.nu;
    let regime = if cnu >= 1.0 { "large-mean" } else { "small-mean" };
    check_lambda(regime, spec.lambda, exp_mix_lambda_max(spec.a, spec.b, spec.c, spec.nu))?;

    let (a, b, lambda) = (spec.a, spec.b, spec.lambda);
    let exponent = spec.c * (a + b) * spec.nu * lambda;
    let params = format!("a={a};b={b};c={};nu={};lambda={lambda};law={:?}", spec.c, spec.nu, spec.law);
    match spec.law.atoms() {
        Some(atoms) => {
            let est_m1: f64 = atoms.iter().map(|&(x, p)| p * (lambda * (a * x * x + b * x)).exp_m1()).sum();
            Ok(exact_m1("exp_mix", params + ";mode=exact", est_m1, exponent.exp_m1()))
        }
        None => {
            if spec.trials < 2 {
                return Err(Error::param("trials", "sampling needs at least 2 trials"));
            }
            let est = mc_mean(spec.trials, |i| {
                let x = spec.law.sample(&mut seed::rng(spec.seed, streams::EXP_MIX, i as u64));
                (lambda * (a * x * x + b * x)).exp()
            });
            let bound = exponent.exp();
            Ok(CheckOutcome::sampled(
                "exp_mix",
                format!("{params};mode=mc;trials={}", spec.trials),
                est.mean,
                bound,
                3.0 * est.stderr * bound / est.mean,
            ))
        }
    }
}
