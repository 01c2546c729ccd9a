//! Hoeffding-type tail bound for sums of conditionally independent bounded
//! variables whose counts are themselves random.
//!
//! The instance mirrors how the bound is applied: cell `i` receives `v_i`
//! samples, a latent state `h` fixes a loss law per cell, `X_i` is the sum of
//! the `v_i` losses and `E_i = v_i * E[loss | h, cell i]`. The claim checked is
//! `Pr(sum X_i - sum E_i >= t) <= exp(-2 t^2 / u)` and the same for the lower
//! tail, with `u = sum gamma n mu_i (1 + gamma n mu_i)`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::exec;
use crate::seed::{self, streams};

use super::dist::{binomial_pmf, multinomial_outcomes, sample_binomial, sample_multinomial, UnitDist};
use super::mgf::{convolve, merge_atoms};
use super::{fmt_list, frequency_slack, CheckOutcome};

/// How the cell counts `v_i` are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountModel {
    /// Independent `Binomial(n, mu_i)`, the setting the inequality is stated for.
    Independent,
    /// Joint `Multinomial(n, mu)`, the setting the bound actually uses.
    Multinomial,
}

impl CountModel {
    fn name(self) -> &'static str {
        match self {
            CountModel::Independent => "independent",
            CountModel::Multinomial => "multinomial",
        }
    }
}

/// Admissible deviation range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailRegime {
    /// `t <= u sqrt(ln gamma / (8n - 6))`, or any `t` once `gamma mu_min >= 1`.
    Unified,
    /// `t <= u sqrt(ln gamma / (2 (1 - gamma mu_min)(4n - 3)))`, or any `t`
    /// once `gamma mu_min >= 1`.
    Wide,
}

/// Latent states with their probabilities and one loss law per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentLaw {
    pub states: Vec<(f64, Vec<UnitDist>)>,
}

impl LatentLaw {
    /// Two equally likely states with Bernoulli losses whose rates differ
    /// across cells and states.
    pub fn two_state_bernoulli(m: usize) -> Self {
        let rates = |shift: f64| {
            (0..m)
                .map(|i| UnitDist::Bernoulli((shift + 0.6 * (i as f64 + 0.5) / m as f64).min(1.0)))
                .collect()
        };
        Self {
            states: vec![(0.5, rates(0.1)), (0.5, rates(0.35))],
        }
    }

    /// Every cell has the same loss law in a single state.
    pub fn constant(m: usize, law: UnitDist) -> Self {
        Self {
            states: vec![(1.0, vec![law; m])],
        }
    }

    fn validate(&self, m: usize) -> Result<()> {
        if self.states.is_empty() {
            return Err(Error::invalid("latent law needs at least one state"));
        }
        let total: f64 = self.states.iter().map(|s| s.0).sum();
        if (total - 1.0).abs() > 1e-12 || self.states.iter().any(|s| s.0 < 0.0) {
            return Err(Error::invalid("latent state probabilities must sum to 1"));
        }
        for (_, laws) in &self.states {
            if laws.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: laws.len(),
                });
            }
            for l in laws {
                l.validate()?;
            }
        }
        Ok(())
    }

    fn sample_state<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (s, (p, _)) in self.states.iter().enumerate() {
            acc += p;
            if u < acc {
                return s;
            }
        }
        self.states.len() - 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailCheckSpec {
    pub n: u64,
    /// Cell means `mu_i`; `m = mu.len()`.
    pub mu: Vec<f64>,
    pub gamma: f64,
    pub t_grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub latent: LatentLaw,
    pub counts: CountModel,
    pub regime: TailRegime,
    pub force_mc: bool,
}

impl TailCheckSpec {
    pub fn m(&self) -> usize {
        self.mu.len()
    }

    pub fn u(&self) -> f64 {
        let gn = self.gamma * self.n as f64;
        self.mu.iter().map(|&m| gn * m * (1.0 + gn * m)).sum()
    }
}

/// Largest admissible deviation, or `None` when every `t >= 0` is.
pub fn t_max(spec: &TailCheckSpec) -> Option<f64> {
    let mu_min = spec.mu.iter().copied().fold(f64::INFINITY, f64::min);
    if spec.gamma * mu_min >= 1.0 {
        return None;
    }
    let u = spec.u();
    let lg = spec.gamma.ln();
    let four = (4 * spec.n - 3) as f64;
    Some(match spec.regime {
        TailRegime::Unified => u * (lg / (2.0 * four)).sqrt(),
        TailRegime::Wide => u * (lg / (2.0 * (1.0 - spec.gamma * mu_min) * four)).sqrt(),
    })
}

/// Largest atom count an exact evaluation may build per latent state.
const EXACT_ATOM_LIMIT: usize = 4 << 20;

/// Two outcomes (upper and lower tail) per `t` in the grid.
pub fn hoeffding_conditional_check(spec: &TailCheckSpec) -> Result<Vec<CheckOutcome>> {
    validate(spec)?;
    let u = spec.u();
    let exact = if spec.force_mc { None } else { exact_tails(spec)? };
    let base = format!(
        "m={};n={};mu={};gamma={};u={u};counts={};regime={:?}",
        spec.m(),
        spec.n,
        fmt_list(&spec.mu),
        spec.gamma,
        spec.counts.name(),
        spec.regime
    );
    let mut out = Vec::with_capacity(2 * spec.t_grid.len());
    match exact {
        Some(tails) => {
            for (&t, (up, lo)) in spec.t_grid.iter().zip(tails) {
                let bound = (-2.0 * t * t / u).exp();
                for (side, p) in [("upper", up), ("lower", lo)] {
                    out.push(CheckOutcome::exact(
                        "hoeffding_conditional",
                        format!("{base};t={t};side={side};mode=exact"),
                        p,
                        bound,
                    ));
                }
            }
        }
        None => {
            if spec.trials < 2 {
                return Err(Error::param("trials", "sampling needs at least 2 trials"));
            }
            let devs = exec::map_range(spec.trials, |i| sample_deviation(spec, i as u64));
            for &t in &spec.t_grid {
                let bound = (-2.0 * t * t / u).exp();
                let slack = frequency_slack(bound, spec.trials);
                let up = devs.iter().filter(|&&d| d >= t).count() as f64 / spec.trials as f64;
                let lo = devs.iter().filter(|&&d| -d >= t).count() as f64 / spec.trials as f64;
                for (side, p) in [("upper", up), ("lower", lo)] {
                    out.push(CheckOutcome::sampled(
                        "hoeffding_conditional",
                        format!("{base};t={t};side={side};mode=mc;trials={}", spec.trials),
                        p,
                        bound,
                        slack,
                    ));
                }
            }
        }
    }
    Ok(out)
}

fn validate(spec: &TailCheckSpec) -> Result<()> {
    if spec.n == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    if spec.mu.is_empty() {
        return Err(Error::param("mu", "need at least one variable"));
    }
    if spec.mu.iter().any(|m| !(0.0..=1.0).contains(m)) {
        return Err(Error::param("mu", "means must lie in [0, 1]"));
    }
    if spec.counts == CountModel::Multinomial && (spec.mu.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return Err(Error::param("mu", "multinomial cell masses must sum to 1"));
    }
    if !(spec.gamma >= 1.0 && spec.gamma.is_finite()) {
        return Err(Error::param("gamma", "must be finite and at least 1"));
    }
    spec.latent.validate(spec.m())?;
    let max = t_max(spec);
    for &t in &spec.t_grid {
        // the exponential bound is below one for every t != 0, so negative
        // deviations can never satisfy it; only t >= 0 is meaningful
        if !t.is_finite() || t < 0.0 || max.is_some_and(|m| t > m) {
            return Err(Error::DeviationOutOfRange {
                t,
                max: max.unwrap_or(f64::INFINITY),
            });
        }
    }
    Ok(())
}

/// Law of `sum_{j < v} loss_j - v * mean`, for the given count law over `v`.
fn cell_law(count_pmf: &[f64], law: &UnitDist) -> Option<Vec<(f64, f64)>> {
    let atoms = law.atoms()?;
    let mean = law.mean();
    let mut sum_law = vec![(0.0, 1.0)];
    let mut out = Vec::new();
    for (v, &pv) in count_pmf.iter().enumerate() {
        if v > 0 {
            sum_law = convolve(&sum_law, &atoms);
        }
        if pv > 0.0 {
            let centre = v as f64 * mean;
            out.extend(sum_law.iter().map(|&(s, p)| (s - centre, pv * p)));
        }
    }
    merge_atoms(&mut out);
    Some(out)
}

/// Point mass of a count at `v`.
fn point(v: u64) -> Vec<f64> {
    let mut pmf = vec![0.0; v as usize + 1];
    pmf[v as usize] = 1.0;
    pmf
}

/// Exact `(upper, lower)` tail probabilities per `t`, or `None` when the
/// law is not finite or too large to enumerate.
fn exact_tails(spec: &TailCheckSpec) -> Result<Option<Vec<(f64, f64)>>> {
    let finite = spec
        .latent
        .states
        .iter()
        .all(|(_, laws)| laws.iter().all(|l| l.atoms().is_some()));
    if !finite || spec.n > 20 {
        return Ok(None);
    }
    if spec.counts == CountModel::Multinomial && (spec.m() > 4 || spec.n > 12) {
        return Ok(None);
    }
    let mut tails = vec![(0.0, 0.0); spec.t_grid.len()];
    let mut add = |weight: f64, laws: Vec<Vec<(f64, f64)>>| -> bool {
        let size: f64 = laws.iter().map(|l| l.len() as f64).product();
        if size > EXACT_ATOM_LIMIT as f64 {
            return false;
        }
        let joint = laws.iter().skip(1).fold(laws[0].clone(), |acc, l| convolve(&acc, l));
        for (tail, &t) in tails.iter_mut().zip(&spec.t_grid) {
            for &(d, p) in &joint {
                if d >= t {
                    tail.0 += weight * p;
                }
                if -d >= t {
                    tail.1 += weight * p;
                }
            }
        }
        true
    };
    for (ps, laws) in &spec.latent.states {
        match spec.counts {
            CountModel::Independent => {
                let cells: Vec<_> = spec
                    .mu
                    .iter()
                    .zip(laws)
                    .map(|(&mu, law)| cell_law(&binomial_pmf(spec.n, mu), law).expect("finite"))
                    .collect();
                if !add(*ps, cells) {
                    return Ok(None);
                }
            }
            CountModel::Multinomial => {
                for (v, pv) in multinomial_outcomes(spec.n, &spec.mu) {
                    if pv == 0.0 {
                        continue;
                    }
                    let cells: Vec<_> = v
                        .iter()
                        .zip(laws)
                        .map(|(&vi, law)| cell_law(&point(vi), law).expect("finite"))
                        .collect();
                    if !add(ps * pv, cells) {
                        return Ok(None);
                    }
                }
            }
        }
    }
    Ok(Some(
        tails.into_iter().map(|(a, b)| (a.min(1.0), b.min(1.0))).collect(),
    ))
}

fn sample_deviation(spec: &TailCheckSpec, trial: u64) -> f64 {
    let mut rng = seed::rng(spec.seed, streams::TAIL, trial);
    let laws = &spec.latent.states[spec.latent.sample_state(&mut rng)].1;
    let counts = match spec.counts {
        CountModel::Independent => spec.mu.iter().map(|&mu| sample_binomial(spec.n, mu, &mut rng)).collect(),
        CountModel::Multinomial => sample_multinomial(spec.n, &spec.mu, &mut rng),
    };
    counts
        .iter()
        .zip(laws)
        .map(|(&v, law)| law.sample_sum(v, &mut rng) - v as f64 * law.mean())
        .sum()
}
