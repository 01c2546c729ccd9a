//! Bounded laws on `[0, 1]` used to instantiate the inequalities.

use rand::Rng;
use rand_distr::{Beta, Binomial, Distribution};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum UnitDist {
    Bernoulli(f64),
    Uniform { lo: f64, hi: f64 },
    /// Finite support: `(value, probability)` pairs.
    Discrete(Vec<(f64, f64)>),
    Beta { a: f64, b: f64 },
}

impl UnitDist {
    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        let ok = match self {
            UnitDist::Bernoulli(p) => unit(*p),
            UnitDist::Uniform { lo, hi } => unit(*lo) && unit(*hi) && lo <= hi,
            UnitDist::Discrete(atoms) => {
                !atoms.is_empty()
                    && atoms.iter().all(|&(v, p)| unit(v) && p >= 0.0)
                    && (atoms.iter().map(|a| a.1).sum::<f64>() - 1.0).abs() < 1e-12
            }
            UnitDist::Beta { a, b } => *a > 0.0 && *b > 0.0 && a.is_finite() && b.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("{self:?} is not a valid law on [0, 1]")))
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            UnitDist::Bernoulli(p) => *p,
            UnitDist::Uniform { lo, hi } => 0.5 * (lo + hi),
            UnitDist::Discrete(atoms) => atoms.iter().map(|&(v, p)| v * p).sum(),
            UnitDist::Beta { a, b } => a / (a + b),
        }
    }

    /// Finite support, when there is one.
    pub fn atoms(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            UnitDist::Bernoulli(p) => Some(vec![(0.0, 1.0 - p), (1.0, *p)]),
            UnitDist::Discrete(atoms) => Some(atoms.clone()),
            UnitDist::Uniform { lo, hi } if lo == hi => Some(vec![(*lo, 1.0)]),
            _ => None,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            UnitDist::Bernoulli(p) => f64::from(rng.random::<f64>() < *p),
            UnitDist::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            UnitDist::Discrete(atoms) => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for &(v, p) in atoms {
                    acc += p;
                    if u < acc {
                        return v;
                    }
                }
                atoms.last().map_or(0.0, |a| a.0)
            }
            UnitDist::Beta { a, b } => Beta::new(*a, *b).expect("validated").sample(rng),
        }
    }

    /// Sum of `count` i.i.d. draws; Bernoulli sums use one binomial draw.
    pub fn sample_sum<R: Rng + ?Sized>(&self, count: u64, rng: &mut R) -> f64 {
        match self {
            UnitDist::Bernoulli(p) => sample_binomial(count, *p, rng) as f64,
            _ => (0..count).map(|_| self.sample(rng)).sum(),
        }
    }
}

pub fn sample_binomial<R: Rng + ?Sized>(n: u64, p: f64, rng: &mut R) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p).expect("p in (0, 1)").sample(rng)
}

/// Multinomial draw by sequential conditional binomials.
pub fn sample_multinomial<R: Rng + ?Sized>(n: u64, p: &[f64], rng: &mut R) -> Vec<u64> {
    let mut left = n;
    let mut mass = 1.0f64;
    let mut out = Vec::with_capacity(p.len());
    for (i, &pi) in p.iter().enumerate() {
        let draw = if i + 1 == p.len() {
            left
        } else if mass <= 0.0 {
            0
        } else {
            sample_binomial(left, (pi / mass).clamp(0.0, 1.0), rng)
        };
        out.push(draw);
        left -= draw;
        mass -= pi;
    }
    out
}

/// Binomial pmf over `0..=n` for moderate `n` (exact coefficients up to ~60).
pub fn binomial_pmf(n: u64, p: f64) -> Vec<f64> {
    let q = 1.0 - p;
    let mut coef = 1.0f64;
    (0..=n)
        .map(|k| {
            if k > 0 {
                coef = coef * (n - k + 1) as f64 / k as f64;
            }
            coef * p.powi(k as i32) * q.powi((n - k) as i32)
        })
        .collect()
}

/// Every composition of `n` into `k` nonnegative parts, with its
/// multinomial probability under `p`.
pub fn multinomial_outcomes(n: u64, p: &[f64]) -> Vec<(Vec<u64>, f64)> {
    fn rec(left: u64, p: &[f64], prefix: &mut Vec<u64>, prob: f64, out: &mut Vec<(Vec<u64>, f64)>) {
        if p.len() == 1 {
            prefix.push(left);
            out.push((prefix.clone(), prob * p[0].powi(left as i32)));
            prefix.pop();
            return;
        }
        // prob carries n! / (prod parts!) built incrementally via binomials
        let mut coef = 1.0f64;
        for take in 0..=left {
            if take > 0 {
                coef = coef * (left - take + 1) as f64 / take as f64;
            }
            prefix.push(take);
            rec(left - take, &p[1..], prefix, prob * coef * p[0].powi(take as i32), out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if p.is_empty() {
        return out;
    }
    rec(n, p, &mut Vec::with_capacity(p.len()), 1.0, &mut out);
    out
}
