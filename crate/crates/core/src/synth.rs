//! Synthetic mixtures with known true error, for end-to-end coverage runs.
//!
//! A mixture has weighted Gaussian or uniform components (axis-aligned), each
//! carrying a binary class label. A fixed threshold or linear rule
//! classifies points and the loss is 0-1, so the true error is a weighted
//! sum of normal CDF values wherever the geometry allows it.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use libm::erfc;

use crate::augment;
use crate::bound::{self, BoundParams, GeneralParams};
use crate::error::{Error, Result};
use crate::exec;
use crate::partition::{self, FeatureTable, IntervalPartition};
use crate::seed::{self, streams};
use crate::table::SampleTable;

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    /// Independent coordinates with these means and standard deviations.
    Gaussian { mean: Vec<f64>, sd: Vec<f64> },
    /// Uniform on the box `[lo, hi]`.
    Uniform { lo: Vec<f64>, hi: Vec<f64> },
}

impl Shape {
    fn dim(&self) -> usize {
        match self {
            Shape::Gaussian { mean, .. } => mean.len(),
            Shape::Uniform { lo, .. } => lo.len(),
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<f64>) {
        match self {
            Shape::Gaussian { mean, sd } => {
                for (m, s) in mean.iter().zip(sd) {
                    let z: f64 = StandardNormal.sample(rng);
                    out.push(m + s * z);
                }
            }
            Shape::Uniform { lo, hi } => {
                for (l, h) in lo.iter().zip(hi) {
                    out.push(l + (h - l) * rng.random::<f64>());
                }
            }
        }
    }

    /// `Pr(x_j < c)`.
    fn marginal_cdf(&self, j: usize, c: f64) -> f64 {
        match self {
            Shape::Gaussian { mean, sd } => normal_cdf((c - mean[j]) / sd[j]),
            Shape::Uniform { lo, hi } => ((c - lo[j]) / (hi[j] - lo[j])).clamp(0.0, 1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub weight: f64,
    /// Class label, 0 or 1.
    pub label: u8,
    pub shape: Shape,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Classifier {
    /// Predict 1 iff `x[coord] >= cut`.
    Threshold { coord: usize, cut: f64 },
    /// Predict 1 iff `w . x + b >= 0`.
    Linear { w: Vec<f64>, b: f64 },
}

impl Classifier {
    pub fn predict(&self, x: &[f64]) -> u8 {
        let score = match self {
            Classifier::Threshold { coord, cut } => x[*coord] - cut,
            Classifier::Linear { w, b } => w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + b,
        };
        u8::from(score >= 0.0)
    }

    /// Single-coordinate form `(coord, cut, positive_above)` when there is one.
    fn axis_rule(&self) -> Option<(usize, f64, bool)> {
        match self {
            Classifier::Threshold { coord, cut } => Some((*coord, *cut, true)),
            Classifier::Linear { w, b } => {
                let nz: Vec<usize> = (0..w.len()).filter(|&j| w[j] != 0.0).collect();
                match nz.as_slice() {
                    [j] => Some((*j, -b / w[*j], w[*j] > 0.0)),
                    _ => None,
                }
            }
        }
    }

    /// `Pr(predict 1)` under one component, when available in closed form.
    fn positive_rate(&self, shape: &Shape) -> Option<f64> {
        if let (Classifier::Linear { w, b }, Shape::Gaussian { mean, sd }) = (self, shape) {
            let m = w.iter().zip(mean).map(|(a, b)| a * b).sum::<f64>() + b;
            let s = w.iter().zip(sd).map(|(a, s)| a * a * s * s).sum::<f64>().sqrt();
            return Some(if s == 0.0 { f64::from(m >= 0.0) } else { normal_cdf(m / s) });
        }
        if let Classifier::Linear { w, b } = self {
            if w.iter().all(|&x| x == 0.0) {
                return Some(f64::from(*b >= 0.0));
            }
        }
        let (j, cut, above) = self.axis_rule()?;
        let below = shape.marginal_cdf(j, cut);
        Some(if above { 1.0 - below } else { below })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureSpec {
    pub components: Vec<Component>,
    pub classifier: Classifier,
}

impl MixtureSpec {
    /// Equal mixture of `N(-1, 1)` (class 0) and `N(1, 1)` (class 1)
    /// classified by the threshold 0; true error `Phi(-1)`.
    pub fn symmetric_gaussians() -> Self {
        let g = |m: f64, label| Component {
            weight: 0.5,
            label,
            shape: Shape::Gaussian {
                mean: vec![m],
                sd: vec![1.0],
            },
        };
        Self {
            components: vec![g(-1.0, 0), g(1.0, 1)],
            classifier: Classifier::Threshold { coord: 0, cut: 0.0 },
        }
    }

    pub fn dim(&self) -> usize {
        self.components.first().map_or(0, |c| c.shape.dim())
    }

    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(Error::invalid("a mixture needs at least one component"));
        }
        let d = self.dim();
        if d == 0 {
            return Err(Error::invalid("components need at least one coordinate"));
        }
        let total: f64 = self.components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-9 || self.components.iter().any(|c| c.weight.is_nan() || c.weight < 0.0) {
            return Err(Error::invalid(format!("component weights must be nonnegative and sum to 1, got {total}")));
        }
        for c in &self.components {
            if c.label > 1 {
                return Err(Error::invalid("class labels must be 0 or 1"));
            }
            let ok = match &c.shape {
                Shape::Gaussian { mean, sd } => {
                    mean.len() == d
                        && sd.len() == d
                        && mean.iter().all(|m| m.is_finite())
                        && sd.iter().all(|s| *s > 0.0 && s.is_finite())
                }
                Shape::Uniform { lo, hi } => {
                    lo.len() == d
                        && hi.len() == d
                        && lo.iter().zip(hi).all(|(l, h)| l.is_finite() && h.is_finite() && l < h)
                }
            };
            if !ok {
                return Err(Error::invalid(format!(
                    "component {:?} must have dimension {d}, positive spread and finite parameters",
                    c.shape
                )));
            }
        }
        match &self.classifier {
            Classifier::Threshold { coord, cut } if *coord < d && cut.is_finite() => Ok(()),
            Classifier::Linear { w, b } if w.len() == d && b.is_finite() && w.iter().all(|x| x.is_finite()) => Ok(()),
            other => Err(Error::invalid(format!("classifier {other:?} does not fit dimension {d}"))),
        }
    }

    /// Draw `n` labelled points; returns features and their 0-1 losses.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> (FeatureTable, Vec<u8>) {
        let d = self.dim();
        let mut data = Vec::with_capacity(n * d);
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            let c = self.pick(rng);
            c.shape.sample(rng, &mut data);
            labels.push(c.label);
        }
        let ids = (0..n).map(|i| i.to_string()).collect();
        let table = FeatureTable::from_flat(ids, d, data).expect("finite samples");
        (table, labels)
    }

    fn pick<R: Rng + ?Sized>(&self, rng: &mut R) -> &Component {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for c in &self.components {
            acc += c.weight;
            if u < acc {
                return c;
            }
        }
        self.components.last().expect("validated")
    }

    /// 0-1 losses of `clf` on labelled points.
    pub fn losses(clf: &Classifier, features: &FeatureTable, labels: &[u8]) -> SampleTable {
        let l = (0..features.len())
            .map(|i| f64::from(clf.predict(features.row(i)) != labels[i]))
            .collect();
        SampleTable::new(features.ids().to_vec(), l).expect("0-1 losses")
    }

    /// Mixture CDF of coordinate 0 (1-D mixtures).
    fn cdf(&self, x: f64) -> f64 {
        self.components.iter().map(|c| c.weight * c.shape.marginal_cdf(0, x)).sum()
    }

    /// Cut points splitting a 1-D mixture into `k` cells of equal mass.
    pub fn quantile_cuts(&self, k: usize) -> Result<IntervalPartition> {
        self.validate()?;
        if self.dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: self.dim(),
            });
        }
        if k == 0 {
            return Err(Error::param("K", "must be at least 1"));
        }
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for c in &self.components {
            let (a, b) = match &c.shape {
                Shape::Gaussian { mean, sd } => (mean[0] - 40.0 * sd[0], mean[0] + 40.0 * sd[0]),
                Shape::Uniform { lo, hi } => (lo[0], hi[0]),
            };
            lo = lo.min(a);
            hi = hi.max(b);
        }
        let cuts = (1..k)
            .map(|i| {
                let target = i as f64 / k as f64;
                let (mut a, mut b) = (lo, hi);
                for _ in 0..200 {
                    let mid = 0.5 * (a + b);
                    if mid <= a || mid >= b {
                        break;
                    }
                    if self.cdf(mid) < target {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                b
            })
            .collect::<Vec<_>>();
        let mut dedup = cuts;
        dedup.dedup();
        IntervalPartition::new(dedup)
    }

    /// Exact cell masses of a 1-D interval partition.
    pub fn cell_masses(&self, cells: &IntervalPartition) -> Result<Vec<f64>> {
        if self.dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: self.dim(),
            });
        }
        let mut edges = vec![0.0];
        edges.extend(cells.cuts().iter().map(|&c| self.cdf(c)));
        edges.push(1.0);
        let p: Vec<f64> = edges.windows(2).map(|w| (w[1] - w[0]).max(0.0)).collect();
        let total: f64 = p.iter().sum();
        Ok(p.into_iter().map(|x| x / total).collect())
    }
}

/// True error, analytic where possible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrueError {
    pub value: f64,
    /// Monte Carlo standard error; `None` for closed-form values.
    pub stderr: Option<f64>,
}

pub const ORACLE_SAMPLES: usize = 1_000_000;

/// `F(P, h)` for the mixture's own classifier.
pub fn true_error_oracle(spec: &MixtureSpec, seed: u64) -> Result<TrueError> {
    true_error_of(spec, &spec.classifier, seed)
}

pub fn true_error_of(spec: &MixtureSpec, clf: &Classifier, seed: u64) -> Result<TrueError> {
    spec.validate()?;
    let analytic: Option<f64> = spec
        .components
        .iter()
        .map(|c| {
            clf.positive_rate(&c.shape)
                .map(|p1| c.weight * if c.label == 1 { 1.0 - p1 } else { p1 })
        })
        .sum();
    match analytic {
        Some(value) => Ok(TrueError { value, stderr: None }),
        None => Ok(mc_error(spec, clf, ORACLE_SAMPLES, seed)),
    }
}

/// Sampled error over `samples` fresh points.
pub fn mc_error(spec: &MixtureSpec, clf: &Classifier, samples: usize, seed: u64) -> TrueError {
    const CHUNK: usize = 10_000;
    let chunks = samples.div_ceil(CHUNK);
    let wrong: u64 = exec::map_range(chunks, |c| {
        let mut rng = seed::rng(seed, streams::ORACLE, c as u64);
        let mut x = Vec::with_capacity(spec.dim());
        let size = CHUNK.min(samples - c * CHUNK);
        (0..size)
            .map(|_| {
                x.clear();
                let comp = spec.pick(&mut rng);
                comp.shape.sample(&mut rng, &mut x);
                u64::from(clf.predict(&x) != comp.label)
            })
            .sum::<u64>()
    })
    .into_iter()
    .sum();
    let p = wrong as f64 / samples as f64;
    TrueError {
        value: p,
        stderr: Some((p * (1.0 - p) / samples as f64).sqrt()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionKind {
    KMeans,
    /// Equal-mass intervals of a 1-D mixture.
    Intervals,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageConfig {
    pub n: usize,
    pub trials: usize,
    pub k: usize,
    pub delta: f64,
    pub eps_gamma: f64,
    pub alpha: f64,
    pub c_sup: f64,
    pub seed: u64,
    pub partition: PartitionKind,
    /// Also certify with the true cell masses (interval partitions only),
    /// using `delta1 = eps_gamma` and `delta2 = delta / 2`.
    pub general: bool,
    /// Experimental: refit a 1-D threshold on each sample instead of using
    /// the fixed classifier.
    pub train_threshold: bool,
    pub max_iters: usize,
}

impl CoverageConfig {
    pub fn new(n: usize, trials: usize, k: usize, alpha: f64) -> Self {
        Self {
            n,
            trials,
            k,
            delta: 0.01,
            eps_gamma: bound::DEFAULT_EPS_GAMMA,
            alpha,
            c_sup: 1.0,
            seed: 0,
            partition: PartitionKind::KMeans,
            general: false,
            train_threshold: false,
            max_iters: partition::DEFAULT_MAX_ITERS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub truth: f64,
    pub train_loss: f64,
    pub bound: f64,
    pub covered: bool,
    pub sum_sq: f64,
    pub general_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageSummary {
    pub coverage_fraction: f64,
    pub mean_bound: f64,
    /// Mean of `bound - truth`.
    pub mean_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageResult {
    /// Error of the fixed classifier (absent when thresholds are refitted).
    pub truth: Option<TrueError>,
    /// Promised level `1 - eps_gamma - delta`.
    pub guarantee: f64,
    pub summary: CoverageSummary,
    pub general: Option<CoverageSummary>,
    pub trials: Vec<TrialRecord>,
}

/// Threshold minimizing training error; ties go to the smallest cut.
fn fit_threshold(features: &FeatureTable, labels: &[u8]) -> Classifier {
    let mut order: Vec<usize> = (0..features.len()).collect();
    order.sort_by(|&a, &b| features.row(a)[0].total_cmp(&features.row(b)[0]));
    // cut below every point: all predicted 1
    let mut errors: i64 = labels.iter().filter(|&&y| y == 0).count() as i64;
    let mut best = (errors, f64::NEG_INFINITY);
    for (r, &i) in order.iter().enumerate() {
        errors += if labels[i] == 0 { -1 } else { 1 };
        let x = features.row(i)[0];
        let next = order.get(r + 1).map(|&j| features.row(j)[0]);
        if next == Some(x) {
            continue;
        }
        let cut = next.map_or(x + 1.0, |nx| 0.5 * (x + nx));
        if errors < best.0 {
            best = (errors, cut);
        }
    }
    let cut = if best.1.is_finite() {
        best.1
    } else {
        features.row(order[0])[0] - 1.0
    };
    Classifier::Threshold { coord: 0, cut }
}

pub fn coverage_run(spec: &MixtureSpec, cfg: &CoverageConfig) -> Result<CoverageResult> {
    spec.validate()?;
    if cfg.trials == 0 || cfg.n == 0 {
        return Err(Error::invalid("coverage runs need n >= 1 and at least one trial"));
    }
    let params = BoundParams::from_residual(cfg.k, cfg.delta, cfg.alpha, cfg.eps_gamma, cfg.c_sup)?;
    let intervals = match cfg.partition {
        PartitionKind::Intervals => Some(spec.quantile_cuts(cfg.k)?),
        PartitionKind::KMeans => None,
    };
    if intervals.as_ref().is_some_and(|p| p.k() != cfg.k) {
        return Err(Error::invalid("mixture has too little spread for K distinct equal-mass cells"));
    }
    let general = match (&intervals, cfg.general) {
        (Some(p), true) => Some(GeneralParams::new(spec.cell_masses(p)?, cfg.eps_gamma, cfg.delta / 2.0)?),
        (None, true) => return Err(Error::invalid("known cell masses need an interval partition")),
        _ => None,
    };
    if cfg.train_threshold && spec.dim() != 1 {
        return Err(Error::invalid("threshold refitting is only available in one dimension"));
    }
    let truth = if cfg.train_threshold {
        None
    } else {
        Some(true_error_oracle(spec, seed::derive(cfg.seed, streams::ORACLE, 0))?)
    };

    let records = exec::map_range(cfg.trials, |t| -> Result<TrialRecord> {
        let mut rng = seed::rng(cfg.seed, streams::COVERAGE, t as u64);
        let (features, labels) = spec.sample(cfg.n, &mut rng);
        let (clf, truth_t) = if cfg.train_threshold {
            let clf = fit_threshold(&features, &labels);
            let e = true_error_of(spec, &clf, seed::derive(cfg.seed, streams::ORACLE, t as u64 + 1))?;
            (clf, e.value)
        } else {
            (spec.classifier.clone(), truth.expect("fixed classifier").value)
        };
        let losses = MixtureSpec::losses(&clf, &features, &labels);
        let assignment = match &intervals {
            Some(p) => p.assign(&features)?,
            None => {
                let s = seed::derive(cfg.seed, streams::KMEANS, t as u64);
                let c = partition::fit(&features, cfg.k, s, cfg.max_iters)?;
                partition::assign(&features, &c)?
            }
        };
        let counts = partition::counts(&assignment, cfg.k)?;
        let report = bound::certify(&losses, &counts, &params)?;
        let general_bound = match &general {
            Some(gp) => Some(bound::certify_general(&losses, &counts, gp, &params)?.bound),
            None => None,
        };
        Ok(TrialRecord {
            trial: t,
            truth: truth_t,
            train_loss: report.train_loss,
            bound: report.bound,
            covered: report.bound >= truth_t,
            sum_sq: report.terms.sum_sq,
            general_bound,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let summarize = |bounds: Vec<f64>| {
        let t = records.len() as f64;
        let covered = records.iter().zip(&bounds).filter(|(r, &b)| b >= r.truth).count();
        CoverageSummary {
            coverage_fraction: covered as f64 / t,
            mean_bound: bounds.iter().sum::<f64>() / t,
            mean_gap: records.iter().zip(&bounds).map(|(r, b)| b - r.truth).sum::<f64>() / t,
        }
    };
    let summary = summarize(records.iter().map(|r| r.bound).collect());
    let general = general.map(|_| summarize(records.iter().map(|r| r.general_bound.expect("general run")).collect()));
    Ok(CoverageResult {
        truth,
        guarantee: params.confidence(),
        summary,
        general,
        trials: records,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub sigma: f64,
    pub seed: u64,
    pub eps_bar: f64,
    pub aug_loss: f64,
    pub correction: f64,
    pub main_part: f64,
    pub bound: f64,
}

/// Augmented certificates under Gaussian input noise of increasing scale.
/// Each seed draws one sample and one k-means partition shared by every
/// `sigma`; noise for a given `(seed, sigma)` is independent of the rest.
pub fn sigma_sweep(spec: &MixtureSpec, cfg: &CoverageConfig, sigmas: &[f64], seeds: &[u64]) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let params = BoundParams::from_residual(cfg.k, cfg.delta, cfg.alpha, cfg.eps_gamma, cfg.c_sup)?;
    let rows = exec::map_slice(seeds, |&s| -> Result<Vec<SweepRow>> {
        let mut rng = seed::rng(s, streams::COVERAGE, 0);
        let (features, labels) = spec.sample(cfg.n, &mut rng);
        let losses = MixtureSpec::losses(&spec.classifier, &features, &labels);
        let centroids = partition::fit(&features, cfg.k, seed::derive(s, streams::KMEANS, 0), cfg.max_iters)?;
        let cells = partition::assign(&features, &centroids)?;
        sigmas
            .iter()
            .enumerate()
            .map(|(j, &sigma)| {
                let noisy = augment::gaussian_transform(&features, sigma, seed::derive(s, streams::NOISE, j as u64))?;
                let aug_losses = MixtureSpec::losses(&spec.classifier, &noisy, &labels);
                let aug_cells = partition::assign(&noisy, &centroids)?;
                let cert = augment::certify_aug(&losses, &cells, &aug_losses, &aug_cells, &params)?;
                Ok(SweepRow {
                    sigma,
                    seed: s,
                    eps_bar: cert.pairs.eps_bar,
                    aug_loss: cert.aug_loss,
                    correction: cert.correction,
                    main_part: cert.report.main_part.expect("augmented"),
                    bound: cert.report.bound,
                })
            })
            .collect()
    });
    Ok(rows.into_iter().collect::<Result<Vec<_>>>()?.into_iter().flatten().collect())
}

/// A plain-text experiment description: one `key = value` per line, `#`
/// comments. Components are given as
/// `component = <weight> <label> gaussian <means> <sds>` or
/// `component = <weight> <label> uniform <lows> <highs>` with comma-separated
/// vectors; the classifier as `classifier = threshold <coord> <cut>` or
/// `classifier = linear <weights> <bias>`.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub spec: MixtureSpec,
    pub coverage: CoverageConfig,
    /// Noise scales for an augmentation sweep; empty means no sweep.
    pub sigma_grid: Vec<f64>,
    pub sweep_seeds: Vec<u64>,
}

fn floats(s: &str, key: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            let v: f64 = t
                .trim()
                .parse()
                .map_err(|_| Error::invalid(format!("{key}: `{t}` is not a number")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::invalid(format!("{key}: `{t}` is not finite")))
            }
        })
        .collect()
}

fn scalar<T: std::str::FromStr>(s: &str, key: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::invalid(format!("{key}: cannot parse `{s}`")))
}

fn parse_component(v: &str) -> Result<Component> {
    let parts: Vec<&str> = v.split_whitespace().collect();
    let [w, label, kind, a, b] = parts.as_slice() else {
        return Err(Error::invalid(format!("component: expected 5 fields, got `{v}`")));
    };
    let (a, b) = (floats(a, "component")?, floats(b, "component")?);
    let shape = match *kind {
        "gaussian" => Shape::Gaussian { mean: a, sd: b },
        "uniform" => Shape::Uniform { lo: a, hi: b },
        other => return Err(Error::invalid(format!("component: unknown shape `{other}`"))),
    };
    Ok(Component {
        weight: scalar(w, "component weight")?,
        label: scalar(label, "component label")?,
        shape,
    })
}

fn parse_classifier(v: &str) -> Result<Classifier> {
    let parts: Vec<&str> = v.split_whitespace().collect();
    match parts.as_slice() {
        ["threshold", coord, cut] => Ok(Classifier::Threshold {
            coord: scalar(coord, "classifier")?,
            cut: scalar(cut, "classifier")?,
        }),
        ["linear", w, b] => Ok(Classifier::Linear {
            w: floats(w, "classifier")?,
            b: scalar(b, "classifier")?,
        }),
        _ => Err(Error::invalid(format!("classifier: cannot parse `{v}`"))),
    }
}

fn parse_bool(v: &str, key: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::invalid(format!("{key}: expected true or false, got `{v}`"))),
    }
}

impl Experiment {
    pub fn parse(text: &str) -> Result<Self> {
        let mut components = Vec::new();
        let mut classifier = None;
        let mut kv = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("line {}: expected `key = value`", i + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            let wrap = |e: Error| Error::invalid(format!("line {}: {e}", i + 1));
            match k {
                "component" => components.push(parse_component(v).map_err(wrap)?),
                "classifier" => classifier = Some(parse_classifier(v).map_err(wrap)?),
                _ => {
                    if kv.insert(k.to_string(), (i + 1, v.to_string())).is_some() {
                        return Err(Error::invalid(format!("line {}: duplicate key `{k}`", i + 1)));
                    }
                }
            }
        }
        let spec = if components.is_empty() && classifier.is_none() {
            MixtureSpec::symmetric_gaussians()
        } else {
            MixtureSpec {
                components,
                classifier: classifier.ok_or_else(|| Error::invalid("missing `classifier`"))?,
            }
        };
        spec.validate()?;

        let n = kv.remove("n").map(|(_, v)| scalar(&v, "n")).transpose()?.unwrap_or(2000);
        let trials = kv.remove("trials").map(|(_, v)| scalar(&v, "trials")).transpose()?.unwrap_or(200);
        let k = kv.remove("k").map(|(_, v)| scalar(&v, "k")).transpose()?.unwrap_or(20);
        let alpha = kv.remove("alpha").map(|(_, v)| scalar(&v, "alpha")).transpose()?.unwrap_or(30.0);
        let mut cov = CoverageConfig::new(n, trials, k, alpha);
        let mut sigma_grid = Vec::new();
        let mut sweep_seeds = vec![0, 1, 2, 3, 4];
        for (key, (line, v)) in kv {
            let wrap = |e: Error| Error::invalid(format!("line {line}: {e}"));
            match key.as_str() {
                "delta" => cov.delta = scalar(&v, "delta").map_err(wrap)?,
                "eps_gamma" => cov.eps_gamma = scalar(&v, "eps_gamma").map_err(wrap)?,
                "c_sup" => cov.c_sup = scalar(&v, "c_sup").map_err(wrap)?,
                "seed" => cov.seed = scalar(&v, "seed").map_err(wrap)?,
                "max_iters" => cov.max_iters = scalar(&v, "max_iters").map_err(wrap)?,
                "partition" => {
                    cov.partition = match v.as_str() {
                        "kmeans" => PartitionKind::KMeans,
                        "intervals" => PartitionKind::Intervals,
                        other => return Err(wrap(Error::invalid(format!("unknown partition `{other}`")))),
                    }
                }
                "general" => cov.general = parse_bool(&v, "general").map_err(wrap)?,
                "train_threshold" => cov.train_threshold = parse_bool(&v, "train_threshold").map_err(wrap)?,
                "sigma_grid" => sigma_grid = floats(&v, "sigma_grid").map_err(wrap)?,
                "sweep_seeds" => {
                    sweep_seeds = v
                        .split(',')
                        .map(|s| scalar(s, "sweep_seeds"))
                        .collect::<Result<_>>()
                        .map_err(wrap)?
                }
                other => return Err(wrap(Error::invalid(format!("unknown key `{other}`")))),
            }
        }
        Ok(Self {
            spec,
            coverage: cov,
            sigma_grid,
            sweep_seeds,
        })
    }
}
