//! Closed-form certificates on the expected loss of a fixed model.
//!
//! Given the per-cell sample counts of a partition of the input space, the
//! expected loss `F(P, h)` is bounded by the empirical loss plus an
//! uncertainty term
//!
//! ```text
//! Unc = C * sqrt(u_hat * alpha * ln(gamma)) + g(delta / 2)
//! u_hat = gamma / (2n) + gamma^2 / 2 * sum_i (n_i / n)^2
//!         + gamma^2 * sqrt((2 / n) * ln(2K / delta))
//! g(d)  = C (sqrt(2) + 1) sqrt(|T| ln(2K / d) / n) + 2 C |T| ln(2K / d) / n
//! ```
//!
//! holding with probability at least `1 - gamma^(-alpha) - delta`, valid for
//! `alpha <= gamma n (K + gamma n) / (K (4n - 3))`. When the true cell masses
//! `p_i` are known, [`certify_general`] gives the sharper form with
//! `u = sum_i gamma n p_i (1 + gamma n p_i)`.
//!
//! All logarithms are natural.

use crate::error::{Error, Result};
use crate::table::SampleTable;

/// Default target residual `gamma^(-alpha)`.
pub const DEFAULT_EPS_GAMMA: f64 = 0.04;

/// Histogram of samples over the `K` cells of a partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellCounts {
    counts: Vec<u64>,
    n: u64,
    occupied: Vec<usize>,
}

impl CellCounts {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::invalid("a partition needs at least one cell"));
        }
        let n = counts.iter().sum();
        let occupied = counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, _)| i)
            .collect();
        Ok(Self {
            counts,
            n,
            occupied,
        })
    }

    /// `n` samples spread as evenly as possible over `k` cells.
    pub fn uniform(n: u64, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("a partition needs at least one cell"));
        }
        let base = n / k as u64;
        let extra = (n % k as u64) as usize;
        Self::new((0..k).map(|i| base + u64::from(i < extra)).collect())
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn k(&self) -> usize {
        self.counts.len()
    }

    /// Indices of nonempty cells.
    pub fn occupied(&self) -> &[usize] {
        &self.occupied
    }

    pub fn t_size(&self) -> usize {
        self.occupied.len()
    }
}

/// Parameters of a certificate. `gamma` is usually derived from the target
/// residual `eps_gamma = gamma^(-alpha)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams {
    k: usize,
    delta: f64,
    alpha: f64,
    gamma: f64,
    ln_gamma: f64,
    eps_gamma: f64,
    c_sup: f64,
}

impl BoundParams {
    /// `gamma = eps_gamma^(-1/alpha)`.
    pub fn from_residual(k: usize, delta: f64, alpha: f64, eps_gamma: f64, c_sup: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::param("alpha", format!("must be positive and finite to derive gamma, got {alpha}")));
        }
        if !(eps_gamma > 0.0 && eps_gamma < 1.0) {
            return Err(Error::param("eps_gamma", format!("must lie in (0, 1), got {eps_gamma}")));
        }
        // ln(gamma) directly from eps_gamma: accurate even when gamma is within ulps of 1.
        let ln_gamma = -eps_gamma.ln() / alpha;
        let gamma = ln_gamma.exp();
        Self::validated(k, delta, alpha, gamma, ln_gamma, eps_gamma, c_sup)
    }

    /// Explicit `gamma >= 1`; `eps_gamma` becomes `gamma^(-alpha)`.
    pub fn with_gamma(k: usize, delta: f64, alpha: f64, gamma: f64, c_sup: f64) -> Result<Self> {
        if !(gamma >= 1.0 && gamma.is_finite()) {
            return Err(Error::param("gamma", format!("must be finite and >= 1, got {gamma}")));
        }
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::param("alpha", format!("must be finite and >= 0, got {alpha}")));
        }
        let ln_gamma = (gamma - 1.0).ln_1p();
        let eps_gamma = (-alpha * ln_gamma).exp();
        Self::validated(k, delta, alpha, gamma, ln_gamma, eps_gamma, c_sup)
    }

    fn validated(
        k: usize,
        delta: f64,
        alpha: f64,
        gamma: f64,
        ln_gamma: f64,
        eps_gamma: f64,
        c_sup: f64,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::param("K", "must be at least 1"));
        }
        check_delta("delta", delta)?;
        if !(c_sup > 0.0 && c_sup.is_finite()) {
            return Err(Error::param("c_sup", format!("must be positive and finite, got {c_sup}")));
        }
        Ok(Self {
            k,
            delta,
            alpha,
            gamma,
            ln_gamma,
            eps_gamma,
            c_sup,
        })
    }

    /// Same parameters with a different failure mass.
    pub fn with_delta(self, delta: f64) -> Result<Self> {
        check_delta("delta", delta)?;
        Ok(Self { delta, ..self })
    }

    pub fn k(&self) -> usize {
        self.k
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn ln_gamma(&self) -> f64 {
        self.ln_gamma
    }
    pub fn eps_gamma(&self) -> f64 {
        self.eps_gamma
    }
    pub fn c_sup(&self) -> f64 {
        self.c_sup
    }

    /// `1 - gamma^(-alpha) - delta`.
    pub fn confidence(&self) -> f64 {
        1.0 - self.eps_gamma - self.delta
    }
}

fn check_delta(name: &'static str, delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must lie in (0, 1), got {delta}")))
    }
}

/// Known cell masses for the general certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralParams {
    pub p: Vec<f64>,
    pub delta1: f64,
    pub delta2: f64,
}

impl GeneralParams {
    pub fn new(p: Vec<f64>, delta1: f64, delta2: f64) -> Result<Self> {
        if p.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
            return Err(Error::param("p", "cell masses must be finite and nonnegative"));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::param("p", format!("cell masses must sum to 1, got {total}")));
        }
        check_delta("delta1", delta1)?;
        check_delta("delta2", delta2)?;
        Ok(Self { p, delta1, delta2 })
    }

    /// `u = sum_i gamma n p_i (1 + gamma n p_i)`.
    pub fn u(&self, n: u64, gamma: f64) -> f64 {
        let gn = gamma * n as f64;
        self.p.iter().map(|&p| gn * p * (1.0 + gn * p)).sum()
    }

    /// Smallest admissible `delta1`: `exp(-u ln(gamma) / (4n - 3))`.
    pub fn delta1_floor(&self, n: u64, gamma: f64) -> f64 {
        let ln_gamma = (gamma - 1.0).ln_1p();
        (-self.u(n, gamma) * ln_gamma / (4.0 * n as f64 - 3.0)).exp()
    }
}

/// Every intermediate term of a certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundTerms {
    /// `u_hat` for the tractable bound, `u / (2 n^2)` for the general one.
    pub u_hat: f64,
    /// `g(delta / 2)` (tractable) or `g(delta2)` (general), in loss units.
    pub g_val: f64,
    pub unc: f64,
    pub sum_sq: f64,
    pub alpha_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub params: BoundParams,
    /// Present for certificates computed from known cell masses.
    pub general: Option<GeneralParams>,
    pub n: u64,
    pub t_size: usize,
    pub terms: BoundTerms,
    /// F(S, h).
    pub train_loss: f64,
    /// Upper bound on F(P, h).
    pub bound: f64,
    pub confidence: f64,
    /// Bound exceeds the loss supremum `C`.
    pub vacuous: bool,
    /// Augmented certificate needed the proportion-mismatch correction.
    pub corrected: bool,
    /// Augmented certificates: everything except the uncertainty term.
    pub main_part: Option<f64>,
}

/// `sum_i (n_i / n)^2`, with one rounding when `n < 2^26`.
pub fn compute_sum_sq(counts: &CellCounts) -> Result<f64> {
    if counts.n() == 0 {
        return Err(Error::invalid("sum of squared proportions needs at least one sample"));
    }
    let sq: u128 = counts.counts().iter().map(|&c| u128::from(c) * u128::from(c)).sum();
    let n = counts.n() as f64;
    Ok(sq as f64 / (n * n))
}

fn check_counts(counts: &CellCounts, params: &BoundParams) -> Result<()> {
    if counts.k() != params.k() {
        return Err(Error::DimensionMismatch {
            expected: params.k(),
            found: counts.k(),
        });
    }
    if counts.n() == 0 {
        return Err(Error::invalid("certificates need at least one sample"));
    }
    Ok(())
}

pub fn compute_uhat(counts: &CellCounts, params: &BoundParams) -> Result<f64> {
    check_counts(counts, params)?;
    let sum_sq = compute_sum_sq(counts)?;
    Ok(uhat_from_sum_sq(counts.n(), params.k(), sum_sq, params.delta(), params.gamma()))
}

fn uhat_from_sum_sq(n: u64, k: usize, sum_sq: f64, delta: f64, gamma: f64) -> f64 {
    let n = n as f64;
    let g2 = gamma * gamma;
    gamma / (2.0 * n) + 0.5 * g2 * sum_sq + g2 * (2.0 / n * (2.0 * k as f64 / delta).ln()).sqrt()
}

/// `g(delta)`; callers assembling the tractable bound pass `delta / 2`.
pub fn compute_g(t_size: usize, k: usize, n: u64, delta: f64, c_sup: f64) -> Result<f64> {
    if t_size > k || t_size as u64 > n {
        return Err(Error::invalid(format!(
            "occupied cells |T| = {t_size} cannot exceed K = {k} or n = {n}"
        )));
    }
    if n == 0 {
        return Err(Error::invalid("g needs at least one sample"));
    }
    check_delta("delta", delta)?;
    if !(c_sup >= 0.0 && c_sup.is_finite()) {
        return Err(Error::param("c_sup", format!("must be finite and nonnegative, got {c_sup}")));
    }
    let ratio = t_size as f64 * (2.0 * k as f64 / delta).ln() / n as f64;
    Ok(c_sup * (std::f64::consts::SQRT_2 + 1.0) * ratio.sqrt() + 2.0 * c_sup * ratio)
}

/// Largest admissible `alpha`: `gamma n (K + gamma n) / (K (4n - 3))`.
pub fn alpha_max(n: u64, k: usize, gamma: f64) -> f64 {
    let gn = gamma * n as f64;
    gn * (k as f64 + gn) / (k as f64 * (4.0 * n as f64 - 3.0))
}

/// All terms of the tractable bound, without the `alpha` validity check.
///
/// Useful for tracing the uncertainty over parameter sweeps; [`certify`]
/// is the checked entry point.
pub fn compute_terms(counts: &CellCounts, params: &BoundParams) -> Result<BoundTerms> {
    check_counts(counts, params)?;
    let sum_sq = compute_sum_sq(counts)?;
    let n = counts.n();
    let u_hat = uhat_from_sum_sq(n, params.k(), sum_sq, params.delta(), params.gamma());
    let g_val = compute_g(counts.t_size(), params.k(), n, params.delta() / 2.0, params.c_sup())?;
    let unc = params.c_sup() * (u_hat * params.alpha() * params.ln_gamma()).sqrt() + g_val;
    Ok(BoundTerms {
        u_hat,
        g_val,
        unc,
        sum_sq,
        alpha_max: alpha_max(n, params.k(), params.gamma()),
    })
}

/// Error unless `alpha` is admissible for these counts.
pub fn check_alpha(counts: &CellCounts, params: &BoundParams) -> Result<()> {
    let ceiling = alpha_max(counts.n(), params.k(), params.gamma());
    if params.alpha() > ceiling {
        return Err(Error::AlphaAboveCeiling {
            alpha: params.alpha(),
            ceiling,
        });
    }
    Ok(())
}

/// Certificate `F(P, h) <= F(S, h) + Unc` from training losses and cell counts.
pub fn certify(losses: &SampleTable, counts: &CellCounts, params: &BoundParams) -> Result<BoundReport> {
    check_counts(counts, params)?;
    if losses.len() as u64 != counts.n() {
        return Err(Error::invalid(format!(
            "{} losses but the cell counts total {}",
            losses.len(),
            counts.n()
        )));
    }
    losses.check_supremum(params.c_sup())?;
    check_alpha(counts, params)?;
    let terms = compute_terms(counts, params)?;
    let train_loss = losses.mean_loss();
    Ok(assemble(*params, None, counts, terms, train_loss, None, false))
}

pub(crate) fn assemble(
    params: BoundParams,
    general: Option<GeneralParams>,
    counts: &CellCounts,
    terms: BoundTerms,
    train_loss: f64,
    main_part: Option<f64>,
    corrected: bool,
) -> BoundReport {
    let bound = main_part.unwrap_or(train_loss) + terms.unc;
    let confidence = match &general {
        Some(gp) => 1.0 - gp.delta1 - gp.delta2,
        None => params.confidence(),
    };
    BoundReport {
        params,
        general,
        n: counts.n(),
        t_size: counts.t_size(),
        terms,
        train_loss,
        bound,
        confidence,
        vacuous: bound > params.c_sup(),
        corrected,
        main_part,
    }
}

/// Certificate from known cell masses `p_i`:
/// `F(S, h) + C sqrt(u / (2 n^2) ln(1 / delta1)) + g(delta2)`.
///
/// Uses `gamma`, `K` and `C` from `params`; its `alpha` and `delta` are ignored.
pub fn certify_general(
    losses: &SampleTable,
    counts: &CellCounts,
    gp: &GeneralParams,
    params: &BoundParams,
) -> Result<BoundReport> {
    check_counts(counts, params)?;
    if gp.p.len() != params.k() {
        return Err(Error::DimensionMismatch {
            expected: params.k(),
            found: gp.p.len(),
        });
    }
    if losses.len() as u64 != counts.n() {
        return Err(Error::invalid(format!(
            "{} losses but the cell counts total {}",
            losses.len(),
            counts.n()
        )));
    }
    losses.check_supremum(params.c_sup())?;
    let n = counts.n();
    let floor = gp.delta1_floor(n, params.gamma());
    if gp.delta1 < floor {
        return Err(Error::DeltaBelowFloor {
            delta1: gp.delta1,
            floor,
        });
    }
    let nf = n as f64;
    let u_scaled = gp.u(n, params.gamma()) / (2.0 * nf * nf);
    let g_val = compute_g(counts.t_size(), params.k(), n, gp.delta2, params.c_sup())?;
    let unc = params.c_sup() * (u_scaled * (1.0 / gp.delta1).ln()).sqrt() + g_val;
    let terms = BoundTerms {
        u_hat: u_scaled,
        g_val,
        unc,
        sum_sq: compute_sum_sq(counts)?,
        alpha_max: alpha_max(n, params.k(), params.gamma()),
    };
    Ok(assemble(*params, Some(gp.clone()), counts, terms, losses.mean_loss(), None, false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn counts(v: &[u64]) -> CellCounts {
        CellCounts::new(v.to_vec()).unwrap()
    }

    #[test]
    fn sum_sq_examples() {
        assert_eq!(compute_sum_sq(&counts(&[17])).unwrap(), 1.0);
        assert_relative_eq!(compute_sum_sq(&counts(&[100; 10])).unwrap(), 0.1, max_relative = 1e-15);
        assert_eq!(compute_sum_sq(&counts(&[3, 1, 0, 0])).unwrap(), 0.625);
        assert!(compute_sum_sq(&counts(&[0, 0])).is_err());
    }

    #[test]
    fn cell_counts_track_occupancy() {
        let c = counts(&[2, 0, 0, 1]);
        assert_eq!(c.n(), 3);
        assert_eq!(c.occupied(), &[0, 3]);
        let u = CellCounts::uniform(1_281_167, 200).unwrap();
        assert_eq!(u.n(), 1_281_167);
        assert_eq!(u.t_size(), 200);
    }

    // Reference values from a 50-digit evaluation of the closed forms.
    #[test]
    fn uhat_matches_high_precision_values() {
        let p = BoundParams::from_residual(10, 0.01, 100.0, 0.04, 1.0).unwrap();
        assert_relative_eq!(p.gamma(), 1.032_712_419_896_443, max_relative = 1e-14);
        let u = compute_uhat(&counts(&[100; 10]), &p).unwrap();
        assert_relative_eq!(u, 0.185_335_236_856_222_5, max_relative = 1e-13);

        let p = BoundParams::from_residual(200, 0.01, 100.0, 0.04, 1.0).unwrap();
        let u = compute_uhat(&CellCounts::uniform(1_281_167, 200).unwrap(), &p).unwrap();
        assert_relative_eq!(u, 0.007_004_294_415_502_857, max_relative = 1e-12);
    }

    #[test]
    fn uhat_collapses_at_unit_gamma() {
        let n = 500u64;
        let delta = 1.0 - 1e-12;
        let p = BoundParams::with_gamma(1, delta, 1.0, 1.0, 1.0).unwrap();
        let u = compute_uhat(&counts(&[n]), &p).unwrap();
        let nf = n as f64;
        let limit = 1.0 / (2.0 * nf) + 0.5 + (2.0 / nf * 2f64.ln()).sqrt();
        assert_relative_eq!(u, limit, max_relative = 1e-9);
    }

    #[test]
    fn uhat_rejects_bad_delta() {
        assert!(BoundParams::from_residual(4, 0.0, 10.0, 0.04, 1.0).is_err());
        assert!(BoundParams::from_residual(4, 1.0, 10.0, 0.04, 1.0).is_err());
    }

    #[test]
    fn g_examples() {
        assert_eq!(compute_g(3, 4, 100, 0.02, 0.0).unwrap(), 0.0);
        assert_relative_eq!(
            compute_g(4, 4, 1000, 0.02, 1.0).unwrap(),
            0.421_673_950_989_540_8,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            compute_g(200, 200, 1_281_167, 0.005, 1.0).unwrap(),
            0.104_876_438_174_190_9,
            max_relative = 1e-13
        );
        assert!(compute_g(5, 4, 100, 0.02, 1.0).is_err());
        assert!(compute_g(4, 10, 3, 0.02, 1.0).is_err());
    }

    #[test]
    fn alpha_max_examples() {
        assert_eq!(alpha_max(1, 1, 1.0), 2.0);
        let gamma = 25f64.powf(0.01);
        assert_relative_eq!(alpha_max(1_281_167, 200, gamma), 1_708.206_835_126_040_4, max_relative = 1e-13);
        assert_relative_eq!(alpha_max(1000, 1000, 1.0), 0.500_375_281_461_095_8, max_relative = 1e-14);
    }

    #[test]
    fn certify_zero_losses_bound_is_unc() {
        let c = CellCounts::uniform(1_281_167, 200).unwrap();
        let p = BoundParams::from_residual(200, 0.01, 100.0, 0.04, 1.0).unwrap();
        let losses = SampleTable::from_losses(vec![0.0; 1_281_167]).unwrap();
        let r = certify(&losses, &c, &p).unwrap();
        assert_eq!(r.bound, r.terms.unc);
        assert_relative_eq!(r.bound, 0.255_029_539_921_445_86, max_relative = 1e-12);
        assert_relative_eq!(r.confidence, 0.95, max_relative = 1e-14);
        assert!(!r.vacuous);
    }

    #[test]
    fn certify_rejects_alpha_beyond_ceiling() {
        let c = counts(&[1; 1000]);
        let p = BoundParams::with_gamma(1000, 0.01, 100.0, 1.0, 1.0).unwrap();
        let losses = SampleTable::from_losses(vec![0.0; 1000]).unwrap();
        match certify(&losses, &c, &p) {
            Err(Error::AlphaAboveCeiling { ceiling, .. }) => {
                assert_relative_eq!(ceiling, 0.500_375_281_461_095_8, max_relative = 1e-14)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn certify_rejects_loss_above_c() {
        let c = counts(&[2]);
        let p = BoundParams::with_gamma(1, 0.01, 1.0, 1.0, 1.0).unwrap();
        let losses = SampleTable::from_losses(vec![0.5, 1.25]).unwrap();
        assert!(matches!(certify(&losses, &c, &p), Err(Error::LossAboveSupremum { .. })));
    }

    #[test]
    fn vacuous_bounds_are_flagged_not_clipped() {
        let c = counts(&[10, 10]);
        let p = BoundParams::with_gamma(2, 0.01, 1.0, 1.5, 1.0).unwrap();
        let losses = SampleTable::from_losses(vec![0.9; 20]).unwrap();
        let r = certify(&losses, &c, &p).unwrap();
        assert!(r.bound > 1.0);
        assert!(r.vacuous);
    }

    #[test]
    fn general_uniform_masses_reduce_u() {
        let (n, k) = (1000u64, 10usize);
        let gamma = 1.2;
        let gp = GeneralParams::new(vec![0.1; k], 0.5, 0.01).unwrap();
        let nf = n as f64;
        assert_relative_eq!(
            gp.u(n, gamma),
            gamma * nf + gamma * gamma * nf * nf / k as f64,
            max_relative = 1e-14
        );
    }

    #[test]
    fn general_floor_boundary_accepted_and_below_rejected() {
        let c = counts(&[100; 10]);
        let p = BoundParams::with_gamma(10, 0.01, 1.0, 1.01, 1.0).unwrap();
        let losses = SampleTable::from_losses(vec![0.0; 1000]).unwrap();
        let floor = GeneralParams::new(vec![0.1; 10], 0.5, 0.01)
            .unwrap()
            .delta1_floor(1000, p.gamma());
        let at = GeneralParams::new(vec![0.1; 10], floor, 0.01).unwrap();
        assert!(certify_general(&losses, &c, &at, &p).is_ok());
        let below = GeneralParams::new(vec![0.1; 10], floor * (1.0 - 1e-9), 0.01).unwrap();
        assert!(matches!(
            certify_general(&losses, &c, &below, &p),
            Err(Error::DeltaBelowFloor { .. })
        ));
    }

    #[test]
    fn g_four_cells() {
        // 40-digit closed-form evaluation
        let g = compute_g(4, 4, 1000, 0.02, 1.0).unwrap();
        assert_relative_eq!(g, 0.421_673_950_989_540_78, max_relative = 1e-14);
    }

    #[test]
    fn general_closed_form_and_floor() {
        let c = counts(&[100; 10]);
        let losses = SampleTable::from_losses(vec![0.0; 1000]).unwrap();
        let gp = GeneralParams::new(vec![0.1; 10], 0.04, 0.01).unwrap();

        // floor is about 0.4201 here, so delta1 = 0.04 is refused
        let p = BoundParams::with_gamma(10, 0.01, 1.0, 1.0327124, 1.0).unwrap();
        match certify_general(&losses, &c, &gp, &p) {
            Err(Error::DeltaBelowFloor { floor, .. }) => {
                assert_relative_eq!(floor, 0.420_130_891_784_246_43, max_relative = 1e-12)
            }
            other => panic!("expected a floor error, got {other:?}"),
        }

        let gamma = 25f64.powf(1.0 / 25.0);
        let p = BoundParams::with_gamma(10, 0.01, 1.0, gamma, 1.0).unwrap();
        let r = certify_general(&losses, &c, &gp, &p).unwrap();
        let first = 0.458_305_960_855_063_35;
        let g = 0.817_610_312_274_969_63;
        assert_relative_eq!(r.terms.g_val, g, max_relative = 1e-14);
        assert_relative_eq!(r.bound, first + g, max_relative = 1e-14);
        assert_relative_eq!(r.confidence, 0.95, max_relative = 1e-15);
    }

    #[test]
    fn general_rejects_bad_masses() {
        assert!(GeneralParams::new(vec![0.5, 0.6], 0.1, 0.1).is_err());
        assert!(GeneralParams::new(vec![1.5, -0.5], 0.1, 0.1).is_err());
    }
}
