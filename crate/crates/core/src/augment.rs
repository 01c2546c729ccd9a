//! Certificates from transformed (augmented) samples.
//!
//! With `S_i` and `Ŝ_i` the original and transformed samples in cell `i`,
//! the sensitivity of cell `i` is the mean absolute loss difference over all
//! pairs `S_i x Ŝ_i`. The augmented certificate replaces `F(S, h)` by
//! `eps_bar + F(Ŝ, h)`, plus `sum_{i in T} (n_i/n - m_i/m) F(S_i, h)` when
//! the cell proportions of `S` and `Ŝ` differ.

use rand::seq::index;
use rand_distr::{Distribution, StandardNormal};

use crate::bound::{self, BoundParams, BoundReport, CellCounts};
use crate::error::{Error, Result};
use crate::exec;
use crate::partition::{Assignment, FeatureTable};
use crate::seed::{self, streams};
use crate::table::{compensated_sum, SampleTable};

/// Add i.i.d. `N(0, sigma^2)` noise to every coordinate. The noise of a
/// sample depends only on `(seed, id, coordinate)`.
pub fn gaussian_transform(features: &FeatureTable, sigma: f64, seed: u64) -> Result<FeatureTable> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::param("sigma", format!("must be finite and >= 0, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(features.clone());
    }
    let dim = features.dim();
    let rows = exec::map_range(features.len(), |i| {
        let mut rng = seed::rng(seed, streams::NOISE, seed::hash_str(&features.ids()[i]));
        features
            .row(i)
            .iter()
            .map(|&x| {
                let z: f64 = StandardNormal.sample(&mut rng);
                x + sigma * z
            })
            .collect::<Vec<_>>()
    });
    let data = rows.into_iter().flatten().collect::<Vec<_>>();
    debug_assert_eq!(data.len(), features.len() * dim);
    Ok(features.with_data(data))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellPairStat {
    /// Original samples in the cell.
    pub n: u64,
    /// Transformed samples in the cell.
    pub m: u64,
    /// Mean absolute loss difference over `S_i x Ŝ_i`; zero when either side is empty.
    pub eps_bar: f64,
    /// Occupied by `S` but empty in `Ŝ`.
    pub missing_aug: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairStats {
    pub cells: Vec<CellPairStat>,
    /// `m = sum_{i in T} m_i`.
    pub m: u64,
    /// `sum_{i in T} (m_i / m) eps_bar_i`.
    pub eps_bar: f64,
    /// Computed from subsamples; not valid for certification.
    pub approximate: bool,
}

struct Grouped {
    orig: Vec<Vec<f64>>,
    aug: Vec<Vec<f64>>,
}

fn group(
    orig: &SampleTable,
    orig_cells: &Assignment,
    aug: &SampleTable,
    aug_cells: &Assignment,
    k: usize,
) -> Result<Grouped> {
    let mut grouped = Grouped {
        orig: vec![Vec::new(); k],
        aug: vec![Vec::new(); k],
    };
    for (table, assignment, out) in [
        (orig, orig_cells, &mut grouped.orig),
        (aug, aug_cells, &mut grouped.aug),
    ] {
        for (&cell, &loss) in table.cells(assignment)?.iter().zip(table.losses()) {
            match out.get_mut(cell) {
                Some(v) => v.push(loss),
                None => {
                    return Err(Error::invalid(format!(
                        "cell index {cell} is outside [0, {k}); were both tables assigned with the same centroids?"
                    )))
                }
            }
        }
    }
    Ok(grouped)
}

fn mean_abs_cross(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let mut total = 0.0;
    for &x in a {
        total += b.iter().map(|&y| (x - y).abs()).sum::<f64>();
    }
    total / (a.len() as f64 * b.len() as f64)
}

fn aggregate(orig: &[Vec<f64>], aug: &[Vec<f64>], eps: Vec<f64>, approximate: bool) -> PairStats {
    let cells: Vec<CellPairStat> = orig
        .iter()
        .zip(aug)
        .zip(eps)
        .map(|((s, a), eps_bar)| CellPairStat {
            n: s.len() as u64,
            m: a.len() as u64,
            eps_bar,
            missing_aug: !s.is_empty() && a.is_empty(),
        })
        .collect();
    let m: u64 = cells.iter().filter(|c| c.n > 0).map(|c| c.m).sum();
    let eps_bar = if m == 0 {
        0.0
    } else {
        cells
            .iter()
            .filter(|c| c.n > 0)
            .map(|c| c.m as f64 / m as f64 * c.eps_bar)
            .sum()
    };
    PairStats {
        cells,
        m,
        eps_bar,
        approximate,
    }
}

/// Exact all-pairs sensitivity statistics per cell.
pub fn pair_stats(
    orig: &SampleTable,
    orig_cells: &Assignment,
    aug: &SampleTable,
    aug_cells: &Assignment,
    k: usize,
) -> Result<PairStats> {
    let g = group(orig, orig_cells, aug, aug_cells, k)?;
    let eps = exec::map_range(k, |i| mean_abs_cross(&g.orig[i], &g.aug[i]));
    Ok(aggregate(&g.orig, &g.aug, eps, false))
}

/// Like [`pair_stats`] but each side of each cell is subsampled to at most
/// `cap` losses. Only an estimate: the result is marked approximate and
/// [`certify_aug`] never uses it.
pub fn pair_stats_subsampled(
    orig: &SampleTable,
    orig_cells: &Assignment,
    aug: &SampleTable,
    aug_cells: &Assignment,
    k: usize,
    cap: usize,
    seed: u64,
) -> Result<PairStats> {
    if cap == 0 {
        return Err(Error::param("cap", "must be at least 1"));
    }
    let g = group(orig, orig_cells, aug, aug_cells, k)?;
    let pick = |v: &[f64], stream: u64| -> Vec<f64> {
        if v.len() <= cap {
            return v.to_vec();
        }
        let mut rng = seed::rng(seed, streams::SUBSAMPLE, stream);
        index::sample(&mut rng, v.len(), cap).iter().map(|i| v[i]).collect()
    };
    let eps = exec::map_range(k, |i| {
        let a = pick(&g.orig[i], 2 * i as u64);
        let b = pick(&g.aug[i], 2 * i as u64 + 1);
        mean_abs_cross(&a, &b)
    });
    Ok(aggregate(&g.orig, &g.aug, eps, true))
}

/// Augmented certificate with its intermediate statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct AugCertificate {
    pub report: BoundReport,
    pub pairs: PairStats,
    /// `F(Ŝ, h)` over transformed samples that fall in occupied cells.
    pub aug_loss: f64,
    /// `sum_{i in T} (n_i/n - m_i/m) F(S_i, h)`; zero when proportions match.
    pub correction: f64,
    /// Transformed samples landing in cells unoccupied by `S` (excluded).
    pub dropped_aug: usize,
}

/// Certificate `eps_bar + F(Ŝ, h) [+ correction] + Unc`.
///
/// `orig_cells` and `aug_cells` must come from the same partition, and the
/// transformation must not depend on the model.
pub fn certify_aug(
    orig: &SampleTable,
    orig_cells: &Assignment,
    aug: &SampleTable,
    aug_cells: &Assignment,
    params: &BoundParams,
) -> Result<AugCertificate> {
    let k = params.k();
    orig.check_supremum(params.c_sup())?;
    aug.check_supremum(params.c_sup())?;
    let g = group(orig, orig_cells, aug, aug_cells, k)?;
    let counts = CellCounts::new(g.orig.iter().map(|v| v.len() as u64).collect())?;
    bound::check_alpha(&counts, params)?;
    let terms = bound::compute_terms(&counts, params)?;
    let pairs = pair_stats(orig, orig_cells, aug, aug_cells, k)?;
    let train_loss = orig.mean_loss();

    let n = counts.n();
    let m = pairs.m;
    let aug_cell_of = aug.cells(aug_cells)?;
    let in_t: Vec<f64> = aug_cell_of
        .iter()
        .zip(aug.losses())
        .filter(|(&c, _)| counts.counts()[c] > 0)
        .map(|(_, &l)| l)
        .collect();
    let dropped_aug = aug.len() - in_t.len();
    let aug_loss = if m == 0 {
        0.0
    } else {
        compensated_sum(in_t.iter().copied()) / m as f64
    };

    let matched = m > 0
        && counts.occupied().iter().all(|&i| {
            u128::from(counts.counts()[i]) * u128::from(m) == u128::from(pairs.cells[i].m) * u128::from(n)
        });
    let (main_part, correction) = if matched {
        (pairs.eps_bar + aug_loss, 0.0)
    } else {
        let correction: f64 = counts
            .occupied()
            .iter()
            .map(|&i| {
                let ni = counts.counts()[i] as f64;
                let mi = pairs.cells[i].m as f64;
                let share = if m == 0 { 0.0 } else { mi / m as f64 };
                let cell_loss = compensated_sum(g.orig[i].iter().copied()) / ni;
                (ni / n as f64 - share) * cell_loss
            })
            .sum();
        (pairs.eps_bar + aug_loss + correction, correction)
    };

    let report = bound::assemble(*params, None, &counts, terms, train_loss, Some(main_part), !matched);
    Ok(AugCertificate {
        report,
        pairs,
        aug_loss,
        correction,
        dropped_aug,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(ids: &[&str], losses: &[f64]) -> SampleTable {
        SampleTable::new(ids.iter().map(|s| s.to_string()).collect(), losses.to_vec()).unwrap()
    }

    fn cells(ids: &[&str], cells: &[usize]) -> Assignment {
        Assignment::new(ids.iter().map(|s| s.to_string()).collect(), cells.to_vec()).unwrap()
    }

    #[test]
    fn zero_sigma_is_identity() {
        let f = FeatureTable::from_scalars(&[1.0, -2.5, 3.25]).unwrap();
        assert_eq!(gaussian_transform(&f, 0.0, 11).unwrap(), f);
        assert!(gaussian_transform(&f, -0.1, 11).is_err());
    }

    #[test]
    fn transform_is_deterministic() {
        let f = FeatureTable::from_scalars(&[1.0, -2.5, 3.25]).unwrap();
        let a = gaussian_transform(&f, 0.3, 11).unwrap();
        let b = exec::sequential(|| gaussian_transform(&f, 0.3, 11).unwrap());
        assert_eq!(a, b);
        assert_ne!(a, gaussian_transform(&f, 0.3, 12).unwrap());
    }

    #[test]
    fn constant_losses_have_zero_sensitivity() {
        let t = table(&["a", "b", "c"], &[0.3, 0.3, 0.7]);
        let a = cells(&["a", "b", "c"], &[0, 0, 1]);
        let s = pair_stats(&t, &a, &t, &a, 2).unwrap();
        assert!(s.cells.iter().all(|c| c.eps_bar == 0.0));
        assert_eq!(s.eps_bar, 0.0);
    }

    #[test]
    fn hand_enumerated_cells() {
        let s = table(&["a", "b"], &[0.0, 1.0]);
        let sa = cells(&["a", "b"], &[0, 0]);
        let h = table(&["x"], &[1.0]);
        let ha = cells(&["x"], &[0]);
        assert_eq!(pair_stats(&s, &sa, &h, &ha, 1).unwrap().cells[0].eps_bar, 0.5);
        // identity transform still pairs 0 with 1
        assert_eq!(pair_stats(&s, &sa, &s, &sa, 1).unwrap().cells[0].eps_bar, 0.5);
    }

    #[test]
    fn sensitivity_is_symmetric() {
        let s = table(&["a", "b", "c"], &[0.0, 0.4, 0.9]);
        let sa = cells(&["a", "b", "c"], &[0, 1, 0]);
        let h = table(&["x", "y"], &[0.2, 1.0]);
        let ha = cells(&["x", "y"], &[0, 0]);
        let fwd = pair_stats(&s, &sa, &h, &ha, 2).unwrap();
        let rev = pair_stats(&h, &ha, &s, &sa, 2).unwrap();
        assert_eq!(fwd.cells[0].eps_bar, rev.cells[0].eps_bar);
    }

    #[test]
    fn missing_augmented_cell_is_flagged() {
        let s = table(&["a", "b"], &[0.0, 1.0]);
        let sa = cells(&["a", "b"], &[0, 1]);
        let h = table(&["x"], &[1.0]);
        let ha = cells(&["x"], &[0]);
        let st = pair_stats(&s, &sa, &h, &ha, 2).unwrap();
        assert!(st.cells[1].missing_aug);
        assert_eq!(st.m, 1);
    }

    #[test]
    fn mismatched_k_is_an_error() {
        let s = table(&["a"], &[0.0]);
        let sa = cells(&["a"], &[3]);
        assert!(pair_stats(&s, &sa, &s, &sa, 2).is_err());
    }

    #[test]
    fn subsampled_estimate_is_marked() {
        let ids: Vec<String> = (0..50).map(|i| i.to_string()).collect();
        let losses: Vec<f64> = (0..50).map(|i| (i % 2) as f64).collect();
        let t = SampleTable::new(ids.clone(), losses).unwrap();
        let a = Assignment::new(ids, vec![0; 50]).unwrap();
        let est = pair_stats_subsampled(&t, &a, &t, &a, 1, 10, 3).unwrap();
        assert!(est.approximate);
        assert!(est.eps_bar >= 0.0 && est.eps_bar <= 1.0);
    }
}
