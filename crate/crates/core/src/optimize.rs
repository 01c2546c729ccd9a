//! Grid search over partition size `K` and confidence exponent `alpha`.
//!
//! One k-means partition is fitted per `K` with a seed derived from the
//! master seed and `K`; every `alpha` is then evaluated on that partition.

use crate::bound::{self, BoundParams, BoundReport, CellCounts};
use crate::error::{Error, Result};
use crate::exec;
use crate::partition::{self, FeatureTable};
use crate::seed::{self, streams};
use crate::table::SampleTable;

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub k_grid: Vec<usize>,
    pub alpha_grid: Vec<f64>,
    pub delta: f64,
    pub eps_gamma: f64,
    pub c_sup: f64,
    pub seed: u64,
    /// Replace `delta` by `delta / |grid|` in every evaluation.
    pub bonferroni: bool,
    pub max_iters: usize,
}

impl GridConfig {
    /// Default `K` and `alpha` grids.
    pub fn default_grids() -> (Vec<usize>, Vec<f64>) {
        (
            vec![100, 200, 300, 400, 500, 1000, 5000, 10000],
            (1..=10).map(|i| 10.0 * i as f64).collect(),
        )
    }

    pub fn effective_delta(&self) -> f64 {
        if self.bonferroni {
            self.delta / (self.k_grid.len() * self.alpha_grid.len()) as f64
        } else {
            self.delta
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub k: usize,
    pub alpha: f64,
    pub gamma: f64,
    /// Terms are absent when the partition could not be built.
    pub u_hat: Option<f64>,
    pub g: Option<f64>,
    pub unc: Option<f64>,
    pub bound: Option<f64>,
    pub valid: bool,
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub best: BoundReport,
    pub best_index: usize,
    pub rows: Vec<GridRow>,
    pub delta_used: f64,
    /// `(K, clustering seed)` for replay.
    pub cluster_seeds: Vec<(usize, u64)>,
}

pub fn cluster_seed(master: u64, k: usize) -> u64 {
    seed::derive(master, streams::GRID, k as u64)
}

pub fn grid_search(losses: &SampleTable, features: &FeatureTable, cfg: &GridConfig) -> Result<GridResult> {
    if cfg.k_grid.is_empty() || cfg.alpha_grid.is_empty() {
        return Err(Error::invalid("grid search needs non-empty K and alpha grids"));
    }
    let delta = cfg.effective_delta();
    let cluster_seeds: Vec<(usize, u64)> = cfg.k_grid.iter().map(|&k| (k, cluster_seed(cfg.seed, k))).collect();

    let partitions: Vec<Result<CellCounts>> = exec::map_slice(&cluster_seeds, |&(k, s)| {
        let c = partition::fit(features, k, s, cfg.max_iters)?;
        let a = partition::assign(features, &c)?;
        let mut hist = vec![0u64; k];
        for cell in losses.cells(&a)? {
            hist[cell] += 1;
        }
        CellCounts::new(hist)
    });

    let train_loss = losses.mean_loss();
    let mut rows = Vec::with_capacity(cfg.k_grid.len() * cfg.alpha_grid.len());
    let mut best: Option<(usize, usize, f64)> = None;
    for (ki, (&k, counts)) in cfg.k_grid.iter().zip(&partitions).enumerate() {
        for &alpha in &cfg.alpha_grid {
            let row = match BoundParams::from_residual(k, delta, alpha, cfg.eps_gamma, cfg.c_sup) {
                Err(e) => invalid_row(k, alpha, f64::NAN, e.to_string()),
                Ok(params) => match counts {
                    Err(e) => invalid_row(k, alpha, params.gamma(), e.to_string()),
                    Ok(counts) => evaluate(counts, &params, train_loss)?,
                },
            };
            if row.valid {
                let b = row.bound.expect("valid rows carry a bound");
                if best.is_none_or(|(_, _, cur)| b < cur) {
                    best = Some((ki, rows.len(), b));
                }
            }
            rows.push(row);
        }
    }
    let (ki, best_index, _) = best.ok_or_else(|| Error::invalid("no (K, alpha) pair in the grid is admissible"))?;
    let row = &rows[best_index];
    let params = BoundParams::from_residual(row.k, delta, row.alpha, cfg.eps_gamma, cfg.c_sup)?;
    let counts = partitions[ki].as_ref().map_err(|e| Error::invalid(e.to_string()))?;
    let best = bound::certify(losses, counts, &params)?;
    Ok(GridResult {
        best,
        best_index,
        rows,
        delta_used: delta,
        cluster_seeds,
    })
}

fn invalid_row(k: usize, alpha: f64, gamma: f64, reason: String) -> GridRow {
    GridRow {
        k,
        alpha,
        gamma,
        u_hat: None,
        g: None,
        unc: None,
        bound: None,
        valid: false,
        reason: Some(reason),
    }
}

fn evaluate(counts: &CellCounts, params: &BoundParams, train_loss: f64) -> Result<GridRow> {
    let terms = bound::compute_terms(counts, params)?;
    let reason = bound::check_alpha(counts, params).err().map(|e| e.to_string());
    Ok(GridRow {
        k: params.k(),
        alpha: params.alpha(),
        gamma: params.gamma(),
        u_hat: Some(terms.u_hat),
        g: Some(terms.g_val),
        unc: Some(terms.unc),
        bound: Some(train_loss + terms.unc),
        valid: reason.is_none(),
        reason,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(n: usize) -> (SampleTable, FeatureTable) {
        let xs: Vec<f64> = (0..n).map(|i| ((i * 7919) % 1000) as f64 / 10.0).collect();
        let losses: Vec<f64> = xs.iter().map(|&x| f64::from(x > 80.0)).collect();
        (
            SampleTable::from_losses(losses).unwrap(),
            FeatureTable::from_scalars(&xs).unwrap(),
        )
    }

    fn cfg(k_grid: Vec<usize>, alpha_grid: Vec<f64>) -> GridConfig {
        GridConfig {
            k_grid,
            alpha_grid,
            delta: 0.01,
            eps_gamma: 0.04,
            c_sup: 1.0,
            seed: 5,
            bonferroni: false,
            max_iters: 50,
        }
    }

    #[test]
    fn singleton_grid_equals_certify() {
        let (l, f) = data(2000);
        let r = grid_search(&l, &f, &cfg(vec![10], vec![10.0])).unwrap();
        let c = partition::fit(&f, 10, cluster_seed(5, 10), 50).unwrap();
        let a = partition::assign(&f, &c).unwrap();
        let counts = partition::counts(&a, 10).unwrap();
        let p = BoundParams::from_residual(10, 0.01, 10.0, 0.04, 1.0).unwrap();
        let direct = bound::certify(&l, &counts, &p).unwrap();
        assert_eq!(r.best, direct);
        assert_eq!(r.rows[0].bound, Some(direct.bound));
    }

    #[test]
    fn empty_grid_is_an_error() {
        let (l, f) = data(100);
        assert!(grid_search(&l, &f, &cfg(vec![], vec![10.0])).is_err());
        assert!(grid_search(&l, &f, &cfg(vec![4], vec![])).is_err());
    }

    #[test]
    fn all_invalid_is_an_error() {
        let (l, f) = data(100);
        // K > n and an inadmissible alpha
        assert!(grid_search(&l, &f, &cfg(vec![200], vec![10.0])).is_err());
        assert!(grid_search(&l, &f, &cfg(vec![50], vec![1000.0])).is_err());
    }

    #[test]
    fn bonferroni_divides_delta() {
        let (l, f) = data(2000);
        let mut c = cfg(vec![5, 10], vec![5.0, 10.0]);
        c.bonferroni = true;
        let r = grid_search(&l, &f, &c).unwrap();
        assert_eq!(r.delta_used, 0.01 / 4.0);
        assert_eq!(r.best.params.delta(), 0.01 / 4.0);
    }
}
