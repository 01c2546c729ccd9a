//! Partitions of the input space: seeded Lloyd k-means over caller-supplied
//! feature vectors, and fixed 1-D interval partitions.

use std::collections::HashSet;

use rand::seq::index;

use crate::bound::CellCounts;
use crate::error::{Error, Result};
use crate::exec;
use crate::seed::{self, streams};
use crate::table::compensated_sum;

pub const DEFAULT_MAX_ITERS: usize = 50;

/// `n` feature vectors of a common dimension, keyed by sample id.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    ids: Vec<String>,
    dim: usize,
    data: Vec<f64>,
}

impl FeatureTable {
    pub fn new(ids: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if ids.len() != rows.len() {
            return Err(Error::DimensionMismatch {
                expected: ids.len(),
                found: rows.len(),
            });
        }
        let dim = rows.first().map_or(1, Vec::len);
        let data = rows.into_iter().flatten().collect::<Vec<_>>();
        Self::from_flat(ids, dim, data)
    }

    /// Row-major `ids.len() x dim` matrix.
    pub fn from_flat(ids: Vec<String>, dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("feature vectors need at least one coordinate"));
        }
        if data.len() != ids.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: ids.len() * dim,
                found: data.len(),
            });
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite feature in sample `{}`",
                ids[i / dim]
            )));
        }
        let mut seen = HashSet::with_capacity(ids.len());
        if let Some(dup) = ids.iter().find(|id| !seen.insert(id.as_str())) {
            return Err(Error::invalid(format!("duplicate sample id `{dup}`")));
        }
        Ok(Self { ids, dim, data })
    }

    /// 1-D table with ids `0..values.len()`.
    pub fn from_scalars(values: &[f64]) -> Result<Self> {
        let ids = (0..values.len()).map(|i| i.to_string()).collect();
        Self::from_flat(ids, 1, values.to_vec())
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn with_data(&self, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), self.data.len());
        Self {
            ids: self.ids.clone(),
            dim: self.dim,
            data,
        }
    }
}

/// Fitted k-means centroids.
#[derive(Debug, Clone, PartialEq)]
pub struct Centroids {
    k: usize,
    dim: usize,
    data: Vec<f64>,
    pub seed: u64,
    pub iters_run: usize,
    /// Within-cluster sum of squares after each assignment step.
    pub objective: Vec<f64>,
}

impl Centroids {
    /// Centroids given directly as rows.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = rows.len();
        if k == 0 {
            return Err(Error::invalid("need at least one centroid"));
        }
        let dim = rows[0].len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::invalid("centroid rows must share a positive dimension"));
        }
        let data: Vec<f64> = rows.into_iter().flatten().collect();
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("centroids must be finite"));
        }
        Ok(Self {
            k,
            dim,
            data,
            seed: 0,
            iters_run: 0,
            objective: Vec::new(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.data[j * self.dim..(j + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }
}

/// Cell index of each sample id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    ids: Vec<String>,
    cells: Vec<usize>,
}

impl Assignment {
    pub fn new(ids: Vec<String>, cells: Vec<usize>) -> Result<Self> {
        if ids.len() != cells.len() {
            return Err(Error::DimensionMismatch {
                expected: ids.len(),
                found: cells.len(),
            });
        }
        let mut seen = HashSet::with_capacity(ids.len());
        if let Some(dup) = ids.iter().find(|id| !seen.insert(id.as_str())) {
            return Err(Error::invalid(format!("duplicate sample id `{dup}`")));
        }
        Ok(Self { ids, cells })
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest centroid and its squared distance; ties go to the lowest index.
fn nearest(point: &[f64], centroids: &Centroids) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.rows().enumerate() {
        let d = sq_dist(point, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn nearest_all(features: &FeatureTable, centroids: &Centroids) -> Vec<(usize, f64)> {
    exec::map_range(features.len(), |i| nearest(features.row(i), centroids))
}

/// Seeded Lloyd k-means. Initial centroids are `k` distinct samples drawn
/// uniformly without replacement.
pub fn fit(features: &FeatureTable, k: usize, seed: u64, max_iters: usize) -> Result<Centroids> {
    let n = features.len();
    if k == 0 {
        return Err(Error::param("K", "must be at least 1"));
    }
    if k > n {
        return Err(Error::invalid(format!("cannot form K = {k} clusters from n = {n} samples")));
    }
    let mut rng = seed::rng(seed, streams::KMEANS, 0);
    let picks = index::sample(&mut rng, n, k);
    let data = picks
        .iter()
        .flat_map(|i| features.row(i).iter().copied())
        .collect();
    let init = Centroids {
        k,
        dim: features.dim(),
        data,
        seed,
        iters_run: 0,
        objective: Vec::new(),
    };
    fit_from(features, init, max_iters)
}

/// Lloyd iterations from given centroids until the assignment stops
/// changing or `max_iters` assignment steps have run.
pub fn fit_from(features: &FeatureTable, init: Centroids, max_iters: usize) -> Result<Centroids> {
    if max_iters == 0 {
        return Err(Error::param("max_iters", "must be at least 1"));
    }
    if init.dim() != features.dim() {
        return Err(Error::DimensionMismatch {
            expected: features.dim(),
            found: init.dim(),
        });
    }
    if features.is_empty() {
        return Err(Error::invalid("cannot cluster an empty feature table"));
    }
    let mut c = init;
    c.objective.clear();
    let mut previous: Option<Vec<usize>> = None;
    for iter in 1..=max_iters {
        let nearest = nearest_all(features, &c);
        let cells: Vec<usize> = nearest.iter().map(|&(j, _)| j).collect();
        let sse = compensated_sum(nearest.iter().map(|&(_, d)| d));
        if let Some(&last) = c.objective.last() {
            debug_assert!(sse <= last + 1e-9 * last.abs().max(1.0), "k-means objective increased");
        }
        c.objective.push(sse);
        c.iters_run = iter;
        if previous.as_ref() == Some(&cells) {
            break;
        }
        update_centroids(features, &cells, &mut c);
        previous = Some(cells);
    }
    Ok(c)
}

/// Means of each cluster, accumulated in sample order. Empty clusters are
/// moved onto the samples farthest from their (updated) centroids.
fn update_centroids(features: &FeatureTable, cells: &[usize], c: &mut Centroids) {
    let dim = c.dim;
    let mut sums = vec![0.0; c.k * dim];
    let mut sizes = vec![0usize; c.k];
    for (i, &j) in cells.iter().enumerate() {
        sizes[j] += 1;
        for (s, x) in sums[j * dim..(j + 1) * dim].iter_mut().zip(features.row(i)) {
            *s += x;
        }
    }
    let empty: Vec<usize> = (0..c.k).filter(|&j| sizes[j] == 0).collect();
    for j in 0..c.k {
        if sizes[j] > 0 {
            let inv = sizes[j] as f64;
            for (dst, s) in c.data[j * dim..(j + 1) * dim].iter_mut().zip(&sums[j * dim..(j + 1) * dim]) {
                *dst = s / inv;
            }
        }
    }
    if empty.is_empty() {
        return;
    }
    let mut far: Vec<(usize, f64)> = cells
        .iter()
        .enumerate()
        .map(|(i, &j)| (i, sq_dist(features.row(i), c.row(j))))
        .collect();
    far.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    for (&j, &(i, _)) in empty.iter().zip(&far) {
        c.data[j * dim..(j + 1) * dim].copy_from_slice(features.row(i));
    }
}

/// Nearest-centroid assignment (Euclidean, lowest index on ties).
pub fn assign(features: &FeatureTable, centroids: &Centroids) -> Result<Assignment> {
    if features.dim() != centroids.dim() {
        return Err(Error::DimensionMismatch {
            expected: centroids.dim(),
            found: features.dim(),
        });
    }
    let cells = nearest_all(features, centroids).into_iter().map(|(j, _)| j).collect();
    Ok(Assignment {
        ids: features.ids().to_vec(),
        cells,
    })
}

/// Histogram of an assignment over `k` cells.
pub fn counts(assignment: &Assignment, k: usize) -> Result<CellCounts> {
    let mut hist = vec![0u64; k];
    for (id, &cell) in assignment.ids().iter().zip(assignment.cells()) {
        match hist.get_mut(cell) {
            Some(h) => *h += 1,
            None => {
                return Err(Error::invalid(format!(
                    "sample `{id}` is assigned to cell {cell}, outside [0, {k})"
                )))
            }
        }
    }
    CellCounts::new(hist)
}

/// Fixed partition of the real line into `K = cuts.len() + 1` intervals
/// `(-inf, c_1), [c_1, c_2), ..., [c_{K-1}, inf)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalPartition {
    cuts: Vec<f64>,
}

impl IntervalPartition {
    pub fn new(cuts: Vec<f64>) -> Result<Self> {
        if cuts.iter().any(|c| !c.is_finite()) || cuts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("interval cut points must be finite and strictly increasing"));
        }
        Ok(Self { cuts })
    }

    pub fn k(&self) -> usize {
        self.cuts.len() + 1
    }

    pub fn cuts(&self) -> &[f64] {
        &self.cuts
    }

    pub fn cell_of(&self, x: f64) -> usize {
        self.cuts.partition_point(|&c| c <= x)
    }

    /// Assign the first coordinate of every feature vector.
    pub fn assign(&self, features: &FeatureTable) -> Result<Assignment> {
        if features.dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: features.dim(),
            });
        }
        let cells = features.data().iter().map(|&x| self.cell_of(x)).collect();
        Ok(Assignment {
            ids: features.ids().to_vec(),
            cells,
        })
    }
}
