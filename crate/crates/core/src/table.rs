//! Per-sample loss records.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::partition::Assignment;

/// Losses of one fixed model evaluated on a sample set, keyed by sample id.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleTable {
    ids: Vec<String>,
    losses: Vec<f64>,
}

impl SampleTable {
    pub fn new(ids: Vec<String>, losses: Vec<f64>) -> Result<Self> {
        if ids.len() != losses.len() {
            return Err(Error::DimensionMismatch {
                expected: ids.len(),
                found: losses.len(),
            });
        }
        let mut seen = HashSet::with_capacity(ids.len());
        for (id, &loss) in ids.iter().zip(&losses) {
            if !seen.insert(id.as_str()) {
                return Err(Error::invalid(format!("duplicate sample id `{id}`")));
            }
            if !loss.is_finite() || loss < 0.0 {
                return Err(Error::invalid(format!(
                    "loss of `{id}` must be finite and nonnegative, got {loss}"
                )));
            }
        }
        Ok(Self { ids, losses })
    }

    /// Table with ids `0..losses.len()`.
    pub fn from_losses(losses: Vec<f64>) -> Result<Self> {
        let ids = (0..losses.len()).map(|i| i.to_string()).collect();
        Self::new(ids, losses)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn losses(&self) -> &[f64] {
        &self.losses
    }

    /// Empirical loss F(S, h).
    pub fn mean_loss(&self) -> f64 {
        if self.losses.is_empty() {
            return 0.0;
        }
        compensated_sum(self.losses.iter().copied()) / self.losses.len() as f64
    }

    pub fn max_loss(&self) -> f64 {
        self.losses.iter().copied().fold(0.0, f64::max)
    }

    /// Fail on the first loss above `c_sup`.
    pub fn check_supremum(&self, c_sup: f64) -> Result<()> {
        match self.ids.iter().zip(&self.losses).find(|(_, &l)| l > c_sup) {
            Some((id, &loss)) => Err(Error::LossAboveSupremum {
                id: id.clone(),
                loss,
                c_sup,
            }),
            None => Ok(()),
        }
    }

    /// Cell of every sample, in table order, looked up by id.
    pub fn cells(&self, assignment: &Assignment) -> Result<Vec<usize>> {
        let lookup: HashMap<&str, usize> = assignment
            .ids()
            .iter()
            .map(String::as_str)
            .zip(assignment.cells().iter().copied())
            .collect();
        self.ids
            .iter()
            .map(|id| {
                lookup
                    .get(id.as_str())
                    .copied()
                    .ok_or_else(|| Error::invalid(format!("sample `{id}` has no cell assignment")))
            })
            .collect()
    }
}

/// Neumaier summation; keeps means accurate to a few ulps for any `n`.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_negatives() {
        let dup = SampleTable::new(vec!["a".into(), "a".into()], vec![0.0, 1.0]);
        assert!(matches!(dup, Err(Error::InvalidInput(_))));
        let neg = SampleTable::from_losses(vec![-0.5]);
        assert!(neg.is_err());
        let nan = SampleTable::from_losses(vec![f64::NAN]);
        assert!(nan.is_err());
    }

    #[test]
    fn supremum_violation_names_sample() {
        let t = SampleTable::from_losses(vec![0.2, 1.5]).unwrap();
        match t.check_supremum(1.0) {
            Err(Error::LossAboveSupremum { id, loss, .. }) => {
                assert_eq!(id, "1");
                assert_eq!(loss, 1.5);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn compensated_sum_beats_naive() {
        let v: Vec<f64> = std::iter::once(1e16)
            .chain(std::iter::repeat_n(1.0, 1000))
            .chain(std::iter::once(-1e16))
            .collect();
        assert_eq!(compensated_sum(v.iter().copied()), 1000.0);
    }
}
