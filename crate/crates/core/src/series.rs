use alloc::vec::Vec;
use core::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered non-negative integer observations `y_0, ..., y_T`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CountSeries(Vec<u64>);

impl CountSeries {
    pub fn new(values: Vec<u64>) -> Self {
        CountSeries(values)
    }

    /// Builds a series from signed values, rejecting negatives.
    pub fn from_signed(values: &[i64]) -> Result<Self> {
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                u64::try_from(v).map_err(|_| Error::Input(alloc::format!("negative count {v} at position {i}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(CountSeries)
    }

    pub fn values(&self) -> &[u64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<u64> {
        self.0
    }

    /// Number of likelihood contributions, i.e. `len - 1`.
    pub fn n_transitions(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn max(&self) -> u64 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    pub fn mean(&self) -> f64 {
        if self.0.is_empty() {
            return 0.0;
        }
        self.0.iter().map(|&y| y as f64).sum::<f64>() / self.0.len() as f64
    }

    pub fn variance(&self) -> f64 {
        let n = self.0.len();
        if n < 2 {
            return 0.0;
        }
        let m = self.mean();
        self.0.iter().map(|&y| (y as f64 - m) * (y as f64 - m)).sum::<f64>() / (n - 1) as f64
    }

    /// Sample lag-1 autocorrelation; zero for a constant series.
    pub fn lag1_autocorrelation(&self) -> f64 {
        let n = self.0.len();
        if n < 2 {
            return 0.0;
        }
        let m = self.mean();
        let denom: f64 = self.0.iter().map(|&y| (y as f64 - m) * (y as f64 - m)).sum();
        if denom == 0.0 {
            return 0.0;
        }
        let num: f64 = self.0.windows(2).map(|w| (w[0] as f64 - m) * (w[1] as f64 - m)).sum();
        num / denom
    }

    /// True when every observation is equal (including the all-zero case).
    pub fn is_constant(&self) -> bool {
        self.0.windows(2).all(|w| w[0] == w[1])
    }

    pub fn head(&self, n: usize) -> CountSeries {
        CountSeries(self.0[..n.min(self.0.len())].to_vec())
    }
}

impl Deref for CountSeries {
    type Target = [u64];
    fn deref(&self) -> &[u64] {
        &self.0
    }
}

impl From<Vec<u64>> for CountSeries {
    fn from(v: Vec<u64>) -> Self {
        CountSeries(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_negative_values() {
        let err = CountSeries::from_signed(&[3, -1, 2]).unwrap_err();
        assert!(matches!(err, Error::Input(_)));
        assert_eq!(CountSeries::from_signed(&[3, 5, 2]).unwrap().values(), &[3, 5, 2]);
    }

    #[test]
    fn moments() {
        let s = CountSeries::new(alloc::vec![1, 2, 3, 4]);
        assert_eq!(s.mean(), 2.5);
        assert!((s.variance() - 5.0 / 3.0).abs() < 1e-15);
        assert!(CountSeries::new(alloc::vec![0, 0, 0]).is_constant());
        assert_eq!(CountSeries::new(alloc::vec![4, 4]).lag1_autocorrelation(), 0.0);
    }
}
