//! Range minimum / maximum queries returning argument positions.
//!
//! Sparse table over the value array. Queries are 1-based and inclusive,
//! and among equal extrema the leftmost index wins.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extremum {
    Min,
    Max,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RangeExtremumIndex {
    mode: Extremum,
    values: Vec<i64>,
    // levels[k][i] = 0-based argument of the extremum of values[i .. i + 2^k]
    levels: Vec<Vec<u32>>,
}

impl RangeExtremumIndex {
    pub fn build(values: Vec<i64>, mode: Extremum) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput("range extremum index"));
        }
        let n = values.len();
        let mut levels = vec![(0..n as u32).collect::<Vec<_>>()];
        let mut span = 1;
        while 2 * span <= n {
            let prev = levels.last().unwrap();
            let next: Vec<u32> = (0..=n - 2 * span)
                .map(|i| pick(&values, mode, prev[i], prev[i + span]))
                .collect();
            levels.push(next);
            span *= 2;
        }
        Ok(RangeExtremumIndex {
            mode,
            values,
            levels,
        })
    }

    pub fn mode(&self) -> Extremum {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    /// Value at 1-based position `i`.
    pub fn value(&self, i: usize) -> i64 {
        self.values[i - 1]
    }

    pub fn query(&self, i: usize, j: usize) -> Result<usize> {
        if i == 0 || i > j || j > self.values.len() {
            return Err(Error::InvalidRange {
                start: i,
                end: j,
                len: self.values.len(),
            });
        }
        Ok(self.query_unchecked(i, j))
    }

    #[inline]
    pub(crate) fn query_unchecked(&self, i: usize, j: usize) -> usize {
        let (lo, hi) = (i - 1, j - 1);
        let k = (hi - lo + 1).ilog2() as usize;
        let level = &self.levels[k];
        pick(&self.values, self.mode, level[lo], level[hi + 1 - (1 << k)]) as usize + 1
    }

    /// Extremum value over the 1-based inclusive range.
    #[inline]
    pub(crate) fn extreme_value(&self, i: usize, j: usize) -> i64 {
        self.values[self.query_unchecked(i, j) - 1]
    }
}

// `a` is never to the right of `b`, so preferring `a` on ties keeps the leftmost.
#[inline]
fn pick(values: &[i64], mode: Extremum, a: u32, b: u32) -> u32 {
    let (va, vb) = (values[a as usize], values[b as usize]);
    let keep_a = match mode {
        Extremum::Min => va <= vb,
        Extremum::Max => va >= vb,
    };
    if keep_a {
        a
    } else {
        b
    }
}
