//! Raw samples and their rank transforms.

use std::cmp::Ordering;

use crate::error::{Error, Result};

/// An `n x d` matrix of observations stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    data: Vec<f64>,
    n: usize,
    d: usize,
}

impl Sample {
    /// Builds a sample from row-major data. Every entry must be finite.
    pub fn new(n: usize, d: usize, data: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if n == 0 {
            return Err(Error::SampleTooSmall { min: 1, got: 0 });
        }
        if data.len() != n * d {
            return Err(Error::DimensionMismatch {
                expected: n * d,
                got: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / d,
                column: pos % d,
            });
        }
        Ok(Sample { data, n, d })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * d);
        for row in rows {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Sample::new(rows.len(), d, data)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.d)
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.data.iter().skip(j).step_by(self.d).copied()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Rank transform, see [`to_pseudo`].
    pub fn to_pseudo(&self) -> Result<PseudoSample> {
        to_pseudo(self)
    }
}

/// Observations mapped into the unit cube, normally through ranks.
///
/// Entries lie in `[0, 1]`; rank transforms produce values in `(0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoSample {
    data: Vec<f64>,
    n: usize,
    d: usize,
}

impl PseudoSample {
    /// Wraps values that are already on the unit scale.
    pub fn new(n: usize, d: usize, data: Vec<f64>) -> Result<Self> {
        let sample = Sample::new(n, d, data)?;
        if let Some(&value) = sample.data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Domain { value });
        }
        Ok(PseudoSample {
            data: sample.data,
            n,
            d,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let sample = Sample::from_rows(rows)?;
        PseudoSample::new(sample.n, sample.d, sample.data)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.d)
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.data.iter().skip(j).step_by(self.d).copied()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Copy with observation `i` removed (values are not re-ranked).
    pub fn without_row(&self, i: usize) -> PseudoSample {
        let mut data = Vec::with_capacity((self.n - 1) * self.d);
        for (k, row) in self.rows().enumerate() {
            if k != i {
                data.extend_from_slice(row);
            }
        }
        PseudoSample {
            data,
            n: self.n - 1,
            d: self.d,
        }
    }
}

/// Midranks of `values`, 1-based.
pub(crate) fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(Ordering::Equal));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = rank;
        }
        start = end;
    }
    ranks
}

/// `U_ij = R_ij / n` with ties resolved by midranks.
pub fn to_pseudo(sample: &Sample) -> Result<PseudoSample> {
    let (n, d) = (sample.n, sample.d);
    if n < 2 {
        return Err(Error::SampleTooSmall { min: 2, got: n });
    }
    let mut data = vec![0.0; n * d];
    for j in 0..d {
        let column: Vec<f64> = sample.column(j).collect();
        for (i, r) in midranks(&column).into_iter().enumerate() {
            data[i * d + j] = r / n as f64;
        }
    }
    Ok(PseudoSample { data, n, d })
}

/// Empirical marginal CDF of one column, right-continuous.
pub fn ecdf_at(sample: &Sample, column: usize, x: f64) -> Result<f64> {
    if column >= sample.d {
        return Err(Error::ColumnOutOfRange {
            column,
            dim: sample.d,
        });
    }
    let count = sample.column(column).filter(|&v| v <= x).count();
    Ok(count as f64 / sample.n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn single_column(values: &[f64]) -> Sample {
        Sample::new(values.len(), 1, values.to_vec()).unwrap()
    }

    #[test]
    fn ranks_of_a_column() {
        let p = to_pseudo(&single_column(&[3.1, 0.5, 7.2])).unwrap();
        let expected = [2.0 / 3.0, 1.0 / 3.0, 1.0];
        for (a, b) in p.as_slice().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn ties_get_midranks() {
        let p = to_pseudo(&single_column(&[5.0, 5.0])).unwrap();
        assert_eq!(p.as_slice(), &[0.75, 0.75]);
        let p = to_pseudo(&single_column(&[1.0, 2.0, 2.0, 2.0, 3.0])).unwrap();
        assert_eq!(p.as_slice(), &[0.2, 0.6, 0.6, 0.6, 1.0]);
    }

    #[test]
    fn comonotone_rows() {
        let s = Sample::from_rows(&[vec![1.0, 10.0], vec![2.0, 20.0]]).unwrap();
        let p = to_pseudo(&s).unwrap();
        assert_eq!(p.as_slice(), &[0.5, 0.5, 1.0, 1.0]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            Sample::new(2, 1, vec![1.0, f64::NAN]),
            Err(Error::NonFinite { row: 1, column: 0 })
        ));
        assert!(matches!(
            Sample::from_rows(&[vec![1.0, 2.0], vec![3.0]]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            to_pseudo(&single_column(&[1.0])),
            Err(Error::SampleTooSmall { .. })
        ));
        assert!(matches!(
            PseudoSample::new(1, 2, vec![0.5, 1.5]),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn empirical_cdf() {
        let s = single_column(&[1.0, 2.0, 3.0]);
        assert!((ecdf_at(&s, 0, 2.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(ecdf_at(&s, 0, 0.5).unwrap(), 0.0);
        assert_eq!(ecdf_at(&s, 0, 3.0).unwrap(), 1.0);
        assert!(matches!(
            ecdf_at(&s, 1, 0.0),
            Err(Error::ColumnOutOfRange { .. })
        ));
    }

    proptest! {
        #[test]
        fn invariant_under_increasing_maps(values in prop::collection::vec(-100.0f64..100.0, 2..60)) {
            let n = values.len() / 2;
            prop_assume!(n >= 2);
            let data: Vec<f64> = values[..2 * n].to_vec();
            let sample = Sample::new(n, 2, data.clone()).unwrap();
            let mapped: Vec<f64> = data
                .iter()
                .enumerate()
                .map(|(k, &x)| if k % 2 == 0 { x.powi(3) + x } else { x })
                .collect();
            let mapped = Sample::new(n, 2, mapped).unwrap();
            prop_assert_eq!(to_pseudo(&sample).unwrap(), to_pseudo(&mapped).unwrap());
        }

        #[test]
        fn tie_free_columns_sum_to_half_n_plus_one(n in 2usize..200, seed in any::<u64>()) {
            let mut state = seed | 1;
            let values: Vec<f64> = (0..n).map(|i| {
                state ^= state << 13; state ^= state >> 7; state ^= state << 17;
                (state >> 20) as f64 + i as f64 * 1e-3
            }).collect();
            let mut sorted = values.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            sorted.dedup();
            prop_assume!(sorted.len() == n);
            let p = to_pseudo(&single_column(&values)).unwrap();
            let sum: f64 = p.as_slice().iter().sum();
            prop_assert!((sum - (n as f64 + 1.0) / 2.0).abs() < 1e-9);
        }
    }
}
