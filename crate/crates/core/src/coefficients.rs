//! Copula coefficients: sample means of tensor-product Legendre values over
//! every multi-index in the box `m <= N`.

use std::fmt;
use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::legendre::{check_degree, fill_basis};
use crate::pseudo::{PseudoSample, Sample};

/// A multi-index `(m_1, ..., m_d)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(components: Vec<usize>) -> Self {
        MultiIndex(components)
    }

    pub fn zero(d: usize) -> Self {
        MultiIndex(vec![0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[usize] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&m| m == 0)
    }

    /// Value forced by the estimator's case structure, if any: `1` at the
    /// origin and `0` when exactly `d - 1` components vanish.
    pub fn structural_value(&self) -> Option<f64> {
        let zeros = self.0.iter().filter(|&&m| m == 0).count();
        if zeros == self.0.len() {
            Some(1.0)
        } else if zeros + 1 == self.0.len() {
            Some(0.0)
        } else {
            None
        }
    }
}

impl From<Vec<usize>> for MultiIndex {
    fn from(v: Vec<usize>) -> Self {
        MultiIndex(v)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Per-dimension truncation orders `N = (N_1, ..., N_d)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DegreeVector(Vec<usize>);

impl DegreeVector {
    pub fn new(components: Vec<usize>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidParameter("degree vector is empty".into()));
        }
        for &c in &components {
            check_degree(c)?;
        }
        Ok(DegreeVector(components))
    }

    /// `N_1 = ... = N_d = degree`.
    pub fn uniform(degree: usize, d: usize) -> Result<Self> {
        DegreeVector::new(vec![degree; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[usize] {
        &self.0
    }

    pub fn max_component(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0)
    }

    /// Extents `N_j + 1` of the coefficient box.
    pub fn widths(&self) -> Vec<usize> {
        self.0.iter().map(|n| n + 1).collect()
    }

    /// Number of multi-indices with `m <= N`.
    pub fn box_len(&self) -> usize {
        self.0.iter().map(|n| n + 1).product()
    }

    /// Componentwise `m <= N`.
    pub fn contains(&self, m: &MultiIndex) -> bool {
        m.dim() == self.dim() && m.0.iter().zip(&self.0).all(|(a, b)| a <= b)
    }

    /// Row-major offset of `m` in the box (last component fastest).
    pub fn offset(&self, m: &MultiIndex) -> Option<usize> {
        if !self.contains(m) {
            return None;
        }
        Some(
            m.0.iter()
                .zip(&self.0)
                .fold(0, |acc, (&mj, &nj)| acc * (nj + 1) + mj),
        )
    }

    /// Inverse of [`DegreeVector::offset`].
    pub fn index_at(&self, mut offset: usize) -> MultiIndex {
        let mut comps = vec![0; self.0.len()];
        for (c, &nj) in comps.iter_mut().zip(&self.0).rev() {
            *c = offset % (nj + 1);
            offset /= nj + 1;
        }
        MultiIndex(comps)
    }

    /// All `m <= N` in storage order.
    pub fn indices(&self) -> impl Iterator<Item = MultiIndex> + '_ {
        (0..self.box_len()).map(move |k| self.index_at(k))
    }
}

/// Estimated coefficients over the box `m <= degree`, stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTensor {
    degree: DegreeVector,
    values: Vec<f64>,
    n_source: usize,
}

impl CoefficientTensor {
    /// Wraps raw values in storage order; no structural rule is applied.
    pub fn from_values(degree: DegreeVector, values: Vec<f64>, n_source: usize) -> Result<Self> {
        if values.len() != degree.box_len() {
            return Err(Error::DimensionMismatch {
                expected: degree.box_len(),
                got: values.len(),
            });
        }
        Ok(CoefficientTensor {
            degree,
            values,
            n_source,
        })
    }

    /// Builds a tensor from a per-index function, then forces the structural
    /// values (`1` at the origin, `0` on the axes).
    pub fn from_fn<F: FnMut(&MultiIndex) -> f64>(degree: DegreeVector, mut f: F) -> Self {
        let values = degree.indices().map(|m| f(&m)).collect();
        let mut t = CoefficientTensor {
            degree,
            values,
            n_source: 0,
        };
        t.apply_structural_rules();
        t
    }

    pub fn degree(&self) -> &DegreeVector {
        &self.degree
    }

    pub fn dim(&self) -> usize {
        self.degree.dim()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n_source(&self) -> usize {
        self.n_source
    }

    pub fn get(&self, m: &MultiIndex) -> Option<f64> {
        self.degree.offset(m).map(|k| self.values[k])
    }

    pub fn iter(&self) -> impl Iterator<Item = (MultiIndex, f64)> + '_ {
        self.degree.indices().zip(self.values.iter().copied())
    }

    pub fn apply_structural_rules(&mut self) {
        for k in 0..self.values.len() {
            if let Some(v) = self.degree.index_at(k).structural_value() {
                self.values[k] = v;
            }
        }
    }

    /// Sub-box `m <= degree`, which must fit inside the current box.
    pub fn truncated(&self, degree: &DegreeVector) -> Result<Self> {
        if degree.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: degree.dim(),
            });
        }
        if degree
            .components()
            .iter()
            .zip(self.degree.components())
            .any(|(a, b)| a > b)
        {
            return Err(Error::InvalidParameter(
                "truncation degree exceeds the fitted box".into(),
            ));
        }
        let values = degree
            .indices()
            .map(|m| self.values[self.degree.offset(&m).unwrap()])
            .collect();
        Ok(CoefficientTensor {
            degree: degree.clone(),
            values,
            n_source: self.n_source,
        })
    }

    /// `sum_m rho_m^2`, the squared L2 norm of the series.
    pub fn squared_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    /// CSV with header `m_1,...,m_d,value`, one row per multi-index.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let header: Vec<String> = (1..=self.dim()).map(|j| format!("m_{j}")).collect();
        writeln!(out, "{},value", header.join(","))?;
        for (m, v) in self.iter() {
            let comps: Vec<String> = m.components().iter().map(usize::to_string).collect();
            writeln!(out, "{},{}", comps.join(","), crate::fmt_f64(v))?;
        }
        Ok(())
    }
}

/// Per-dimension tables of basis values, one row of width `N_j + 1` per
/// observation.
pub(crate) struct BasisTables {
    pub(crate) tables: Vec<Vec<f64>>,
    pub(crate) widths: Vec<usize>,
    pub(crate) n: usize,
}

impl BasisTables {
    /// `weight(j, u)` multiplies every basis value of dimension `j`.
    pub(crate) fn build<W: Fn(usize, f64) -> f64>(
        data: &[f64],
        n: usize,
        degree: &DegreeVector,
        weight: W,
    ) -> Self {
        let d = degree.dim();
        let widths = degree.widths();
        let tables = (0..d)
            .map(|j| {
                let w = widths[j];
                let mut table = vec![0.0; n * w];
                for i in 0..n {
                    let u = data[i * d + j];
                    let row = &mut table[i * w..(i + 1) * w];
                    fill_basis(u, row);
                    let s = weight(j, u);
                    if s != 1.0 {
                        row.iter_mut().for_each(|v| *v *= s);
                    }
                }
                table
            })
            .collect();
        BasisTables { tables, widths, n }
    }

    fn row(&self, j: usize, i: usize) -> &[f64] {
        let w = self.widths[j];
        &self.tables[j][i * w..(i + 1) * w]
    }

    /// Calls `visit` with the full tensor of products `prod_j Q_{m_j}(U_ij)`
    /// for each observation, in storage order.
    pub(crate) fn for_each_product<F: FnMut(&[f64])>(&self, mut visit: F) {
        let total: usize = self.widths.iter().product();
        let mut current = Vec::with_capacity(total);
        let mut next = Vec::with_capacity(total);
        for i in 0..self.n {
            current.clear();
            current.push(1.0);
            for j in 0..self.widths.len() {
                next.clear();
                let row = self.row(j, i);
                for &a in &current {
                    next.extend(row.iter().map(|&b| a * b));
                }
                std::mem::swap(&mut current, &mut next);
            }
            visit(&current);
        }
    }

    /// Column sums of the product tensors.
    pub(crate) fn product_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.widths.iter().product()];
        self.for_each_product(|p| {
            for (s, v) in sums.iter_mut().zip(p) {
                *s += v;
            }
        });
        sums
    }
}

fn check_box(dim: usize, degree: &DegreeVector) -> Result<()> {
    if dim != degree.dim() {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: degree.dim(),
        });
    }
    for &c in degree.components() {
        check_degree(c)?;
    }
    Ok(())
}

pub(crate) fn sample_means(
    data: &[f64],
    n: usize,
    degree: &DegreeVector,
    weight: impl Fn(usize, f64) -> f64,
) -> Vec<f64> {
    let tables = BasisTables::build(data, n, degree, weight);
    let nf = n as f64;
    tables.product_sums().into_iter().map(|s| s / nf).collect()
}

/// Rank-based coefficient estimates with the structural cases enforced.
pub fn estimate_coefficients(
    pseudo: &PseudoSample,
    degree: &DegreeVector,
) -> Result<CoefficientTensor> {
    check_box(pseudo.dim(), degree)?;
    let values = sample_means(pseudo.as_slice(), pseudo.n(), degree, |_, _| 1.0);
    let mut tensor = CoefficientTensor {
        degree: degree.clone(),
        values,
        n_source: pseudo.n(),
    };
    tensor.apply_structural_rules();
    Ok(tensor)
}

/// Pseudo-estimator for known margins: `U_ij = F_j(X_ij)` replaces the ranks.
pub fn coefficients_known_margins(
    sample: &Sample,
    margins: &[&dyn Fn(f64) -> f64],
    degree: &DegreeVector,
) -> Result<CoefficientTensor> {
    let d = sample.dim();
    if margins.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: margins.len(),
        });
    }
    check_box(d, degree)?;
    let mut data = Vec::with_capacity(sample.n() * d);
    for row in sample.rows() {
        for (x, margin) in row.iter().zip(margins) {
            let u = margin(*x);
            if !(0.0..=1.0).contains(&u) {
                return Err(Error::Domain { value: u });
            }
            data.push(u);
        }
    }
    let values = sample_means(&data, sample.n(), degree, |_, _| 1.0);
    let mut tensor = CoefficientTensor {
        degree: degree.clone(),
        values,
        n_source: sample.n(),
    };
    tensor.apply_structural_rules();
    Ok(tensor)
}

/// Spearman's rho estimate, the `(1, 1)` copula coefficient of a bivariate
/// pseudo-sample: `(3/n) sum (2U_i1 - 1)(2U_i2 - 1)`.
pub fn spearman_rho(pseudo: &PseudoSample) -> Result<f64> {
    if pseudo.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: pseudo.dim(),
        });
    }
    let degree = DegreeVector::uniform(1, 2)?;
    let values = sample_means(pseudo.as_slice(), pseudo.n(), &degree, |_, _| 1.0);
    Ok(values[degree.offset(&MultiIndex::new(vec![1, 1])).unwrap()])
}
