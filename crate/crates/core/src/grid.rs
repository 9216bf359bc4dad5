//! Evaluation grids `j/T`, `j = 1..T-1` per axis, and values stored on them.

use std::io::{self, Write};

use crate::error::{Error, Result};

/// A tensor grid in the unit cube.
///
/// `t` is the denominator used by the discrete error sums `(1/T^d) sum |.|`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    axes: Vec<Vec<f64>>,
    t: usize,
}

impl Grid {
    /// Nodes `j/T` for `j = 1..T-1` on each of `d` axes.
    pub fn regular(t: usize, d: usize) -> Result<Self> {
        if t < 2 {
            return Err(Error::InvalidParameter(format!(
                "grid T must be at least 2, got {t}"
            )));
        }
        if d == 0 {
            return Err(Error::InvalidParameter(
                "grid dimension must be positive".into(),
            ));
        }
        let axis: Vec<f64> = (1..t).map(|j| j as f64 / t as f64).collect();
        Ok(Grid {
            axes: vec![axis; d],
            t,
        })
    }

    /// The 17-node axis `{0.01, 0.07125, ..., 0.99}` used for density and
    /// trivariate benchmarks. Its sums are normalised with `T = 18`.
    pub fn coarse(d: usize) -> Result<Self> {
        let axis: Vec<f64> = (0..17).map(|k| 0.01 + 0.98 * k as f64 / 16.0).collect();
        Grid::from_axes(vec![axis; d], 18)
    }

    pub fn from_axes(axes: Vec<Vec<f64>>, t: usize) -> Result<Self> {
        if axes.is_empty() || axes.iter().any(Vec::is_empty) {
            return Err(Error::InvalidParameter(
                "grid axes must be non-empty".into(),
            ));
        }
        if let Some(&value) = axes.iter().flatten().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Domain { value });
        }
        if t == 0 {
            return Err(Error::InvalidParameter("grid T must be positive".into()));
        }
        Ok(Grid { axes, t })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(Vec::len).collect()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `T^d`.
    pub fn normalizer(&self) -> f64 {
        (self.t as f64).powi(self.dim() as i32)
    }

    /// Coordinates of the `k`-th node in row-major order.
    pub fn node(&self, mut k: usize) -> Vec<f64> {
        let mut point = vec![0.0; self.dim()];
        for (p, axis) in point.iter_mut().zip(&self.axes).rev() {
            *p = axis[k % axis.len()];
            k /= axis.len();
        }
        point
    }

    pub fn nodes(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(move |k| self.node(k))
    }
}

/// Values attached to the nodes of a [`Grid`], row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GridValues {
    shape: Vec<usize>,
    values: Vec<f64>,
}

impl GridValues {
    pub fn new(shape: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if expected != values.len() {
            return Err(Error::DimensionMismatch {
                expected,
                got: values.len(),
            });
        }
        Ok(GridValues { shape, values })
    }

    /// Evaluates `f` at every node of `grid`.
    pub fn from_fn<F: FnMut(&[f64]) -> f64>(grid: &Grid, mut f: F) -> Self {
        let values = grid.nodes().map(|p| f(&p)).collect();
        GridValues {
            shape: grid.shape(),
            values,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Replaces negative entries by zero.
    pub fn clip_negative(&mut self) {
        self.values.iter_mut().for_each(|v| *v = v.max(0.0));
    }

    /// One row per node: coordinates `u_1..u_d`, then the value.
    pub fn write_csv<W: Write>(&self, grid: &Grid, mut out: W) -> io::Result<()> {
        let header: Vec<String> = (1..=grid.dim()).map(|j| format!("u_{j}")).collect();
        writeln!(out, "{},value", header.join(","))?;
        for (p, v) in grid.nodes().zip(&self.values) {
            let coords: Vec<String> = p.iter().map(|&x| crate::fmt_f64(x)).collect();
            writeln!(out, "{},{}", coords.join(","), crate::fmt_f64(*v))?;
        }
        Ok(())
    }

    /// gnuplot "nonuniform matrix" layout for bivariate grids: the first row
    /// holds the column count and the second-axis nodes, each following row
    /// a first-axis node and its values. Plot with
    /// `splot 'file' nonuniform matrix with lines`.
    pub fn write_gnuplot_matrix<W: Write>(&self, grid: &Grid, mut out: W) -> io::Result<()> {
        if grid.dim() != 2 {
            return Err(io::Error::new(
                io::ErrorKind::InvalidInput,
                "matrix output needs a bivariate grid",
            ));
        }
        let (xs, ys) = (&grid.axes()[0], &grid.axes()[1]);
        write!(out, "{}", ys.len())?;
        for y in ys {
            write!(out, " {}", crate::fmt_f64(*y))?;
        }
        writeln!(out)?;
        for (i, x) in xs.iter().enumerate() {
            write!(out, "{}", crate::fmt_f64(*x))?;
            for v in &self.values[i * ys.len()..(i + 1) * ys.len()] {
                write!(out, " {}", crate::fmt_f64(*v))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regular_nodes() {
        let g = Grid::regular(4, 2).unwrap();
        assert_eq!(g.shape(), vec![3, 3]);
        assert_eq!(g.len(), 9);
        assert_eq!(g.node(0), vec![0.25, 0.25]);
        assert_eq!(g.node(5), vec![0.5, 0.75]);
        assert_eq!(g.normalizer(), 16.0);
        assert!(Grid::regular(1, 2).is_err());
    }

    #[test]
    fn coarse_axis() {
        let g = Grid::coarse(2).unwrap();
        let axis = &g.axes()[0];
        assert_eq!(axis.len(), 17);
        assert!((axis[0] - 0.01).abs() < 1e-15);
        assert!((axis[1] - 0.07125).abs() < 1e-12);
        assert!((axis[16] - 0.99).abs() < 1e-15);
    }

    #[test]
    fn gnuplot_layout() {
        let g = Grid::regular(3, 2).unwrap();
        let v = GridValues::from_fn(&g, |p| p[0] + 10.0 * p[1]);
        let mut buf = Vec::new();
        v.write_gnuplot_matrix(&g, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("2 "));
        assert_eq!(lines[1].split_whitespace().count(), 3);
    }
}
