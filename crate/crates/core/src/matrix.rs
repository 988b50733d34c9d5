use std::fmt;
use std::ops::{Add, Index, IndexMut, Sub};

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense row/column-addressable matrix of double precision complex values.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(Mat<Complex64>);

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(Mat::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(Mat::identity(n, n))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self(Mat::from_fn(rows, cols, f))
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |j, k| {
            if j == k {
                diag[j]
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// Builds a matrix from row-major data.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Ok(Self::from_fn(nrows, ncols, |j, k| rows[j][k]))
    }

    /// Real-valued convenience constructor, row-major.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn as_faer(&self) -> &Mat<Complex64> {
        &self.0
    }

    pub fn into_faer(self) -> Mat<Complex64> {
        self.0
    }

    pub fn entries(&self) -> impl Iterator<Item = Complex64> + '_ {
        (0..self.cols()).flat_map(move |k| (0..self.rows()).map(move |j| self.0[(j, k)]))
    }

    pub fn all_finite(&self) -> bool {
        self.entries().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Sum of squared entry moduli, i.e. Tr(AA*).
    pub fn frobenius_sq(&self) -> f64 {
        self.entries().map(|z| z.norm_sqr()).sum()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::from_fn(self.rows(), self.cols(), |j, k| self.0[(j, k)] * factor)
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols(), self.rows(), |j, k| self.0[(k, j)].conj())
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols() != rhs.rows() {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            )));
        }
        Ok(Self(&self.0 * &rhs.0))
    }

    pub(crate) fn ensure_same_shape(&self, other: &Self) -> Result<()> {
        if self.rows() != other.rows() || self.cols() != other.cols() {
            return Err(Error::Shape(format!(
                "{}x{} vs {}x{}",
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols()
            )));
        }
        Ok(())
    }

    pub(crate) fn ensure_square(&self) -> Result<()> {
        if !self.is_square() {
            return Err(Error::Shape(format!(
                "expected a square matrix, got {}x{}",
                self.rows(),
                self.cols()
            )));
        }
        Ok(())
    }

    pub(crate) fn ensure_finite(&self) -> Result<()> {
        if !self.all_finite() {
            return Err(Error::InvalidValue("matrix has non-finite entries".into()));
        }
        Ok(())
    }
}

impl From<Mat<Complex64>> for ComplexMatrix {
    fn from(m: Mat<Complex64>) -> Self {
        Self(m)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.0[idx]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut Complex64 {
        &mut self.0[idx]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    /// Panics on shape mismatch; use the checked call sites in `ensemble` for user input.
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows(), self.cols())?;
        for j in 0..self.rows().min(8) {
            let row: Vec<String> = (0..self.cols().min(8))
                .map(|k| format!("{:.4}", self.get(j, k)))
                .collect();
            writeln!(f, "  {}", row.join(", "))?;
        }
        write!(f, "]")
    }
}
