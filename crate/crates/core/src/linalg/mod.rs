//! Dense complex linear algebra for the small matrices that show up in
//! codebook design: channel matrices, scatter matrices and their
//! eigen/singular decompositions.
//!
//! Everything here is sequential and allocation-light. Matrix sizes are
//! expected to stay below a few hundred rows and columns.

mod eig;
mod svd;

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

pub use eig::{dominant_eigvec, herm_eig, psd_sqrt, SpectralDecomposition};
pub use svd::{svd, SvdResult};

/// Largest number of entries a [`CMat`] may hold (rows × cols).
pub const MAX_ENTRIES: usize = 1 << 26;

/// Tolerance used by the Hermitian symmetry check.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Modulus below which a component is skipped when fixing the phase of a vector.
pub const PHASE_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("matrix is not Hermitian: |a[{row},{col}] - conj(a[{col},{row}])| = {deviation:e}")]
    NonHermitian { row: usize, col: usize, deviation: f64 },
    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("matrix dimensions {rows}x{cols} exceed the supported size")]
    DimensionOverflow { rows: usize, cols: usize },
    #[error("matrix must have nonzero dimensions")]
    Empty,
}

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self, LinalgError> {
        if rows == 0 || cols == 0 {
            return Err(LinalgError::Empty);
        }
        if rows.checked_mul(cols).is_none_or(|n| n > MAX_ENTRIES) {
            return Err(LinalgError::DimensionOverflow { rows, cols });
        }
        if data.len() != rows * cols {
            return Err(LinalgError::DimMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        let m = Self { rows, cols, data };
        m.check_finite()?;
        Ok(m)
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self, LinalgError> {
        Self::from_vec(rows, cols, data.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn column_vector(v: &[Complex64]) -> Self {
        Self {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    pub fn row_vector(v: &[Complex64]) -> Self {
        Self {
            rows: 1,
            cols: v.len(),
            data: v.to_vec(),
        }
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn set_column(&mut self, c: usize, v: &[Complex64]) {
        debug_assert_eq!(v.len(), self.rows);
        for (r, &x) in v.iter().enumerate() {
            self[(r, c)] = x;
        }
    }

    pub fn check_finite(&self) -> Result<(), LinalgError> {
        match self.data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            Some(i) => Err(LinalgError::NonFinite {
                row: i / self.cols,
                col: i % self.cols,
            }),
            None => Ok(()),
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn matmul(&self, other: &CMat) -> Result<CMat, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = CMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let brow = other.row(k);
                let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product `A x`.
    pub fn mul_vec(&self, x: &[Complex64]) -> Result<Vec<Complex64>, LinalgError> {
        if x.len() != self.cols {
            return Err(LinalgError::DimMismatch(format!(
                "cannot multiply {}x{} by vector of length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        Ok((0..self.rows)
            .map(|r| self.row(r).iter().zip(x).map(|(&a, &b)| a * b).sum())
            .collect())
    }

    /// `Aᴴ A`, computed directly and made exactly Hermitian.
    pub fn gram(&self) -> CMat {
        let n = self.cols;
        let mut g = CMat::zeros(n, n);
        for r in 0..self.rows {
            let row = self.row(r);
            for i in 0..n {
                let ai = row[i].conj();
                for j in i..n {
                    g.data[i * n + j] += ai * row[j];
                }
            }
        }
        g.symmetrize_upper();
        g
    }

    /// `A Aᴴ`, computed directly and made exactly Hermitian.
    pub fn outer_gram(&self) -> CMat {
        let n = self.rows;
        let mut g = CMat::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                g.data[i * n + j] = cdot(self.row(j), self.row(i));
            }
        }
        g.symmetrize_upper();
        g
    }

    /// Copies the upper triangle onto the lower one and drops imaginary parts
    /// of the diagonal.
    pub(crate) fn symmetrize_upper(&mut self) {
        let n = self.rows;
        for i in 0..n {
            self.data[i * n + i].im = 0.0;
            for j in (i + 1)..n {
                self.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
    }

    /// Averages `A` and `Aᴴ`. Used for accumulated scatter matrices.
    pub fn hermitian_part(&self) -> CMat {
        CMat::from_fn(self.rows, self.cols, |r, c| {
            (self[(r, c)] + self[(c, r)].conj()) * 0.5
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Spectral norm (largest singular value).
    pub fn norm2(&self) -> f64 {
        if self.data.iter().all(|z| *z == ZERO) {
            return 0.0;
        }
        let g = if self.rows < self.cols {
            self.outer_gram()
        } else {
            self.gram()
        };
        match herm_eig(&g) {
            Ok(d) => d.eigenvalues[0].max(0.0).sqrt(),
            Err(_) => f64::NAN,
        }
    }

    pub fn sub(&self, other: &CMat) -> Result<CMat, LinalgError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(LinalgError::DimMismatch(format!(
                "cannot subtract {}x{} from {}x{}",
                other.rows, other.cols, self.rows, self.cols
            )));
        }
        Ok(CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    /// Checks `A = Aᴴ` entrywise within [`HERMITIAN_TOL`] (scaled by the
    /// largest entry modulus when that exceeds one).
    pub fn check_hermitian(&self) -> Result<(), LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let scale = self.data.iter().map(|z| z.norm()).fold(1.0, f64::max);
        for i in 0..n {
            for j in i..n {
                let deviation = (self[(i, j)] - self[(j, i)].conj()).norm();
                if deviation > HERMITIAN_TOL * scale {
                    return Err(LinalgError::NonHermitian {
                        row: i,
                        col: j,
                        deviation,
                    });
                }
            }
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = Complex64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

/// Kronecker product `A ⊗ B`.
pub fn kron(a: &CMat, b: &CMat) -> Result<CMat, LinalgError> {
    let rows = a.rows.checked_mul(b.rows);
    let cols = a.cols.checked_mul(b.cols);
    let (rows, cols) = match (rows, cols) {
        (Some(r), Some(c)) if r.checked_mul(c).map_or(false, |n| n <= MAX_ENTRIES) => (r, c),
        _ => {
            return Err(LinalgError::DimensionOverflow {
                rows: a.rows.saturating_mul(b.rows),
                cols: a.cols.saturating_mul(b.cols),
            })
        }
    };
    a.check_finite()?;
    b.check_finite()?;
    Ok(CMat::from_fn(rows, cols, |r, c| {
        a[(r / b.rows, c / b.cols)] * b[(r % b.rows, c % b.cols)]
    }))
}

/// Kronecker product of two vectors.
pub fn kron_vec(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        out.extend(b.iter().map(|&y| x * y));
    }
    out
}

/// Flattens an `mv × mh` UPA channel into the `1 × mv·mh` row `H` with
/// `Hᵀ = vec(H̃ᵀ)`, i.e. the rows of `H̃` laid end to end.
pub fn vec_transpose(h: &CMat) -> CMat {
    CMat::row_vector(h.as_slice())
}

/// Inverse of [`vec_transpose`].
pub fn unvec_transpose(row: &CMat, mv: usize, mh: usize) -> Result<CMat, LinalgError> {
    if row.rows() != 1 || row.cols() != mv * mh {
        return Err(LinalgError::DimMismatch(format!(
            "expected a 1x{} row for a {mv}x{mh} array, got {}x{}",
            mv * mh,
            row.rows(),
            row.cols()
        )));
    }
    CMat::from_vec(mv, mh, row.as_slice().to_vec())
}

/// `aᴴ b`.
#[inline]
pub fn cdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

#[inline]
pub fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

#[inline]
pub fn norm(v: &[Complex64]) -> f64 {
    norm_sqr(v).sqrt()
}

/// Rotates `v` so its first component with modulus above [`PHASE_TOL`] is
/// real and positive. Vectors with no such component are left unchanged.
pub fn fix_phase(v: &mut [Complex64]) {
    if let Some(i) = v.iter().position(|z| z.norm() > PHASE_TOL) {
        let lead = v[i];
        let modulus = lead.norm();
        let rot = lead.conj() / modulus;
        for z in v.iter_mut() {
            *z *= rot;
        }
        v[i] = Complex64::new(modulus, 0.0);
    }
}
