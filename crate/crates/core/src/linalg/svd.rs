use num_complex::Complex64;

use super::{cdot, fix_phase, herm_eig, norm, CMat, LinalgError};

/// Singular values below this fraction of `σ₁` are treated as zero.
const RANK_TOL: f64 = 1e-12;

/// Thin singular value decomposition `A = U diag(σ) Vᴴ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdResult {
    /// `rows × r` with orthonormal columns, `r = min(rows, cols)`.
    pub u: CMat,
    /// Descending, non-negative.
    pub singular_values: Vec<f64>,
    /// `cols × r` with orthonormal columns.
    pub v: CMat,
}

impl SvdResult {
    pub fn rank(&self) -> usize {
        self.singular_values.iter().filter(|&&s| s > 0.0).count()
    }

    /// `U diag(σ) Vᴴ`.
    pub fn reconstruct(&self) -> CMat {
        let (rows, cols) = (self.u.rows(), self.v.rows());
        let mut out = CMat::zeros(rows, cols);
        for (k, &s) in self.singular_values.iter().enumerate() {
            if s == 0.0 {
                continue;
            }
            for i in 0..rows {
                let us = self.u[(i, k)] * s;
                for j in 0..cols {
                    out[(i, j)] += us * self.v[(j, k)].conj();
                }
            }
        }
        out
    }
}

/// Thin SVD through the eigendecomposition of the smaller Gram matrix.
///
/// For `rows ≥ cols` the right singular vectors come from `AᴴA` and
/// `uᵢ = A vᵢ / σᵢ`; otherwise the roles are swapped through `AAᴴ`. The
/// recovered side is re-orthonormalized by Gram-Schmidt, and columns whose
/// singular value is numerically zero are completed from the standard basis.
/// Both factors follow the canonical phase convention on the decomposed side;
/// the recovered side inherits its phase from the product.
pub fn svd(a: &CMat) -> Result<SvdResult, LinalgError> {
    a.check_finite()?;
    if a.rows() >= a.cols() {
        let (v, sigma, u) = gram_svd(a, &a.gram())?;
        Ok(SvdResult {
            u,
            singular_values: sigma,
            v,
        })
    } else {
        let ah = a.adjoint();
        let (u, sigma, v) = gram_svd(&ah, &a.outer_gram())?;
        Ok(SvdResult {
            u,
            singular_values: sigma,
            v,
        })
    }
}

/// For `B` with `rows ≥ cols` and `G = BᴴB`, returns `(W, σ, Z)` with
/// `B = Z diag(σ) Wᴴ`.
fn gram_svd(b: &CMat, g: &CMat) -> Result<(CMat, Vec<f64>, CMat), LinalgError> {
    let n = b.cols();
    let m = b.rows();
    let eig = herm_eig(g)?;

    // σᵢ = ‖B wᵢ‖ keeps B wᵢ = σᵢ zᵢ exact before re-orthonormalization.
    let mut triples: Vec<(f64, Vec<Complex64>, Vec<Complex64>)> = (0..n)
        .map(|i| {
            let w = eig.eigenvector(i);
            let bw = b.mul_vec(&w).expect("dimensions agree");
            (norm(&bw), w, bw)
        })
        .collect();
    triples.sort_by(|x, y| y.0.total_cmp(&x.0));

    let sigma_max = triples.first().map_or(0.0, |t| t.0);
    let cutoff = RANK_TOL * sigma_max;

    let mut w_mat = CMat::zeros(n, n);
    let mut z_cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut sigma = Vec::with_capacity(n);
    for (k, (s, w, bw)) in triples.into_iter().enumerate() {
        w_mat.set_column(k, &w);
        if s > cutoff && s > 0.0 {
            let mut z: Vec<Complex64> = bw.iter().map(|x| x / s).collect();
            orthogonalize(&mut z, &z_cols);
            let zn = norm(&z);
            if zn > 0.5 {
                z.iter_mut().for_each(|x| *x /= zn);
                sigma.push(s);
                z_cols.push(z);
                continue;
            }
        }
        sigma.push(0.0);
        z_cols.push(complete_basis(m, &z_cols));
    }

    let mut z_mat = CMat::zeros(m, n);
    for (k, z) in z_cols.iter().enumerate() {
        z_mat.set_column(k, z);
    }
    // Null-space columns carry no weight; give them the canonical phase too.
    for k in 0..n {
        if sigma[k] == 0.0 {
            let mut col = z_mat.column(k);
            fix_phase(&mut col);
            z_mat.set_column(k, &col);
        }
    }
    Ok((w_mat, sigma, z_mat))
}

/// Two passes of modified Gram-Schmidt against `basis`.
fn orthogonalize(z: &mut [Complex64], basis: &[Vec<Complex64>]) {
    for _ in 0..2 {
        for q in basis {
            let proj = cdot(q, z);
            for (x, y) in z.iter_mut().zip(q) {
                *x -= proj * y;
            }
        }
    }
}

/// First standard basis vector (after orthogonalization) that is not in the
/// span of `basis`.
fn complete_basis(m: usize, basis: &[Vec<Complex64>]) -> Vec<Complex64> {
    let mut best: Option<(f64, Vec<Complex64>)> = None;
    for i in 0..m {
        let mut e = vec![Complex64::new(0.0, 0.0); m];
        e[i] = Complex64::new(1.0, 0.0);
        orthogonalize(&mut e, basis);
        let en = norm(&e);
        if en > 0.5 {
            e.iter_mut().for_each(|x| *x /= en);
            return e;
        }
        if best.as_ref().is_none_or(|(bn, _)| en > *bn) {
            best = Some((en, e));
        }
    }
    let (en, mut e) = best.expect("m > 0");
    e.iter_mut().for_each(|x| *x /= en);
    e
}
