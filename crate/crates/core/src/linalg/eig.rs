use num_complex::Complex64;

use super::{fix_phase, CMat, LinalgError};

const MAX_SWEEPS: usize = 64;

/// Eigendecomposition `A = V diag(λ) Vᴴ` of a Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    /// Eigenvalues in descending order.
    pub eigenvalues: Vec<f64>,
    /// Unitary matrix whose columns are the eigenvectors, ordered like
    /// `eigenvalues`. Each column has its first non-negligible component real
    /// and positive.
    pub eigenvectors: CMat,
}

impl SpectralDecomposition {
    pub fn eigenvector(&self, i: usize) -> Vec<Complex64> {
        self.eigenvectors.column(i)
    }
}

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
///
/// Pivots are visited in row-major order of the upper triangle on every
/// sweep, and the final sort is stable, so repeated eigenvalues come out in a
/// fixed (if arbitrary) basis.
pub fn herm_eig(a: &CMat) -> Result<SpectralDecomposition, LinalgError> {
    a.check_finite()?;
    a.check_hermitian()?;
    let n = a.rows();
    let mut m = a.clone();
    m.symmetrize_upper();
    let mut v = CMat::identity(n);

    let total = m.frobenius_norm();
    if total > 0.0 {
        // Couplings below this are dropped; far under every residual tolerance.
        let floor = 1e-3 * f64::EPSILON * total;
        for _ in 0..MAX_SWEEPS {
            let mut rotated = false;
            for p in 0..n {
                for q in (p + 1)..n {
                    rotated |= rotate(&mut m, &mut v, p, q, floor);
                }
            }
            if !rotated {
                break;
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].re.total_cmp(&m[(i, i)].re));

    let eigenvalues = order.iter().map(|&i| m[(i, i)].re).collect();
    let mut eigenvectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.column(src);
        fix_phase(&mut col);
        eigenvectors.set_column(dst, &col);
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Unit eigenvector of the largest eigenvalue, in canonical phase.
///
/// When the top eigenvalue is repeated the first column of the Jacobi basis
/// is returned, see [`herm_eig`].
pub fn dominant_eigvec(a: &CMat) -> Result<Vec<Complex64>, LinalgError> {
    Ok(herm_eig(a)?.eigenvector(0))
}

/// Principal square root of a Hermitian positive semidefinite matrix,
/// `V diag(√max(λ, 0)) Vᴴ`. Slightly negative eigenvalues from rounding are
/// clamped to zero.
pub fn psd_sqrt(a: &CMat) -> Result<CMat, LinalgError> {
    let d = herm_eig(a)?;
    let n = a.rows();
    let roots: Vec<f64> = d.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let v = &d.eigenvectors;
    let mut out = CMat::zeros(n, n);
    for (k, &r) in roots.iter().enumerate() {
        if r == 0.0 {
            continue;
        }
        for i in 0..n {
            let vi = v[(i, k)] * r;
            for j in i..n {
                out[(i, j)] += vi * v[(j, k)].conj();
            }
        }
    }
    out.symmetrize_upper();
    Ok(out)
}

/// Annihilates `m[p,q]` with the unitary `W = diag(1, e^{-jφ}) R(θ)` acting on
/// columns/rows `p, q`, and accumulates `V ← V W`. Returns whether a
/// rotation was applied.
fn rotate(m: &mut CMat, v: &mut CMat, p: usize, q: usize, floor: f64) -> bool {
    let apq = m[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return false;
    }
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    // Below rounding level of the diagonal pair (or of the whole matrix).
    if mag <= floor || mag < 1e-2 * f64::EPSILON * app.abs().min(aqq.abs()) {
        m[(p, q)] = Complex64::new(0.0, 0.0);
        m[(q, p)] = Complex64::new(0.0, 0.0);
        return false;
    }
    let phase = apq / mag;

    let tau = (aqq - app) / (2.0 * mag);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // W entries in (p, q) coordinates.
    let wpp = Complex64::new(c, 0.0);
    let wpq = Complex64::new(s, 0.0);
    let wqp = -phase.conj() * s;
    let wqq = phase.conj() * c;

    let n = m.rows();
    // M ← M W
    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = mkp * wpp + mkq * wqp;
        m[(k, q)] = mkp * wpq + mkq * wqq;
    }
    // M ← Wᴴ M
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = wpp.conj() * mpk + wqp.conj() * mqk;
        m[(q, k)] = wpq.conj() * mpk + wqq.conj() * mqk;
    }
    m[(p, q)] = Complex64::new(0.0, 0.0);
    m[(q, p)] = Complex64::new(0.0, 0.0);
    m[(p, p)] = Complex64::new(app - t * mag, 0.0);
    m[(q, q)] = Complex64::new(aqq + t * mag, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * wpp + vkq * wqp;
        v[(k, q)] = vkp * wpq + vkq * wqq;
    }
    true
}
