//! Points on the Grassmann manifold `G(M, 1)` of complex lines through the
//! origin, and the geometry used for quantizing them.
//!
//! A line is stored as a unit vector in canonical phase: the first component
//! whose modulus exceeds `1e-12` is real and positive. Every unit vector
//! `v e^{jθ}` spans the same line, so canonicalization picks one
//! representative per equivalence class and phase never leaks into
//! distances, centroids or files.

use num_complex::Complex64;
use rand::RngCore;
use rayon::prelude::*;

use crate::linalg::{cdot, dominant_eigvec, fix_phase, norm, CMat, LinalgError};
use crate::rng::{complex_normal, stream_rng};

/// Vectors whose norm is further than this from one are rejected by
/// [`GrassmannPoint::canonicalize`].
pub const NORM_TOL: f64 = 1e-6;

/// Norm below which a vector is treated as zero.
pub const ZERO_TOL: f64 = 1e-9;

/// Points closer than this chordal distance are considered the same line.
pub const DISTINCT_TOL: f64 = 1e-9;

// Below this value of 1 - |⟨a,b⟩|² the direct formula loses most of its
// digits and the aligned-difference form is used instead.
const NEAR_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ManifoldError {
    #[error("vector norm {0:e} is too small to define a line")]
    ZeroVector(f64),
    #[error("vector norm {0} is not within 1e-6 of one")]
    NotUnitNorm(f64),
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("centroid of an empty set")]
    EmptySet,
    #[error("need at least two points, got {0}")]
    TooFewPoints(usize),
    #[error("distance grid must be ascending within [0, 1]")]
    InvalidGrid,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A line in `C^M`, stored as its canonical unit vector.
#[derive(Debug, Clone, PartialEq)]
pub struct GrassmannPoint {
    coords: Vec<Complex64>,
}

impl GrassmannPoint {
    /// Canonical representative of a (near) unit vector. The vector is
    /// renormalized; it must already be within [`NORM_TOL`] of unit norm.
    pub fn canonicalize(v: &[Complex64]) -> Result<Self, ManifoldError> {
        let n = norm(v);
        if !n.is_finite() || n < ZERO_TOL {
            return Err(ManifoldError::ZeroVector(n));
        }
        if (n - 1.0).abs() > NORM_TOL {
            return Err(ManifoldError::NotUnitNorm(n));
        }
        Ok(Self::normalized(v, n))
    }

    /// Line spanned by an arbitrary nonzero vector.
    pub fn from_direction(v: &[Complex64]) -> Result<Self, ManifoldError> {
        let n = norm(v);
        if !n.is_finite() || n == 0.0 {
            return Err(ManifoldError::ZeroVector(n));
        }
        Ok(Self::normalized(v, n))
    }

    fn normalized(v: &[Complex64], n: f64) -> Self {
        let mut coords: Vec<Complex64> = v.iter().map(|z| z / n).collect();
        fix_phase(&mut coords);
        Self { coords }
    }

    /// `k`-th standard basis vector of `C^m`.
    pub fn basis(m: usize, k: usize) -> Self {
        let mut coords = vec![Complex64::new(0.0, 0.0); m];
        coords[k] = Complex64::new(1.0, 0.0);
        Self { coords }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    #[inline]
    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    /// Complex conjugate of the representative (used for `u₁*`).
    pub fn conj(&self) -> Self {
        let mut coords: Vec<Complex64> = self.coords.iter().map(|z| z.conj()).collect();
        fix_phase(&mut coords);
        Self { coords }
    }

    /// `|selfᴴ other|²`.
    #[inline]
    pub fn overlap(&self, other: &GrassmannPoint) -> f64 {
        cdot(&self.coords, &other.coords).norm_sqr()
    }
}

fn check_dims(a: &GrassmannPoint, b: &GrassmannPoint) -> Result<(), ManifoldError> {
    if a.dim() != b.dim() {
        return Err(ManifoldError::DimMismatch(a.dim(), b.dim()));
    }
    Ok(())
}

/// Chordal distance `√(1 − |f₁ᴴf₂|²)`, the sine of the angle between lines.
pub fn chordal_distance(a: &GrassmannPoint, b: &GrassmannPoint) -> Result<f64, ManifoldError> {
    check_dims(a, b)?;
    Ok(squared_distance(&a.coords, &b.coords).sqrt())
}

/// Quantization distortion `d²(f₁, f₂)`.
pub fn distortion(a: &GrassmannPoint, b: &GrassmannPoint) -> Result<f64, ManifoldError> {
    check_dims(a, b)?;
    Ok(squared_distance(&a.coords, &b.coords))
}

/// `1 − |aᴴb|²` for unit vectors of equal length, clamped to `[0, 1]`.
///
/// For nearly identical lines the value is recomputed from the phase-aligned
/// difference `δ = ‖a − e^{-jφ} b‖²` with `φ = arg(aᴴb)`, using `1 − |aᴴb|² = δ(1 − δ/4)`, so that
/// equal lines give exactly zero instead of rounding noise.
pub(crate) fn squared_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let ip = cdot(a, b);
    let mag = ip.norm();
    let direct = 1.0 - mag * mag;
    if direct > NEAR_TOL {
        return direct.min(1.0);
    }
    let phase = if mag > 0.0 {
        ip / mag
    } else {
        Complex64::new(1.0, 0.0)
    };
    let delta: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y * phase.conj()).norm_sqr())
        .sum();
    (delta * (1.0 - 0.25 * delta)).clamp(0.0, 1.0)
}

/// Scatter matrix `Σ xᵢ xᵢᴴ`, Hermitian by construction.
pub fn scatter<'a>(m: usize, points: impl IntoIterator<Item = &'a GrassmannPoint>) -> CMat {
    let mut s = CMat::zeros(m, m);
    for p in points {
        let x = p.coords();
        for i in 0..m {
            let xi = x[i];
            for j in i..m {
                s[(i, j)] += xi * x[j].conj();
            }
        }
    }
    for i in 0..m {
        s[(i, i)].im = 0.0;
        for j in (i + 1)..m {
            s[(j, i)] = s[(i, j)].conj();
        }
    }
    s
}

/// Line minimizing `Σ d²(xᵢ, f)`: the dominant eigenvector of `Σ xᵢ xᵢᴴ`.
///
/// When the top eigenvalue is repeated, the eigensolver's fixed basis choice
/// decides which member of the dominant eigenspace is returned.
pub fn centroid(points: &[GrassmannPoint]) -> Result<GrassmannPoint, ManifoldError> {
    centroid_of(points.iter())
}

/// [`centroid`] over borrowed points.
pub fn centroid_of<'a>(
    points: impl IntoIterator<Item = &'a GrassmannPoint>,
) -> Result<GrassmannPoint, ManifoldError> {
    let mut iter = points.into_iter().peekable();
    let first = iter.peek().ok_or(ManifoldError::EmptySet)?;
    let m = first.dim();
    let pts: Vec<&GrassmannPoint> = iter.collect();
    if let Some(bad) = pts.iter().find(|p| p.dim() != m) {
        return Err(ManifoldError::DimMismatch(m, bad.dim()));
    }
    let s = scatter(m, pts.iter().copied());
    let v = dominant_eigvec(&s)?;
    Ok(GrassmannPoint::from_direction(&v)?)
}

/// Uniformly distributed line: a normalized vector of i.i.d. `CN(0, 1)`
/// entries.
pub fn uniform_sample<R: RngCore + ?Sized>(m: usize, rng: &mut R) -> GrassmannPoint {
    assert!(m >= 1, "dimension must be positive");
    loop {
        let v: Vec<Complex64> = (0..m).map(|_| complex_normal(rng)).collect();
        if let Ok(p) = GrassmannPoint::from_direction(&v) {
            return p;
        }
    }
}

/// Empirical pairwise-distance curve of a point set.
#[derive(Debug, Clone, PartialEq)]
pub struct RipleyCurve {
    /// Ascending grid in `[0, 1]`.
    pub distances: Vec<f64>,
    /// Fraction of unordered pairs at chordal distance `≤ distances[i]`.
    pub values: Vec<f64>,
}

impl RipleyCurve {
    /// Largest absolute difference between two curves on the same grid.
    pub fn kolmogorov_distance(&self, other: &RipleyCurve) -> f64 {
        assert_eq!(self.distances, other.distances, "curves use different grids");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Value at the first grid point not below `d`.
    pub fn value_at(&self, d: f64) -> f64 {
        let i = self.distances.partition_point(|&g| g < d - 1e-12);
        self.values[i.min(self.values.len() - 1)]
    }
}

/// `resolution` evenly spaced distances from 0 to 1 inclusive.
pub fn linear_grid(resolution: usize) -> Vec<f64> {
    assert!(resolution >= 2, "grid needs at least two points");
    let last = (resolution - 1) as f64;
    (0..resolution).map(|i| i as f64 / last).collect()
}

fn check_grid(grid: &[f64]) -> Result<(), ManifoldError> {
    let ok = !grid.is_empty()
        && grid.iter().all(|g| (0.0..=1.0).contains(g))
        && grid.windows(2).all(|w| w[0] < w[1]);
    if ok {
        Ok(())
    } else {
        Err(ManifoldError::InvalidGrid)
    }
}

/// Bin index: number of grid points strictly below `d`. A pair lands in bin
/// `i` when `grid[i-1] < d ≤ grid[i]`.
#[inline]
fn bin_of(grid: &[f64], d: f64) -> usize {
    grid.partition_point(|&g| g < d)
}

fn curve_from_bins(grid: &[f64], bins: &[u64], total: u64) -> RipleyCurve {
    let mut acc = 0u64;
    let values = grid
        .iter()
        .zip(bins)
        .map(|(_, &b)| {
            acc += b;
            acc as f64 / total as f64
        })
        .collect();
    RipleyCurve {
        distances: grid.to_vec(),
        values,
    }
}

/// Ripley-style clustering statistic on `G(M, 1)`: the empirical CDF of
/// pairwise chordal distances,
/// `K(d) = 2/(n(n−1)) · #{a < b : d(x_a, x_b) ≤ d}`.
///
/// Pair counting is parallel over rows with integer bins, so the result does
/// not depend on the worker count.
pub fn ripley_k(points: &[GrassmannPoint], grid: &[f64]) -> Result<RipleyCurve, ManifoldError> {
    let n = points.len();
    if n < 2 {
        return Err(ManifoldError::TooFewPoints(n));
    }
    check_grid(grid)?;
    let m = points[0].dim();
    if let Some(bad) = points.iter().find(|p| p.dim() != m) {
        return Err(ManifoldError::DimMismatch(m, bad.dim()));
    }
    let nbins = grid.len() + 1;
    let bins = (0..n)
        .into_par_iter()
        .fold(
            || vec![0u64; nbins],
            |mut bins, a| {
                let xa = points[a].coords();
                for b in (a + 1)..n {
                    let d = squared_distance(xa, points[b].coords()).sqrt();
                    bins[bin_of(grid, d)] += 1;
                }
                bins
            },
        )
        .reduce(
            || vec![0u64; nbins],
            |mut x, y| {
                x.iter_mut().zip(&y).for_each(|(a, b)| *a += b);
                x
            },
        );
    let total = (n as u64) * (n as u64 - 1) / 2;
    Ok(curve_from_bins(grid, &bins, total))
}

/// Monte Carlo reference curve for uniformly distributed lines in `G(m, 1)`:
/// the distance CDF estimated from `pairs` independent uniform pairs.
pub fn uniform_reference(
    m: usize,
    grid: &[f64],
    pairs: usize,
    seed: u64,
) -> Result<RipleyCurve, ManifoldError> {
    check_grid(grid)?;
    if pairs == 0 {
        return Err(ManifoldError::TooFewPoints(0));
    }
    let mut rng = stream_rng(seed, 0);
    let mut bins = vec![0u64; grid.len() + 1];
    for _ in 0..pairs {
        let x = uniform_sample(m, &mut rng);
        let y = uniform_sample(m, &mut rng);
        let d = squared_distance(x.coords(), y.coords()).sqrt();
        bins[bin_of(grid, d)] += 1;
    }
    Ok(curve_from_bins(grid, &bins, pairs as u64))
}
