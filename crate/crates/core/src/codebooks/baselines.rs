//! Structured codebooks that need no training data: oversampled DFT beams,
//! their Kronecker products, Grassmannian line packings and packings warped
//! by a transmit correlation matrix.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{check_bits, zero, Codebook, CodebookError, ProductCodebook, Provenance};
use crate::linalg::{cdot, herm_eig, psd_sqrt, CMat};
use crate::manifold::{squared_distance, uniform_sample, GrassmannPoint, DISTINCT_TOL};
use crate::rng::{stream_rng, StreamRng};

/// Codeword `k` has entries `e^{j2πpk/K}/√m`, `K = 2^bits`.
pub fn dft_codebook(m: usize, bits: u32) -> Result<Codebook, CodebookError> {
    if m == 0 {
        return Err(CodebookError::InvalidParameter("dimension must be positive".into()));
    }
    let k = check_bits(bits)?;
    let scale = 1.0 / (m as f64).sqrt();
    let entries = (0..k)
        .map(|c| {
            let v: Vec<Complex64> = (0..m)
                .map(|p| {
                    // Reduce before scaling so large products keep exact phases.
                    let turns = ((p * c) % k) as f64 / k as f64;
                    Complex64::from_polar(scale, 2.0 * PI * turns)
                })
                .collect();
            GrassmannPoint::from_direction(&v)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Codebook::new(entries, Provenance::Dft)
}

/// DFT codebooks on both factors of a planar array.
pub fn kp_dft_codebook(mv: usize, mh: usize, bv: u32, bh: u32) -> Result<ProductCodebook, CodebookError> {
    Ok(ProductCodebook::new(dft_codebook(mv, bv)?, dft_codebook(mh, bh)?))
}

/// Upper bound on the minimum chordal distance of `k` lines in `C^m`:
/// `d² ≤ (m − 1)k / (m(k − 1))`, capped at 1.
pub fn simplex_bound(m: usize, k: usize) -> f64 {
    if k < 2 || m < 2 {
        return if k < 2 { 1.0 } else { 0.0 };
    }
    let d2 = (m - 1) as f64 * k as f64 / (m as f64 * (k - 1) as f64);
    d2.min(1.0).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlpConfig {
    pub restarts: usize,
    pub iters: usize,
    pub seed: u64,
}

impl Default for GlpConfig {
    fn default() -> Self {
        Self { restarts: 8, iters: 2000, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlpResult {
    pub codebook: Codebook,
    /// Achieved minimum pairwise chordal distance.
    pub min_distance: f64,
    /// [`simplex_bound`] for the same size, as a certificate.
    pub simplex_bound: f64,
}

/// Lines of an approximate maximin packing, any count.
#[derive(Debug, Clone, PartialEq)]
pub struct LinePacking {
    pub lines: Vec<GrassmannPoint>,
    pub min_distance: f64,
    pub simplex_bound: f64,
}

/// Approximate maximin packing of `k ≥ 2` lines in `C^m`.
///
/// Each restart starts from uniform random lines and repeatedly pushes every
/// line away from the others, weighting neighbours by a softmax of their
/// squared overlap so the closest pairs dominate. The softmax sharpens and
/// the step shrinks over the sweeps; the best configuration seen over all
/// sweeps and restarts is returned.
pub fn glp_packing(m: usize, k: usize, cfg: &GlpConfig) -> Result<LinePacking, CodebookError> {
    if k < 2 {
        return Err(CodebookError::InvalidParameter("line packing needs at least 2 codewords".into()));
    }
    if m < 2 {
        return Err(CodebookError::InvalidParameter("distinct lines need dimension at least 2".into()));
    }
    if cfg.restarts == 0 || cfg.iters == 0 {
        return Err(CodebookError::InvalidParameter("restarts and iters must be positive".into()));
    }
    let mut best: Option<(f64, Vec<Vec<Complex64>>)> = None;
    for r in 0..cfg.restarts {
        let mut rng = stream_rng(cfg.seed, r as u64);
        let (score, lines) = pack(m, k, cfg.iters, &mut rng);
        if best.as_ref().is_none_or(|(s, _)| score < *s) {
            best = Some((score, lines));
        }
    }
    let (_, lines) = best.expect("at least one restart");
    let lines = lines
        .iter()
        .map(|v| GrassmannPoint::from_direction(v))
        .collect::<Result<Vec<_>, _>>()?;
    let mut min_distance = 1.0f64;
    for i in 0..k {
        for j in (i + 1)..k {
            min_distance = min_distance.min(squared_distance(lines[i].coords(), lines[j].coords()).sqrt());
        }
    }
    Ok(LinePacking { lines, min_distance, simplex_bound: simplex_bound(m, k) })
}

/// [`glp_packing`] of `2^bits` lines as a codebook.
pub fn glp_codebook(m: usize, bits: u32, cfg: &GlpConfig) -> Result<GlpResult, CodebookError> {
    let k = check_bits(bits)?;
    let p = glp_packing(m, k, cfg)?;
    Ok(GlpResult {
        codebook: Codebook::new(p.lines, Provenance::Glp)?,
        min_distance: p.min_distance,
        simplex_bound: p.simplex_bound,
    })
}

fn max_overlap(lines: &[Vec<Complex64>]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..lines.len() {
        for j in (i + 1)..lines.len() {
            worst = worst.max(cdot(&lines[i], &lines[j]).norm_sqr());
        }
    }
    worst
}

/// One restart; returns the smallest maximum squared overlap reached.
fn pack(m: usize, k: usize, iters: usize, rng: &mut StreamRng) -> (f64, Vec<Vec<Complex64>>) {
    let mut lines: Vec<Vec<Complex64>> = (0..k).map(|_| uniform_sample(m, rng).coords().to_vec()).collect();
    let mut best = (max_overlap(&lines), lines.clone());
    let mut step = 0.5;
    let final_step: f64 = 1e-4;
    let decay = (final_step / step).powf(1.0 / iters as f64);
    for t in 0..iters {
        let sharpness = 10.0 + 990.0 * t as f64 / iters as f64;
        let ip: Vec<Vec<Complex64>> = (0..k)
            .map(|i| (0..k).map(|j| cdot(&lines[j], &lines[i])).collect())
            .collect();
        let worst = (0..k)
            .flat_map(|i| ((i + 1)..k).map(move |j| (i, j)))
            .map(|(i, j)| ip[i][j].norm_sqr())
            .fold(0.0f64, f64::max);
        let mut next = lines.clone();
        for i in 0..k {
            let mut grad = vec![zero(); m];
            let mut total = 0.0;
            for j in 0..k {
                if j == i {
                    continue;
                }
                // ∂|x_jᴴx_i|²/∂x_i* = (x_jᴴ x_i) x_j
                let w = (sharpness * (ip[i][j].norm_sqr() - worst)).exp();
                total += w;
                for (g, x) in grad.iter_mut().zip(&lines[j]) {
                    *g += x * (ip[i][j] * w);
                }
            }
            let scale = step / total;
            for (x, g) in next[i].iter_mut().zip(&grad) {
                *x -= g * scale;
            }
            let n = crate::linalg::norm(&next[i]);
            next[i].iter_mut().for_each(|x| *x /= n);
        }
        lines = next;
        let score = max_overlap(&lines);
        if score < best.0 {
            best = (score, lines.clone());
        }
        step *= decay;
    }
    best
}

/// Warps `base` by `R^{1/2}`: `cᵢ ∝ R^{1/2} pᵢ`. Images with norm below
/// `1e-12` or coinciding with an earlier codeword are dropped, and the
/// codebook is refilled first with unused base codewords in order, then with
/// seeded uniform lines.
pub fn correlated_glp(r: &CMat, base: &Codebook) -> Result<Codebook, CodebookError> {
    let m = base.m();
    if r.rows() != m || r.cols() != m {
        return Err(CodebookError::DimMismatch(format!(
            "correlation matrix is {}x{}, codebook dimension is {m}",
            r.rows(),
            r.cols()
        )));
    }
    let eig = herm_eig(r).map_err(crate::channels::ChannelError::from)?;
    let lmax = eig.eigenvalues[0].abs().max(f64::MIN_POSITIVE);
    if eig.eigenvalues.iter().any(|&l| l < -1e-12 * lmax) {
        return Err(CodebookError::InvalidParameter("correlation matrix is not positive semidefinite".into()));
    }
    let half = psd_sqrt(r).map_err(crate::channels::ChannelError::from)?;
    let k = base.len();
    let mut out: Vec<GrassmannPoint> = Vec::with_capacity(k);
    let fresh = |p: &GrassmannPoint, out: &[GrassmannPoint]| {
        out.iter()
            .all(|q| squared_distance(p.coords(), q.coords()).sqrt() > DISTINCT_TOL)
    };
    for p in base.entries() {
        let y = half.mul_vec(p.coords()).expect("dimensions agree");
        if crate::linalg::norm(&y) < 1e-12 {
            continue;
        }
        let c = GrassmannPoint::from_direction(&y)?;
        if fresh(&c, &out) {
            out.push(c);
        }
    }
    for p in base.entries() {
        if out.len() == k {
            break;
        }
        if fresh(p, &out) {
            out.push(p.clone());
        }
    }
    let mut rng = stream_rng(0, 0);
    while out.len() < k {
        let p = uniform_sample(m, &mut rng);
        if fresh(&p, &out) {
            out.push(p);
        }
    }
    Codebook::new(out, Provenance::CorrelatedGlp)
}
