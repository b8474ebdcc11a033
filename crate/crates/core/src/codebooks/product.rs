//! Kronecker-structured codebooks for planar arrays.
//!
//! A `1 × mv·mh` channel row is reshaped to `H̃` (`mv × mh`) with
//! `H[p·mh + q] = H̃[p, q]`. For `H̃ = U Σ Vᴴ` the beam `x ⊗ y` has gain
//! `|xᵀ H̃ y|²`, maximized over unit factors by `x = u₁*`, `y = v₁` with value
//! `σ₁²`. The vertical factor therefore quantizes `u₁*` and the horizontal
//! factor quantizes `v₁`.

use rayon::prelude::*;

use super::{check_len, cluster, nearest, Codebook, CodebookError, EvalReport, Provenance, SampleRecord};
use crate::channels::{gain_unchecked, ChannelDataset, ChannelError, ZERO_CHANNEL_TOL};
use crate::clustering::{KMeansConfig, KMeansResult};
use crate::linalg::{kron_vec, svd, unvec_transpose, CMat};
use crate::manifold::GrassmannPoint;
use num_complex::Complex64;

/// `F_v ⊗ F_h`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductCodebook {
    pub fv: Codebook,
    pub fh: Codebook,
}

impl ProductCodebook {
    pub fn new(fv: Codebook, fh: Codebook) -> Self {
        Self { fv, fh }
    }

    pub fn mv(&self) -> usize {
        self.fv.m()
    }

    pub fn mh(&self) -> usize {
        self.fh.m()
    }

    pub fn bits(&self) -> u32 {
        self.fv.bits() + self.fh.bits()
    }

    /// All `fv[iv] ⊗ fh[ih]`, `iv`-major.
    pub fn flatten(&self) -> Vec<Vec<Complex64>> {
        let mut out = Vec::with_capacity(self.fv.len() * self.fh.len());
        for a in self.fv.entries() {
            for b in self.fh.entries() {
                out.push(kron_vec(a.coords(), b.coords()));
            }
        }
        out
    }
}

/// Dominant singular triple of the reshaped channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Rank1 {
    pub sigma1: f64,
    /// Left singular vector `u₁` (length `mv`).
    pub u1: GrassmannPoint,
    /// Right singular vector `v₁` (length `mh`).
    pub v1: GrassmannPoint,
}

/// Rank-1 approximation `σ₁ u₁ v₁ᴴ` of the reshaped `1 × mv·mh` row.
pub fn rank1_decompose(h_row: &CMat, mv: usize, mh: usize) -> Result<Rank1, CodebookError> {
    if h_row.rows() != 1 || h_row.cols() != mv * mh {
        return Err(CodebookError::DimMismatch(format!(
            "expected a 1x{} channel for a {mv}x{mh} array, got {}x{}",
            mv * mh,
            h_row.rows(),
            h_row.cols()
        )));
    }
    let fro = h_row.frobenius_norm();
    if fro < ZERO_CHANNEL_TOL {
        return Err(ChannelError::ZeroChannel(fro).into());
    }
    let ht = unvec_transpose(h_row, mv, mh).map_err(ChannelError::from)?;
    let s = svd(&ht).map_err(ChannelError::from)?;
    // Factor phases are tied: u₁ takes whatever phase makes σ₁ real.
    let v = s.v.column(0);
    let u = s.u.column(0);
    let v1 = GrassmannPoint::from_direction(&v)?;
    let u1 = GrassmannPoint::from_direction(&u)?;
    Ok(Rank1 { sigma1: s.singular_values[0], u1, v1 })
}

/// Independent K-means on `{u₁*}` (vertical, `2^bv` codewords) and `{v₁}`
/// (horizontal, `2^bh` codewords) of the training channels.
pub fn train_product_codebook(
    train: &ChannelDataset,
    mv: usize,
    mh: usize,
    bv: u32,
    bh: u32,
    cfg: &KMeansConfig,
) -> Result<ProductCodebook, CodebookError> {
    Ok(train_product_codebook_detailed(train, mv, mh, bv, bh, cfg)?.0)
}

/// [`train_product_codebook`] that also returns both clustering runs
/// (vertical first).
pub fn train_product_codebook_detailed(
    train: &ChannelDataset,
    mv: usize,
    mh: usize,
    bv: u32,
    bh: u32,
    cfg: &KMeansConfig,
) -> Result<(ProductCodebook, KMeansResult, KMeansResult), CodebookError> {
    if train.mr() != 1 || train.mt() != mv * mh {
        return Err(CodebookError::DimMismatch(format!(
            "product codebooks need 1x{} channels, dataset has {}x{}",
            mv * mh,
            train.mr(),
            train.mt()
        )));
    }
    let factors: Vec<_> = train
        .channels()
        .par_iter()
        .map(|h| rank1_decompose(h, mv, mh))
        .collect();
    let mut xs = Vec::with_capacity(factors.len());
    let mut ys = Vec::with_capacity(factors.len());
    for f in factors {
        match f {
            Ok(r) => {
                xs.push(r.u1.conj());
                ys.push(r.v1);
            }
            Err(CodebookError::Channel(ChannelError::ZeroChannel(_))) => {}
            Err(e) => return Err(e),
        }
    }
    let run_v = cluster(&xs, bv, cfg)?;
    let run_h = cluster(&ys, bh, cfg)?;
    let fv = Codebook::new(run_v.centroids.clone(), Provenance::Learned)?;
    let fh = Codebook::new(run_h.centroids.clone(), Provenance::Learned)?;
    Ok((ProductCodebook::new(fv, fh), run_v, run_h))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductSelection {
    pub iv: usize,
    pub ih: usize,
    /// `fv[iv] ⊗ fh[ih]`.
    pub f: Vec<Complex64>,
    pub rank1: Rank1,
}

/// Nearest vertical codeword to `u₁*` and nearest horizontal codeword to
/// `v₁`.
pub fn select_product(h_row: &CMat, codebook: &ProductCodebook) -> Result<ProductSelection, CodebookError> {
    check_len("channel row", h_row.cols(), codebook.mv() * codebook.mh())?;
    let rank1 = rank1_decompose(h_row, codebook.mv(), codebook.mh())?;
    let (iv, _) = nearest(&rank1.u1.conj(), &codebook.fv);
    let (ih, _) = nearest(&rank1.v1, &codebook.fh);
    let f = kron_vec(codebook.fv.entries()[iv].coords(), codebook.fh.entries()[ih].coords());
    Ok(ProductSelection { iv, ih, f, rank1 })
}

/// Gain of the selected product beam on the true channel, normalized by
/// `σ₁²`. Distortion is `1 − |u₁ᵀf_v|²|v₁ᴴf_h|²` and the loss bound is
/// `2[(1 − |v₁ᴴf_h|²) + (1 − |u₁ᵀf_v|²)]`.
pub fn evaluate_product(test: &ChannelDataset, codebook: &ProductCodebook) -> Result<EvalReport, CodebookError> {
    if test.mr() != 1 {
        return Err(CodebookError::DimMismatch(format!(
            "product evaluation needs single-antenna receivers, dataset has mr = {}",
            test.mr()
        )));
    }
    check_len("channel row", test.mt(), codebook.mv() * codebook.mh())?;
    let samples: Vec<Result<Option<SampleRecord>, CodebookError>> = test
        .channels()
        .par_iter()
        .enumerate()
        .map(|(i, h)| {
            let sel = match select_product(h, codebook) {
                Ok(s) => s,
                Err(CodebookError::Channel(ChannelError::ZeroChannel(_))) => return Ok(None),
                Err(e) => return Err(e),
            };
            let r = &sel.rank1;
            let pv = r.u1.conj().overlap(&codebook.fv.entries()[sel.iv]);
            let ph = r.v1.overlap(&codebook.fh.entries()[sel.ih]);
            let gain = gain_unchecked(h, &sel.f) / (r.sigma1 * r.sigma1);
            Ok(Some(SampleRecord {
                channel: i,
                index: sel.iv,
                index_h: Some(sel.ih),
                gain,
                distortion: 1.0 - pv * ph,
                loss_ub: 2.0 * ((1.0 - ph) + (1.0 - pv)),
            }))
        })
        .collect();
    EvalReport::from_samples(samples.into_iter().collect::<Result<_, _>>()?)
}
