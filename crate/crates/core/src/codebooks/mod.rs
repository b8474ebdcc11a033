//! Beamforming codebooks: K-means training on MRT directions, codeword
//! selection and evaluation, plus the structured baselines.

mod baselines;
mod io;
mod product;

pub use baselines::{
    correlated_glp, dft_codebook, glp_codebook, glp_packing, kp_dft_codebook, simplex_bound,
    GlpConfig, GlpResult, LinePacking,
};
pub use io::{load_codebook, read_codebook_header, save_codebook, CodebookHeader};
pub use product::{
    evaluate_product, rank1_decompose, select_product, train_product_codebook,
    train_product_codebook_detailed, ProductCodebook, ProductSelection, Rank1,
};

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::channels::{gain_unchecked, mrt_vector, ChannelDataset, ChannelError};
use crate::clustering::{count_distinct, kmeans, ClusteringError, KMeansConfig, KMeansResult};
use crate::linalg::{cdot, CMat};
use crate::manifold::{squared_distance, GrassmannPoint, ManifoldError, DISTINCT_TOL};

/// Largest supported bit budget per codebook.
pub const MAX_BITS: u32 = 24;

#[derive(Debug, thiserror::Error)]
pub enum CodebookError {
    #[error("need {k} distinct training directions, found {distinct}")]
    NotEnoughDistinctPoints { k: usize, distinct: usize },
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("codebook size {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("bit budget {0} exceeds the supported maximum of 24")]
    TooManyBits(u32),
    #[error("codewords {0} and {1} span the same line")]
    Duplicate(usize, usize),
    #[error("codebook has no codewords")]
    Empty,
    #[error("no usable channels in the test set")]
    NoUsableChannels,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a codebook file (bad magic bytes)")]
    BadMagic,
    #[error("unsupported file version {0}")]
    BadVersion(u8),
    #[error("inconsistent header: {0}")]
    BadDims(String),
    #[error("file ends before the declared payload")]
    TruncatedFile,
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Clustering(ClusteringError),
    #[error(transparent)]
    Manifold(#[from] ManifoldError),
}

impl From<ClusteringError> for CodebookError {
    fn from(e: ClusteringError) -> Self {
        match e {
            ClusteringError::NotEnoughDistinctPoints { k, distinct } => {
                CodebookError::NotEnoughDistinctPoints { k, distinct }
            }
            other => CodebookError::Clustering(other),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Learned,
    Dft,
    Glp,
    CorrelatedGlp,
    Loaded,
}

/// `2^B` pairwise distinct lines of a common dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    m: usize,
    entries: Vec<GrassmannPoint>,
    bits: u32,
    provenance: Provenance,
}

impl Codebook {
    pub fn new(entries: Vec<GrassmannPoint>, provenance: Provenance) -> Result<Self, CodebookError> {
        let k = entries.len();
        if k == 0 {
            return Err(CodebookError::Empty);
        }
        if !k.is_power_of_two() {
            return Err(CodebookError::NotPowerOfTwo(k));
        }
        let bits = k.trailing_zeros();
        if bits > MAX_BITS {
            return Err(CodebookError::TooManyBits(bits));
        }
        let m = entries[0].dim();
        if let Some(e) = entries.iter().find(|e| e.dim() != m) {
            return Err(CodebookError::DimMismatch(format!("codewords of length {m} and {}", e.dim())));
        }
        for i in 0..k {
            for j in (i + 1)..k {
                if squared_distance(entries[i].coords(), entries[j].coords()).sqrt() <= DISTINCT_TOL {
                    return Err(CodebookError::Duplicate(i, j));
                }
            }
        }
        Ok(Self { m, entries, bits, provenance })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Always false; codebooks hold at least one codeword.
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[GrassmannPoint] {
        &self.entries
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Smallest pairwise chordal distance (1 for a single codeword).
    pub fn min_distance(&self) -> f64 {
        let mut best = 1.0f64;
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                best = best.min(squared_distance(self.entries[i].coords(), self.entries[j].coords()).sqrt());
            }
        }
        best
    }
}

pub(crate) fn check_bits(bits: u32) -> Result<usize, CodebookError> {
    if bits > MAX_BITS {
        return Err(CodebookError::TooManyBits(bits));
    }
    Ok(1usize << bits)
}

/// MRT directions of every usable channel, with the number of channels
/// skipped because their norm is below `1e-12`.
pub fn extract_v1(dataset: &ChannelDataset) -> Result<(Vec<GrassmannPoint>, usize), CodebookError> {
    let results: Vec<_> = dataset.channels().par_iter().map(mrt_vector).collect();
    let mut points = Vec::with_capacity(results.len());
    let mut skipped = 0;
    for r in results {
        match r {
            Ok(m) => points.push(m.v1),
            Err(ChannelError::ZeroChannel(_)) => skipped += 1,
            Err(e) => return Err(e.into()),
        }
    }
    Ok((points, skipped))
}

pub(crate) fn cluster(points: &[GrassmannPoint], bits: u32, cfg: &KMeansConfig) -> Result<KMeansResult, CodebookError> {
    let k = check_bits(bits)?;
    if points.is_empty() {
        return Err(CodebookError::NotEnoughDistinctPoints { k, distinct: 0 });
    }
    let distinct = count_distinct(points, k);
    if distinct < k {
        return Err(CodebookError::NotEnoughDistinctPoints { k, distinct });
    }
    Ok(kmeans(points, &KMeansConfig { k, ..cfg.clone() })?)
}

/// Codebook of `2^bits` K-means centroids of the training MRT directions.
pub fn train_codebook(train: &ChannelDataset, bits: u32, cfg: &KMeansConfig) -> Result<Codebook, CodebookError> {
    Ok(train_codebook_detailed(train, bits, cfg)?.0)
}

/// [`train_codebook`] that also returns the clustering run.
pub fn train_codebook_detailed(
    train: &ChannelDataset,
    bits: u32,
    cfg: &KMeansConfig,
) -> Result<(Codebook, KMeansResult), CodebookError> {
    let (points, _) = extract_v1(train)?;
    let run = cluster(&points, bits, cfg)?;
    let cb = Codebook::new(run.centroids.clone(), Provenance::Learned)?;
    Ok((cb, run))
}

/// Codeword selection rule at the receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelectionRule {
    /// Largest beamforming gain `‖H f‖²`.
    Gain,
    /// Nearest codeword to the MRT direction.
    #[default]
    Distance,
}

impl fmt::Display for SelectionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SelectionRule::Gain => "gain",
            SelectionRule::Distance => "distance",
        })
    }
}

fn check_len(what: &str, got: usize, want: usize) -> Result<(), CodebookError> {
    if got != want {
        return Err(CodebookError::DimMismatch(format!("{what} has length {got}, codebook uses {want}")));
    }
    Ok(())
}

/// Highest-gain codeword (ties to the lowest index) and its gain.
pub fn select_by_gain(h: &CMat, codebook: &Codebook) -> Result<(usize, f64), CodebookError> {
    check_len("channel row", h.cols(), codebook.m)?;
    let mut best = (0, f64::NEG_INFINITY);
    for (i, f) in codebook.entries.iter().enumerate() {
        let g = gain_unchecked(h, f.coords());
        if g > best.1 {
            best = (i, g);
        }
    }
    Ok(best)
}

/// Nearest codeword in chordal distance (ties to the lowest index) and its
/// distortion.
pub fn select_by_distance(v1: &GrassmannPoint, codebook: &Codebook) -> Result<(usize, f64), CodebookError> {
    check_len("direction", v1.dim(), codebook.m)?;
    Ok(nearest(v1, codebook))
}

pub(crate) fn nearest(v: &GrassmannPoint, codebook: &Codebook) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, f) in codebook.entries.iter().enumerate() {
        let d = squared_distance(v.coords(), f.coords());
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// Outcome for one test channel.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    /// Position of the channel in the test set.
    pub channel: usize,
    /// Selected codeword; for product codebooks the vertical index.
    pub index: usize,
    /// Horizontal index for product codebooks.
    pub index_h: Option<usize>,
    /// Gain normalized by the optimal unquantized gain.
    pub gain: f64,
    pub distortion: f64,
    /// Per-sample term of `loss_ub`.
    pub loss_ub: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub gamma_av: f64,
    pub avg_distortion: f64,
    pub loss: f64,
    pub loss_ub: f64,
    pub n_test: usize,
    /// Channels dropped for having (numerically) zero norm.
    pub skipped: usize,
    pub per_sample: Vec<SampleRecord>,
}

/// Header of the summary CSV written for every evaluation.
pub const EVAL_CSV_HEADER: &str = "codebook,rule,bits,n_test,gamma_av,avg_distortion,loss,loss_ub";

/// Fixed six-decimal formatting without a negative zero.
pub fn fmt6(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

impl EvalReport {
    pub(crate) fn from_samples(samples: Vec<Option<SampleRecord>>) -> Result<Self, CodebookError> {
        let skipped = samples.iter().filter(|s| s.is_none()).count();
        let per_sample: Vec<SampleRecord> = samples.into_iter().flatten().collect();
        let n = per_sample.len();
        if n == 0 {
            return Err(CodebookError::NoUsableChannels);
        }
        let mean = |f: fn(&SampleRecord) -> f64| per_sample.iter().map(f).sum::<f64>() / n as f64;
        let gamma_av = mean(|s| s.gain);
        Ok(Self {
            gamma_av,
            avg_distortion: mean(|s| s.distortion),
            loss: 1.0 - gamma_av,
            loss_ub: mean(|s| s.loss_ub),
            n_test: n,
            skipped,
            per_sample,
        })
    }

    /// One summary CSV row matching [`EVAL_CSV_HEADER`].
    pub fn csv_row(&self, codebook: &str, rule: &str, bits: u32) -> String {
        format!(
            "{codebook},{rule},{bits},{},{},{},{},{}",
            self.n_test,
            fmt6(self.gamma_av),
            fmt6(self.avg_distortion),
            fmt6(self.loss),
            fmt6(self.loss_ub)
        )
    }
}

/// Average normalized gain, distortion and loss bound of `codebook` over the
/// test channels. Zero channels are skipped and counted.
pub fn evaluate(test: &ChannelDataset, codebook: &Codebook, rule: SelectionRule) -> Result<EvalReport, CodebookError> {
    check_len("channel row", test.mt(), codebook.m)?;
    let samples: Vec<Result<Option<SampleRecord>, CodebookError>> = test
        .channels()
        .par_iter()
        .enumerate()
        .map(|(i, h)| {
            let mrt = match mrt_vector(h) {
                Ok(m) => m,
                Err(ChannelError::ZeroChannel(_)) => return Ok(None),
                Err(e) => return Err(e.into()),
            };
            let (index, distortion) = match rule {
                SelectionRule::Distance => nearest(&mrt.v1, codebook),
                SelectionRule::Gain => {
                    let (j, _) = select_by_gain(h, codebook)?;
                    (j, squared_distance(mrt.v1.coords(), codebook.entries[j].coords()))
                }
            };
            let f = codebook.entries[index].coords();
            let gain = gain_unchecked(h, f) / mrt.lambda1();
            let overlap = cdot(mrt.v1.coords(), f).norm_sqr();
            Ok(Some(SampleRecord {
                channel: i,
                index,
                index_h: None,
                gain,
                distortion,
                loss_ub: 1.0 - overlap,
            }))
        })
        .collect();
    EvalReport::from_samples(samples.into_iter().collect::<Result<_, _>>()?)
}

pub(crate) fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real_point(v: &[f64]) -> GrassmannPoint {
        let c: Vec<_> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        GrassmannPoint::from_direction(&c).unwrap()
    }

    fn e12() -> Codebook {
        Codebook::new(vec![GrassmannPoint::basis(2, 0), GrassmannPoint::basis(2, 1)], Provenance::Loaded).unwrap()
    }

    #[test]
    fn codebook_validation() {
        let e = GrassmannPoint::basis(2, 0);
        assert!(matches!(Codebook::new(vec![], Provenance::Loaded), Err(CodebookError::Empty)));
        assert!(matches!(
            Codebook::new(vec![e.clone(), GrassmannPoint::basis(2, 1), real_point(&[1.0, 1.0])], Provenance::Loaded),
            Err(CodebookError::NotPowerOfTwo(3))
        ));
        assert!(matches!(
            Codebook::new(vec![e.clone(), e.clone()], Provenance::Loaded),
            Err(CodebookError::Duplicate(0, 1))
        ));
        assert_eq!(e12().bits(), 1);
        assert_eq!(e12().min_distance(), 1.0);
    }

    #[test]
    fn selection_examples() {
        let cb = e12();
        let (i, g) = select_by_gain(&CMat::diag(&[2.0, 1.0]), &cb).unwrap();
        assert_eq!((i, g), (0, 4.0));
        let v = real_point(&[0.9f64.sqrt(), 0.1f64.sqrt()]);
        let (i, d) = select_by_distance(&v, &cb).unwrap();
        assert_eq!(i, 0);
        assert!((d - 0.1).abs() < 1e-15);
        // Orthogonal to every codeword: zero gain, lowest index.
        let h = CMat::from_fn(1, 2, |_, _| zero());
        assert_eq!(select_by_gain(&h, &cb).unwrap(), (0, 0.0));
        assert!(select_by_distance(&GrassmannPoint::basis(3, 0), &cb).is_err());
    }

    #[test]
    fn report_formatting() {
        assert_eq!(fmt6(-1e-17), "0.000000");
        assert_eq!(fmt6(0.5), "0.500000");
        let r = EvalReport::from_samples(vec![
            Some(SampleRecord { channel: 0, index: 0, index_h: None, gain: 1.0, distortion: 0.0, loss_ub: 0.0 }),
            None,
        ])
        .unwrap();
        assert_eq!(r.skipped, 1);
        assert_eq!(r.csv_row("cb", "distance", 3), "cb,distance,3,1,1.000000,0.000000,0.000000,0.000000");
    }
}
