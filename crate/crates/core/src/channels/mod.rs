//! Channel datasets and per-channel MRT quantities.
//!
//! A dataset is an ordered list of `mr × mt` complex matrices. The transmit
//! array is described as an `mv × mh` planar array (`mv · mh = mt`); linear
//! arrays use `mv = 1`.

mod generate;
mod io;

pub use generate::{
    exponential_correlation, gen_correlated, gen_geometric_upa, gen_rayleigh, upa_steering,
    GeometricUpaSpec,
};
pub use io::{load_dataset, read_dataset_header, save_dataset, DatasetHeader};

use num_complex::Complex64;
use rand::seq::SliceRandom;

use crate::linalg::{svd, CMat, LinalgError};
use crate::manifold::{GrassmannPoint, ManifoldError};
use crate::rng::stream_rng;

/// Channels with Frobenius norm below this carry no usable direction.
pub const ZERO_CHANNEL_TOL: f64 = 1e-12;

// Keeps the split shuffle independent of other draws made with the same seed.
const SPLIT_STREAM: u64 = 0x0053_504c_4954;

#[derive(Debug, thiserror::Error)]
pub enum ChannelError {
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("channel norm {0:e} is below 1e-12")]
    ZeroChannel(f64),
    #[error("split fraction {fraction} of {n} channels leaves an empty part")]
    DegenerateSplit { n: usize, fraction: f64 },
    #[error("invalid channel model: {0}")]
    InvalidSpec(String),
    #[error("dataset is empty")]
    Empty,
    #[error("non-finite entry in channel {0}")]
    NonFinite(usize),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a dataset file (bad magic bytes)")]
    BadMagic,
    #[error("unsupported file version {0}")]
    BadVersion(u8),
    #[error("inconsistent header: {0}")]
    BadDims(String),
    #[error("file ends before the declared payload")]
    TruncatedFile,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Manifold(#[from] ManifoldError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDataset {
    mr: usize,
    mt: usize,
    mv: usize,
    mh: usize,
    channels: Vec<CMat>,
    model_tag: String,
    seed: u64,
}

impl ChannelDataset {
    pub fn new(
        mr: usize,
        mv: usize,
        mh: usize,
        channels: Vec<CMat>,
        model_tag: impl Into<String>,
        seed: u64,
    ) -> Result<Self, ChannelError> {
        let mt = mv * mh;
        if mr == 0 || mt == 0 {
            return Err(ChannelError::DimMismatch(format!(
                "array sizes must be positive (mr = {mr}, mv = {mv}, mh = {mh})"
            )));
        }
        if channels.is_empty() {
            return Err(ChannelError::Empty);
        }
        for (i, h) in channels.iter().enumerate() {
            if h.rows() != mr || h.cols() != mt {
                return Err(ChannelError::DimMismatch(format!(
                    "channel {i} is {}x{}, expected {mr}x{mt}",
                    h.rows(),
                    h.cols()
                )));
            }
            if h.check_finite().is_err() {
                return Err(ChannelError::NonFinite(i));
            }
        }
        let model_tag = model_tag.into();
        if model_tag.len() > 255 {
            return Err(ChannelError::InvalidSpec("model tag longer than 255 bytes".into()));
        }
        Ok(Self { mr, mt, mv, mh, channels, model_tag, seed })
    }

    pub fn mr(&self) -> usize {
        self.mr
    }

    pub fn mt(&self) -> usize {
        self.mt
    }

    pub fn mv(&self) -> usize {
        self.mv
    }

    pub fn mh(&self) -> usize {
        self.mh
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    /// Always false; datasets are nonempty by construction.
    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn channels(&self) -> &[CMat] {
        &self.channels
    }

    pub fn model_tag(&self) -> &str {
        &self.model_tag
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Reinterprets the transmit array as `mv × mh`.
    pub fn with_array(mut self, mv: usize, mh: usize) -> Result<Self, ChannelError> {
        if mv.checked_mul(mh) != Some(self.mt) {
            return Err(ChannelError::DimMismatch(format!(
                "a {mv}x{mh} array does not have {} elements",
                self.mt
            )));
        }
        self.mv = mv;
        self.mh = mh;
        Ok(self)
    }

    fn with_channels(&self, channels: Vec<CMat>) -> Self {
        Self { channels, model_tag: self.model_tag.clone(), ..*self }
    }
}

/// Seeded shuffle followed by a prefix split; the training part gets
/// `round(n · train_fraction)` channels.
pub fn split(
    dataset: &ChannelDataset,
    train_fraction: f64,
    seed: u64,
) -> Result<(ChannelDataset, ChannelDataset), ChannelError> {
    let n = dataset.len();
    let degenerate = ChannelError::DegenerateSplit { n, fraction: train_fraction };
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(degenerate);
    }
    let n_train = (n as f64 * train_fraction).round() as usize;
    if n_train == 0 || n_train >= n {
        return Err(degenerate);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut stream_rng(seed, SPLIT_STREAM));
    let pick = |idx: &[usize]| idx.iter().map(|&i| dataset.channels[i].clone()).collect();
    Ok((
        dataset.with_channels(pick(&order[..n_train])),
        dataset.with_channels(pick(&order[n_train..])),
    ))
}

/// Sample transmit correlation `(1/n) Σ HᴴH`, exactly Hermitian.
pub fn correlation_matrix(dataset: &ChannelDataset) -> CMat {
    let mt = dataset.mt;
    let mut r = CMat::zeros(mt, mt);
    for h in &dataset.channels {
        let g = h.gram();
        for i in 0..mt {
            for j in i..mt {
                r[(i, j)] += g[(i, j)];
            }
        }
    }
    let scale = 1.0 / dataset.len() as f64;
    for i in 0..mt {
        for j in i..mt {
            r[(i, j)] *= scale;
        }
    }
    CMat::from_fn(mt, mt, |i, j| {
        if i == j {
            Complex64::new(r[(i, i)].re, 0.0)
        } else if i < j {
            r[(i, j)]
        } else {
            r[(j, i)].conj()
        }
    })
}

/// Optimal unquantized beamformer of one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Mrt {
    /// Dominant right singular vector.
    pub v1: GrassmannPoint,
    /// All `mt` eigenvalues of `HᴴH`, descending (zeros beyond `min(mr, mt)`).
    pub eigenvalues: Vec<f64>,
}

impl Mrt {
    pub fn lambda1(&self) -> f64 {
        self.eigenvalues[0]
    }
}

/// MRT direction and gain spectrum of `h`.
pub fn mrt_vector(h: &CMat) -> Result<Mrt, ChannelError> {
    let fro = h.frobenius_norm();
    if !fro.is_finite() {
        return Err(ChannelError::NonFinite(0));
    }
    if fro < ZERO_CHANNEL_TOL {
        return Err(ChannelError::ZeroChannel(fro));
    }
    let s = svd(h)?;
    let v1 = GrassmannPoint::from_direction(&s.v.column(0))?;
    let mut eigenvalues: Vec<f64> = s.singular_values.iter().map(|x| x * x).collect();
    eigenvalues.resize(h.cols(), 0.0);
    Ok(Mrt { v1, eigenvalues })
}

/// Beamforming gain `‖H f‖²`.
pub fn beamforming_gain(h: &CMat, f: &[Complex64]) -> Result<f64, ChannelError> {
    if f.len() != h.cols() {
        return Err(ChannelError::DimMismatch(format!(
            "beam of length {} for a channel with {} columns",
            f.len(),
            h.cols()
        )));
    }
    Ok(gain_unchecked(h, f))
}

#[inline]
pub(crate) fn gain_unchecked(h: &CMat, f: &[Complex64]) -> f64 {
    (0..h.rows())
        .map(|r| {
            h.row(r)
                .iter()
                .zip(f)
                .map(|(a, b)| a * b)
                .sum::<Complex64>()
                .norm_sqr()
        })
        .sum()
}
