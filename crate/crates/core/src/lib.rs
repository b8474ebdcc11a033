//! Limited-feedback beamforming codebooks learned by K-means clustering on
//! the Grassmann manifold of lines `G(M, 1)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`]: small dense complex matrices, Jacobi eigensolver, SVD,
//!   Kronecker products.
//! * [`manifold`]: points of `G(M, 1)`, chordal distance, the
//!   dominant-eigenvector centroid and a pairwise-distance clustering
//!   statistic.
//! * [`clustering`]: Linde-Buzo-Gray style K-means on `G(M, 1)`.
//! * [`channels`]: channel datasets (generators, splitting, persistence) and
//!   per-channel MRT quantities.
//! * [`codebooks`]: learned, product, DFT and line-packing codebooks and
//!   their evaluation.
//! * [`cli`]: the `grassbook` command-line front end.

pub mod channels;
pub mod cli;
pub mod clustering;
pub mod codebooks;
pub mod linalg;
pub mod manifold;
pub mod rng;

mod wire;
