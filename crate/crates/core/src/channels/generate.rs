use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;

use super::{ChannelDataset, ChannelError};
use crate::linalg::{kron_vec, CMat};
use crate::rng::{complex_normal, index, stream_rng, uniform};

const MAX_PATHS: usize = 16;

/// I.i.d. `CN(0, 1)` entries. Channel `i` is drawn from stream `i` of `seed`.
pub fn gen_rayleigh(mr: usize, mt: usize, n: usize, seed: u64) -> Result<ChannelDataset, ChannelError> {
    check_count(n)?;
    let channels = (0..n)
        .into_par_iter()
        .map(|i| gaussian_matrix(mr, mt, seed, i))
        .collect();
    ChannelDataset::new(mr, 1, mt, channels, "rayleigh", seed)
}

fn check_count(n: usize) -> Result<(), ChannelError> {
    if n == 0 {
        return Err(ChannelError::Empty);
    }
    Ok(())
}

fn gaussian_matrix(mr: usize, mt: usize, seed: u64, i: usize) -> CMat {
    let mut rng = stream_rng(seed, i as u64);
    CMat::from_fn(mr, mt, |_, _| complex_normal(&mut rng))
}

/// Correlated Rayleigh channels: every row is `w · R_half` with `w` drawn
/// exactly as in [`gen_rayleigh`], so `E[HᴴH] = mr · R_halfᴴ R_half`.
pub fn gen_correlated(
    mr: usize,
    mt: usize,
    r_half: &CMat,
    n: usize,
    seed: u64,
) -> Result<ChannelDataset, ChannelError> {
    check_count(n)?;
    if r_half.rows() != mt || r_half.cols() != mt {
        return Err(ChannelError::DimMismatch(format!(
            "correlation factor is {}x{}, expected {mt}x{mt}",
            r_half.rows(),
            r_half.cols()
        )));
    }
    r_half.check_finite()?;
    let channels = (0..n)
        .into_par_iter()
        .map(|i| {
            let w = gaussian_matrix(mr, mt, seed, i);
            CMat::from_fn(mr, mt, |r, j| {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..mt {
                    let rk = r_half[(k, j)];
                    // Exact zeros of the factor stay exact.
                    if rk != Complex64::new(0.0, 0.0) {
                        acc += w[(r, k)] * rk;
                    }
                }
                acc
            })
        })
        .collect();
    ChannelDataset::new(mr, 1, mt, channels, "correlated", seed)
}

/// Exponential correlation `R[i][j] = ρ^|i−j|` for a linear array.
pub fn exponential_correlation(mt: usize, rho: f64) -> Result<CMat, ChannelError> {
    if !(0.0..1.0).contains(&rho) {
        return Err(ChannelError::InvalidSpec(format!("correlation {rho} outside [0, 1)")));
    }
    Ok(CMat::from_fn(mt, mt, |i, j| {
        Complex64::new(rho.powi((i as i32 - j as i32).abs()), 0.0)
    }))
}

/// Geometric multipath model for a `mv × mh` uniform planar array.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricUpaSpec {
    pub mv: usize,
    pub mh: usize,
    /// Paths per channel, at most 16.
    pub paths: usize,
    /// `(azimuth, elevation)` centres in radians.
    pub cluster_centers: Vec<(f64, f64)>,
    /// Half-width of the uniform angular spread around a centre, radians.
    pub angle_spread: f64,
    /// Standard deviation of each path's complex gain.
    pub gain_profile: Vec<f64>,
    /// Element spacing in wavelengths.
    pub element_spacing: f64,
}

impl GeometricUpaSpec {
    /// Single-cluster spec with unit-gain paths and half-wavelength spacing.
    pub fn new(mv: usize, mh: usize, paths: usize, cluster_centers: Vec<(f64, f64)>) -> Self {
        Self {
            mv,
            mh,
            paths,
            cluster_centers,
            angle_spread: 0.0,
            gain_profile: vec![1.0; paths],
            element_spacing: 0.5,
        }
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        let bad = |msg: String| Err(ChannelError::InvalidSpec(msg));
        if self.mv == 0 || self.mh == 0 {
            return bad(format!("array {}x{} has no elements", self.mv, self.mh));
        }
        if self.paths == 0 || self.paths > MAX_PATHS {
            return bad(format!("path count {} outside 1..={MAX_PATHS}", self.paths));
        }
        if self.cluster_centers.is_empty() {
            return bad("no cluster centres".into());
        }
        let in_range = |a: f64| a.is_finite() && (-FRAC_PI_2..=FRAC_PI_2).contains(&a);
        if let Some(&(az, el)) = self.cluster_centers.iter().find(|(az, el)| !in_range(*az) || !in_range(*el)) {
            return bad(format!("cluster angle ({az}, {el}) outside [-pi/2, pi/2]"));
        }
        if !(self.angle_spread >= 0.0 && self.angle_spread.is_finite()) {
            return bad(format!("angle spread {} must be finite and non-negative", self.angle_spread));
        }
        if self.gain_profile.len() != self.paths {
            return bad(format!(
                "{} path gains given for {} paths",
                self.gain_profile.len(),
                self.paths
            ));
        }
        if self.gain_profile.iter().any(|g| !(g.is_finite() && *g >= 0.0))
            || self.gain_profile.iter().all(|&g| g == 0.0)
        {
            return bad("path gains must be non-negative and not all zero".into());
        }
        if !(self.element_spacing > 0.0 && self.element_spacing.is_finite()) {
            return bad(format!("element spacing {} must be positive", self.element_spacing));
        }
        Ok(())
    }
}

/// Vertical and horizontal array responses, each of unit norm.
pub fn upa_steering(spec: &GeometricUpaSpec, azimuth: f64, elevation: f64) -> (Vec<Complex64>, Vec<Complex64>) {
    let phase_ramp = |m: usize, step: f64| -> Vec<Complex64> {
        let scale = 1.0 / (m as f64).sqrt();
        (0..m)
            .map(|p| Complex64::from_polar(scale, 2.0 * PI * step * p as f64))
            .collect()
    };
    let s = spec.element_spacing;
    (
        phase_ramp(spec.mv, s * elevation.sin()),
        phase_ramp(spec.mh, s * azimuth.sin() * elevation.cos()),
    )
}

/// `1 × mv·mh` channels `Σ_l α_l (a_v ⊗ a_h)ᴴ`. Each path picks a cluster
/// uniformly, perturbs both angles uniformly within the spread (clamped to
/// `[−π/2, π/2]`) and draws `α_l ~ CN(0, g_l²)`.
pub fn gen_geometric_upa(spec: &GeometricUpaSpec, n: usize, seed: u64) -> Result<ChannelDataset, ChannelError> {
    spec.validate()?;
    check_count(n)?;
    let mt = spec.mv * spec.mh;
    let channels = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            let mut row = vec![Complex64::new(0.0, 0.0); mt];
            for l in 0..spec.paths {
                let (az0, el0) = spec.cluster_centers[index(&mut rng, spec.cluster_centers.len())];
                let mut jitter = |a: f64| {
                    (a + spec.angle_spread * (2.0 * uniform(&mut rng) - 1.0)).clamp(-FRAC_PI_2, FRAC_PI_2)
                };
                let az = jitter(az0);
                let el = jitter(el0);
                let alpha = complex_normal(&mut rng) * spec.gain_profile[l];
                let (av, ah) = upa_steering(spec, az, el);
                for (x, a) in row.iter_mut().zip(kron_vec(&av, &ah)) {
                    *x += alpha * a.conj();
                }
            }
            CMat::row_vector(&row)
        })
        .collect();
    ChannelDataset::new(1, spec.mv, spec.mh, channels, "geometric-upa", seed)
}
