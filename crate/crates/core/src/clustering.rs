//! K-means on `G(M, 1)` by Lloyd/LBG iteration under squared chordal
//! distance.
//!
//! Assignment runs in parallel over points. All reductions (distortion sums,
//! scatter matrices) run in point-index order, so results are bit-identical
//! for any worker count.

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::manifold::{centroid_of, squared_distance, GrassmannPoint, ManifoldError, DISTINCT_TOL};
use crate::rng::{index, stream_rng, uniform, StreamRng};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClusteringError {
    #[error("need {k} distinct points for {k} clusters, found {distinct}")]
    NotEnoughDistinctPoints { k: usize, distinct: usize },
    #[error("no points to cluster")]
    EmptyInput,
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Manifold(#[from] ManifoldError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitStrategy {
    /// `k` distinct data points drawn without replacement.
    RandomSubset,
    /// First centroid uniform over the data, then each next one with
    /// probability proportional to its squared distance from the nearest
    /// centroid already chosen.
    #[default]
    DistanceSquaredSeeding,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansConfig {
    pub k: usize,
    pub max_iters: usize,
    /// Stop once `(D_prev − D) / max(D_prev, 1e-15)` falls below this.
    pub rel_tol: f64,
    pub init: InitStrategy,
    pub seed: u64,
    /// Independent runs; the lowest final distortion wins.
    pub restarts: usize,
}

impl KMeansConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            max_iters: 100,
            rel_tol: 1e-6,
            init: InitStrategy::default(),
            seed,
            restarts: 1,
        }
    }

    pub fn validate(&self) -> Result<(), ClusteringError> {
        if self.k == 0 {
            return Err(ClusteringError::InvalidConfig("k must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(ClusteringError::InvalidConfig("max_iters must be positive".into()));
        }
        if !(self.rel_tol > 0.0) {
            return Err(ClusteringError::InvalidConfig("rel_tol must be positive".into()));
        }
        if self.restarts == 0 {
            return Err(ClusteringError::InvalidConfig("restarts must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub centroids: Vec<GrassmannPoint>,
    /// Cell index of every input point under `centroids`.
    pub assignments: Vec<usize>,
    /// Average distortion of the initial codebook, then after every update.
    pub distortion_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl KMeansResult {
    pub fn distortion(&self) -> f64 {
        *self.distortion_history.last().expect("history is never empty")
    }
}

fn common_dim(points: &[GrassmannPoint]) -> Result<usize, ClusteringError> {
    let first = points.first().ok_or(ClusteringError::EmptyInput)?;
    let m = first.dim();
    if let Some(p) = points.iter().find(|p| p.dim() != m) {
        return Err(ClusteringError::DimMismatch(m, p.dim()));
    }
    Ok(m)
}

fn is_distinct_from(p: &GrassmannPoint, reps: &[&GrassmannPoint]) -> bool {
    reps.iter()
        .all(|r| squared_distance(p.coords(), r.coords()).sqrt() > DISTINCT_TOL)
}

/// Greedy count of pairwise distinct points (`d > 1e-9`), stopping once
/// `limit` have been found.
pub fn count_distinct(points: &[GrassmannPoint], limit: usize) -> usize {
    let mut reps: Vec<&GrassmannPoint> = Vec::new();
    for p in points {
        if reps.len() >= limit {
            break;
        }
        if is_distinct_from(p, &reps) {
            reps.push(p);
        }
    }
    reps.len()
}

fn check_enough(points: &[GrassmannPoint], k: usize) -> Result<(), ClusteringError> {
    let distinct = count_distinct(points, k);
    if distinct < k {
        return Err(ClusteringError::NotEnoughDistinctPoints { k, distinct });
    }
    Ok(())
}

/// Initial centroids for `cfg.k` clusters, drawn from stream 0 of `cfg.seed`.
pub fn initialize(
    points: &[GrassmannPoint],
    cfg: &KMeansConfig,
) -> Result<Vec<GrassmannPoint>, ClusteringError> {
    cfg.validate()?;
    common_dim(points)?;
    check_enough(points, cfg.k)?;
    let mut rng = stream_rng(cfg.seed, 0);
    Ok(initialize_with(points, cfg.k, cfg.init, &mut rng))
}

// Callers have checked that `k` distinct points exist.
fn initialize_with(
    points: &[GrassmannPoint],
    k: usize,
    init: InitStrategy,
    rng: &mut StreamRng,
) -> Vec<GrassmannPoint> {
    match init {
        InitStrategy::RandomSubset => random_subset(points, k, rng),
        InitStrategy::DistanceSquaredSeeding => d2_seeding(points, k, rng),
    }
}

fn random_subset(points: &[GrassmannPoint], k: usize, rng: &mut StreamRng) -> Vec<GrassmannPoint> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.shuffle(rng);
    let mut chosen: Vec<&GrassmannPoint> = Vec::with_capacity(k);
    for i in order {
        if chosen.len() == k {
            break;
        }
        if is_distinct_from(&points[i], &chosen) {
            chosen.push(&points[i]);
        }
    }
    chosen.into_iter().cloned().collect()
}

fn d2_seeding(points: &[GrassmannPoint], k: usize, rng: &mut StreamRng) -> Vec<GrassmannPoint> {
    let floor = DISTINCT_TOL * DISTINCT_TOL;
    let first = index(rng, points.len());
    let mut chosen = vec![points[first].clone()];
    let mut nearest: Vec<f64> = points
        .par_iter()
        .map(|p| squared_distance(p.coords(), chosen[0].coords()))
        .collect();
    while chosen.len() < k {
        let weight = |d: f64| if d > floor { d } else { 0.0 };
        let total: f64 = nearest.iter().map(|&d| weight(d)).sum();
        let target = uniform(rng) * total;
        let mut acc = 0.0;
        let mut pick = None;
        for (i, &d) in nearest.iter().enumerate() {
            let w = weight(d);
            if w == 0.0 {
                continue;
            }
            acc += w;
            pick = Some(i);
            if acc > target {
                break;
            }
        }
        // Rounding can leave `target` at the very end; the last positive
        // weight is taken then.
        let c = points[pick.expect("enough distinct points")].clone();
        nearest
            .par_iter_mut()
            .zip(points.par_iter())
            .for_each(|(d, p)| *d = d.min(squared_distance(p.coords(), c.coords())));
        chosen.push(c);
    }
    chosen
}

/// Nearest centroid of every point (ties to the lowest index) and the
/// average distortion.
pub fn assign(
    points: &[GrassmannPoint],
    centroids: &[GrassmannPoint],
) -> Result<(Vec<usize>, f64), ClusteringError> {
    let m = common_dim(points)?;
    if centroids.is_empty() {
        return Err(ClusteringError::InvalidConfig("no centroids".into()));
    }
    if let Some(c) = centroids.iter().find(|c| c.dim() != m) {
        return Err(ClusteringError::DimMismatch(m, c.dim()));
    }
    Ok(assign_unchecked(points, centroids))
}

fn nearest(p: &GrassmannPoint, centroids: &[GrassmannPoint]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = squared_distance(p.coords(), c.coords());
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn assign_unchecked(points: &[GrassmannPoint], centroids: &[GrassmannPoint]) -> (Vec<usize>, f64) {
    let pairs: Vec<(usize, f64)> = points.par_iter().map(|p| nearest(p, centroids)).collect();
    let total: f64 = pairs.iter().map(|&(_, d)| d).sum();
    let labels = pairs.into_iter().map(|(j, _)| j).collect();
    (labels, total / points.len() as f64)
}

/// Centroid of every cell. An empty cell takes over the point with the
/// largest distortion to its own cell centroid, drawn from cells that keep
/// at least one point, and that donor cell's centroid is recomputed.
pub fn update_centroids(
    points: &[GrassmannPoint],
    assignments: &[usize],
    k: usize,
) -> Result<Vec<GrassmannPoint>, ClusteringError> {
    common_dim(points)?;
    if assignments.len() != points.len() {
        return Err(ClusteringError::DimMismatch(points.len(), assignments.len()));
    }
    if k == 0 || assignments.iter().any(|&a| a >= k) {
        return Err(ClusteringError::InvalidConfig("assignment out of range".into()));
    }
    if points.len() < k {
        return Err(ClusteringError::NotEnoughDistinctPoints { k, distinct: points.len() });
    }
    let mut cells: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, &a) in assignments.iter().enumerate() {
        cells[a].push(i);
    }
    let cell_centroid = |cell: &[usize]| centroid_of(cell.iter().map(|&i| &points[i]));

    let mut centroids: Vec<Option<GrassmannPoint>> = cells
        .par_iter()
        .map(|cell| (!cell.is_empty()).then(|| cell_centroid(cell)).transpose())
        .collect::<Result<_, _>>()?;

    for j in 0..k {
        if centroids[j].is_some() {
            continue;
        }
        let mut worst: Option<(usize, usize, f64)> = None;
        for (c, cell) in cells.iter().enumerate() {
            if cell.len() < 2 {
                continue;
            }
            let cen = centroids[c].as_ref().expect("nonempty cell");
            for &i in cell {
                let d = squared_distance(points[i].coords(), cen.coords());
                let better = match worst {
                    None => true,
                    Some((_, wi, wd)) => d > wd || (d == wd && i < wi),
                };
                if better {
                    worst = Some((c, i, d));
                }
            }
        }
        let (donor, i, _) = worst.expect("fewer points than clusters");
        cells[donor].retain(|&x| x != i);
        centroids[donor] = Some(cell_centroid(&cells[donor])?);
        cells[j].push(i);
        centroids[j] = Some(points[i].clone());
    }
    Ok(centroids.into_iter().map(|c| c.expect("filled")).collect())
}

/// Runs K-means from seeded initial codebooks, keeping the best of
/// `cfg.restarts` runs (restart `r` uses stream `r` of `cfg.seed`).
pub fn kmeans(points: &[GrassmannPoint], cfg: &KMeansConfig) -> Result<KMeansResult, ClusteringError> {
    cfg.validate()?;
    common_dim(points)?;
    check_enough(points, cfg.k)?;
    let mut best: Option<KMeansResult> = None;
    for r in 0..cfg.restarts {
        let mut rng = stream_rng(cfg.seed, r as u64);
        let init = initialize_with(points, cfg.k, cfg.init, &mut rng);
        let run = iterate(points, init, cfg);
        if best.as_ref().is_none_or(|b| run.distortion() < b.distortion()) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Single K-means run from the given codebook. `cfg.k`, `cfg.init`,
/// `cfg.seed` and `cfg.restarts` are ignored.
pub fn kmeans_from(
    points: &[GrassmannPoint],
    initial: Vec<GrassmannPoint>,
    cfg: &KMeansConfig,
) -> Result<KMeansResult, ClusteringError> {
    let check = KMeansConfig {
        k: initial.len().max(1),
        ..cfg.clone()
    };
    check.validate()?;
    let m = common_dim(points)?;
    if initial.is_empty() {
        return Err(ClusteringError::InvalidConfig("no initial centroids".into()));
    }
    if let Some(c) = initial.iter().find(|c| c.dim() != m) {
        return Err(ClusteringError::DimMismatch(m, c.dim()));
    }
    if points.len() < initial.len() {
        return Err(ClusteringError::NotEnoughDistinctPoints {
            k: initial.len(),
            distinct: count_distinct(points, initial.len()),
        });
    }
    Ok(iterate(points, initial, cfg))
}

fn iterate(points: &[GrassmannPoint], init: Vec<GrassmannPoint>, cfg: &KMeansConfig) -> KMeansResult {
    let k = init.len();
    let mut centroids = init;
    let (mut labels, d0) = assign_unchecked(points, &centroids);
    let mut history = vec![d0];
    let mut converged = d0 == 0.0;
    let mut iterations = 0;
    while !converged && iterations < cfg.max_iters {
        let next = update_centroids(points, &labels, k).expect("inputs validated");
        let (next_labels, d) = assign_unchecked(points, &next);
        iterations += 1;
        let prev = *history.last().expect("nonempty");
        centroids = next;
        labels = next_labels;
        history.push(d);
        converged = (prev - d) / prev.max(1e-15) < cfg.rel_tol;
    }
    KMeansResult {
        centroids,
        assignments: labels,
        distortion_history: history,
        iterations,
        converged,
    }
}
