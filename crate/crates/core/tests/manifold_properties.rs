use grassbook::linalg::{cdot, norm};
use grassbook::manifold::{
    centroid, chordal_distance, distortion, linear_grid, ripley_k, uniform_reference,
    uniform_sample, GrassmannPoint,
};
use grassbook::rng::{complex_normal, stream_rng, StreamRng};
use num_complex::Complex64;
use proptest::prelude::*;

fn random_points(rng: &mut StreamRng, m: usize, n: usize) -> Vec<GrassmannPoint> {
    (0..n).map(|_| uniform_sample(m, rng)).collect()
}

/// Haar-like unitary from Gram-Schmidt on a Gaussian matrix, as columns.
fn random_unitary(rng: &mut StreamRng, m: usize) -> Vec<Vec<Complex64>> {
    let mut cols: Vec<Vec<Complex64>> = Vec::new();
    while cols.len() < m {
        let mut v: Vec<Complex64> = (0..m).map(|_| complex_normal(rng)).collect();
        for q in &cols {
            let p = cdot(q, &v);
            v.iter_mut().zip(q).for_each(|(x, y)| *x -= p * y);
        }
        let n = norm(&v);
        cols.push(v.into_iter().map(|x| x / n).collect());
    }
    cols
}

fn apply(u: &[Vec<Complex64>], p: &GrassmannPoint) -> GrassmannPoint {
    let m = p.dim();
    let mut out = vec![Complex64::new(0.0, 0.0); m];
    for (j, col) in u.iter().enumerate() {
        for i in 0..m {
            out[i] += col[i] * p.coords()[j];
        }
    }
    GrassmannPoint::from_direction(&out).unwrap()
}

fn objective(points: &[GrassmannPoint], f: &GrassmannPoint) -> f64 {
    points.iter().map(|p| distortion(p, f).unwrap()).sum()
}

#[test]
fn centroid_beats_random_candidates() {
    let mut rng = stream_rng(21, 0);
    for set in 0..20 {
        let n = 1 + set % 6;
        let pts = random_points(&mut rng, 2, n);
        let c = centroid(&pts).unwrap();
        let best = objective(&pts, &c);
        for _ in 0..20_000 {
            let cand = uniform_sample(2, &mut rng);
            assert!(best <= objective(&pts, &cand) + 1e-9);
        }
    }
}

#[test]
fn uniform_sample_has_beta_moment() {
    let mut rng = stream_rng(22, 0);
    let m = 4;
    let n = 100_000;
    let xs: Vec<f64> = (0..n)
        .map(|_| uniform_sample(m, &mut rng).coords()[0].norm_sqr())
        .collect();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let se = (var / n as f64).sqrt();
    assert!((mean - 1.0 / m as f64).abs() <= 3.0 * se, "mean {mean}, se {se}");
}

#[test]
fn ripley_of_uniform_points_matches_reference() {
    let mut rng = stream_rng(23, 0);
    let grid = linear_grid(101);
    let pts = random_points(&mut rng, 2, 1000);
    let k = ripley_k(&pts, &grid).unwrap();
    let reference = uniform_reference(2, &grid, 100_000, 24).unwrap();
    assert!(k.kolmogorov_distance(&reference) <= 0.05);
    // The reference itself against the closed form t^{2(M-1)} for M = 2.
    for (t, v) in grid.iter().zip(&reference.values) {
        assert!((v - t * t).abs() < 0.01, "t = {t}: {v}");
    }
}

#[test]
fn ripley_is_rotation_invariant_and_monotone() {
    let mut rng = stream_rng(25, 0);
    let grid = linear_grid(41);
    let pts = random_points(&mut rng, 3, 200);
    let u = random_unitary(&mut rng, 3);
    let rotated: Vec<_> = pts.iter().map(|p| apply(&u, p)).collect();
    let a = ripley_k(&pts, &grid).unwrap();
    let b = ripley_k(&rotated, &grid).unwrap();
    assert!(a.kolmogorov_distance(&b) <= 1e-12);
    assert!(a.values.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(*a.values.last().unwrap(), 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn distance_ignores_phase(seed in any::<u64>(), m in 1usize..6, th in 0.0f64..6.3, ph in 0.0f64..6.3) {
        let mut rng = stream_rng(seed, 0);
        let a = uniform_sample(m, &mut rng);
        let b = uniform_sample(m, &mut rng);
        let ra: Vec<_> = a.coords().iter().map(|z| z * Complex64::from_polar(1.0, th)).collect();
        let rb: Vec<_> = b.coords().iter().map(|z| z * Complex64::from_polar(1.0, ph)).collect();
        let ca = GrassmannPoint::canonicalize(&ra).unwrap();
        let cb = GrassmannPoint::canonicalize(&rb).unwrap();
        let d0 = chordal_distance(&a, &b).unwrap();
        prop_assert!((chordal_distance(&ca, &cb).unwrap() - d0).abs() <= 1e-14);
        for (x, y) in a.coords().iter().zip(ca.coords()) {
            prop_assert!((x - y).norm() <= 1e-14);
        }
    }

    #[test]
    fn distance_is_a_symmetric_bounded_metric(seed in any::<u64>(), m in 1usize..6) {
        let mut rng = stream_rng(seed, 1);
        let a = uniform_sample(m, &mut rng);
        let b = uniform_sample(m, &mut rng);
        let c = uniform_sample(m, &mut rng);
        let dab = chordal_distance(&a, &b).unwrap();
        prop_assert_eq!(dab, chordal_distance(&b, &a).unwrap());
        prop_assert!((0.0..=1.0).contains(&dab));
        prop_assert_eq!(chordal_distance(&a, &a).unwrap(), 0.0);
        let dbc = chordal_distance(&b, &c).unwrap();
        let dac = chordal_distance(&a, &c).unwrap();
        prop_assert!(dac <= dab + dbc + 1e-12);
    }

    #[test]
    fn loss_bound_chain(seed in any::<u64>(), m in 1usize..6) {
        let mut rng = stream_rng(seed, 2);
        let a = uniform_sample(m, &mut rng);
        let b = uniform_sample(m, &mut rng);
        let x = cdot(a.coords(), b.coords()).norm();
        prop_assert!(1.0 - x <= 1.0 - x * x + 1e-15);
        prop_assert!(1.0 - x * x <= 2.0 * (1.0 - x) + 1e-15);
    }
}
