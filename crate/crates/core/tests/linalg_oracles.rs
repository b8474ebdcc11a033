use grassbook::linalg::{
    dominant_eigvec, herm_eig, kron, kron_vec, norm, svd, unvec_transpose, vec_transpose, CMat,
};
use grassbook::rng::{complex_normal, stream_rng, StreamRng};
use num_complex::Complex64;
use proptest::prelude::*;

fn random_mat(rng: &mut StreamRng, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| complex_normal(rng))
}

fn random_unit(rng: &mut StreamRng, n: usize) -> Vec<Complex64> {
    let v: Vec<_> = (0..n).map(|_| complex_normal(rng)).collect();
    let s = norm(&v);
    v.into_iter().map(|z| z / s).collect()
}

fn rayleigh(a: &CMat, x: &[Complex64]) -> f64 {
    let ax = a.mul_vec(x).unwrap();
    grassbook::linalg::cdot(x, &ax).re
}

#[test]
fn dominant_eigvec_beats_random_directions() {
    let mut rng = stream_rng(11, 0);
    for n in [2, 3, 5] {
        let b = random_mat(&mut rng, n + 1, n);
        let a = b.gram();
        let v = dominant_eigvec(&a).unwrap();
        let lmax = herm_eig(&a).unwrap().eigenvalues[0];
        let rq = rayleigh(&a, &v);
        assert!((rq - lmax).abs() <= 1e-9 * lmax);
        for _ in 0..10_000 {
            let x = random_unit(&mut rng, n);
            assert!(rayleigh(&a, &x) <= rq + 1e-12 * lmax);
        }
    }
}

#[test]
fn svd_matches_gram_eigenvalues() {
    let mut rng = stream_rng(12, 0);
    let a = random_mat(&mut rng, 2, 4);
    let s = svd(&a).unwrap();
    let err = a.sub(&s.reconstruct()).unwrap().norm2();
    assert!(err <= 1e-9 * a.norm2());
    let lambda = herm_eig(&a.gram()).unwrap().eigenvalues;
    for (i, sv) in s.singular_values.iter().enumerate() {
        assert!((sv * sv - lambda[i]).abs() <= 1e-9 * lambda[0]);
    }
    // Remaining eigenvalues of the 4x4 Gram matrix are zero.
    assert!(lambda[2].abs() <= 1e-12 * lambda[0] && lambda[3].abs() <= 1e-12 * lambda[0]);
}

#[test]
fn kron_mixed_product_rule() {
    let mut rng = stream_rng(13, 0);
    for _ in 0..50 {
        let a = random_mat(&mut rng, 2, 3);
        let b = random_mat(&mut rng, 3, 2);
        let c = random_mat(&mut rng, 3, 2);
        let d = random_mat(&mut rng, 2, 4);
        let lhs = kron(&a, &b).unwrap().matmul(&kron(&c, &d).unwrap()).unwrap();
        let rhs = kron(&a.matmul(&c).unwrap(), &b.matmul(&d).unwrap()).unwrap();
        let diff = lhs.sub(&rhs).unwrap().frobenius_norm();
        assert!(diff <= 1e-12 * lhs.frobenius_norm().max(1.0), "diff = {diff}");
    }
}

#[test]
fn kron_of_unit_vectors_is_unit() {
    let mut rng = stream_rng(14, 0);
    let a = random_unit(&mut rng, 2);
    let b = random_unit(&mut rng, 3);
    assert!((norm(&kron_vec(&a, &b)) - 1.0).abs() <= 1e-12);
}

#[test]
fn vec_transpose_round_trip() {
    let mut rng = stream_rng(15, 0);
    let h = random_mat(&mut rng, 3, 2);
    let row = vec_transpose(&h);
    assert_eq!(unvec_transpose(&row, 3, 2).unwrap(), h);
}

#[test]
fn decompositions_are_deterministic() {
    let mut rng = stream_rng(16, 0);
    let a = random_mat(&mut rng, 6, 5);
    assert_eq!(svd(&a).unwrap(), svd(&a).unwrap());
    assert_eq!(herm_eig(&a.gram()).unwrap(), herm_eig(&a.gram()).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kron_is_bilinear(seed in any::<u64>(), alpha_re in -2.0f64..2.0, alpha_im in -2.0f64..2.0) {
        let mut rng = stream_rng(seed, 0);
        let a1 = random_mat(&mut rng, 2, 2);
        let a2 = random_mat(&mut rng, 2, 2);
        let b = random_mat(&mut rng, 3, 1);
        let alpha = Complex64::new(alpha_re, alpha_im);
        let sum = CMat::from_fn(2, 2, |r, c| a1[(r, c)] * alpha + a2[(r, c)]);
        let lhs = kron(&sum, &b).unwrap();
        let k1 = kron(&a1, &b).unwrap();
        let k2 = kron(&a2, &b).unwrap();
        let rhs = CMat::from_fn(lhs.rows(), lhs.cols(), |r, c| k1[(r, c)] * alpha + k2[(r, c)]);
        prop_assert!(lhs.sub(&rhs).unwrap().frobenius_norm() <= 1e-12 * lhs.frobenius_norm().max(1.0));
    }

    #[test]
    fn eigendecomposition_is_accurate(seed in any::<u64>(), n in 1usize..12) {
        let mut rng = stream_rng(seed, 1);
        let b = random_mat(&mut rng, n, n);
        let a = CMat::from_fn(n, n, |r, c| b[(r, c)] + b[(c, r)].conj());
        let d = herm_eig(&a).unwrap();
        let scale = a.norm2();
        for i in 0..n {
            let v = d.eigenvector(i);
            let av = a.mul_vec(&v).unwrap();
            let r: Vec<_> = av.iter().zip(&v).map(|(x, y)| x - y * d.eigenvalues[i]).collect();
            prop_assert!(norm(&r) <= 1e-9 * scale);
        }
        let vhv = d.eigenvectors.adjoint().matmul(&d.eigenvectors).unwrap();
        prop_assert!(vhv.sub(&CMat::identity(n)).unwrap().norm2() <= 1e-9);
        prop_assert!(d.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }
}
