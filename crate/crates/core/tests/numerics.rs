mod common;

use common::{
    frob, frob_diff, gauss_solve, gram_condition, low_rank_matrix, naive_matmul, normal_equations_pinv,
    random_matrix, ORACLE_MAX_GRAM_CONDITION,
};
use ddos_elm::numerics::{lstsq, matmul, pseudoinverse, svd, Matrix};
use ddos_elm::rng::Xoshiro256StarStar;
use proptest::prelude::*;

/// Full-rank, rank-deficient or all-zero, chosen by `kind`.
fn test_matrix(seed: u64, rows: usize, cols: usize, kind: u8) -> Matrix {
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    match kind {
        0 => random_matrix(&mut rng, rows, cols),
        1 => {
            let rank = 1 + (seed as usize) % rows.min(cols);
            low_rank_matrix(&mut rng, rows, cols, rank)
        }
        _ => Matrix::zeros(rows, cols),
    }
}

fn symmetric_defect(a: &Matrix) -> f64 {
    frob_diff(a, &a.transpose())
}

fn penrose_defects(a: &Matrix, p: &Matrix) -> [f64; 4] {
    let ap = naive_matmul(a, p);
    let pa = naive_matmul(p, a);
    let apa = naive_matmul(&ap, a);
    let pap = naive_matmul(&pa, p);
    [
        frob_diff(&apa, a) / frob(a).max(1.0),
        frob_diff(&pap, p) / frob(p).max(1.0),
        symmetric_defect(&ap) / frob(&ap).max(1.0),
        symmetric_defect(&pa) / frob(&pa).max(1.0),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn penrose_conditions_hold(seed in any::<u64>(), rows in 1usize..=50, cols in 1usize..=50, kind in 0u8..3) {
        let a = test_matrix(seed, rows, cols, kind);
        let p = pseudoinverse(&a, None).unwrap();
        prop_assert_eq!(p.shape(), (cols, rows));
        for (i, d) in penrose_defects(&a, &p).iter().enumerate() {
            prop_assert!(*d <= 1e-8, "condition {} defect {:e} on {}x{} kind {}", i + 1, d, rows, cols, kind);
        }
    }

    #[test]
    fn svd_reconstructs_with_orthonormal_factors(seed in any::<u64>(), rows in 1usize..=30, cols in 1usize..=30, kind in 0u8..3) {
        let a = test_matrix(seed, rows, cols, kind);
        let dec = svd(&a).unwrap();
        let k = rows.min(cols);
        prop_assert_eq!(dec.singular_values.len(), k);
        prop_assert!(dec.singular_values.iter().all(|s| *s >= 0.0));
        prop_assert!(dec.singular_values.windows(2).all(|w| w[0] >= w[1]));
        let rel = frob_diff(&dec.reconstruct(), &a) / frob(&a).max(1.0);
        prop_assert!(rel <= 1e-10, "reconstruction error {:e}", rel);
        let utu = naive_matmul(&dec.u.transpose(), &dec.u);
        let vvt = naive_matmul(&dec.vt, &dec.vt.transpose());
        prop_assert!(frob_diff(&utu, &Matrix::identity(k)) <= 1e-10);
        prop_assert!(frob_diff(&vvt, &Matrix::identity(k)) <= 1e-10);
    }

    #[test]
    fn matmul_is_associative(seed in any::<u64>(), m in 1usize..=12, n in 1usize..=12, p in 1usize..=12, q in 1usize..=12) {
        let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
        let a = random_matrix(&mut rng, m, n);
        let b = random_matrix(&mut rng, n, p);
        let c = random_matrix(&mut rng, p, q);
        let left = matmul(&matmul(&a, &b).unwrap(), &c).unwrap();
        let right = matmul(&a, &matmul(&b, &c).unwrap()).unwrap();
        prop_assert!(frob_diff(&left, &right) <= 1e-9 * frob(&left).max(1.0));
    }

    #[test]
    fn matmul_matches_triple_loop(seed in any::<u64>(), m in 1usize..=10, n in 1usize..=10, p in 1usize..=10) {
        let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
        let a = random_matrix(&mut rng, m, n);
        let b = random_matrix(&mut rng, n, p);
        let fast = matmul(&a, &b).unwrap();
        let slow = naive_matmul(&a, &b);
        for (x, y) in fast.as_slice().iter().zip(slow.as_slice()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn lstsq_matches_normal_equations_on_full_rank(seed in any::<u64>(), cols in 1usize..=8, extra in 0usize..=12, targets in 1usize..=3) {
        let rows = cols + extra;
        let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
        let a = random_matrix(&mut rng, rows, cols);
        let t = random_matrix(&mut rng, rows, targets);
        // squaring the condition number makes the oracle itself inexact on
        // ill-conditioned draws
        prop_assume!(gram_condition(&a) <= ORACLE_MAX_GRAM_CONDITION);
        let x = lstsq(&a, &t, None).unwrap();
        let at = a.transpose();
        let oracle = gauss_solve(&naive_matmul(&at, &a), &naive_matmul(&at, &t));
        let rel = frob_diff(&x, &oracle) / frob(&oracle).max(1.0);
        prop_assert!(rel <= 1e-8, "relative difference {:e}", rel);
    }

    #[test]
    fn lstsq_is_locally_optimal(seed in any::<u64>(), rows in 1usize..=15, cols in 1usize..=15) {
        let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
        let a = random_matrix(&mut rng, rows, cols);
        let t = random_matrix(&mut rng, rows, 1);
        let x = lstsq(&a, &t, None).unwrap();
        let residual = |x: &Matrix| frob_diff(&naive_matmul(&a, x), &t);
        let best = residual(&x);
        for _ in 0..1000 {
            let delta = random_matrix(&mut rng, cols, 1).scale(1e-3);
            let perturbed = x.add(&delta).unwrap();
            prop_assert!(best <= residual(&perturbed) + 1e-12);
        }
    }
}

#[test]
fn pseudoinverse_matches_normal_equations_oracle() {
    let mut rng = Xoshiro256StarStar::seed_from_u64(2024);
    for _ in 0..20 {
        let a = random_matrix(&mut rng, 8, 5);
        let p = pseudoinverse(&a, None).unwrap();
        let oracle = normal_equations_pinv(&a);
        for (x, y) in p.as_slice().iter().zip(oracle.as_slice()) {
            assert!((x - y).abs() <= 1e-8, "{x} vs {y}");
        }
    }
}

#[test]
fn overdetermined_consistent_system_is_solved_exactly() {
    let a = Matrix::from_rows(&[[1.0, 2.0], [3.0, -1.0], [0.5, 4.0], [-2.0, 1.0]]).unwrap();
    let x0 = Matrix::from_rows(&[[1.5], [-0.25]]).unwrap();
    let t = naive_matmul(&a, &x0);
    let x = lstsq(&a, &t, None).unwrap();
    assert!(frob_diff(&x, &x0) <= 1e-12);
    assert!(frob_diff(&naive_matmul(&a, &x), &t) <= 1e-12);
}

/// Rank-2 3×3 system whose solution set is `x* + s·(1, −2, 1)`. Scanning `s`
/// finely over a wide window brute-forces the minimum-norm minimizer.
fn enumerate_min_norm(a: &Matrix, t: &Matrix, particular: [f64; 3]) -> (f64, f64) {
    let null = [1.0, -2.0, 1.0];
    let mut best_norm = f64::INFINITY;
    let mut best_residual = f64::INFINITY;
    for step in -200_000..=200_000 {
        let s = step as f64 * 1e-5;
        let cand: Vec<f64> = (0..3).map(|i| particular[i] + s * null[i]).collect();
        let cm = Matrix::new(3, 1, cand.clone()).unwrap();
        let res = frob_diff(&naive_matmul(a, &cm), t);
        let norm = cand.iter().map(|v| v * v).sum::<f64>().sqrt();
        if res <= best_residual + 1e-12 && norm < best_norm {
            best_norm = norm;
            best_residual = res;
        }
    }
    (best_norm, best_residual)
}

#[test]
fn rank_deficient_lstsq_returns_minimum_norm_solution() {
    let a = Matrix::from_rows(&[[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [1.0, 1.0, 1.0]]).unwrap();
    let null = Matrix::from_rows(&[[1.0], [-2.0], [1.0]]).unwrap();
    assert!(frob(&naive_matmul(&a, &null)) == 0.0);

    // consistent: T = A·(1, 1, 1)
    let t = Matrix::from_rows(&[[6.0], [12.0], [3.0]]).unwrap();
    let x = lstsq(&a, &t, None).unwrap();
    let (best_norm, _) = enumerate_min_norm(&a, &t, [1.0, 1.0, 1.0]);
    assert!(frob_diff(&naive_matmul(&a, &x), &t) <= 1e-10);
    assert!(frob(&x) <= best_norm + 1e-9, "{} > {}", frob(&x), best_norm);
    let along_null: f64 = (0..3).map(|i| x[(i, 0)] * null[(i, 0)]).sum();
    assert!(along_null.abs() <= 1e-10);

    // inconsistent: the second row contradicts twice the first
    let t = Matrix::from_rows(&[[1.0], [0.0], [2.0]]).unwrap();
    let x = lstsq(&a, &t, None).unwrap();
    // columns 0 and 1 span the range of A, so least squares on them with
    // x₂ = 0 yields an independent particular minimizer
    let a01 = a.select_cols(&[0, 1]);
    let a01t = a01.transpose();
    let p = gauss_solve(&naive_matmul(&a01t, &a01), &naive_matmul(&a01t, &t));
    let particular = [p[(0, 0)], p[(1, 0)], 0.0];
    let (best_norm, best_residual) = enumerate_min_norm(&a, &t, particular);
    let residual = frob_diff(&naive_matmul(&a, &x), &t);
    assert!(residual <= best_residual + 1e-10);
    assert!(frob(&x) <= best_norm + 1e-9);
}

/// Square rank-deficient draws whose left-vector completion once stalled.
#[test]
fn square_rank_deficient_cases_complete_the_left_basis() {
    for (seed, n) in [(258669058881693607u64, 44usize), (15132005815517199260, 12)] {
        let a = test_matrix(seed, n, n, 1);
        let dec = svd(&a).unwrap();
        let utu = naive_matmul(&dec.u.transpose(), &dec.u);
        assert!(frob_diff(&utu, &Matrix::identity(n)) <= 1e-10);
        assert!(frob_diff(&dec.reconstruct(), &a) / frob(&a).max(1.0) <= 1e-10);
        let p = pseudoinverse(&a, None).unwrap();
        assert!(penrose_defects(&a, &p).iter().all(|d| *d <= 1e-8));
    }
}

#[test]
fn zero_matrix_pseudoinverse_is_zero_transpose() {
    let p = pseudoinverse(&Matrix::zeros(4, 7), None).unwrap();
    assert_eq!(p, Matrix::zeros(7, 4));
}

#[test]
fn shape_errors_name_both_shapes() {
    let err = matmul(&Matrix::zeros(2, 3), &Matrix::zeros(2, 3))
        .unwrap_err()
        .to_string();
    assert!(err.contains("2x3"), "{err}");
    assert!(lstsq(&Matrix::zeros(3, 2), &Matrix::zeros(4, 1), None).is_err());
}
