//! Oracles and generators shared by the integration tests. The oracles are
//! deliberately naive so they can be trusted independently of the library.
#![allow(dead_code, clippy::needless_range_loop)]

use ddos_elm::numerics::Matrix;
use ddos_elm::rng::Xoshiro256StarStar;

pub fn random_matrix(rng: &mut Xoshiro256StarStar, rows: usize, cols: usize) -> Matrix {
    let data = (0..rows * cols).map(|_| rng.uniform(-1.0, 1.0)).collect();
    Matrix::new(rows, cols, data).unwrap()
}

/// Entries of alternating sign with magnitude in [0.5, 1], so every column
/// with two or more rows has population std of at least about 0.4.
pub fn spread_matrix(rng: &mut Xoshiro256StarStar, rows: usize, cols: usize) -> Matrix {
    let data = (0..rows * cols)
        .map(|k| {
            let sign = if (k / cols).is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * rng.uniform(0.5, 1.0)
        })
        .collect();
    Matrix::new(rows, cols, data).unwrap()
}

/// Product of an `rows×rank` and a `rank×cols` random factor.
pub fn low_rank_matrix(rng: &mut Xoshiro256StarStar, rows: usize, cols: usize, rank: usize) -> Matrix {
    let b = random_matrix(rng, rows, rank);
    let c = random_matrix(rng, rank, cols);
    naive_matmul(&b, &c)
}

pub fn naive_matmul(a: &Matrix, b: &Matrix) -> Matrix {
    assert_eq!(a.cols(), b.rows());
    let mut out = vec![0.0; a.rows() * b.cols()];
    for i in 0..a.rows() {
        for j in 0..b.cols() {
            let mut s = 0.0;
            for k in 0..a.cols() {
                s += a[(i, k)] * b[(k, j)];
            }
            out[i * b.cols() + j] = s;
        }
    }
    Matrix::new(a.rows(), b.cols(), out).unwrap()
}

pub fn frob(a: &Matrix) -> f64 {
    a.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn frob_diff(a: &Matrix, b: &Matrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Solves `A X = B` for square `A` by Gauss–Jordan elimination with partial
/// pivoting.
pub fn gauss_solve(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.rows();
    assert_eq!(n, a.cols());
    assert_eq!(n, b.rows());
    let m = b.cols();
    let mut aa = a.to_rows();
    let mut bb = b.to_rows();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| aa[i][col].abs().total_cmp(&aa[j][col].abs()))
            .unwrap();
        aa.swap(col, pivot);
        bb.swap(col, pivot);
        let p = aa[col][col];
        assert!(p.abs() > 1e-300, "singular system");
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = aa[r][col] / p;
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                aa[r][c] -= f * aa[col][c];
            }
            for c in 0..m {
                bb[r][c] -= f * bb[col][c];
            }
        }
    }
    let mut out = Vec::with_capacity(n * m);
    for r in 0..n {
        for c in 0..m {
            out.push(bb[r][c] / aa[r][r]);
        }
    }
    Matrix::new(n, m, out).unwrap()
}

/// `(AᵀA)⁻¹Aᵀ` for full-column-rank `A`.
pub fn normal_equations_pinv(a: &Matrix) -> Matrix {
    let at = a.transpose();
    gauss_solve(&naive_matmul(&at, a), &at)
}

/// Frobenius condition number of `AᵀA`, an upper bound on the spectral one.
/// The normal-equations oracle is only accurate to about this times eps.
pub fn gram_condition(a: &Matrix) -> f64 {
    let gram = naive_matmul(&a.transpose(), a);
    let inv = gauss_solve(&gram, &Matrix::identity(gram.rows()));
    frob(&gram) * frob(&inv)
}

/// Largest `gram_condition` at which the normal-equations oracle is still
/// trusted to ~2e-10, well inside the 1e-8 comparison tolerance.
pub const ORACLE_MAX_GRAM_CONDITION: f64 = 1e6;

/// Pearson correlation by the textbook two-pass formula.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Fraction of (positive, negative) pairs where the positive scores higher,
/// ties counting one half.
pub fn pair_count_auc(y: &[u8], scores: &[f64]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &yi) in y.iter().enumerate() {
        if yi != 1 {
            continue;
        }
        for (j, &yj) in y.iter().enumerate() {
            if yj != 0 {
                continue;
            }
            pairs += 1.0;
            if scores[i] > scores[j] {
                wins += 1.0;
            } else if scores[i] == scores[j] {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}
