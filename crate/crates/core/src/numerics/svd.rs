//! Thin singular value decomposition by one-sided (Hestenes) Jacobi rotations.
//!
//! Tall inputs are first reduced with a Householder QR so the Jacobi sweeps
//! run on the small square triangular factor; wide inputs are handled by
//! decomposing the transpose.

use super::matrix::Matrix;
use crate::error::{Error, Result};

/// Upper bound on Jacobi sweeps before reporting non-convergence.
pub const MAX_SWEEPS: usize = 60;

/// `a = u * diag(singular_values) * vt`, with `k = min(rows, cols)`.
#[derive(Debug, Clone)]
pub struct SvdResult {
    /// rows × k, orthonormal columns.
    pub u: Matrix,
    /// Non-increasing, non-negative, length k.
    pub singular_values: Vec<f64>,
    /// k × cols, orthonormal rows.
    pub vt: Matrix,
}

impl SvdResult {
    pub fn reconstruct(&self) -> Matrix {
        let mut us = self.u.clone();
        for i in 0..us.rows() {
            for (j, s) in self.singular_values.iter().enumerate() {
                us[(i, j)] *= s;
            }
        }
        us.matmul(&self.vt).expect("svd factors are conformable")
    }
}

pub fn svd(a: &Matrix) -> Result<SvdResult> {
    if a.is_empty() {
        return Err(Error::Validation(format!(
            "svd of an empty {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    if a.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::Validation("svd input contains non-finite values".into()));
    }
    if a.rows() >= a.cols() {
        svd_tall(a)
    } else {
        let t = svd_tall(&a.transpose())?;
        Ok(SvdResult {
            u: t.vt.transpose(),
            singular_values: t.singular_values,
            vt: t.u.transpose(),
        })
    }
}

/// Column-major scratch storage: `n` columns of length `len`.
struct Columns {
    len: usize,
    data: Vec<f64>,
}

impl Columns {
    fn from_matrix(a: &Matrix) -> Self {
        let (m, n) = a.shape();
        let mut data = vec![0.0; m * n];
        for i in 0..m {
            for (j, &v) in a.row(i).iter().enumerate() {
                data[j * m + i] = v;
            }
        }
        Self { len: m, data }
    }

    fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for j in 0..n {
            data[j * n + j] = 1.0;
        }
        Self { len: n, data }
    }

    fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.len..(j + 1) * self.len]
    }

    fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.len..(j + 1) * self.len]
    }

    /// Mutable access to columns `p < q` at once.
    fn pair_mut(&mut self, p: usize, q: usize) -> (&mut [f64], &mut [f64]) {
        debug_assert!(p < q);
        let (head, tail) = self.data.split_at_mut(q * self.len);
        (&mut head[p * self.len..(p + 1) * self.len], &mut tail[..self.len])
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Householder QR of a tall `m×n` matrix. Returns `(q, r)` with `q` as `n`
/// orthonormal columns of length `m` and `r` as `n×n` upper-triangular columns.
fn householder_qr(a: &Matrix) -> (Columns, Columns) {
    let (m, n) = a.shape();
    let mut work = Columns::from_matrix(a);
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(n);

    for k in 0..n {
        let x = &work.col(k)[k..];
        let norm = dot(x, x).sqrt();
        let mut v = x.to_vec();
        if norm == 0.0 {
            reflectors.push(Vec::new());
            continue;
        }
        let alpha = if x[0] >= 0.0 { -norm } else { norm };
        v[0] -= alpha;
        let vnorm = dot(&v, &v).sqrt();
        if vnorm == 0.0 {
            reflectors.push(Vec::new());
            continue;
        }
        v.iter_mut().for_each(|e| *e /= vnorm);
        for j in k..n {
            let col = &mut work.col_mut(j)[k..];
            let f = 2.0 * dot(&v, col);
            for (c, vi) in col.iter_mut().zip(&v) {
                *c -= f * vi;
            }
        }
        reflectors.push(v);
    }

    let mut r = Columns {
        len: n,
        data: vec![0.0; n * n],
    };
    for j in 0..n {
        let src = work.col(j);
        r.col_mut(j)[..=j].copy_from_slice(&src[..=j]);
    }

    let mut q = Columns {
        len: m,
        data: vec![0.0; m * n],
    };
    for j in 0..n {
        q.col_mut(j)[j] = 1.0;
    }
    for (k, v) in reflectors.iter().enumerate().rev() {
        if v.is_empty() {
            continue;
        }
        for j in 0..n {
            let col = &mut q.col_mut(j)[k..];
            let f = 2.0 * dot(v, col);
            for (c, vi) in col.iter_mut().zip(v) {
                *c -= f * vi;
            }
        }
    }
    (q, r)
}

/// One-sided Jacobi on the columns of `w` (square, n×n), accumulating the
/// right rotations into `v`. Returns the number of sweeps used.
fn jacobi_sweeps(w: &mut Columns, v: &mut Columns, n: usize, shape: (usize, usize)) -> Result<usize> {
    let tol = f64::EPSILON * (w.len as f64).sqrt();
    for sweep in 1..=MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (wp, wq) = w.pair_mut(p, q);
                let alpha = dot(wp, wp);
                let beta = dot(wq, wq);
                let gamma = dot(wp, wq);
                if alpha == 0.0 || beta == 0.0 || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta.abs() > 1e150 {
                    0.5 / zeta
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(wp, wq, c, s);
                let (vp, vq) = v.pair_mut(p, q);
                rotate(vp, vq, c, s);
            }
        }
        if !rotated {
            return Ok(sweep);
        }
    }
    Err(Error::Numeric(format!(
        "Jacobi SVD of a {}x{} matrix did not converge within {MAX_SWEEPS} sweeps",
        shape.0, shape.1
    )))
}

fn rotate(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let xa = *a;
        let yb = *b;
        *a = c * xa - s * yb;
        *b = s * xa + c * yb;
    }
}

/// Removes from `x` its components along the given unit columns of `u`,
/// twice, which keeps the result orthogonal to working precision.
fn orthogonalize(x: &mut [f64], u: &Columns, against: &[usize]) {
    for _ in 0..2 {
        for &k in against {
            let col = u.col(k);
            let proj = dot(col, x);
            for (c, e) in x.iter_mut().zip(col) {
                *c -= proj * e;
            }
        }
    }
}

/// Re-orthonormalizes the `kept` columns of `u` in order, each against the
/// ones before it. Columns computed from tiny singular values carry
/// direction errors of order eps·σ_max/σ; this repairs them. Columns that
/// collapse are returned so they can be replaced.
fn reorthonormalize(u: &mut Columns, kept: &[usize]) -> Vec<usize> {
    let mut done = Vec::with_capacity(kept.len());
    let mut collapsed = Vec::new();
    for &j in kept {
        let mut x = u.col(j).to_vec();
        orthogonalize(&mut x, u, &done);
        let norm = dot(&x, &x).sqrt();
        if norm > 0.5 {
            x.iter_mut().for_each(|c| *c /= norm);
            u.col_mut(j).copy_from_slice(&x);
            done.push(j);
        } else {
            collapsed.push(j);
        }
    }
    collapsed
}

/// Replaces the listed columns of `u` by unit vectors orthogonal to every
/// other column. Each step takes the standard basis vector with the largest
/// component outside the current span, which is never below
/// √(remaining dimensions / len), so the completion cannot stall.
fn complete_orthonormal(u: &mut Columns, missing: &[usize], n_cols: usize) {
    let len = u.len;
    let mut accepted: Vec<usize> = (0..n_cols).filter(|j| !missing.contains(j)).collect();
    // column b holds e_b minus its projection onto the accepted span
    let mut residual = Columns::identity(len);
    let deflate = |residual: &mut Columns, dir: &[f64]| {
        for b in 0..len {
            let col = residual.col_mut(b);
            let proj = dot(dir, col);
            for (c, e) in col.iter_mut().zip(dir) {
                *c -= proj * e;
            }
        }
    };
    for &k in &accepted {
        deflate(&mut residual, u.col(k));
    }
    for &j in missing {
        let mut best = (0, -1.0);
        for b in 0..len {
            let r = residual.col(b);
            let n2 = dot(r, r);
            if n2 > best.1 {
                best = (b, n2);
            }
        }
        let mut cand = vec![0.0; len];
        cand[best.0] = 1.0;
        orthogonalize(&mut cand, u, &accepted);
        let norm = dot(&cand, &cand).sqrt();
        debug_assert!(norm > 0.0, "orthonormal completion found no direction");
        cand.iter_mut().for_each(|c| *c /= norm);
        u.col_mut(j).copy_from_slice(&cand);
        deflate(&mut residual, &cand);
        accepted.push(j);
    }
}

fn svd_tall(a: &Matrix) -> Result<SvdResult> {
    let (m, n) = a.shape();
    let (q, mut w) = if m > n {
        let (q, r) = householder_qr(a);
        (Some(q), r)
    } else {
        (None, Columns::from_matrix(a))
    };
    let mut v = Columns::identity(n);
    jacobi_sweeps(&mut w, &mut v, n, (m, n))?;

    let norms: Vec<f64> = (0..n).map(|j| dot(w.col(j), w.col(j)).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]).then(x.cmp(&y)));

    let sigma_max = norms[order[0]];
    let negligible = sigma_max * f64::EPSILON * n as f64;

    // Left vectors of the square factor, in sorted order.
    let mut u_small = Columns {
        len: n,
        data: vec![0.0; n * n],
    };
    let mut missing = Vec::new();
    let mut singular_values = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        let s = norms[src];
        singular_values.push(s);
        if s == 0.0 || s <= negligible {
            missing.push(dst);
        } else {
            for (o, x) in u_small.col_mut(dst).iter_mut().zip(w.col(src)) {
                *o = x / s;
            }
        }
    }
    let kept: Vec<usize> = (0..n).filter(|j| !missing.contains(j)).collect();
    missing.extend(reorthonormalize(&mut u_small, &kept));
    if !missing.is_empty() {
        missing.sort_unstable();
        complete_orthonormal(&mut u_small, &missing, n);
    }

    let mut u = Matrix::zeros(m, n);
    match &q {
        Some(q) => {
            for j in 0..n {
                let coeffs = u_small.col(j);
                for (k, &c) in coeffs.iter().enumerate() {
                    if c == 0.0 {
                        continue;
                    }
                    for (i, &qik) in q.col(k).iter().enumerate() {
                        u[(i, j)] += qik * c;
                    }
                }
            }
        }
        None => {
            for j in 0..n {
                for (i, &x) in u_small.col(j).iter().enumerate() {
                    u[(i, j)] = x;
                }
            }
        }
    }

    let mut vt = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vt.row_mut(dst).copy_from_slice(v.col(src));
    }

    Ok(SvdResult {
        u,
        singular_values,
        vt,
    })
}
