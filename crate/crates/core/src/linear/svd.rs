//! Truncated SVD by one-sided (Hestenes) Jacobi rotations.
//!
//! The rotations run on whichever of `A` or `A^T` has fewer columns, so the
//! cost per sweep is `O(min(m, n)^2 max(m, n))`.

use crate::error::{structural, Error, Result};
use crate::linear::matrix::{dot, norm, Matrix};

/// Rank-`d` factorization `A ~ U diag(S) V^T`.
#[derive(Debug, Clone)]
pub struct SvdResult {
    /// `m x d`, orthonormal columns.
    pub u: Matrix,
    /// Descending, non-negative.
    pub s: Vec<f64>,
    /// `n x d`, orthonormal columns.
    pub v: Matrix,
}

impl SvdResult {
    pub fn rank(&self) -> usize {
        self.s.len()
    }

    pub fn reconstruct(&self) -> Matrix {
        let (m, n, d) = (self.u.rows(), self.v.rows(), self.s.len());
        Matrix::from_fn(m, n, |i, j| {
            (0..d)
                .map(|k| self.u[(i, k)] * self.s[k] * self.v[(j, k)])
                .sum()
        })
    }
}

const MAX_SWEEPS: usize = 80;

/// Top-`d` singular triplets of `a`.
///
/// Each right-singular vector is sign-normalized so that its largest-magnitude
/// entry is positive.
pub fn truncated_svd(a: &Matrix, d: usize) -> Result<SvdResult> {
    let (m, n) = (a.rows(), a.cols());
    if d == 0 || d > m.min(n) {
        return Err(structural(format!(
            "rank {d} outside 1..={} for a {m}x{n} matrix",
            m.min(n)
        )));
    }
    let transposed = m < n;
    let b = if transposed { a.transpose() } else { a.clone() };
    let (left, sigma, right) = jacobi_svd(&b)?;
    let (mut u_cols, mut v_cols) = if transposed {
        (right, left)
    } else {
        (left, right)
    };
    let (mut u_full, mut v_full) = (Vec::with_capacity(d), Vec::with_capacity(d));
    for k in 0..d {
        u_full.push(std::mem::take(&mut u_cols[k]));
        v_full.push(std::mem::take(&mut v_cols[k]));
    }
    let s = sigma[..d].to_vec();
    // Columns attached to (numerically) zero singular values carry no
    // information; replace them with an orthonormal completion.
    complete_orthonormal(&mut u_full, m);
    complete_orthonormal(&mut v_full, n);
    for k in 0..d {
        let pivot =
            v_full[k].iter().copied().fold(
                0.0f64,
                |best, x| if x.abs() > best.abs() { x } else { best },
            );
        if pivot < 0.0 {
            v_full[k].iter_mut().for_each(|x| *x = -*x);
            u_full[k].iter_mut().for_each(|x| *x = -*x);
        }
    }
    Ok(SvdResult {
        u: Matrix::from_fn(m, d, |i, k| u_full[k][i]),
        s,
        v: Matrix::from_fn(n, d, |i, k| v_full[k][i]),
    })
}

type Columns = Vec<Vec<f64>>;

/// Full thin SVD of `b` (`rows >= cols`): returns left vectors, singular
/// values and right vectors, all sorted by descending singular value.
fn jacobi_svd(b: &Matrix) -> Result<(Columns, Vec<f64>, Columns)> {
    let (rows, p) = (b.rows(), b.cols());
    let mut cols: Columns = (0..p).map(|j| b.column(j)).collect();
    let mut v: Columns = (0..p)
        .map(|j| {
            let mut e = vec![0.0; p];
            e[j] = 1.0;
            e
        })
        .collect();
    let scale = b.frobenius_norm();
    // Columns this small are zero for all practical purposes.
    let floor = (f64::EPSILON * scale).powi(2) * rows as f64;
    let tol = f64::EPSILON * rows.max(16) as f64;

    let mut converged = false;
    let mut worst = 0.0;
    for _ in 0..MAX_SWEEPS {
        worst = 0.0f64;
        let mut rotated = false;
        for i in 0..p {
            for j in i + 1..p {
                let alpha = dot(&cols[i], &cols[i]);
                let beta = dot(&cols[j], &cols[j]);
                if alpha <= floor || beta <= floor {
                    continue;
                }
                let gamma = dot(&cols[i], &cols[j]);
                let off = gamma.abs() / (alpha * beta).sqrt();
                worst = worst.max(off);
                if off <= tol {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, i, j, c, s);
                rotate(&mut v, i, j, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            routine: "one-sided Jacobi SVD",
            iterations: MAX_SWEEPS,
            residual: worst,
        });
    }

    let sigma: Vec<f64> = cols.iter().map(|c| norm(c)).collect();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]).then(a.cmp(&b)));

    let mut left = Vec::with_capacity(p);
    let mut right = Vec::with_capacity(p);
    let mut values = Vec::with_capacity(p);
    for &k in &order {
        let sk = sigma[k];
        if sk * sk > floor {
            left.push(cols[k].iter().map(|x| x / sk).collect());
        } else {
            left.push(Vec::new());
        }
        right.push(v[k].clone());
        values.push(if sk * sk > floor { sk } else { 0.0 });
    }
    Ok((left, values, right))
}

fn rotate(cols: &mut Columns, i: usize, j: usize, c: f64, s: f64) {
    let (head, tail) = cols.split_at_mut(j);
    let (a, b) = (&mut head[i], &mut tail[0]);
    for (x, y) in a.iter_mut().zip(b.iter_mut()) {
        let (xi, yj) = (*x, *y);
        *x = c * xi - s * yj;
        *y = s * xi + c * yj;
    }
}

/// Fills empty entries of `cols` with unit vectors orthogonal to the rest.
fn complete_orthonormal(cols: &mut Columns, dim: usize) {
    let mut next_basis = 0;
    for k in 0..cols.len() {
        if !cols[k].is_empty() {
            continue;
        }
        loop {
            assert!(next_basis < dim, "ran out of basis vectors");
            let mut e = vec![0.0; dim];
            e[next_basis] = 1.0;
            next_basis += 1;
            for _ in 0..2 {
                for other in cols.iter().filter(|c| !c.is_empty()) {
                    let proj = dot(&e, other);
                    e.iter_mut().zip(other).for_each(|(x, o)| *x -= proj * o);
                }
            }
            let nrm = norm(&e);
            if nrm > 1e-6 {
                e.iter_mut().for_each(|x| *x /= nrm);
                cols[k] = e;
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn gram_error(q: &Matrix) -> f64 {
        q.transpose()
            .matmul(q)
            .sub(&Matrix::identity(q.cols()))
            .max_abs()
    }

    #[test]
    fn identity_has_unit_singular_values() {
        let svd = truncated_svd(&Matrix::identity(3), 3).unwrap();
        for s in &svd.s {
            assert!((s - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn rank_one_outer_product() {
        let u = [1.0, -2.0, 0.5, 3.0];
        let v = [0.3, 0.4, -1.2];
        let a = Matrix::from_fn(4, 3, |i, j| u[i] * v[j]);
        let svd = truncated_svd(&a, 1).unwrap();
        assert!((svd.s[0] - norm(&u) * norm(&v)).abs() < 1e-12);
        assert!(svd.reconstruct().sub(&a).frobenius_norm() < 1e-12);
    }

    #[test]
    fn wide_and_tall_agree() {
        let mut r = rng::stream(41, &[]);
        let a = Matrix::from_fn(7, 12, |_, _| rng::uniform(&mut r) - 0.5);
        let wide = truncated_svd(&a, 4).unwrap();
        let tall = truncated_svd(&a.transpose(), 4).unwrap();
        for (x, y) in wide.s.iter().zip(&tall.s) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!(gram_error(&wide.u) < 1e-12 && gram_error(&wide.v) < 1e-12);
    }

    #[test]
    fn error_non_increasing_in_rank() {
        let mut r = rng::stream(42, &[]);
        let a = Matrix::from_fn(10, 6, |_, _| rng::uniform(&mut r));
        let mut prev = f64::INFINITY;
        for d in 1..=6 {
            let err = truncated_svd(&a, d)
                .unwrap()
                .reconstruct()
                .sub(&a)
                .frobenius_norm();
            assert!(err <= prev + 1e-12);
            prev = err;
        }
        assert!(prev < 1e-12);
    }

    #[test]
    fn rank_deficient_columns_stay_orthonormal() {
        // Rank 2 but asking for 4 triplets.
        let a = Matrix::from_fn(6, 5, |i, j| ((i + 1) * (j % 2 + 1)) as f64 + (i * j) as f64);
        let svd = truncated_svd(&a, 4).unwrap();
        assert!(svd.s[2] < 1e-10 && svd.s[3] < 1e-10);
        assert!(gram_error(&svd.u) < 1e-10, "{}", gram_error(&svd.u));
        assert!(gram_error(&svd.v) < 1e-10);
        assert!(svd.reconstruct().sub(&a).frobenius_norm() < 1e-10);
    }

    #[test]
    fn rank_out_of_range() {
        assert!(truncated_svd(&Matrix::identity(3), 0).is_err());
        assert!(truncated_svd(&Matrix::identity(3), 4).is_err());
    }
}
