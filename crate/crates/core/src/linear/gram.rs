//! Regularized Gram matrix `M = I + sum x x^T` with an incrementally
//! maintained inverse.

use crate::linear::matrix::{dot, Matrix};

/// Full re-inversion period for the Sherman–Morrison recursion.
pub const REFACTOR_INTERVAL: usize = 1024;

#[derive(Debug, Clone)]
pub struct GramState {
    m: Matrix,
    m_inv: Matrix,
    b: Vec<f64>,
    psi_hat: Vec<f64>,
    updates_since_refactor: usize,
    refactor_interval: Option<usize>,
}

impl GramState {
    pub fn new(d: usize) -> Self {
        Self::with_refactor_interval(d, Some(REFACTOR_INTERVAL))
    }

    /// `None` disables periodic re-inversion.
    pub fn with_refactor_interval(d: usize, interval: Option<usize>) -> Self {
        Self {
            m: Matrix::identity(d),
            m_inv: Matrix::identity(d),
            b: vec![0.0; d],
            psi_hat: vec![0.0; d],
            updates_since_refactor: 0,
            refactor_interval: interval,
        }
    }

    pub fn d(&self) -> usize {
        self.b.len()
    }

    pub fn m(&self) -> &Matrix {
        &self.m
    }

    pub fn m_inv(&self) -> &Matrix {
        &self.m_inv
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// Ridge estimate `M^-1 b`.
    pub fn psi_hat(&self) -> &[f64] {
        &self.psi_hat
    }

    /// `M += x x^T`, `b += w x`, then refreshes `M^-1` and `psi_hat`.
    pub fn observe(&mut self, x: &[f64], w: f64) {
        self.m.rank_one_update(1.0, x, x);
        for (bi, xi) in self.b.iter_mut().zip(x) {
            *bi += w * xi;
        }
        let mx = self.m_inv.matvec(x);
        let denom = 1.0 + dot(x, &mx);
        self.m_inv.rank_one_update(-1.0 / denom, &mx, &mx);
        self.updates_since_refactor += 1;
        if self
            .refactor_interval
            .is_some_and(|n| self.updates_since_refactor >= n)
        {
            self.refactor();
        }
        self.psi_hat = self.m_inv.matvec(&self.b);
    }

    /// Recomputes `M^-1` from `M` directly.
    pub fn refactor(&mut self) {
        self.m_inv = self
            .m
            .spd_inverse()
            .expect("Gram matrix is I + PSD and therefore positive definite");
        self.updates_since_refactor = 0;
    }

    /// Lower-triangular `F` with `F F^T = M^-1`.
    ///
    /// Panics with a diagnostic if `M^-1` has lost positive definiteness.
    pub fn inverse_factor(&self) -> Matrix {
        match self.m_inv.cholesky() {
            Ok(f) => f,
            Err(e) => panic!(
                "Gram inverse lost positive definiteness: {e}; M = {:?}",
                self.m
            ),
        }
    }

    pub fn reset(&mut self) {
        *self = Self::with_refactor_interval(self.d(), self.refactor_interval);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn scalar_update_example() {
        let mut g = GramState::new(1);
        g.observe(&[0.5], 1.0);
        assert!((g.m()[(0, 0)] - 1.25).abs() < 1e-15);
        assert!((g.b()[0] - 0.5).abs() < 1e-15);
        assert!((g.psi_hat()[0] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn repeated_direction_adds_up() {
        let mut g = GramState::new(2);
        g.observe(&[0.3, 0.4], 0.0);
        g.observe(&[0.3, 0.4], 1.0);
        let mut expect = Matrix::identity(2);
        expect.rank_one_update(2.0, &[0.3, 0.4], &[0.3, 0.4]);
        assert!(g.m().sub(&expect).max_abs() < 1e-15);
    }

    #[test]
    fn sherman_morrison_tracks_direct_inverse() {
        for d in [1usize, 3, 8] {
            let mut g = GramState::with_refactor_interval(d, None);
            let mut r = rng::stream(51, &[d as u64]);
            for _ in 0..10_000 {
                let x: Vec<f64> = (0..d)
                    .map(|_| (rng::uniform(&mut r) - 0.5) / (d as f64).sqrt())
                    .collect();
                g.observe(
                    &x,
                    if rng::bernoulli(&mut r, 0.3) {
                        1.0
                    } else {
                        0.0
                    },
                );
            }
            let direct = g.m().spd_inverse().unwrap();
            let err = g.m_inv().sub(&direct).max_abs();
            assert!(err < 1e-10, "d={d}: {err}");
        }
    }

    #[test]
    fn inverse_factor_reproduces_inverse() {
        let mut g = GramState::new(3);
        g.observe(&[0.2, 0.1, 0.4], 1.0);
        g.observe(&[0.5, -0.1, 0.0], 0.0);
        let f = g.inverse_factor();
        assert!(f.matmul(&f.transpose()).sub(g.m_inv()).max_abs() < 1e-14);
    }
}
