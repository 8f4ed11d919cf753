use std::sync::Arc;

use rand::RngCore;

use crate::env::{Feedback, RankedList};
use crate::linear::features::FeatureMatrix;
use crate::linear::gram::GramState;
use crate::linear::matrix::dot;
use crate::policies::{rank_top_k, Policy};
use crate::rng;

pub const DEFAULT_SIGMA: f64 = 0.1;
pub const DEFAULT_DELTA: f64 = 0.1;

/// CascadeLinUCB: `min{1, x^T psi + sigma sqrt(x^T M^-1 x) c_t}` with
/// `c_t = sqrt(d ln((1 + t) / delta))`.
#[derive(Debug, Clone)]
pub struct CascadeLinUcb {
    features: Arc<FeatureMatrix>,
    k: usize,
    sigma: f64,
    delta: f64,
    gram: GramState,
}

impl CascadeLinUcb {
    pub fn new(features: Arc<FeatureMatrix>, k: usize, sigma: f64, delta: f64) -> Self {
        assert!(k >= 1 && k <= features.l(), "need 1 <= K <= L");
        assert!(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
        let gram = GramState::new(features.d());
        Self {
            features,
            k,
            sigma,
            delta,
            gram,
        }
    }

    pub fn gram_mut(&mut self) -> &mut GramState {
        &mut self.gram
    }

    pub fn confidence_radius(&self, t: u64) -> f64 {
        (self.gram.d() as f64 * ((1.0 + t as f64) / self.delta).ln()).sqrt()
    }

    pub fn scores(&self, t: u64) -> Vec<f64> {
        let c = self.confidence_radius(t);
        let psi = self.gram.psi_hat();
        let m_inv = self.gram.m_inv();
        self.features
            .columns()
            .iter()
            .map(|x| {
                let width = m_inv.quad_form(x).max(0.0).sqrt();
                (dot(x, psi) + self.sigma * width * c).min(1.0)
            })
            .collect()
    }
}

impl Policy for CascadeLinUcb {
    fn name(&self) -> &str {
        "cascade-linucb"
    }

    fn select(&self, t: u64, _rng: &mut dyn RngCore) -> RankedList {
        rank_top_k(&self.scores(t), self.k)
    }

    fn update(&mut self, list: &RankedList, feedback: &Feedback) {
        for (i, w) in feedback.observations(list) {
            self.gram
                .observe(self.features.column(i), if w { 1.0 } else { 0.0 });
        }
    }

    fn reset(&mut self) {
        self.gram.reset();
    }
}

/// CascadeLinTS: score items by `x^T psi_tilde`, `psi_tilde ~ N(psi_hat, sigma^2 M^-1)`.
#[derive(Debug, Clone)]
pub struct CascadeLinTs {
    features: Arc<FeatureMatrix>,
    k: usize,
    sigma: f64,
    gram: GramState,
}

impl CascadeLinTs {
    pub fn new(features: Arc<FeatureMatrix>, k: usize, sigma: f64) -> Self {
        assert!(k >= 1 && k <= features.l(), "need 1 <= K <= L");
        let gram = GramState::new(features.d());
        Self {
            features,
            k,
            sigma,
            gram,
        }
    }

    pub fn gram_mut(&mut self) -> &mut GramState {
        &mut self.gram
    }

    pub fn sample_parameter(&self, xi: &[f64]) -> Vec<f64> {
        let mut psi = self.gram.psi_hat().to_vec();
        if self.sigma != 0.0 {
            let noise = self.gram.inverse_factor().matvec(xi);
            psi.iter_mut()
                .zip(noise)
                .for_each(|(p, n)| *p += self.sigma * n);
        }
        psi
    }
}

impl Policy for CascadeLinTs {
    fn name(&self) -> &str {
        "cascade-lints"
    }

    fn select(&self, _t: u64, rng: &mut dyn RngCore) -> RankedList {
        let xi: Vec<f64> = (0..self.gram.d())
            .map(|_| rng::standard_normal(rng))
            .collect();
        rank_top_k(&self.features.scores(&self.sample_parameter(&xi)), self.k)
    }

    fn update(&mut self, list: &RankedList, feedback: &Feedback) {
        for (i, w) in feedback.observations(list) {
            self.gram
                .observe(self.features.column(i), if w { 1.0 } else { 0.0 });
        }
    }

    fn reset(&mut self) {
        self.gram.reset();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn features(cols: Vec<Vec<f64>>) -> Arc<FeatureMatrix> {
        Arc::new(FeatureMatrix::from_columns(cols).unwrap())
    }

    #[test]
    fn linucb_fresh_state_ties() {
        // Equal column norms and psi = 0 give equal scores.
        let x = features(vec![
            vec![0.6, 0.0],
            vec![0.0, 0.6],
            vec![0.6 / 2f64.sqrt(); 2],
        ]);
        let p = CascadeLinUcb::new(x, 2, DEFAULT_SIGMA, DEFAULT_DELTA);
        let s = p.select(1, &mut rng::stream(0, &[]));
        assert_eq!(s.to_one_based(), vec![1, 2]);
    }

    #[test]
    fn linucb_bonus_shrinks_with_observations() {
        let x = features(vec![vec![0.5, 0.1], vec![0.1, 0.5]]);
        let mut p = CascadeLinUcb::new(x.clone(), 1, 1.0, 0.1);
        let mut prev = f64::INFINITY;
        for _ in 0..20 {
            let width = p.gram.m_inv().quad_form(x.column(0)).sqrt();
            assert!(width < prev);
            prev = width;
            p.gram_mut().observe(x.column(0), 0.0);
        }
    }

    #[test]
    fn linucb_scalar_reduction() {
        let x = features(vec![vec![0.4], vec![-0.2]]);
        let mut p = CascadeLinUcb::new(x, 1, 0.7, 0.2);
        p.gram_mut().observe(&[0.4], 1.0);
        p.gram_mut().observe(&[-0.2], 0.0);
        let m = p.gram.m()[(0, 0)];
        let psi = p.gram.psi_hat()[0];
        let t = 9;
        let c = (1.0 * ((1.0 + t as f64) / 0.2).ln()).sqrt();
        let scores = p.scores(t);
        for (s, x) in scores.iter().zip([0.4f64, -0.2]) {
            let expect = (psi * x + 0.7 * x.abs() * c / m.sqrt()).min(1.0);
            assert!((s - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn lints_baseline_zero_sigma_is_greedy() {
        let x = features(vec![vec![0.1, 0.2], vec![0.4, 0.0], vec![0.0, 0.3]]);
        let mut p = CascadeLinTs::new(x.clone(), 2, 0.0);
        p.update(
            &RankedList::new(vec![1, 2], 3).unwrap(),
            &Feedback::from_click(Some(2), 2).unwrap(),
        );
        let greedy = rank_top_k(&x.scores(p.gram.psi_hat()), 2);
        for t in 1..20 {
            assert_eq!(p.select(t, &mut rng::stream(t, &[])), greedy);
        }
    }

    #[test]
    fn lints_baseline_scalar_moments() {
        let x = features(vec![vec![0.5]]);
        let mut p = CascadeLinTs::new(x, 1, 0.3);
        p.gram_mut().observe(&[0.5], 1.0);
        let (m, psi) = (p.gram.m()[(0, 0)], p.gram.psi_hat()[0]);
        let mut r = rng::stream(61, &[]);
        let n = 200_000;
        let draws: Vec<f64> = (0..n)
            .map(|_| p.sample_parameter(&[rng::standard_normal(&mut r)])[0])
            .collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let expect_var = 0.09 / m;
        assert!((mean - psi).abs() < 4.0 * (expect_var / n as f64).sqrt());
        assert!((var - expect_var).abs() < 0.02 * expect_var);
    }

    #[test]
    fn lints_baseline_symmetric_features_rank_uniformly() {
        let x = features(vec![
            vec![0.5, 0.0],
            vec![0.0, 0.5],
            vec![-0.5, 0.0],
            vec![0.0, -0.5],
        ]);
        let p = CascadeLinTs::new(x, 1, 1.0);
        let mut r = rng::stream(62, &[]);
        let n = 40_000;
        let mut counts = [0usize; 4];
        for t in 1..=n {
            counts[p.select(t, &mut r).items()[0]] += 1;
        }
        let se = (0.25 * 0.75 / n as f64).sqrt();
        for c in counts {
            assert!((c as f64 / n as f64 - 0.25).abs() < 4.0 * se);
        }
    }
}
