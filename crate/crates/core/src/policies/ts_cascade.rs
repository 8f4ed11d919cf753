use rand::RngCore;

use super::{rank_top_k, EmpiricalMeans, Policy};
use crate::env::{Feedback, RankedList};
use crate::rng;

/// Gaussian Thompson sampling with one shared normal draw per round.
///
/// Every item's sample is `w_hat(i) + Z_t * sigma_t(i)` with the same `Z_t`,
/// and `sigma_t` mixes an empirical-variance term with a `log(t+1)/(N+1)`
/// floor that keeps exploring items whose mean sits at 0 or 1.
#[derive(Debug, Clone)]
pub struct TsCascade {
    k: usize,
    stats: EmpiricalMeans,
}

/// `sigma_t(i) = max{ sqrt(nu log(t+1) / (N+1)), log(t+1) / (N+1) }` with
/// `nu = w_hat (1 - w_hat)`.
pub fn ts_sigma(w_hat: f64, n: u64, t: u64) -> f64 {
    let log_t = ((t + 1) as f64).ln();
    let denom = n as f64 + 1.0;
    let nu = w_hat * (1.0 - w_hat);
    (nu * log_t / denom).sqrt().max(log_t / denom)
}

impl TsCascade {
    pub fn new(l: usize, k: usize) -> Self {
        assert!(k >= 1 && k <= l, "need 1 <= K <= L");
        Self {
            k,
            stats: EmpiricalMeans::new(l),
        }
    }

    pub fn stats(&self) -> &EmpiricalMeans {
        &self.stats
    }

    pub fn stats_mut(&mut self) -> &mut EmpiricalMeans {
        &mut self.stats
    }

    /// Thompson samples `theta_t(i)` for a given shared draw `z`.
    pub fn samples(&self, t: u64, z: f64) -> Vec<f64> {
        self.stats
            .w_hat
            .iter()
            .zip(&self.stats.n)
            .map(|(&w, &n)| w + z * ts_sigma(w, n, t))
            .collect()
    }

    /// Selection with the normal draw supplied by the caller.
    pub fn select_with_draw(&self, t: u64, z: f64) -> RankedList {
        rank_top_k(&self.samples(t, z), self.k)
    }
}

impl Policy for TsCascade {
    fn name(&self) -> &str {
        "ts-cascade"
    }

    fn select(&self, t: u64, rng: &mut dyn RngCore) -> RankedList {
        let z = rng::standard_normal(rng);
        self.select_with_draw(t, z)
    }

    fn update(&mut self, list: &RankedList, feedback: &Feedback) {
        self.stats.update(list, feedback);
    }

    fn reset(&mut self) {
        self.stats.reset();
    }
}
