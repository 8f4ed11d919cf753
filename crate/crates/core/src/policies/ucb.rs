use rand::RngCore;

use super::{rank_top_k, EmpiricalMeans, Policy};
use crate::env::{Feedback, RankedList};
use crate::lowerbound::bernoulli_kl;

/// `w_hat + sqrt(1.5 ln t / N)`, infinite for unobserved items.
pub fn ucb1_index(w_hat: f64, n: u64, t: u64) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    w_hat + (1.5 * (t as f64).ln() / n as f64).sqrt()
}

/// Exploration budget `ln t + 3 ln ln t`, clamped at zero; zero for `t < 2`.
pub fn klucb_budget(t: u64) -> f64 {
    if t < 2 {
        return 0.0;
    }
    let lt = (t as f64).ln();
    (lt + 3.0 * lt.ln()).max(0.0)
}

/// Largest `q` in `[w_hat, 1]` with `N * KL(w_hat, q) <= budget`.
///
/// The returned `q` always satisfies the constraint; bisection stops once the
/// bracket is narrower than 1e-12.
pub fn kl_ucb_index(w_hat: f64, n: u64, budget: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let limit = budget / n as f64;
    if limit <= 0.0 {
        return w_hat;
    }
    if bernoulli_kl(w_hat, 1.0) <= limit {
        return 1.0;
    }
    let (mut lo, mut hi) = (w_hat, 1.0);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if bernoulli_kl(w_hat, mid) <= limit {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// CascadeUCB1 baseline.
#[derive(Debug, Clone)]
pub struct CascadeUcb1 {
    k: usize,
    stats: EmpiricalMeans,
}

impl CascadeUcb1 {
    pub fn new(l: usize, k: usize) -> Self {
        assert!(k >= 1 && k <= l, "need 1 <= K <= L");
        Self {
            k,
            stats: EmpiricalMeans::new(l),
        }
    }

    pub fn stats_mut(&mut self) -> &mut EmpiricalMeans {
        &mut self.stats
    }

    pub fn indices(&self, t: u64) -> Vec<f64> {
        self.stats
            .w_hat
            .iter()
            .zip(&self.stats.n)
            .map(|(&w, &n)| ucb1_index(w, n, t))
            .collect()
    }
}

impl Policy for CascadeUcb1 {
    fn name(&self) -> &str {
        "cascade-ucb1"
    }

    fn select(&self, t: u64, _rng: &mut dyn RngCore) -> RankedList {
        rank_top_k(&self.indices(t), self.k)
    }

    fn update(&mut self, list: &RankedList, feedback: &Feedback) {
        self.stats.update(list, feedback);
    }

    fn reset(&mut self) {
        self.stats.reset();
    }
}

/// CascadeKL-UCB baseline.
#[derive(Debug, Clone)]
pub struct CascadeKlUcb {
    k: usize,
    stats: EmpiricalMeans,
}

impl CascadeKlUcb {
    pub fn new(l: usize, k: usize) -> Self {
        assert!(k >= 1 && k <= l, "need 1 <= K <= L");
        Self {
            k,
            stats: EmpiricalMeans::new(l),
        }
    }

    pub fn stats_mut(&mut self) -> &mut EmpiricalMeans {
        &mut self.stats
    }

    pub fn indices(&self, t: u64) -> Vec<f64> {
        let budget = klucb_budget(t);
        self.stats
            .w_hat
            .iter()
            .zip(&self.stats.n)
            .map(|(&w, &n)| kl_ucb_index(w, n, budget))
            .collect()
    }
}

impl Policy for CascadeKlUcb {
    fn name(&self) -> &str {
        "cascade-klucb"
    }

    fn select(&self, t: u64, _rng: &mut dyn RngCore) -> RankedList {
        rank_top_k(&self.indices(t), self.k)
    }

    fn update(&mut self, list: &RankedList, feedback: &Feedback) {
        self.stats.update(list, feedback);
    }

    fn reset(&mut self) {
        self.stats.reset();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn ucb1_examples() {
        assert_abs_diff_eq!(ucb1_index(0.5, 6, 1), 0.5, epsilon = 1e-15);
        // ln t = 1.
        let t_e = std::f64::consts::E;
        let u = 0.5 + (1.5 * t_e.ln() / 6.0).sqrt();
        assert_abs_diff_eq!(u, 1.0, epsilon = 1e-15);
        assert_eq!(ucb1_index(0.9, 0, 10), f64::INFINITY);
    }

    #[test]
    fn ucb1_explores_unseen_items_first() {
        let mut p = CascadeUcb1::new(4, 2);
        p.stats.w_hat = vec![0.9, 0.8, 0.0, 0.0];
        p.stats.n = vec![10, 10, 0, 3];
        let s = p.select(20, &mut rng::stream(0, &[]));
        assert_eq!(s.items()[0], 2);
    }

    #[test]
    fn ucb1_ties_go_to_lowest_index() {
        let mut p = CascadeUcb1::new(5, 3);
        p.stats.w_hat = vec![0.3; 5];
        p.stats.n = vec![4; 5];
        assert_eq!(
            p.select(9, &mut rng::stream(0, &[])).to_one_based(),
            vec![1, 2, 3]
        );
    }

    #[test]
    fn klucb_examples() {
        // KL(0, q) = -ln(1 - q), so q = 1 - exp(-budget / N).
        let q = kl_ucb_index(0.0, 4, 2.0);
        assert_abs_diff_eq!(q, 1.0 - (-0.5f64).exp(), epsilon = 1e-9);
        assert_eq!(kl_ucb_index(0.37, 9, 0.0), 0.37);
        assert_eq!(kl_ucb_index(0.37, 0, 5.0), 1.0);
        assert_eq!(klucb_budget(1), 0.0);
        let lt = 100f64.ln();
        assert_abs_diff_eq!(klucb_budget(100), lt + 3.0 * lt.ln(), epsilon = 1e-15);
    }

    #[test]
    fn klucb_budget_clamped_near_two() {
        // ln ln 2 < 0 and ln 2 + 3 ln ln 2 < 0.
        assert_eq!(klucb_budget(2), 0.0);
        assert!(klucb_budget(3) >= 0.0);
    }

    proptest! {
        #[test]
        fn klucb_bisection_is_tight(w in 0.0f64..1.0, n in 1u64..10_000, t in 2u64..1_000_000) {
            let budget = klucb_budget(t);
            let q = kl_ucb_index(w, n, budget);
            prop_assert!(q >= w && q <= 1.0);
            let used = n as f64 * bernoulli_kl(w, q);
            prop_assert!(used <= budget + 1e-12);
            // The root is bracketed to within the bisection tolerance.
            if q < 1.0 {
                let above = n as f64 * bernoulli_kl(w, (q + 2e-12).min(1.0));
                prop_assert!(above > budget, "used {} above {} budget {}", used, above, budget);
            }
        }
    }
}
