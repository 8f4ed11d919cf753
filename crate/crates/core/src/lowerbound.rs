//! Minimax lower-bound machinery: the circularly shifted hard-instance
//! family, its per-list gap bound, Bernoulli KL utilities and the numeric
//! evaluation of the final bound.

use rand::RngCore;
use serde::Serialize;

use crate::env::{reward_unchecked, ProblemInstance, RankedList};
use crate::error::{structural, Error, Result};
use crate::rng;

/// `KL(Bern(a) || Bern(b))`, using `0 ln 0 = 0`.
///
/// Returns `+inf` when `b` is 0 or 1 and differs from `a`.
pub fn bernoulli_kl(a: f64, b: f64) -> f64 {
    fn term(p: f64, q: f64) -> f64 {
        if p == 0.0 {
            0.0
        } else if q == 0.0 {
            f64::INFINITY
        } else {
            p * (p / q).ln()
        }
    }
    (term(a, b) + term(1.0 - a, 1.0 - b)).max(0.0)
}

/// The `L + 1` instances: instance 0 puts every item at `(1-eps)/K`;
/// instance `ell` lifts the circular block `ell, ..., ell+K-1` to `(1+eps)/K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HardInstanceFamily {
    l: usize,
    k: usize,
    epsilon: f64,
}

impl HardInstanceFamily {
    /// Requires `0 < (1-eps)/K < (1+eps)/K < 1/4` and `K <= L`.
    pub fn new(l: usize, k: usize, epsilon: f64) -> Result<Self> {
        if k == 0 || k > l {
            return Err(structural(format!("need 1 <= K <= L, got K={k}, L={l}")));
        }
        let kf = k as f64;
        let (lo, hi) = ((1.0 - epsilon) / kf, (1.0 + epsilon) / kf);
        if !(0.0 < lo && lo < hi && hi < 0.25) {
            return Err(structural(format!(
                "eps={epsilon} with K={k} violates 0 < (1-eps)/K < (1+eps)/K < 1/4"
            )));
        }
        Ok(Self { l, k, epsilon })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn low(&self) -> f64 {
        (1.0 - self.epsilon) / self.k as f64
    }

    pub fn high(&self) -> f64 {
        (1.0 + self.epsilon) / self.k as f64
    }

    /// 0-based items of the lifted block under instance `ell >= 1`.
    pub fn hot_items(&self, ell: usize) -> Vec<usize> {
        debug_assert!(ell >= 1 && ell <= self.l);
        (0..self.k).map(|j| (ell - 1 + j) % self.l).collect()
    }

    /// Click probabilities `w^(ell)`.
    pub fn weights_for(&self, ell: usize) -> Result<Vec<f64>> {
        if ell > self.l {
            return Err(structural(format!("instance {ell} not in 0..={}", self.l)));
        }
        let mut w = vec![self.low(); self.l];
        if ell >= 1 {
            for i in self.hot_items(ell) {
                w[i] = self.high();
            }
        }
        Ok(w)
    }

    pub fn instance(&self, ell: usize) -> Result<ProblemInstance> {
        ProblemInstance::new(self.weights_for(ell)?, self.k)
    }

    /// `2 Q eps / (e^4 K)` with `Q = |S \ S*_ell|`.
    pub fn gap_lower_bound(&self, list: &RankedList, ell: usize) -> f64 {
        let hot = self.hot_items(ell);
        let q = list.items().iter().filter(|i| !hot.contains(i)).count();
        2.0 * q as f64 * self.epsilon / (4f64.exp() * self.k as f64)
    }

    /// Exact `r(S*_ell | w^(ell)) - r(S | w^(ell))`.
    pub fn exact_gap(&self, list: &RankedList, ell: usize) -> f64 {
        let w = self.weights_for(ell).expect("ell validated by caller");
        let best = 1.0 - (1.0 - self.high()).powi(self.k as i32);
        best - reward_unchecked(list.items(), &w)
    }

    /// `(K/L) [ (1-eps) ln((1-eps)/(1+eps)) + (K-1+eps) ln((K-1+eps)/(K-1-eps)) ]`.
    pub fn kl_budget(&self) -> f64 {
        kl_budget(self.l, self.k, self.epsilon)
    }
}

/// Closed-form per-step KL budget; `O(eps^2)` as `eps -> 0`.
pub fn kl_budget(l: usize, k: usize, epsilon: f64) -> f64 {
    let km1 = k as f64 - 1.0;
    let a = (1.0 - epsilon) * ((1.0 - epsilon) / (1.0 + epsilon)).ln();
    let b = (km1 + epsilon) * ((km1 + epsilon) / (km1 - epsilon)).ln();
    k as f64 / l as f64 * (a + b)
}

/// Outcome probabilities of one cascade over `list`: entry `j < K` is a click
/// at position `j + 1`, entry `K` is no click.
pub fn outcome_distribution(list: &RankedList, w: &[f64]) -> Vec<f64> {
    let mut p = Vec::with_capacity(list.len() + 1);
    let mut survive = 1.0;
    for &i in list.items() {
        p.push(survive * w[i]);
        survive *= 1.0 - w[i];
    }
    p.push(survive);
    p
}

/// KL between the cascade outcome laws of `list` under `w0` and `w1`.
pub fn outcome_kl(list: &RankedList, w0: &[f64], w1: &[f64]) -> f64 {
    let p = outcome_distribution(list, w0);
    let q = outcome_distribution(list, w1);
    p.iter()
        .zip(&q)
        .filter(|(&a, _)| a > 0.0)
        .map(|(&a, &b)| a * (a / b).ln())
        .sum()
}

/// Monte-Carlo estimate of [`outcome_kl`]: mean log-likelihood ratio of
/// cascades simulated under `w0`.
pub fn outcome_kl_monte_carlo<R: RngCore + ?Sized>(
    list: &RankedList,
    w0: &[f64],
    w1: &[f64],
    samples: usize,
    rng: &mut R,
) -> f64 {
    let p = outcome_distribution(list, w0);
    let q = outcome_distribution(list, w1);
    let k = list.len();
    let mut sum = 0.0;
    for _ in 0..samples {
        let pos = list
            .items()
            .iter()
            .position(|&i| rng::bernoulli(rng, w0[i]))
            .unwrap_or(k);
        sum += (p[pos] / q[pos]).ln();
    }
    sum / samples as f64
}

/// `(1/L) sum_ell KL(P_0(.|S) || P_ell(.|S))` for a fixed list.
pub fn average_outcome_kl(family: &HardInstanceFamily, list: &RankedList) -> f64 {
    let w0 = family.weights_for(0).expect("instance 0 exists");
    (1..=family.l())
        .map(|ell| outcome_kl(list, &w0, &family.weights_for(ell).expect("ell in range")))
        .sum::<f64>()
        / family.l() as f64
}

/// Evaluated minimax lower bound and the `eps` achieving it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinimaxBound {
    pub bound: f64,
    pub epsilon: f64,
    pub epsilon_max: f64,
}

/// Default grid resolution for [`minimax_bound`].
pub const EPSILON_GRID: usize = 10_000;

/// `(2 eps T / e^4)(1 - K/L - eps sqrt(T K / (2L)))`.
pub fn minimax_objective(l: usize, k: usize, t: u64, epsilon: f64) -> f64 {
    let (l, k, t) = (l as f64, k as f64, t as f64);
    2.0 * epsilon * t / 4f64.exp() * (1.0 - k / l - epsilon * (t * k / (2.0 * l)).sqrt())
}

/// Upper end of the admissible `eps` range: `min(1, K/4 - 1)`, exclusive.
pub fn admissible_epsilon_max(k: usize) -> f64 {
    (k as f64 / 4.0 - 1.0).min(1.0)
}

/// Maximizes [`minimax_objective`] over `grid` interior points of the
/// admissible range; a non-positive maximum is reported as 0.
pub fn minimax_bound_with_grid(l: usize, k: usize, t: u64, grid: usize) -> Result<MinimaxBound> {
    if k == 0 || k > l || grid == 0 {
        return Err(structural(format!(
            "need 1 <= K <= L and a non-empty grid, got K={k}, L={l}"
        )));
    }
    let eps_max = admissible_epsilon_max(k);
    if eps_max <= 0.0 {
        return Err(Error::Config(format!(
            "no admissible eps for K={k}: (1+eps)/K < 1/4 needs K >= 5"
        )));
    }
    let (mut best, mut arg) = (f64::NEG_INFINITY, 0.0);
    for j in 1..=grid {
        let eps = eps_max * j as f64 / (grid + 1) as f64;
        let v = minimax_objective(l, k, t, eps);
        if v > best {
            best = v;
            arg = eps;
        }
    }
    if best <= 0.0 {
        best = 0.0;
    }
    Ok(MinimaxBound {
        bound: best,
        epsilon: arg,
        epsilon_max: eps_max,
    })
}

pub fn minimax_bound(l: usize, k: usize, t: u64) -> Result<MinimaxBound> {
    minimax_bound_with_grid(l, k, t, EPSILON_GRID)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::for_each_ordered_subset;
    use approx::assert_abs_diff_eq;

    #[test]
    fn family_constraints() {
        assert!(HardInstanceFamily::new(10, 5, 0.05).is_ok());
        // K = 4 forces (1+eps)/4 >= 1/4.
        assert!(HardInstanceFamily::new(10, 4, 0.05).is_err());
        assert!(HardInstanceFamily::new(10, 5, 0.3).is_err());
        assert!(HardInstanceFamily::new(4, 5, 0.05).is_err());
    }

    #[test]
    fn weights_examples() {
        let fam = HardInstanceFamily::new(10, 5, 0.05).unwrap();
        for w in fam.weights_for(0).unwrap() {
            assert_abs_diff_eq!(w, 0.19, epsilon = 1e-15);
        }
        let w8 = fam.weights_for(8).unwrap();
        for (i, w) in w8.iter().enumerate() {
            let item = i + 1;
            let expect = if [8, 9, 10, 1, 2].contains(&item) {
                0.21
            } else {
                0.19
            };
            assert_abs_diff_eq!(*w, expect, epsilon = 1e-15);
        }
        assert!(fam.weights_for(11).is_err());
    }

    #[test]
    fn uniform_cover_brute_force() {
        for l in 5..=32 {
            for k in 5..=l.min(12) {
                let fam = HardInstanceFamily::new(l, k, 0.01).unwrap();
                let mut count = vec![0; l];
                for ell in 1..=l {
                    let w = fam.weights_for(ell).unwrap();
                    for (i, &wi) in w.iter().enumerate() {
                        if wi > fam.low() {
                            count[i] += 1;
                        }
                    }
                }
                assert!(count.iter().all(|&c| c == k), "L={l} K={k}: {count:?}");
            }
        }
    }

    #[test]
    fn gap_bound_values() {
        let fam = HardInstanceFamily::new(10, 5, 0.05).unwrap();
        let opt = RankedList::new(fam.hot_items(3), 10).unwrap();
        assert_eq!(fam.gap_lower_bound(&opt, 3), 0.0);
        let one_off = RankedList::new(vec![2, 3, 4, 5, 9], 10).unwrap();
        assert_abs_diff_eq!(fam.gap_lower_bound(&one_off, 3), 3.663e-4, epsilon = 5e-8);
        assert_abs_diff_eq!(
            fam.gap_lower_bound(&one_off, 3),
            0.1 / (5.0 * 4f64.exp()),
            epsilon = 1e-18
        );
    }

    #[test]
    fn gap_bound_dominated_small_family() {
        let fam = HardInstanceFamily::new(7, 5, 0.2).unwrap();
        for ell in 1..=7 {
            for_each_ordered_subset(7, 5, |s| {
                let s = RankedList::new(s.to_vec(), 7).unwrap();
                assert!(fam.exact_gap(&s, ell) >= fam.gap_lower_bound(&s, ell));
            });
        }
    }

    #[test]
    fn bernoulli_kl_examples() {
        assert_eq!(bernoulli_kl(0.5, 0.5), 0.0);
        assert_abs_diff_eq!(bernoulli_kl(0.5, 0.25), 0.14384, epsilon = 1e-5);
        assert_abs_diff_eq!(
            bernoulli_kl(0.5, 0.25),
            0.5 * (4.0f64 / 3.0).ln(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(bernoulli_kl(0.0, 0.3), -(0.7f64).ln(), epsilon = 1e-15);
        assert_eq!(bernoulli_kl(0.3, 0.0), f64::INFINITY);
        assert_eq!(bernoulli_kl(0.3, 1.0), f64::INFINITY);
        assert_eq!(bernoulli_kl(1.0, 1.0), 0.0);
        assert!(bernoulli_kl(0.2, 0.6) != bernoulli_kl(0.6, 0.2));
    }

    #[test]
    fn pinsker_on_grid() {
        for i in 1..100 {
            for j in 1..100 {
                let (a, b) = (i as f64 / 100.0, j as f64 / 100.0);
                assert!((a - b).abs() <= (bernoulli_kl(a, b) / 2.0).sqrt() + 1e-12);
            }
        }
    }

    #[test]
    fn kl_budget_values() {
        assert_eq!(kl_budget(10, 5, 0.0), 0.0);
        let fam = HardInstanceFamily::new(10, 5, 0.05).unwrap();
        assert_abs_diff_eq!(fam.kl_budget(), 3.088e-3, epsilon = 5e-7);
        // Ratio to eps^2 approaches (K/L) 2K/(K-1) = 1.25 and settles.
        let limit = 0.5 * 10.0 / 4.0;
        let r3 = kl_budget(10, 5, 1e-3) / 1e-6;
        let r4 = kl_budget(10, 5, 1e-4) / 1e-8;
        assert!((r3 - limit).abs() < 0.01 * limit);
        assert!((r3 - r4).abs() < 0.01 * r4);
        assert!((r4 - limit).abs() <= (r3 - limit).abs() + 1e-6);
    }

    #[test]
    fn average_outcome_kl_within_budget() {
        // Every list's ell-averaged outcome KL sits below the budget.
        let fam = HardInstanceFamily::new(7, 5, 0.1).unwrap();
        let budget = fam.kl_budget();
        for_each_ordered_subset(7, 5, |s| {
            let s = RankedList::new(s.to_vec(), 7).unwrap();
            let kl = average_outcome_kl(&fam, &s);
            assert!(kl >= 0.0 && kl <= budget * (1.0 + 1e-12), "{kl} > {budget}");
        });
    }

    #[test]
    fn outcome_kl_monte_carlo_agrees_with_exact() {
        let fam = HardInstanceFamily::new(8, 5, 0.2).unwrap();
        let s = RankedList::new(vec![0, 1, 2, 5, 6], 8).unwrap();
        let w0 = fam.weights_for(0).unwrap();
        let w2 = fam.weights_for(2).unwrap();
        let exact = outcome_kl(&s, &w0, &w2);
        let mut rng = rng::stream(31, &[]);
        let mc = outcome_kl_monte_carlo(&s, &w0, &w2, 400_000, &mut rng);
        assert!(
            (mc - exact).abs() < 0.1 * exact + 1e-4,
            "mc {mc} exact {exact}"
        );
    }

    #[test]
    fn minimax_vacuous_regime_clamps() {
        let b = minimax_bound(5, 5, 10).unwrap();
        assert_eq!(b.bound, 0.0);
        assert!(minimax_bound(10, 4, 100).is_err());
    }

    #[test]
    fn minimax_grid_refinement() {
        let coarse = minimax_bound_with_grid(64, 8, 100_000, 10_000).unwrap();
        let fine = minimax_bound_with_grid(64, 8, 100_000, 100_000).unwrap();
        assert!(coarse.bound > 0.0);
        assert!((coarse.bound - fine.bound).abs() <= 1e-3 * fine.bound);
    }

    #[test]
    fn minimax_scales_like_sqrt_l() {
        let t = 100_000_000;
        let a = minimax_bound(2_000, 5, t).unwrap().bound;
        let b = minimax_bound(8_000, 5, t).unwrap().bound;
        assert!((b / a - 2.0).abs() < 0.02, "ratio {}", b / a);
    }
}
