//! Tabular policies behind a single select/update contract.

mod cts;
mod ts_cascade;
mod ucb;

use rand::RngCore;

pub use cts::Cts;
pub use ts_cascade::{ts_sigma, TsCascade};
pub use ucb::{kl_ucb_index, klucb_budget, ucb1_index, CascadeKlUcb, CascadeUcb1};

use crate::env::{Feedback, RankedList};

/// A cascading-bandit policy.
///
/// `select` must depend only on the policy's state, `t` and what it draws from
/// `rng`. `update` may only look at the observed prefix of the feedback.
pub trait Policy: Send {
    fn name(&self) -> &str;

    /// Chooses the list for step `t` (1-based).
    fn select(&self, t: u64, rng: &mut dyn RngCore) -> RankedList;

    fn update(&mut self, list: &RankedList, feedback: &Feedback);

    /// Returns the policy to its initial state.
    fn reset(&mut self);
}

/// Per-item empirical means and observation counts.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeans {
    pub w_hat: Vec<f64>,
    pub n: Vec<u64>,
}

impl EmpiricalMeans {
    pub fn new(l: usize) -> Self {
        Self {
            w_hat: vec![0.0; l],
            n: vec![0; l],
        }
    }

    pub fn len(&self) -> usize {
        self.w_hat.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w_hat.is_empty()
    }

    /// Folds one observation of item `i` into its running mean.
    pub fn observe(&mut self, i: usize, clicked: bool) {
        let n = self.n[i] as f64;
        let w = if clicked { 1.0 } else { 0.0 };
        self.w_hat[i] = ((n * self.w_hat[i] + w) / (n + 1.0)).clamp(0.0, 1.0);
        self.n[i] += 1;
    }

    pub fn update(&mut self, list: &RankedList, feedback: &Feedback) {
        for (i, w) in feedback.observations(list) {
            self.observe(i, w);
        }
    }

    pub fn reset(&mut self) {
        self.w_hat.fill(0.0);
        self.n.fill(0);
    }
}

/// Always plays a fixed list. With the optimal list it incurs no regret.
#[derive(Debug, Clone)]
pub struct FixedList {
    list: RankedList,
}

impl FixedList {
    pub fn new(list: RankedList) -> Self {
        Self { list }
    }
}

impl Policy for FixedList {
    fn name(&self) -> &str {
        "oracle"
    }

    fn select(&self, _t: u64, _rng: &mut dyn RngCore) -> RankedList {
        self.list.clone()
    }

    fn update(&mut self, _list: &RankedList, _feedback: &Feedback) {}

    fn reset(&mut self) {}
}

/// Top-`k` list by `scores`, lowest index first among ties.
pub(crate) fn rank_top_k(scores: &[f64], k: usize) -> RankedList {
    RankedList::from_distinct(crate::env::top_k(scores, k))
}
