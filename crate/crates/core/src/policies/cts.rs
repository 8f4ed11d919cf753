use rand::RngCore;

use super::{rank_top_k, Policy};
use crate::env::{Feedback, RankedList};
use crate::rng;

/// Thompson sampling with an independent Beta posterior per item.
#[derive(Debug, Clone)]
pub struct Cts {
    k: usize,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl Cts {
    pub fn new(l: usize, k: usize) -> Self {
        assert!(k >= 1 && k <= l, "need 1 <= K <= L");
        Self {
            k,
            alpha: vec![1.0; l],
            beta: vec![1.0; l],
        }
    }
}

impl Policy for Cts {
    fn name(&self) -> &str {
        "cts"
    }

    fn select(&self, _t: u64, rng: &mut dyn RngCore) -> RankedList {
        let theta: Vec<f64> = self
            .alpha
            .iter()
            .zip(&self.beta)
            .map(|(&a, &b)| rng::beta(rng, a, b))
            .collect();
        rank_top_k(&theta, self.k)
    }

    fn update(&mut self, list: &RankedList, feedback: &Feedback) {
        for (i, w) in feedback.observations(list) {
            if w {
                self.alpha[i] += 1.0;
            } else {
                self.beta[i] += 1.0;
            }
        }
    }

    fn reset(&mut self) {
        self.alpha.fill(1.0);
        self.beta.fill(1.0);
    }
}
