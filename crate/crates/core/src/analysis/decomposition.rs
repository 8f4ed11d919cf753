use crate::env::{reward_unchecked, RankedList};

/// Both telescoping expansions of `r(S|w) - r(S'|w')` and the direct
/// difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardDecomposition {
    /// Prefix products under `(S, w)`, suffix products under `(S', w')`.
    pub prefix_first: f64,
    /// Prefix products under `(S', w')`, suffix products under `(S, w)`.
    pub prefix_second: f64,
    pub direct: f64,
}

impl RewardDecomposition {
    pub fn max_discrepancy(&self) -> f64 {
        (self.prefix_first - self.direct)
            .abs()
            .max((self.prefix_second - self.direct).abs())
    }
}

/// Panics if the lists differ in length.
pub fn reward_decomposition(
    s: &RankedList,
    s_prime: &RankedList,
    w: &[f64],
    w_prime: &[f64],
) -> RewardDecomposition {
    assert_eq!(s.len(), s_prime.len(), "lists must have equal length");
    let a: Vec<f64> = s.items().iter().map(|&i| w[i]).collect();
    let b: Vec<f64> = s_prime.items().iter().map(|&i| w_prime[i]).collect();
    let k = a.len();

    let telescope = |pre: &[f64], post: &[f64]| -> f64 {
        // suffix[k] = prod_{j > k} (1 - post_j)
        let mut suffix = vec![1.0; k + 1];
        for j in (0..k).rev() {
            suffix[j] = suffix[j + 1] * (1.0 - post[j]);
        }
        let mut prefix = 1.0;
        let mut total = 0.0;
        for j in 0..k {
            total += prefix * (a[j] - b[j]) * suffix[j + 1];
            prefix *= 1.0 - pre[j];
        }
        total
    };

    RewardDecomposition {
        prefix_first: telescope(&a, &b),
        prefix_second: telescope(&b, &a),
        direct: reward_unchecked(s.items(), w) - reward_unchecked(s_prime.items(), w_prime),
    }
}
