use rand::RngCore;

use crate::env::ProblemInstance;
use crate::error::{structural, Result};
use crate::linear::Matrix;
use crate::rng;

/// A three-level instance and, optionally, a historical click matrix drawn
/// from the same weights.
#[derive(Debug, Clone)]
pub struct SyntheticInstance {
    pub instance: ProblemInstance,
    /// `m x L` matrix of independent Bernoulli(w(j)) clicks.
    pub training: Option<Matrix>,
}

/// `K` items at `w1`, `K` at `w2`, the remaining `L - 2K` at `w3`.
///
/// Which items land in which block is a seeded random permutation, so the
/// optimal items do not sit at the front where index tie-breaking would
/// favor them.
pub fn generate_synthetic_instance(
    l: usize,
    k: usize,
    (w1, w2, w3): (f64, f64, f64),
    training_rows: Option<usize>,
    seed: u64,
) -> Result<SyntheticInstance> {
    if k == 0 || l < 2 * k {
        return Err(structural(format!(
            "synthetic instance needs L >= 2K >= 2, got L={l}, K={k}"
        )));
    }
    let mut r = rng::stream(seed, &[0x1A57]);
    let mut perm: Vec<usize> = (0..l).collect();
    for i in (1..l).rev() {
        let j = (r.next_u64() % (i as u64 + 1)) as usize;
        perm.swap(i, j);
    }
    let mut w = vec![w3; l];
    for &i in &perm[..k] {
        w[i] = w1;
    }
    for &i in &perm[k..2 * k] {
        w[i] = w2;
    }
    let instance = ProblemInstance::new(w, k)?;
    let training = training_rows.map(|m| {
        let mut tr = rng::stream(seed, &[0x7124]);
        let w = instance.weights();
        Matrix::from_fn(m, l, |_, j| {
            if rng::bernoulli(&mut tr, w[j]) {
                1.0
            } else {
                0.0
            }
        })
    });
    Ok(SyntheticInstance { instance, training })
}
