//! Fixtures shared by the criterion benches.

use cascade_bandits::harness::generate_synthetic_instance;
use cascade_bandits::linear::Matrix;
use cascade_bandits::rng::SimRng;
use cascade_bandits::{Policy, ProblemInstance};

/// The three-level instance with an `m x L` training matrix.
pub fn fixture(l: usize, k: usize, m: usize) -> (ProblemInstance, Matrix) {
    let s =
        generate_synthetic_instance(l, k, (0.2, 0.1, 0.05), Some(m), 17).expect("valid fixture");
    (s.instance, s.training.expect("training rows requested"))
}

/// Plays `steps` rounds starting at `t0`; returns the next step index.
pub fn play(
    policy: &mut dyn Policy,
    instance: &ProblemInstance,
    t0: u64,
    steps: u64,
    rng: &mut SimRng,
) -> u64 {
    for t in t0..t0 + steps {
        let list = policy.select(t, rng);
        let feedback = instance.simulate_step(&list, rng);
        policy.update(&list, &feedback);
    }
    t0 + steps
}
