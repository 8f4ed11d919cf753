//! Cascading bandits: environments, Thompson-sampling and UCB policies, the
//! linear generalization, the minimax lower-bound family and an experiment
//! harness.
//!
//! ```
//! use cascade_bandits::{ProblemInstance, Policy, TsCascade, rng};
//!
//! let inst = ProblemInstance::new(vec![0.2, 0.1, 0.05, 0.05], 2).unwrap();
//! let mut policy = TsCascade::new(inst.l(), inst.k());
//! let mut r = rng::stream(7, &[0]);
//! for t in 1..=100 {
//!     let list = policy.select(t, &mut r);
//!     let feedback = inst.simulate_step(&list, &mut r);
//!     policy.update(&list, &feedback);
//! }
//! ```

pub mod analysis;
pub mod env;
pub mod error;
pub mod harness;
pub mod linear;
pub mod lowerbound;
pub mod policies;
pub mod rng;

pub use env::{
    expected_reward, Feedback, InstanceFile, ProblemInstance, RankedList, RegretAccumulator,
};
pub use error::{Error, Result};
pub use linear::{CascadeLinTs, CascadeLinUcb, FeatureMatrix, LinTsCascade};
pub use policies::{CascadeKlUcb, CascadeUcb1, Cts, EmpiricalMeans, FixedList, Policy, TsCascade};
