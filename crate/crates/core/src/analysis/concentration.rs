use rayon::prelude::*;
use serde::Serialize;

use super::widths::width_g;
use crate::env::ProblemInstance;
use crate::error::{Error, Result};
use crate::policies::{Policy, TsCascade};
use crate::rng;

/// Monte-Carlo settings for [`concentration_rate`].
#[derive(Debug, Clone)]
pub struct ConcentrationConfig {
    pub replications: usize,
    /// Steps at which the event is checked, before that step's selection.
    pub checkpoints: Vec<u64>,
    pub seed: u64,
}

impl Default for ConcentrationConfig {
    fn default() -> Self {
        Self {
            replications: 2000,
            checkpoints: vec![100, 1000],
            seed: 0x5EED,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationRow {
    pub t: u64,
    /// Fraction of replications in which every `|w_hat(i) - w(i)| <= g_t(i)`.
    pub frequency: f64,
    /// `max(0, 1 - 3L / (t+1)^3)`.
    pub floor: f64,
    pub pass: bool,
}

pub fn concentration_floor(l: usize, t: u64) -> f64 {
    (1.0 - 3.0 * l as f64 / ((t + 1) as f64).powi(3)).max(0.0)
}

/// Empirical frequency of the mean-concentration event along TS-Cascade
/// trajectories, next to its analytic floor.
pub fn concentration_rate(
    instance: &ProblemInstance,
    config: &ConcentrationConfig,
) -> Result<Vec<ConcentrationRow>> {
    if config.replications < 1000 {
        return Err(Error::Config(format!(
            "concentration diagnostic needs at least 1000 replications, got {}",
            config.replications
        )));
    }
    let mut checkpoints = config.checkpoints.clone();
    checkpoints.sort_unstable();
    checkpoints.dedup();
    if checkpoints.first().is_some_and(|&t| t == 0) {
        return Err(Error::Config("checkpoints are 1-based steps".into()));
    }
    let horizon = checkpoints.last().copied().unwrap_or(0);
    let w = instance.weights();

    let hits = (0..config.replications)
        .into_par_iter()
        .map(|rep| {
            let mut r = rng::stream(config.seed, &[rep as u64]);
            let mut policy = TsCascade::new(instance.l(), instance.k());
            let mut hit = vec![0usize; checkpoints.len()];
            let mut next = 0;
            for t in 1..=horizon {
                if checkpoints[next] == t {
                    let stats = policy.stats();
                    let holds = (0..w.len()).all(|i| {
                        (stats.w_hat[i] - w[i]).abs() <= width_g(stats.w_hat[i], stats.n[i], t)
                    });
                    hit[next] += usize::from(holds);
                    next += 1;
                }
                let list = policy.select(t, &mut r);
                let f = instance.simulate_step(&list, &mut r);
                policy.update(&list, &f);
            }
            hit
        })
        .reduce(
            || vec![0; checkpoints.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );

    Ok(checkpoints
        .iter()
        .zip(hits)
        .map(|(&t, h)| {
            let frequency = h as f64 / config.replications as f64;
            let floor = concentration_floor(instance.l(), t);
            ConcentrationRow {
                t,
                frequency,
                floor,
                pass: frequency >= floor,
            }
        })
        .collect())
}
