use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{build_policy, prepare_instance, ExperimentConfig, PreparedInstance};
use crate::env::{reward_unchecked, ProblemInstance, RegretAccumulator};
use crate::error::{Error, Result};
use crate::linear::FeatureMatrix;
use crate::policies::Policy;
use crate::rng;

/// Environment variable overriding the worker count.
pub const THREADS_ENV: &str = "CASCADE_BANDITS_THREADS";

/// One (policy, run) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub policy: String,
    pub policy_index: usize,
    pub run: usize,
    #[serde(rename = "T")]
    pub horizon: u64,
    pub final_regret: f64,
    pub realized_reward: f64,
    /// Cumulative regret at each checkpoint.
    pub trajectory: Vec<f64>,
    /// Wall-clock time; not covered by the determinism guarantee.
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySummary {
    pub policy: String,
    pub policy_index: usize,
    pub runs: usize,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single run.
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub mean_seconds: f64,
    pub mean_trajectory: Vec<f64>,
    pub std_trajectory: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    #[serde(rename = "T")]
    pub horizon: u64,
    pub runs: usize,
    pub base_seed: u64,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub optimal_reward: f64,
    pub checkpoints: Vec<u64>,
    pub policies: Vec<PolicySummary>,
    /// Sorted by (policy_index, run).
    pub records: Vec<RunRecord>,
}

impl ExperimentResult {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn summary(&self, policy: &str) -> Option<&PolicySummary> {
        self.policies.iter().find(|p| p.policy == policy)
    }
}

/// `count` geometrically spaced steps in `1..=horizon`, deduplicated, always
/// ending at `horizon`.
pub fn checkpoint_grid(horizon: u64, count: usize) -> Vec<u64> {
    assert!(horizon >= 1);
    if count <= 1 {
        return vec![horizon];
    }
    let top = (horizon as f64).ln();
    let mut grid: Vec<u64> = (0..count)
        .map(|i| {
            let t = (top * i as f64 / (count - 1) as f64).exp().round() as u64;
            t.clamp(1, horizon)
        })
        .collect();
    grid.dedup();
    *grid.last_mut().unwrap() = horizon;
    grid
}

/// Worker count: the environment override, then the config, then rayon's default.
pub fn resolve_threads(configured: Option<usize>) -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::Config(format!("{THREADS_ENV}={v:?} is not a thread count"))),
        Err(_) => Ok(configured.unwrap_or(0)),
    }
}

/// Runs `policy` for `horizon` steps on `instance`, returning the regret at
/// each checkpoint and the realized reward.
pub fn simulate(
    policy: &mut dyn Policy,
    instance: &ProblemInstance,
    horizon: u64,
    checkpoints: &[u64],
    rng: &mut rng::SimRng,
) -> (Vec<f64>, f64) {
    let optimal = instance.optimal_reward();
    let w = instance.weights();
    let mut acc = RegretAccumulator::new();
    let mut trajectory = Vec::with_capacity(checkpoints.len());
    let mut next = checkpoints.iter().peekable();
    for t in 1..=horizon {
        let list = policy.select(t, rng);
        acc.charge(optimal, reward_unchecked(list.items(), w));
        let feedback = instance.simulate_step(&list, rng);
        acc.record_realized(&feedback);
        policy.update(&list, &feedback);
        if next.peek() == Some(&&t) {
            next.next();
            trajectory.push(acc.cum_regret);
        }
    }
    (trajectory, acc.realized_reward)
}

/// Runs every (policy, run) cell of `cfg` on a pool sized by
/// [`resolve_threads`].
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    run_experiment_with_threads(cfg, resolve_threads(cfg.threads)?)
}

/// As [`run_experiment`] with an explicit worker count (0 = rayon default).
pub fn run_experiment_with_threads(
    cfg: &ExperimentConfig,
    threads: usize,
) -> Result<ExperimentResult> {
    cfg.validate()?;
    let prepared = prepare_instance(cfg)?;
    run_prepared(cfg, &prepared, threads)
}

/// As [`run_experiment_with_threads`] on an already resolved instance.
pub fn run_prepared(
    cfg: &ExperimentConfig,
    prepared: &PreparedInstance,
    threads: usize,
) -> Result<ExperimentResult> {
    cfg.validate()?;
    let instance = &prepared.instance;

    let mut feature_cache: BTreeMap<Option<usize>, Arc<FeatureMatrix>> = BTreeMap::new();
    let mut features = Vec::with_capacity(cfg.policies.len());
    for spec in &cfg.policies {
        let f = if spec.is_linear() {
            let f = match feature_cache.get(&spec.d) {
                Some(f) => f.clone(),
                None => {
                    let f = prepared.features(spec.d)?;
                    feature_cache.insert(spec.d, f.clone());
                    f
                }
            };
            Some(f)
        } else {
            None
        };
        // Fail on bad parameters before any simulation starts.
        build_policy(spec, prepared, f.clone())?;
        features.push(f);
    }

    let checkpoints = checkpoint_grid(cfg.horizon, cfg.checkpoints);
    let cells: Vec<(usize, usize)> = (0..cfg.policies.len())
        .flat_map(|p| (0..cfg.runs).map(move |r| (p, r)))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let records: Vec<RunRecord> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(p, run)| -> Result<RunRecord> {
                let spec = &cfg.policies[p];
                let mut policy = build_policy(spec, prepared, features[p].clone())?;
                let mut r = rng::stream(cfg.base_seed, &[p as u64, run as u64]);
                let start = Instant::now();
                let (trajectory, realized) =
                    simulate(policy.as_mut(), instance, cfg.horizon, &checkpoints, &mut r);
                Ok(RunRecord {
                    policy: spec.display_name(),
                    policy_index: p,
                    run,
                    horizon: cfg.horizon,
                    final_regret: *trajectory.last().expect("grid ends at T"),
                    realized_reward: realized,
                    trajectory,
                    seconds: start.elapsed().as_secs_f64(),
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let policies = (0..cfg.policies.len())
        .map(|p| summarize(&records[p * cfg.runs..(p + 1) * cfg.runs]))
        .collect();
    Ok(ExperimentResult {
        horizon: cfg.horizon,
        runs: cfg.runs,
        base_seed: cfg.base_seed,
        l: instance.l(),
        k: instance.k(),
        optimal_reward: instance.optimal_reward(),
        checkpoints,
        policies,
        records,
    })
}

fn mean_std(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    if n < 2.0 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.map(|x| (x - mean).powi(2)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Aggregates over the runs of one policy, in run order.
pub fn summarize(runs: &[RunRecord]) -> PolicySummary {
    assert!(!runs.is_empty());
    let (mean, std) = mean_std(runs.iter().map(|r| r.final_regret));
    let points = runs[0].trajectory.len();
    let (mean_trajectory, std_trajectory) = (0..points)
        .map(|i| mean_std(runs.iter().map(move |r| r.trajectory[i])))
        .unzip();
    PolicySummary {
        policy: runs[0].policy.clone(),
        policy_index: runs[0].policy_index,
        runs: runs.len(),
        mean,
        std,
        min: runs
            .iter()
            .map(|r| r.final_regret)
            .fold(f64::INFINITY, f64::min),
        max: runs
            .iter()
            .map(|r| r.final_regret)
            .fold(f64::NEG_INFINITY, f64::max),
        mean_seconds: runs.iter().map(|r| r.seconds).sum::<f64>() / runs.len() as f64,
        mean_trajectory,
        std_trajectory,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{InstanceSpec, PolicySpec};

    fn config(policies: &[&str], runs: usize) -> ExperimentConfig {
        ExperimentConfig {
            instance: InstanceSpec::Explicit {
                k: 2,
                w: vec![0.1, 0.4, 0.05, 0.3, 0.2],
            },
            features: None,
            policies: policies.iter().map(|p| PolicySpec::named(p)).collect(),
            horizon: 500,
            runs,
            base_seed: 11,
            checkpoints: 20,
            output_dir: None,
            threads: None,
        }
    }

    #[test]
    fn grid_shape() {
        assert_eq!(checkpoint_grid(1, 100), vec![1]);
        assert_eq!(checkpoint_grid(1000, 1), vec![1000]);
        let g = checkpoint_grid(10_000, 100);
        assert_eq!((g[0], *g.last().unwrap()), (1, 10_000));
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!(g.len() > 80);
    }

    #[test]
    fn one_row_per_cell() {
        let res = run_experiment_with_threads(&config(&["ts-cascade", "cts"], 3), 2).unwrap();
        assert_eq!(res.records.len(), 6);
        assert_eq!(res.policies.len(), 2);
        for r in &res.records {
            assert!(r.trajectory.windows(2).all(|w| w[0] <= w[1]));
            assert_eq!(r.final_regret, *r.trajectory.last().unwrap());
            assert!(r.seconds >= 0.0);
        }
        for p in &res.policies {
            assert!(p.min <= p.mean && p.mean <= p.max);
        }
    }

    #[test]
    fn oracle_has_zero_regret() {
        let res = run_experiment_with_threads(&config(&["oracle"], 4), 1).unwrap();
        assert!(res.records.iter().all(|r| r.final_regret == 0.0));
        assert_eq!(res.policies[0].std, 0.0);
    }

    #[test]
    fn single_run_has_zero_std() {
        let res = run_experiment_with_threads(&config(&["cascade-ucb1"], 1), 1).unwrap();
        assert_eq!(res.policies[0].std, 0.0);
        assert!(res.policies[0].std_trajectory.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn thread_count_does_not_matter() {
        let cfg = config(&["ts-cascade", "cts", "cascade-klucb"], 4);
        let strip = |mut r: ExperimentResult| {
            r.records.iter_mut().for_each(|x| x.seconds = 0.0);
            r.policies.iter_mut().for_each(|x| x.mean_seconds = 0.0);
            r
        };
        let a = strip(run_experiment_with_threads(&cfg, 1).unwrap());
        let b = strip(run_experiment_with_threads(&cfg, 4).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn adding_a_policy_keeps_other_streams() {
        let a = run_experiment_with_threads(&config(&["ts-cascade"], 2), 1).unwrap();
        let b = run_experiment_with_threads(&config(&["ts-cascade", "cts"], 2), 1).unwrap();
        assert_eq!(a.records[0].trajectory, b.records[0].trajectory);
        assert_eq!(a.records[1].trajectory, b.records[1].trajectory);
    }

    #[test]
    fn linear_policy_without_features_is_a_config_error() {
        let mut cfg = config(&["ts-cascade"], 1);
        cfg.policies.push(PolicySpec {
            d: Some(2),
            ..PolicySpec::named("lints-cascade")
        });
        assert!(matches!(
            run_experiment_with_threads(&cfg, 1),
            Err(Error::Config(_))
        ));
    }
}
