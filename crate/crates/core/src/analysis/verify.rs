//! The property suite behind the `verify` subcommand.

use std::time::Instant;

use rand::RngCore;
use serde::Serialize;

use super::{concentration_rate, reward_decomposition, width_g, ConcentrationConfig};
use crate::env::{for_each_ordered_subset, reward_unchecked, ProblemInstance, RankedList};
use crate::linear::{truncated_svd, GramState, Matrix};
use crate::lowerbound::{average_outcome_kl, bernoulli_kl, kl_budget, HardInstanceFamily};
use crate::rng::{self, SimRng};

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn table(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "{:<width$}  {}  {:>8.3}s  {}\n",
                c.name,
                if c.passed { "PASS" } else { "FAIL" },
                c.seconds,
                c.detail,
            ));
        }
        out
    }
}

type Check = fn(&mut SimRng) -> (bool, String);

const CHECKS: &[(&str, Check)] = &[
    ("reward-decomposition", check_decomposition),
    ("brute-force-optimality", check_optimality),
    ("gap-bound-dominance", check_gap_bound),
    ("uniform-cover", check_uniform_cover),
    ("kl-budget-limit", check_kl_budget_limit),
    ("pinsker-grid", check_pinsker),
    ("outcome-kl-within-budget", check_outcome_kl),
    ("width-monotonicity", check_widths),
    ("concentration-diagnostic", check_concentration),
    ("svd-reconstruction", check_svd),
    ("sherman-morrison", check_sherman_morrison),
    ("lints-sampling-law", check_lints_law),
    ("beta-sampler-moments", check_beta_moments),
];

/// Runs every check with streams derived from `seed`.
pub fn run_all(seed: u64) -> VerifyReport {
    let checks = CHECKS
        .iter()
        .enumerate()
        .map(|(idx, (name, check))| {
            let mut r = rng::stream(seed, &[idx as u64]);
            let start = Instant::now();
            let (passed, detail) = check(&mut r);
            CheckResult {
                name: (*name).to_string(),
                passed,
                detail,
                seconds: start.elapsed().as_secs_f64(),
            }
        })
        .collect();
    VerifyReport { seed, checks }
}

fn random_list(r: &mut SimRng, l: usize, k: usize) -> RankedList {
    let mut items: Vec<usize> = (0..l).collect();
    for i in 0..k {
        let j = i + (rng::uniform(r) * (l - i) as f64) as usize;
        items.swap(i, j);
    }
    items.truncate(k);
    RankedList::new(items, l).expect("distinct by construction")
}

fn check_decomposition(r: &mut SimRng) -> (bool, String) {
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let k = 1 + (rng::uniform(r) * 6.0) as usize;
        let l = k + (rng::uniform(r) * 6.0) as usize;
        let w: Vec<f64> = (0..l).map(|_| rng::uniform(r)).collect();
        let w2: Vec<f64> = (0..l).map(|_| rng::uniform(r)).collect();
        let (s, s2) = (random_list(r, l, k), random_list(r, l, k));
        worst = worst.max(reward_decomposition(&s, &s2, &w, &w2).max_discrepancy());
    }
    (worst < 1e-12, format!("max discrepancy {worst:.3e}"))
}

fn check_optimality(r: &mut SimRng) -> (bool, String) {
    let mut instances = 0;
    for l in 1..=6 {
        for k in 1..=l {
            for rep in 0..20 {
                // Every third instance rounds weights to force ties.
                let w: Vec<f64> = (0..l)
                    .map(|_| {
                        let u = rng::uniform(r);
                        if rep % 3 == 0 {
                            (u * 4.0).floor() / 4.0
                        } else {
                            u
                        }
                    })
                    .collect();
                let inst = ProblemInstance::new(w.clone(), k).expect("valid weights");
                let mut best = f64::NEG_INFINITY;
                for_each_ordered_subset(l, k, |s| best = best.max(reward_unchecked(s, &w)));
                if inst.optimal_reward() != best {
                    return (
                        false,
                        format!("L={l} K={k} w={w:?}: {} vs {best}", inst.optimal_reward()),
                    );
                }
                instances += 1;
            }
        }
    }
    (true, format!("{instances} instances exact"))
}

fn check_gap_bound(_: &mut SimRng) -> (bool, String) {
    let fam = HardInstanceFamily::new(10, 5, 0.05).expect("admissible family");
    let mut checked = 0usize;
    let mut slack = f64::INFINITY;
    for ell in 1..=10 {
        for_each_ordered_subset(10, 5, |s| {
            let s = RankedList::new(s.to_vec(), 10).expect("valid");
            slack = slack.min(fam.exact_gap(&s, ell) - fam.gap_lower_bound(&s, ell));
            checked += 1;
        });
    }
    (
        slack >= 0.0,
        format!("{checked} (list, instance) pairs, min slack {slack:.3e}"),
    )
}

fn check_uniform_cover(_: &mut SimRng) -> (bool, String) {
    for l in 5..=32 {
        for k in 5..=l {
            let fam = HardInstanceFamily::new(l, k, 0.01).expect("admissible");
            let mut count = vec![0usize; l];
            for ell in 1..=l {
                fam.hot_items(ell).into_iter().for_each(|i| count[i] += 1);
            }
            if count.iter().any(|&c| c != k) {
                return (false, format!("L={l} K={k}: {count:?}"));
            }
        }
    }
    (
        true,
        "every item hot in exactly K instances, L <= 32".into(),
    )
}

fn check_kl_budget_limit(_: &mut SimRng) -> (bool, String) {
    let l = 64;
    let mut worst = 0.0f64;
    for k in [5usize, 8, 16] {
        let eps = 1e-4;
        let limit = k as f64 / l as f64 * 2.0 * k as f64 / (k as f64 - 1.0);
        worst = worst.max((kl_budget(l, k, eps) / (eps * eps) - limit).abs() / limit);
    }
    (worst < 0.01, format!("max relative deviation {worst:.3e}"))
}

fn check_pinsker(_: &mut SimRng) -> (bool, String) {
    let mut ok = true;
    for i in 1..100 {
        for j in 1..100 {
            let (a, b) = (i as f64 / 100.0, j as f64 / 100.0);
            ok &= (a - b).abs() <= (bernoulli_kl(a, b) / 2.0).sqrt() + 1e-12;
        }
    }
    (ok, "|a-b| <= sqrt(KL/2) on 99x99 grid".into())
}

fn check_outcome_kl(_: &mut SimRng) -> (bool, String) {
    let fam = HardInstanceFamily::new(8, 5, 0.1).expect("admissible");
    let budget = fam.kl_budget();
    let mut worst = 0.0f64;
    for_each_ordered_subset(8, 5, |s| {
        let s = RankedList::new(s.to_vec(), 8).expect("valid");
        worst = worst.max(average_outcome_kl(&fam, &s));
    });
    (
        worst <= budget * (1.0 + 1e-12),
        format!("max averaged KL {worst:.4e} vs budget {budget:.4e}"),
    )
}

fn check_widths(_: &mut SimRng) -> (bool, String) {
    let mut ok = true;
    for w in [0.0, 0.1, 0.5, 0.9, 1.0] {
        for n in 0..200 {
            ok &= width_g(w, n + 1, 50) < width_g(w, n, 50);
        }
        for t in 1..200 {
            ok &= width_g(w, 7, t + 1) > width_g(w, 7, t);
        }
    }
    (ok, "g strictly decreasing in N, increasing in t".into())
}

fn check_concentration(r: &mut SimRng) -> (bool, String) {
    let inst = ProblemInstance::new(vec![0.3; 8], 2).expect("valid");
    let cfg = ConcentrationConfig {
        replications: 2000,
        checkpoints: vec![100, 1000],
        seed: r.next_u64(),
    };
    match concentration_rate(&inst, &cfg) {
        Ok(rows) => {
            let detail = rows
                .iter()
                .map(|row| format!("t={}: {:.4} >= {:.6}", row.t, row.frequency, row.floor))
                .collect::<Vec<_>>()
                .join(", ");
            (rows.iter().all(|row| row.pass), detail)
        }
        Err(e) => (false, e.to_string()),
    }
}

fn check_svd(r: &mut SimRng) -> (bool, String) {
    let left = Matrix::from_fn(20, 5, |_, _| rng::standard_normal(r));
    let right = Matrix::from_fn(5, 30, |_, _| rng::standard_normal(r));
    let a = left.matmul(&right);
    match truncated_svd(&a, 5) {
        Ok(svd) => {
            let err = svd.reconstruct().sub(&a).frobenius_norm();
            let ortho = svd
                .u
                .transpose()
                .matmul(&svd.u)
                .sub(&Matrix::identity(5))
                .max_abs()
                .max(
                    svd.v
                        .transpose()
                        .matmul(&svd.v)
                        .sub(&Matrix::identity(5))
                        .max_abs(),
                );
            (
                err <= 1e-8 && ortho <= 1e-8,
                format!("reconstruction {err:.2e}, orthogonality {ortho:.2e}"),
            )
        }
        Err(e) => (false, e.to_string()),
    }
}

fn check_sherman_morrison(r: &mut SimRng) -> (bool, String) {
    let mut worst = 0.0f64;
    for d in [2usize, 5, 8] {
        let mut g = GramState::with_refactor_interval(d, None);
        for _ in 0..10_000 {
            let x: Vec<f64> = (0..d)
                .map(|_| (rng::uniform(r) - 0.5) / (d as f64).sqrt())
                .collect();
            g.observe(&x, if rng::bernoulli(r, 0.2) { 1.0 } else { 0.0 });
        }
        let direct = g.m().spd_inverse().expect("Gram matrix is PD");
        worst = worst.max(g.m_inv().sub(&direct).max_abs());
    }
    (
        worst < 1e-10,
        format!("max |incremental - direct| {worst:.2e}"),
    )
}

fn check_lints_law(r: &mut SimRng) -> (bool, String) {
    // Draws of F xi with F F^T = M^-1 must have covariance M^-1.
    let d = 3;
    let mut g = GramState::new(d);
    for _ in 0..40 {
        let x: Vec<f64> = (0..d).map(|_| rng::uniform(r) * 0.5).collect();
        g.observe(&x, 0.0);
    }
    let f = g.inverse_factor();
    let n = 100_000;
    let mut cov = [[0.0; 3]; 3];
    let mut fourth = [[0.0; 3]; 3];
    for _ in 0..n {
        let xi: Vec<f64> = (0..d).map(|_| rng::standard_normal(r)).collect();
        let y = f.matvec(&xi);
        for a in 0..d {
            for b in 0..d {
                cov[a][b] += y[a] * y[b];
                fourth[a][b] += (y[a] * y[b]).powi(2);
            }
        }
    }
    let mut worst = 0.0f64;
    for a in 0..d {
        for b in 0..d {
            let mean = cov[a][b] / n as f64;
            let var = fourth[a][b] / n as f64 - mean * mean;
            let se = (var / n as f64).sqrt();
            worst = worst.max((mean - g.m_inv()[(a, b)]).abs() / se);
        }
    }
    (
        worst <= 5.0,
        format!("max deviation {worst:.2} standard errors"),
    )
}

fn check_beta_moments(r: &mut SimRng) -> (bool, String) {
    let n = 1_000_000;
    let (mut s1, mut s2) = (0.0, 0.0);
    for _ in 0..n {
        let x = rng::beta(r, 2.0, 3.0);
        s1 += x;
        s2 += x * x;
    }
    let mean = s1 / n as f64;
    let var = s2 / n as f64 - mean * mean;
    let expect_var = 0.04;
    let ok = (mean - 0.4).abs() <= 4.0 * (expect_var / n as f64).sqrt()
        && (var - expect_var).abs() <= 0.05 * expect_var;
    (ok, format!("mean {mean:.5}, variance {var:.5}"))
}
