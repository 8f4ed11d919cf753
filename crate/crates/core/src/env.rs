//! Cascading-bandit environment: problem instances, cascade feedback and
//! pseudo-regret accounting.
//!
//! Item indices are 0-based everywhere in this crate. Anything that is read
//! from or written to disk uses 1-based indices; see [`RankedList::to_one_based`].

use std::path::Path;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{structural, Error, Result};
use crate::rng;

/// Ground set of `L` items with click probabilities `w`, and list length `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    k: usize,
    weights: Vec<f64>,
    optimal: RankedList,
    optimal_reward: f64,
}

/// On-disk form of a [`ProblemInstance`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceFile {
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub w: Vec<f64>,
}

impl ProblemInstance {
    pub fn new(weights: Vec<f64>, k: usize) -> Result<Self> {
        let l = weights.len();
        if k == 0 || k > l {
            return Err(structural(format!("need 1 <= K <= L, got K={k}, L={l}")));
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(0.0..=1.0).contains(*w))
        {
            return Err(structural(format!(
                "click probability w({}) = {w} is outside [0, 1]",
                i + 1
            )));
        }
        let optimal = RankedList(top_k(&weights, k));
        let optimal_reward = reward_unchecked(&optimal.0, &weights);
        Ok(Self {
            k,
            weights,
            optimal,
            optimal_reward,
        })
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: InstanceFile = serde_json::from_str(&text)?;
        file.try_into()
    }

    pub fn to_file(&self) -> InstanceFile {
        InstanceFile {
            l: self.l(),
            k: self.k,
            w: self.weights.clone(),
        }
    }

    /// Ground-set size.
    pub fn l(&self) -> usize {
        self.weights.len()
    }

    /// List length.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// The K most attractive items in descending order of weight, ties to the
    /// lowest index.
    pub fn optimal_list(&self) -> &RankedList {
        &self.optimal
    }

    /// `r(S*|w)`, the reward of any ordering of the K largest weights.
    pub fn optimal_reward(&self) -> f64 {
        self.optimal_reward
    }

    /// Expected reward of `list` under this instance's weights.
    pub fn expected_reward(&self, list: &RankedList) -> Result<f64> {
        expected_reward(list, &self.weights)
    }

    /// Draws one cascade of clicks for `list`.
    ///
    /// Items are examined in list order. Each examination consumes exactly one
    /// uniform from `rng`; nothing is consumed past the first click.
    pub fn simulate_step<R: RngCore + ?Sized>(&self, list: &RankedList, rng: &mut R) -> Feedback {
        let click = list
            .items()
            .iter()
            .position(|&i| rng::bernoulli(rng, self.weights[i]));
        Feedback::from_click(click.map(|p| p + 1), list.len())
            .expect("click position lies within the list by construction")
    }
}

impl TryFrom<InstanceFile> for ProblemInstance {
    type Error = Error;

    fn try_from(file: InstanceFile) -> Result<Self> {
        if file.w.len() != file.l {
            return Err(structural(format!(
                "instance declares L={} but lists {} weights",
                file.l,
                file.w.len()
            )));
        }
        Self::new(file.w, file.k)
    }
}

/// An ordered K-subset of the ground set: the action space.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RankedList(Vec<usize>);

impl RankedList {
    /// Validates distinctness and range against a ground set of size `l`.
    pub fn new(items: Vec<usize>, l: usize) -> Result<Self> {
        let mut seen = vec![false; l];
        for &i in &items {
            if i >= l {
                return Err(Error::IndexOutOfRange { index: i, len: l });
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(structural(format!("item {} repeated in list", i + 1)));
            }
        }
        Ok(Self(items))
    }

    /// Builds a list from 1-based item indices.
    pub fn from_one_based(items: &[usize], l: usize) -> Result<Self> {
        let zero: Vec<usize> = items
            .iter()
            .map(|&i| {
                i.checked_sub(1)
                    .ok_or_else(|| structural("1-based item index 0"))
            })
            .collect::<Result<_>>()?;
        Self::new(zero, l)
    }

    /// Internal constructor for lists produced by top-K selection.
    pub(crate) fn from_distinct(items: Vec<usize>) -> Self {
        Self(items)
    }

    pub fn items(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.0.iter().map(|i| i + 1).collect()
    }

    pub fn contains(&self, item: usize) -> bool {
        self.0.contains(&item)
    }
}

/// Cascade observation for one round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Feedback {
    click_position: Option<usize>,
    realized: Vec<bool>,
}

impl Feedback {
    /// `click_position` is 1-based; `None` means the user scanned all `k`
    /// items without clicking.
    pub fn from_click(click_position: Option<usize>, k: usize) -> Result<Self> {
        let realized = match click_position {
            Some(p) if p == 0 || p > k => {
                return Err(structural(format!("click position {p} not in 1..={k}")))
            }
            Some(p) => {
                let mut v = vec![false; p];
                v[p - 1] = true;
                v
            }
            None => vec![false; k],
        };
        Ok(Self {
            click_position,
            realized,
        })
    }

    /// 1-based position of the click, if any.
    pub fn click_position(&self) -> Option<usize> {
        self.click_position
    }

    /// Realized attraction indicators for the observed prefix.
    pub fn realized_clicks(&self) -> &[bool] {
        &self.realized
    }

    /// Number of items whose attraction was observed: `min(k_t, K)`.
    pub fn observed_len(&self) -> usize {
        self.realized.len()
    }

    /// Realized reward: 1 iff some item was clicked.
    pub fn reward(&self) -> f64 {
        if self.click_position.is_some() {
            1.0
        } else {
            0.0
        }
    }

    /// Observed `(item, W)` pairs, without checking that `list` produced this
    /// feedback.
    pub fn observations<'a>(
        &'a self,
        list: &'a RankedList,
    ) -> impl Iterator<Item = (usize, bool)> + 'a {
        list.items()
            .iter()
            .copied()
            .zip(self.realized.iter().copied())
    }
}

/// The observed prefix of `list` under feedback `f`.
pub fn observed_prefix(list: &RankedList, f: &Feedback) -> Result<Vec<(usize, bool)>> {
    let consistent = match f.click_position {
        Some(p) => p <= list.len(),
        None => f.observed_len() == list.len(),
    };
    if !consistent {
        return Err(structural(format!(
            "feedback observes {} items but the list has {}",
            f.observed_len(),
            list.len()
        )));
    }
    Ok(f.observations(list).collect())
}

/// `r(S|w) = 1 - prod_{i in S} (1 - w(i))`.
pub fn expected_reward(list: &RankedList, w: &[f64]) -> Result<f64> {
    if let Some(&i) = list.items().iter().find(|&&i| i >= w.len()) {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: w.len(),
        });
    }
    Ok(reward_unchecked(list.items(), w))
}

/// Factors are multiplied in sorted order so the result does not depend on
/// the ranking, down to the last bit.
#[inline]
pub(crate) fn reward_unchecked(items: &[usize], w: &[f64]) -> f64 {
    const INLINE: usize = 16;
    if items.len() <= INLINE {
        let mut buf = [0.0f64; INLINE];
        let factors = &mut buf[..items.len()];
        for (f, &i) in factors.iter_mut().zip(items) {
            *f = 1.0 - w[i];
        }
        factors.sort_unstable_by(f64::total_cmp);
        1.0 - factors.iter().product::<f64>()
    } else {
        let mut factors: Vec<f64> = items.iter().map(|&i| 1.0 - w[i]).collect();
        factors.sort_unstable_by(f64::total_cmp);
        1.0 - factors.iter().product::<f64>()
    }
}

/// Indices of the `k` largest scores in descending order; equal scores go to
/// the lower index.
pub fn top_k(scores: &[f64], k: usize) -> Vec<usize> {
    debug_assert!(k <= scores.len());
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    let by_score = |a: &usize, b: &usize| scores[*b].total_cmp(&scores[*a]).then(a.cmp(b));
    if k < idx.len() {
        idx.select_nth_unstable_by(k, by_score);
        idx.truncate(k);
    }
    idx.sort_unstable_by(by_score);
    idx
}

/// Calls `f` on every ordered K-subset of `0..l`, in lexicographic order.
pub fn for_each_ordered_subset(l: usize, k: usize, mut f: impl FnMut(&[usize])) {
    fn rec(
        l: usize,
        k: usize,
        used: &mut [bool],
        cur: &mut Vec<usize>,
        f: &mut dyn FnMut(&[usize]),
    ) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in 0..l {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(l, k, used, cur, f);
                cur.pop();
                used[i] = false;
            }
        }
    }
    if k <= l {
        rec(
            l,
            k,
            &mut vec![false; l],
            &mut Vec::with_capacity(k),
            &mut f,
        );
    }
}

/// Running pseudo-regret `sum_t r(S*|w) - r(S_t|w)`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RegretAccumulator {
    pub t: u64,
    pub cum_regret: f64,
    /// Sum of realized 0/1 rewards, logged alongside the pseudo-regret.
    pub realized_reward: f64,
    pub trajectory: Option<Vec<f64>>,
}

impl RegretAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Keeps a per-step snapshot of the cumulative regret.
    pub fn with_trajectory() -> Self {
        Self {
            trajectory: Some(Vec::new()),
            ..Self::default()
        }
    }

    /// Advances one step, charging the expected-reward gap of `list`.
    pub fn regret_step(&mut self, instance: &ProblemInstance, list: &RankedList) -> Result<f64> {
        let r = instance.expected_reward(list)?;
        Ok(self.charge(instance.optimal_reward(), r))
    }

    pub(crate) fn charge(&mut self, optimal: f64, reward: f64) -> f64 {
        // Rounding can make a reordered optimal list differ from r(S*) in
        // the last bit; pseudo-regret never decreases.
        let inc = (optimal - reward).max(0.0);
        self.t += 1;
        self.cum_regret += inc;
        if let Some(traj) = self.trajectory.as_mut() {
            traj.push(self.cum_regret);
        }
        inc
    }

    pub fn record_realized(&mut self, f: &Feedback) {
        self.realized_reward += f.reward();
    }
}
