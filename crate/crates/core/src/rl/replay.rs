//! Replay buffer with mixed recent/best/random sampling.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::vec::Vec;
use rand::Rng;

use crate::config::ReplayFractions;
use crate::error::{CoreError, Result};

/// One stored environment interaction in the reduced state encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    /// Flattened control-point coordinates of both surfaces.
    pub state: Vec<f64>,
    pub action_type: usize,
    /// `(x_target, y_upper, y_lower, delta)`.
    pub action_params: [f64; 4],
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub done: bool,
}

/// FIFO-bounded store; the entry with the highest reward is tracked and is
/// guaranteed a slot in every sampled batch.
pub struct ReplayBuffer {
    data: VecDeque<Transition>,
    capacity: usize,
    /// Position of the best-reward entry within `data`.
    best: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0);
        ReplayBuffer { data: VecDeque::new(), capacity, best: 0 }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, i: usize) -> &Transition {
        &self.data[i]
    }

    pub fn best_index(&self) -> usize {
        self.best
    }

    pub fn best_reward(&self) -> Option<f64> {
        self.data.get(self.best).map(|t| t.reward)
    }

    /// The reward at the given quantile (0 = min, 1 = max) of the live
    /// entries, or `None` while empty.
    pub fn reward_quantile(&self, q: f64) -> Option<f64> {
        if self.data.is_empty() {
            return None;
        }
        let mut rewards: Vec<f64> = self.data.iter().map(|t| t.reward).collect();
        rewards.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
        let idx = ((rewards.len() - 1) as f64 * q.clamp(0.0, 1.0)) as usize;
        Some(rewards[idx])
    }

    pub fn push(&mut self, t: Transition) {
        if self.data.len() == self.capacity {
            self.data.pop_front();
            if self.best == 0 {
                self.rescan_best();
            } else {
                self.best -= 1;
            }
        }
        self.data.push_back(t);
        let last = self.data.len() - 1;
        if self.data[last].reward > self.data[self.best].reward {
            self.best = last;
        }
    }

    fn rescan_best(&mut self) {
        self.best = 0;
        for (i, t) in self.data.iter().enumerate() {
            if t.reward > self.data[self.best].reward {
                self.best = i;
            }
        }
    }

    /// Samples `batch` distinct transitions: the newest quarter, the
    /// highest-reward quarter (always including the single best entry), and
    /// uniform random for the rest. Fractions come from `fractions`;
    /// duplicates across pools are filled from the random pool.
    pub fn sample(
        &self,
        batch: usize,
        fractions: &ReplayFractions,
        rng: &mut impl Rng,
    ) -> Result<Vec<Transition>> {
        let n = self.data.len();
        if batch == 0 || batch > n {
            return Err(CoreError::Domain(alloc::format!(
                "cannot sample a batch of {batch} from {n} transitions"
            )));
        }
        let n_recent = ((batch as f64 * fractions.recent) as usize).min(batch);
        let n_best = (((batch as f64 * fractions.best) as usize).max(1)).min(batch);

        let mut chosen: Vec<usize> = Vec::with_capacity(batch);
        let mut seen: BTreeSet<usize> = BTreeSet::new();
        let take = |i: usize, chosen: &mut Vec<usize>, seen: &mut BTreeSet<usize>| {
            if seen.insert(i) {
                chosen.push(i);
            }
        };

        for k in 0..n_recent {
            take(n - 1 - k, &mut chosen, &mut seen);
        }

        let mut by_reward: Vec<usize> = (0..n).collect();
        by_reward.sort_by(|&a, &b| {
            self.data[b]
                .reward
                .partial_cmp(&self.data[a].reward)
                .unwrap_or(core::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        for &i in by_reward.iter().take(n_best) {
            take(i, &mut chosen, &mut seen);
        }

        // Partial Fisher-Yates over the leftovers for the random pool.
        let mut rest: Vec<usize> = (0..n).filter(|i| !seen.contains(i)).collect();
        while chosen.len() < batch {
            let pick = rng.random_range(0..rest.len());
            let i = rest.swap_remove(pick);
            take(i, &mut chosen, &mut seen);
        }

        Ok(chosen.into_iter().map(|i| self.data[i].clone()).collect())
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.data.iter()
    }
}
