//! Bandit policies that consume privatized binary feedback.
//!
//! Both policies see only [`PrivatizedReward`] bits — never raw rewards — so
//! their statistics estimate the privatized means, not the true ones. Each is
//! anytime (no horizon parameter); the bound calculators take the horizon
//! separately.

use rand::{Rng, RngCore};
use rand_distr::Distribution;

use crate::mechanisms::PrivatizedReward;

/// Index of the arm a policy chose this round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArmChoice(pub usize);

impl ArmChoice {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Common interface the experiment loop drives.
pub trait Policy {
    fn num_arms(&self) -> usize;
    /// Chooses the next arm. May draw from `rng`; must not mutate statistics.
    fn select(&self, rng: &mut dyn RngCore) -> ArmChoice;
    /// Records the privatized bit for the chosen arm.
    fn update(&mut self, arm: ArmChoice, y: PrivatizedReward);
}

/// Thompson Sampling over Beta posteriors on the privatized success rates.
///
/// Selection samples `theta_i ~ Beta(S_i + 1, F_i + 1)` for every arm in a
/// fixed order (one draw each) and plays the argmax. Exact posterior ties are
/// broken uniformly at random from the same stream, so seeded runs stay
/// deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TsState {
    successes: Vec<u64>,
    failures: Vec<u64>,
}

impl TsState {
    pub fn new(num_arms: usize) -> Self {
        assert!(num_arms > 0, "need at least one arm");
        TsState {
            successes: vec![0; num_arms],
            failures: vec![0; num_arms],
        }
    }

    pub fn successes(&self) -> &[u64] {
        &self.successes
    }

    pub fn failures(&self) -> &[u64] {
        &self.failures
    }

    /// Completed rounds: total successes plus failures.
    pub fn rounds(&self) -> u64 {
        self.successes.iter().sum::<u64>() + self.failures.iter().sum::<u64>()
    }
}

impl Policy for TsState {
    fn num_arms(&self) -> usize {
        self.successes.len()
    }

    fn select(&self, rng: &mut dyn RngCore) -> ArmChoice {
        let mut best = 0usize;
        let mut best_theta = f64::NEG_INFINITY;
        let mut ties: Vec<usize> = Vec::new();
        for i in 0..self.successes.len() {
            let dist = rand_distr::Beta::new(
                self.successes[i] as f64 + 1.0,
                self.failures[i] as f64 + 1.0,
            )
            .expect("posterior parameters are positive");
            let theta = dist.sample(rng);
            if theta > best_theta {
                best_theta = theta;
                best = i;
                ties.clear();
                ties.push(i);
            } else if theta == best_theta {
                ties.push(i);
            }
        }
        if ties.len() > 1 {
            best = ties[rng.random_range(0..ties.len())];
        }
        ArmChoice(best)
    }

    fn update(&mut self, arm: ArmChoice, y: PrivatizedReward) {
        if y.is_one() {
            self.successes[arm.index()] += 1;
        } else {
            self.failures[arm.index()] += 1;
        }
    }
}

/// Index value `mean + sqrt(2 ln t / n)`; non-increasing in `n` for fixed
/// mean and round.
fn ucb_index(mean: f64, pulls: u64, round: u64) -> f64 {
    mean + (2.0 * (round as f64).ln() / pulls as f64).sqrt()
}

/// UCB1 on privatized empirical means.
///
/// The first `N` rounds play each arm once in index order; afterwards the
/// policy plays the arm maximising `s_i/n_i + sqrt(2 ln t / n_i)`, breaking
/// ties by lowest index (which also keeps the initial sweep canonical).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UcbState {
    pulls: Vec<u64>,
    successes: Vec<u64>,
    round: u64,
}

impl UcbState {
    pub fn new(num_arms: usize) -> Self {
        assert!(num_arms > 0, "need at least one arm");
        UcbState {
            pulls: vec![0; num_arms],
            successes: vec![0; num_arms],
            round: 0,
        }
    }

    pub fn pulls(&self) -> &[u64] {
        &self.pulls
    }

    pub fn successes(&self) -> &[u64] {
        &self.successes
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    /// Privatized empirical mean of one arm (0 before its first pull).
    pub fn empirical_mean(&self, arm: usize) -> f64 {
        if self.pulls[arm] == 0 {
            0.0
        } else {
            self.successes[arm] as f64 / self.pulls[arm] as f64
        }
    }

    #[cfg(test)]
    fn with_counts(pulls: Vec<u64>, successes: Vec<u64>) -> Self {
        let round = pulls.iter().sum();
        UcbState {
            pulls,
            successes,
            round,
        }
    }
}

impl Policy for UcbState {
    fn num_arms(&self) -> usize {
        self.pulls.len()
    }

    fn select(&self, _rng: &mut dyn RngCore) -> ArmChoice {
        // Initialization sweep: lowest-index unplayed arm first.
        if let Some(i) = self.pulls.iter().position(|&n| n == 0) {
            return ArmChoice(i);
        }
        let mut best = 0usize;
        let mut best_index = f64::NEG_INFINITY;
        for i in 0..self.pulls.len() {
            let idx = ucb_index(self.empirical_mean(i), self.pulls[i], self.round);
            // Strict > keeps ties on the lowest index.
            if idx > best_index {
                best_index = idx;
                best = i;
            }
        }
        ArmChoice(best)
    }

    fn update(&mut self, arm: ArmChoice, y: PrivatizedReward) {
        self.pulls[arm.index()] += 1;
        if y.is_one() {
            self.successes[arm.index()] += 1;
        }
        self.round += 1;
    }
}
