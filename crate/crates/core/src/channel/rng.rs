//! Counter-based random lanes.
//!
//! Every draw in a simulation is addressed by `(root seed, trial, round, role)`.
//! The root seed keys a ChaCha8 generator, the trial index selects the ChaCha
//! stream and `(round, role)` selects a disjoint 2^32-word window of that
//! stream. A lane can therefore be reconstructed on any thread, in any order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Which party or purpose a lane feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    /// Noise of the forward channel Alice -> Bob.
    Forward,
    /// Noise of Eve's round-0 tap.
    Tap,
    /// Message selection for the trial.
    Message,
}

impl Role {
    fn index(self) -> u128 {
        match self {
            Role::Forward => 0,
            Role::Tap => 1,
            Role::Message => 2,
        }
    }
}

const ROLES_PER_ROUND: u128 = 4;
const WORDS_PER_LANE_LOG2: u32 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Lane {
    pub trial: u64,
    pub round: u32,
    pub role: Role,
}

impl Lane {
    pub fn new(trial: u64, round: u32, role: Role) -> Self {
        Self { trial, round, role }
    }
}

#[derive(Debug, Clone)]
pub struct RngStream {
    root_seed: u64,
    base: ChaCha8Rng,
}

impl RngStream {
    pub fn new(root_seed: u64) -> Self {
        Self {
            root_seed,
            base: ChaCha8Rng::seed_from_u64(root_seed),
        }
    }

    pub fn root_seed(&self) -> u64 {
        self.root_seed
    }

    /// Fresh generator positioned at the start of `lane`.
    pub fn lane(&self, lane: Lane) -> ChaCha8Rng {
        let mut rng = self.base.clone();
        rng.set_stream(lane.trial);
        let slot = u128::from(lane.round) * ROLES_PER_ROUND + lane.role.index();
        rng.set_word_pos(slot << WORDS_PER_LANE_LOG2);
        rng
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn draws(stream: &RngStream, lane: Lane, count: usize) -> Vec<f64> {
        let mut rng = stream.lane(lane);
        (0..count).map(|_| rng.gen::<f64>()).collect()
    }

    fn correlation(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
        let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
        cov / (va * vb).sqrt()
    }

    #[test]
    fn same_lane_same_sequence() {
        let lane = Lane::new(17, 3, Role::Forward);
        let a = draws(&RngStream::new(42), lane, 1000);
        let b = draws(&RngStream::new(42), lane, 1000);
        assert_eq!(a, b);
        assert_ne!(a, draws(&RngStream::new(43), lane, 1000));
    }

    #[test]
    fn lanes_differ_in_every_label() {
        let s = RngStream::new(7);
        let base = draws(&s, Lane::new(1, 1, Role::Forward), 8);
        assert_ne!(base, draws(&s, Lane::new(2, 1, Role::Forward), 8));
        assert_ne!(base, draws(&s, Lane::new(1, 2, Role::Forward), 8));
        assert_ne!(base, draws(&s, Lane::new(1, 1, Role::Tap), 8));
        assert_ne!(base, draws(&s, Lane::new(1, 1, Role::Message), 8));
    }

    #[test]
    fn distinct_lanes_are_uncorrelated() {
        let s = RngStream::new(2024);
        let lanes = [
            Lane::new(0, 0, Role::Forward),
            Lane::new(0, 0, Role::Tap),
            Lane::new(0, 1, Role::Forward),
            Lane::new(1, 0, Role::Forward),
            Lane::new(u64::MAX, u32::MAX, Role::Message),
        ];
        let seqs: Vec<Vec<f64>> = lanes.iter().map(|&l| draws(&s, l, 100_000)).collect();
        for i in 0..seqs.len() {
            for j in i + 1..seqs.len() {
                let r = correlation(&seqs[i], &seqs[j]);
                assert!(r.abs() < 0.01, "lanes {i},{j}: r = {r}");
            }
        }
    }
}
