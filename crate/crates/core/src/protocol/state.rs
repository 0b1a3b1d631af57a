use super::{Codebook, SkSchedule};
use crate::{Error, Real, Result};

/// Alice's side of the feedback rounds.
///
/// Alice knows her round-0 input and, through noiseless feedback, Bob's round-0
/// observation, so she knows `N_0` exactly. In round `i` she sends
/// `gamma_i (N_0 - E[N_0 | Y^{i-1}])`.
#[derive(Debug, Clone)]
pub struct AliceState<'a, T> {
    schedule: &'a SkSchedule<T>,
    first_noise: T,
    estimate: T,
    sent: u32,
    absorbed: u32,
}

impl<'a, T: Real> AliceState<'a, T> {
    /// State after round 0, given `X_0` and the fed-back `Y_0`.
    pub fn new(schedule: &'a SkSchedule<T>, first_input: T, first_observation: T) -> Self {
        let first_noise = first_observation / schedule.gain() - first_input;
        Self::from_first_noise(schedule, first_noise)
    }

    pub fn from_first_noise(schedule: &'a SkSchedule<T>, first_noise: T) -> Self {
        Self {
            schedule,
            first_noise,
            estimate: schedule.noise_mean(),
            sent: 0,
            absorbed: 0,
        }
    }

    pub fn first_noise(&self) -> T {
        self.first_noise
    }

    /// Current `E[N_0 | Y^k]` for the `k` feedback values absorbed so far.
    pub fn estimate(&self) -> T {
        self.estimate
    }

    /// Index of the next round to transmit.
    pub fn round(&self) -> u32 {
        self.sent + 1
    }

    fn absorb(&mut self, received: T) {
        self.absorbed += 1;
        let k = self.schedule.estimator_gain(self.absorbed);
        self.estimate = self.estimate + k * self.schedule.normalize(received);
    }

    /// Emit `X_i`. `feedback` is `Y_{i-1}`; in round 1 the prior mean is the
    /// estimate and `feedback` is not used.
    pub fn alice_round(&mut self, feedback: T) -> Result<T> {
        let round = self.sent + 1;
        if round > self.schedule.rounds() {
            return Err(Error::ProtocolOrder {
                round,
                rounds: self.schedule.rounds(),
            });
        }
        if round > 1 {
            self.absorb(feedback);
        }
        self.sent = round;
        Ok(self.schedule.amplifier_gain(round) * (self.first_noise - self.estimate))
    }

    /// Absorb the last feedback value `Y_n` so Alice's estimate matches Bob's.
    pub fn finish(&mut self, feedback: T) -> Result<()> {
        let rounds = self.schedule.rounds();
        if self.sent != rounds || self.absorbed + 1 != rounds {
            return Err(Error::ProtocolOrder {
                round: self.absorbed + 1,
                rounds,
            });
        }
        self.absorb(feedback);
        Ok(())
    }
}

/// Bob's side: he keeps `Y_0` and refines his estimate of `N_0` each round.
#[derive(Debug, Clone)]
pub struct BobState<'a, T> {
    schedule: &'a SkSchedule<T>,
    first_observation: T,
    estimate: T,
    received: u32,
}

/// Bob's final statistic and decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision<T> {
    /// `Theta_n = Y_0 - a E[N_0 | Y^n]`, in received units.
    pub theta: T,
    pub message: u64,
}

impl<'a, T: Real> BobState<'a, T> {
    pub fn new(schedule: &'a SkSchedule<T>, first_observation: T) -> Self {
        Self {
            schedule,
            first_observation,
            estimate: schedule.noise_mean(),
            received: 0,
        }
    }

    pub fn first_observation(&self) -> T {
        self.first_observation
    }

    pub fn estimate(&self) -> T {
        self.estimate
    }

    pub fn rounds_received(&self) -> u32 {
        self.received
    }

    pub fn is_complete(&self) -> bool {
        self.received == self.schedule.rounds()
    }

    /// Absorb `Y_i`: `N_hat <- N_hat + K_i Y_i`.
    pub fn bob_round(&mut self, received: T) -> Result<()> {
        let round = self.received + 1;
        if round > self.schedule.rounds() {
            return Err(Error::ProtocolOrder {
                round,
                rounds: self.schedule.rounds(),
            });
        }
        self.received = round;
        let k = self.schedule.estimator_gain(round);
        self.estimate = self.estimate + k * self.schedule.normalize(received);
        Ok(())
    }

    pub fn theta(&self) -> T {
        self.first_observation - self.schedule.gain() * self.estimate
    }

    /// Nearest codeword to `Theta_n / a` once all rounds are in.
    pub fn decode(&self, codebook: &Codebook<T>) -> Result<Decision<T>> {
        if !self.is_complete() {
            return Err(Error::ProtocolOrder {
                round: self.received + 1,
                rounds: self.schedule.rounds(),
            });
        }
        let theta = self.theta();
        Ok(Decision {
            theta,
            message: codebook.nearest(theta / self.schedule.gain()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::super::{make_codebook, make_schedule};
    use super::*;

    #[test]
    fn alice_first_round() {
        let s = make_schedule(3, 3.0f64, 1.0, 1.0).unwrap();
        let mut alice = AliceState::from_first_noise(&s, 0.5);
        let x1 = alice.alice_round(123.0).unwrap();
        assert!((x1 - 0.8660254037844386).abs() < 1e-15);
        assert_eq!(alice.estimate(), 0.0);
    }

    #[test]
    fn alice_second_round_hand_recursion() {
        let s = make_schedule(3, 3.0f64, 1.0, 1.0).unwrap();
        let mut alice = AliceState::from_first_noise(&s, 0.5);
        alice.alice_round(0.0).unwrap();
        let x2 = alice.alice_round(2.0).unwrap();
        assert!((alice.estimate() - 0.8660254037844386).abs() < 1e-15);
        assert!((x2 + 1.2679491924311228).abs() < 1e-14);
    }

    #[test]
    fn perfect_knowledge_sends_nothing() {
        let s = make_schedule(2, 3.0f64, 1.0, 1.0).unwrap().with_noise_mean(0.25);
        let mut alice = AliceState::from_first_noise(&s, 0.25);
        assert_eq!(alice.alice_round(0.0).unwrap(), 0.0);
    }

    #[test]
    fn alice_derives_first_noise_from_feedback() {
        let s = make_schedule(2, 3.0f64, 1.0, 2.0).unwrap();
        let alice = AliceState::new(&s, 0.5, 2.0 * (0.5 + 0.125));
        assert_eq!(alice.first_noise(), 0.125);
    }

    #[test]
    fn bob_rounds() {
        let s = make_schedule(3, 3.0f64, 1.0, 1.0).unwrap();
        let mut bob = BobState::new(&s, 0.0);
        for _ in 0..3 {
            bob.bob_round(0.0).unwrap();
        }
        assert_eq!(bob.estimate(), 0.0);

        let mut bob = BobState::new(&s, 0.0);
        bob.bob_round(2.0).unwrap();
        assert!((bob.estimate() - 0.8660254037844386).abs() < 1e-15);
    }

    #[test]
    fn estimates_agree_exactly() {
        let s = make_schedule(4, 2.0f64, 0.6, 1.0).unwrap();
        let mut alice = AliceState::from_first_noise(&s, -0.3);
        let mut bob = BobState::new(&s, 0.1);
        let noise = [0.4, -1.1, 0.05, 0.7];
        let mut feedback = 0.1;
        for (i, n) in noise.iter().enumerate() {
            let x = alice.alice_round(feedback).unwrap();
            if i > 0 {
                assert_eq!(alice.estimate().to_bits(), bob.estimate().to_bits());
            }
            feedback = x + n;
            bob.bob_round(feedback).unwrap();
        }
        alice.finish(feedback).unwrap();
        assert_eq!(alice.estimate().to_bits(), bob.estimate().to_bits());
    }

    #[test]
    fn out_of_order_calls_fail() {
        let s = make_schedule(1, 1.0f64, 1.0, 1.0).unwrap();
        let cb = make_codebook(1, 1.0, 1.0).unwrap();
        let mut alice = AliceState::from_first_noise(&s, 0.0);
        assert!(alice.finish(0.0).is_err());
        alice.alice_round(0.0).unwrap();
        assert!(matches!(
            alice.alice_round(0.0),
            Err(Error::ProtocolOrder { round: 2, rounds: 1 })
        ));
        alice.finish(0.0).unwrap();
        assert!(alice.finish(0.0).is_err());

        let mut bob = BobState::new(&s, 0.0);
        assert!(bob.decode(&cb).is_err());
        bob.bob_round(0.0).unwrap();
        assert!(bob.bob_round(0.0).is_err());
        assert!(bob.decode(&cb).is_ok());
    }

    #[test]
    fn decode_uses_nearest_midpoint() {
        let s = make_schedule(2, 1.0f64, 1.0, 1.0).unwrap();
        let cb = make_codebook(2, 1.0, 1.0).unwrap();
        for (y0, expected) in [(0.2, 3), (0.0, 2), (3.0, 4)] {
            let mut bob = BobState::new(&s, y0);
            bob.bob_round(0.0).unwrap();
            bob.bob_round(0.0).unwrap();
            let d = bob.decode(&cb).unwrap();
            assert_eq!(d.theta, y0);
            assert_eq!(d.message, expected);
        }
    }
}
