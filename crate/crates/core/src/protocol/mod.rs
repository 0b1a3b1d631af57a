//! The feedback protocol: only round 0 carries the message, and rounds
//! `1..=n` let Bob refine his estimate of the round-0 noise with Alice's help.

mod codebook;
mod oracle;
mod schedule;
mod state;

pub use codebook::{make_codebook, Codebook, MAX_CODEBOOK_BITS};
pub use oracle::mmse_oracle;
#[doc(hidden)]
pub use schedule::make_schedule_perturbed;
pub use schedule::{make_schedule, SkSchedule};
pub use state::{AliceState, BobState, Decision};

use serde::Serialize;

use crate::channel::{AffineChannel, EveTap, Lane, NoiseModel, RngStream, Role};
use crate::{Error, Real, Result};

/// Supplies the noise realizations of one protocol run.
pub trait NoiseSource<T> {
    /// Forward-channel noise of round `round` (0 is the message round).
    fn forward_noise(&mut self, model: &NoiseModel<T>, round: u32) -> T;
    /// Eve's round-0 tap noise.
    fn tap_noise(&mut self, tap: &EveTap<T>) -> T;
}

/// Draws every round from its own counter-based lane of one trial.
#[derive(Debug, Clone, Copy)]
pub struct LaneNoise<'a> {
    stream: &'a RngStream,
    trial: u64,
}

impl<'a> LaneNoise<'a> {
    pub fn new(stream: &'a RngStream, trial: u64) -> Self {
        Self { stream, trial }
    }
}

impl<T: Real> NoiseSource<T> for LaneNoise<'_> {
    fn forward_noise(&mut self, model: &NoiseModel<T>, round: u32) -> T {
        let mut rng = self.stream.lane(Lane::new(self.trial, round, Role::Forward));
        model.sample(&mut rng)
    }

    fn tap_noise(&mut self, tap: &EveTap<T>) -> T {
        let mut rng = self.stream.lane(Lane::new(self.trial, 0, Role::Tap));
        tap.sample_noise(&mut rng)
    }
}

/// Replays fixed noise values; missing rounds get the model's mean.
#[derive(Debug, Clone, Default)]
pub struct FixedNoise<T> {
    pub forward: Vec<T>,
    pub tap: T,
}

impl<T: Real> NoiseSource<T> for FixedNoise<T> {
    fn forward_noise(&mut self, model: &NoiseModel<T>, round: u32) -> T {
        self.forward.get(round as usize).copied().unwrap_or(model.mean)
    }

    fn tap_noise(&mut self, _tap: &EveTap<T>) -> T {
        self.tap
    }
}

/// Everything that happened in one run, for auditing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Transcript<T> {
    pub message: u64,
    pub decoded: u64,
    /// `X_0..X_n`.
    pub inputs: Vec<T>,
    /// Realized forward noise `N_0..N_n`.
    pub noise: Vec<T>,
    /// `Y_0..Y_n`.
    pub outputs: Vec<T>,
    /// Eve's round-0 observation `W_0`.
    pub tap_output: T,
    /// `Theta_n`, in received units.
    pub theta: T,
    /// Alice's estimate of `N_0` after rounds `1..=n`.
    pub alice_estimates: Vec<T>,
    /// Bob's estimate of `N_0` after rounds `1..=n`.
    pub bob_estimates: Vec<T>,
}

impl<T: Real> Transcript<T> {
    pub fn is_error(&self) -> bool {
        self.message != self.decoded
    }

    /// CSV rows: one per round, then one with the decision.
    pub fn csv_rows(&self, trial: u64) -> Vec<TranscriptRow<T>> {
        let mut rows: Vec<TranscriptRow<T>> = (0..self.inputs.len())
            .map(|i| TranscriptRow {
                trial,
                i: Some(i as u32),
                x: Some(self.inputs[i]),
                n: Some(self.noise[i]),
                y: Some(self.outputs[i]),
                theta_n: None,
                m: None,
                m_hat: None,
            })
            .collect();
        rows.push(TranscriptRow {
            trial,
            i: None,
            x: None,
            n: None,
            y: None,
            theta_n: Some(self.theta),
            m: Some(self.message),
            m_hat: Some(self.decoded),
        });
        rows
    }
}

/// One line of the transcript CSV (`trial,i,x,n,y,theta_n,m,m_hat`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TranscriptRow<T> {
    pub trial: u64,
    pub i: Option<u32>,
    pub x: Option<T>,
    pub n: Option<T>,
    pub y: Option<T>,
    pub theta_n: Option<T>,
    pub m: Option<u64>,
    pub m_hat: Option<u64>,
}

fn check_compatible<T: Real>(
    codebook: &Codebook<T>,
    schedule: &SkSchedule<T>,
    channel: &AffineChannel<T>,
) -> Result<()> {
    if codebook.blocklength() != schedule.rounds() {
        return Err(Error::Config(format!(
            "codebook blocklength {} != schedule rounds {}",
            codebook.blocklength(),
            schedule.rounds()
        )));
    }
    if codebook.amplitude() != schedule.mean_photons().sqrt() {
        return Err(Error::Config("codebook and schedule use different N_S".into()));
    }
    if schedule.gain() != channel.gain
        || schedule.noise_variance() != channel.noise.variance
        || schedule.noise_mean() != channel.noise.mean
    {
        return Err(Error::Config(
            "schedule gain, noise variance or noise mean differ from the channel".into(),
        ));
    }
    Ok(())
}

/// Run the full protocol for message `m`.
///
/// Round 0 sends `theta(m)`; Bob's observation goes back to Alice noiselessly
/// and to Eve through the tap. Rounds `1..=n` alternate Alice's transmission,
/// the forward channel and Bob's update, for `n + 1` channel uses in total.
pub fn run_protocol<T: Real, S: NoiseSource<T> + ?Sized>(
    message: u64,
    codebook: &Codebook<T>,
    schedule: &SkSchedule<T>,
    channel: &AffineChannel<T>,
    tap: &EveTap<T>,
    noise: &mut S,
) -> Result<Transcript<T>> {
    check_compatible(codebook, schedule, channel)?;
    let rounds = schedule.rounds() as usize;

    let x0 = codebook.midpoint(message)?;
    let n0 = noise.forward_noise(&channel.noise, 0);
    let y0 = channel.transmit_with_noise(x0, n0);
    let w0 = tap.transmit_with_noise(y0, noise.tap_noise(tap));

    let mut inputs = Vec::with_capacity(rounds + 1);
    let mut realized = Vec::with_capacity(rounds + 1);
    let mut outputs = Vec::with_capacity(rounds + 1);
    let mut alice_estimates = Vec::with_capacity(rounds);
    let mut bob_estimates = Vec::with_capacity(rounds);
    inputs.push(x0);
    realized.push(n0);
    outputs.push(y0);

    let mut alice = AliceState::new(schedule, x0, y0);
    let mut bob = BobState::new(schedule, y0);
    let mut feedback = y0;
    for round in 1..=schedule.rounds() {
        let x = alice.alice_round(feedback)?;
        if round > 1 {
            alice_estimates.push(alice.estimate());
        }
        let n = noise.forward_noise(&channel.noise, round);
        let y = channel.transmit_with_noise(x, n);
        bob.bob_round(y)?;
        bob_estimates.push(bob.estimate());
        inputs.push(x);
        realized.push(n);
        outputs.push(y);
        feedback = y;
    }
    alice.finish(feedback)?;
    alice_estimates.push(alice.estimate());

    let decision = bob.decode(codebook)?;
    Ok(Transcript {
        message,
        decoded: decision.message,
        inputs,
        noise: realized,
        outputs,
        tap_output: w0,
        theta: decision.theta,
        alice_estimates,
        bob_estimates,
    })
}
