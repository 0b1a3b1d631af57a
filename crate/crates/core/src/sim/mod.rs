//! Monte Carlo experiments over the feedback protocol.
//!
//! Trials are split into fixed-size chunks of consecutive trial indices. Each
//! chunk is accumulated sequentially and chunks are merged in index order, so
//! a report depends only on the configuration (including the seed), never on
//! the number of worker threads.

mod stats;
mod sweep;
mod tables;
mod verdict;

pub use stats::{wilson_interval, CompensatedSum, CorrelationSums, Diagnostics, MomentSums};
pub use sweep::{run_sweep, AxisRange, SweepAxes, SweepConfig, SweepRow};
pub use tables::{bounds_table, rates_table, BoundsTable, RatesTable, TetrationEntry};
pub use verdict::{compare_bounds, Verdict, VerdictRow};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{AffineChannel, EveTap, Lane, NoiseFamily, NoiseModel, RngStream, Role, ThermalWiretapParams};
use crate::infotheory::{
    awgn_capacity, chebyshev_error_bound, leakage_budget, sk_error_bound, sk_error_bound_ln, BoundQuery,
    LeakageBudget, RateQuery,
};
use crate::protocol::{make_codebook, make_schedule, run_protocol, Codebook, LaneNoise, SkSchedule, Transcript};
use crate::{Error, Result};

const CHUNK_TRIALS: u64 = 1024;
/// Root seed used when a configuration does not set one.
pub const DEFAULT_SEED: u64 = 0x5eed_f33d;

fn default_seed() -> u64 {
    DEFAULT_SEED
}

/// Forward channel of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelSpec {
    /// Thermal lossy bosonic channel seen through coherent encoding and homodyne detection.
    Thermal(ThermalWiretapParams<f64>),
    /// `a (X + N)` with an explicit noise law.
    Affine(AffineSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineSpec {
    pub gain: f64,
    pub noise: NoiseModel<f64>,
    pub n_s: f64,
}

impl ChannelSpec {
    pub fn mean_photons(&self) -> f64 {
        match self {
            ChannelSpec::Thermal(p) => p.n_s,
            ChannelSpec::Affine(a) => a.n_s,
        }
    }

    pub fn set_mean_photons(&mut self, n_s: f64) {
        match self {
            ChannelSpec::Thermal(p) => p.n_s = n_s,
            ChannelSpec::Affine(a) => a.n_s = n_s,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ChannelSpec::Thermal(p) => p.validate(),
            ChannelSpec::Affine(a) => {
                AffineChannel::new(a.gain, a.noise)?;
                if a.n_s.is_finite() && a.n_s > 0.0 {
                    Ok(())
                } else {
                    Err(Error::domain("n_s", a.n_s, "(0, inf)"))
                }
            }
        }
    }

    pub fn affine(&self) -> Result<AffineChannel<f64>> {
        self.validate()?;
        Ok(match self {
            ChannelSpec::Thermal(p) => p.as_affine(),
            ChannelSpec::Affine(a) => AffineChannel::new(a.gain, a.noise)?,
        })
    }
}

/// How each trial picks its message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MessageSelection {
    #[default]
    UniformRandom,
    RoundRobin,
    Fixed(u64),
}

/// One Monte Carlo experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub channel: ChannelSpec,
    pub tap: EveTap<f64>,
    /// Feedback rounds after the message round.
    pub n: u32,
    /// Nominal rate in bits per round.
    pub rate: f64,
    pub trials: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub message_selection: MessageSelection,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.channel.validate()?;
        self.tap.validate()?;
        if self.trials == 0 {
            return Err(Error::domain("trials", 0.0, "[1, inf)"));
        }
        make_codebook(self.n, self.rate, self.channel.mean_photons()).map(|_| ())
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Execution knobs that must not change the report.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    /// Keep every transcript (memory grows with `trials * n`).
    pub keep_transcripts: bool,
}

/// Outcome of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub trial: u64,
    pub message: u64,
    pub decoded: u64,
    pub theta: f64,
    /// `Theta_n - a theta(m)`.
    pub theta_error: f64,
    /// `X_i^2` for rounds `0..=n`.
    pub power: Vec<f64>,
    /// `Y_1..Y_n`.
    pub feedback: Vec<f64>,
    pub transcript: Option<Transcript<f64>>,
}

impl TrialResult {
    pub fn is_error(&self) -> bool {
        self.message != self.decoded
    }
}

/// A validated configuration with everything precomputed for running trials.
#[derive(Debug, Clone)]
pub struct Experiment {
    config: ExperimentConfig,
    codebook: Codebook<f64>,
    schedule: SkSchedule<f64>,
    channel: AffineChannel<f64>,
    stream: RngStream,
}

impl Experiment {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let channel = config.channel.affine()?;
        let n_s = config.channel.mean_photons();
        let codebook = make_codebook(config.n, config.rate, n_s)?;
        if let MessageSelection::Fixed(m) = config.message_selection {
            codebook.midpoint(m)?;
        }
        let schedule =
            make_schedule(config.n, n_s, channel.noise.variance, channel.gain)?.with_noise_mean(channel.noise.mean);
        Ok(Self {
            config: config.clone(),
            codebook,
            schedule,
            channel,
            stream: RngStream::new(config.seed),
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn codebook(&self) -> &Codebook<f64> {
        &self.codebook
    }

    pub fn schedule(&self) -> &SkSchedule<f64> {
        &self.schedule
    }

    pub fn channel(&self) -> &AffineChannel<f64> {
        &self.channel
    }

    fn pick_message(&self, trial: u64) -> u64 {
        let count = self.codebook.message_count();
        match self.config.message_selection {
            MessageSelection::UniformRandom => {
                let mut rng = self.stream.lane(Lane::new(trial, 0, Role::Message));
                rng.gen_range(1..=count)
            }
            MessageSelection::RoundRobin => 1 + trial % count,
            MessageSelection::Fixed(m) => m,
        }
    }

    /// Run trial `trial`; a pure function of the configuration and the index.
    pub fn run_trial(&self, trial: u64, keep_transcript: bool) -> Result<TrialResult> {
        if trial >= self.config.trials {
            return Err(Error::Config(format!(
                "trial {trial} outside [0, {})",
                self.config.trials
            )));
        }
        let message = self.pick_message(trial);
        let mut noise = LaneNoise::new(&self.stream, trial);
        let t = run_protocol(
            message,
            &self.codebook,
            &self.schedule,
            &self.channel,
            &self.config.tap,
            &mut noise,
        )?;
        let sent = self.codebook.midpoint(message)?;
        Ok(TrialResult {
            trial,
            message,
            decoded: t.decoded,
            theta: t.theta,
            theta_error: t.theta - self.channel.gain * sent,
            power: t.inputs.iter().map(|x| x * x).collect(),
            feedback: t.outputs[1..].to_vec(),
            transcript: keep_transcript.then_some(t),
        })
    }

    /// `a^2 Var[N] 2^(-2 n C)`.
    pub fn predicted_var_theta(&self) -> f64 {
        let var = self.channel.noise.variance;
        let capacity = self.capacity();
        self.channel.gain.powi(2) * var * 2f64.powf(-2.0 * self.config.n as f64 * capacity)
    }

    /// `C = 1/2 log2(1 + N_S / Var[N])`; equals `P_H` for thermal channels.
    pub fn capacity(&self) -> f64 {
        awgn_capacity(self.config.channel.mean_photons(), self.channel.noise.variance).expect("validated")
    }

    fn bound_query(&self) -> Result<BoundQuery<f64>> {
        let rates = match self.config.channel {
            ChannelSpec::Thermal(p) => p.rate_query(),
            ChannelSpec::Affine(a) => RateQuery::new(a.n_s, a.noise.variance, 1.0, 0.0)?,
        };
        // The codebook rounds nR up to whole bits, so bound the rate it actually carries.
        BoundQuery::new(self.config.n, self.codebook.realized_rate(), rates)
    }

    pub fn analytic_bound(&self) -> Result<AnalyticBound> {
        let b = self.bound_query()?;
        Ok(if self.channel.noise.family == NoiseFamily::Gaussian {
            AnalyticBound {
                kind: BoundKind::SchalkwijkKailath,
                value: sk_error_bound(&b),
                ln_value: sk_error_bound_ln(&b),
            }
        } else {
            let value = chebyshev_error_bound(self.channel.gain, self.channel.noise.variance, &b)?;
            AnalyticBound {
                kind: BoundKind::Chebyshev,
                value,
                ln_value: value.ln(),
            }
        })
    }

    pub fn leakage(&self) -> Result<Option<LeakageBudget<f64>>> {
        match self.config.channel {
            ChannelSpec::Thermal(p) => Ok(Some(leakage_budget(
                p.eta,
                p.n_th,
                p.n_s,
                p.sigma2(),
                self.config.tap.variance,
                self.config.n,
            )?)),
            ChannelSpec::Affine(_) => Ok(None),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    SchalkwijkKailath,
    Chebyshev,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticBound {
    pub kind: BoundKind,
    pub value: f64,
    /// Natural log of the bound; stays finite when `value` underflows.
    pub ln_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerAuditRow {
    pub round: u32,
    pub mean: f64,
    pub standard_error: f64,
    pub limit: f64,
}

/// Aggregated statistics of one experiment next to their analytic predictions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub noise_family: NoiseFamily,
    pub gain: f64,
    pub noise_variance: f64,
    /// `P_H` (thermal) or `C(Var[N], N_S)` (affine).
    pub capacity: f64,
    pub message_count: u64,
    pub realized_rate: f64,
    pub effective_rate: f64,
    pub trials: u64,
    pub error_count: u64,
    pub error_rate: f64,
    pub error_rate_ci: [f64; 2],
    pub empirical_var_theta: f64,
    pub predicted_var_theta: f64,
    pub analytic_error_bound: AnalyticBound,
    pub leakage: Option<LeakageBudget<f64>>,
    pub power_audit: Vec<PowerAuditRow>,
    pub diagnostics: Diagnostics,
    /// Excess kurtosis of `Theta_n - a theta(m)`, used to size the variance tolerance.
    #[serde(skip)]
    pub(crate) theta_kurtosis_for_tolerance: f64,
}

impl ExperimentReport {
    /// Pretty JSON with pinned field order.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone)]
struct Accumulator {
    trials: u64,
    errors: u64,
    theta: MomentSums,
    power: Vec<MomentSums>,
    feedback: CorrelationSums,
}

impl Accumulator {
    fn new(rounds: usize) -> Self {
        Self {
            trials: 0,
            errors: 0,
            theta: MomentSums::default(),
            power: vec![MomentSums::default(); rounds + 1],
            feedback: CorrelationSums::new(rounds),
        }
    }

    fn push(&mut self, r: &TrialResult) {
        self.trials += 1;
        self.errors += u64::from(r.is_error());
        self.theta.push(r.theta_error);
        for (acc, &p) in self.power.iter_mut().zip(&r.power) {
            acc.push(p);
        }
        self.feedback.push(&r.feedback);
    }

    fn merge(&mut self, other: &Self) {
        self.trials += other.trials;
        self.errors += other.errors;
        self.theta.merge(&other.theta);
        for (a, b) in self.power.iter_mut().zip(&other.power) {
            a.merge(b);
        }
        self.feedback.merge(&other.feedback);
    }

    fn diagnostics(&self) -> Diagnostics {
        Diagnostics {
            max_abs_offdiag_corr: self.feedback.max_abs_offdiag(),
            theta_skewness: self.theta.skewness(),
            theta_excess_kurtosis: self.theta.excess_kurtosis(),
            per_round_mean_power: self.power.iter().map(MomentSums::mean).collect(),
        }
    }
}

/// Sample diagnostics over a set of trial results (at least two, all with the
/// same number of rounds).
pub fn diagnostics(results: &[TrialResult]) -> Result<Diagnostics> {
    if results.len() < 2 {
        return Err(Error::Config("diagnostics need at least two trials".into()));
    }
    let rounds = results[0].feedback.len();
    if results.iter().any(|r| r.feedback.len() != rounds) {
        return Err(Error::Config("trials have different round counts".into()));
    }
    let mut acc = Accumulator::new(rounds);
    results.iter().for_each(|r| acc.push(r));
    Ok(acc.diagnostics())
}

/// Run trial `trial` of `config`.
pub fn run_trial(config: &ExperimentConfig, trial: u64) -> Result<TrialResult> {
    Experiment::new(config)?.run_trial(trial, false)
}

/// Run every trial of `config` and aggregate a report.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    run_experiment_with(config, &RunOptions::default()).map(|(report, _)| report)
}

/// Transcripts kept by a run, tagged with their trial index.
pub type KeptTranscripts = Vec<(u64, Transcript<f64>)>;

type ChunkOutput = (Accumulator, KeptTranscripts);

/// [`run_experiment`] with explicit thread count and optional transcript
/// retention. Transcripts come back in trial order.
pub fn run_experiment_with(
    config: &ExperimentConfig,
    options: &RunOptions,
) -> Result<(ExperimentReport, KeptTranscripts)> {
    let experiment = Experiment::new(config)?;
    let rounds = config.n as usize;
    let chunks = config.trials.div_ceil(CHUNK_TRIALS);

    let run_chunk = |chunk: u64| -> Result<ChunkOutput> {
        let start = chunk * CHUNK_TRIALS;
        let end = (start + CHUNK_TRIALS).min(config.trials);
        let mut acc = Accumulator::new(rounds);
        let mut kept = Vec::new();
        for trial in start..end {
            let mut r = experiment.run_trial(trial, options.keep_transcripts)?;
            acc.push(&r);
            if let Some(t) = r.transcript.take() {
                kept.push((trial, t));
            }
        }
        Ok((acc, kept))
    };
    let collect = || -> Result<Vec<ChunkOutput>> { (0..chunks).into_par_iter().map(run_chunk).collect() };
    let outputs = match options.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build()
            .map_err(|e| Error::Internal(format!("thread pool: {e}")))?
            .install(collect)?,
        None => collect()?,
    };

    let mut total = Accumulator::new(rounds);
    let mut transcripts = Vec::new();
    for (acc, kept) in outputs {
        total.merge(&acc);
        transcripts.extend(kept);
    }
    Ok((build_report(&experiment, &total)?, transcripts))
}

fn build_report(experiment: &Experiment, acc: &Accumulator) -> Result<ExperimentReport> {
    let config = experiment.config();
    let codebook = experiment.codebook();
    let channel = experiment.channel();
    let n_s = config.channel.mean_photons();
    let (lo, hi) = wilson_interval(acc.errors, acc.trials, 1.96)?;
    let power_audit = acc
        .power
        .iter()
        .enumerate()
        .map(|(round, m)| PowerAuditRow {
            round: round as u32,
            mean: m.mean(),
            standard_error: m.standard_error(),
            limit: n_s,
        })
        .collect();
    Ok(ExperimentReport {
        config: config.clone(),
        noise_family: channel.noise.family,
        gain: channel.gain,
        noise_variance: channel.noise.variance,
        capacity: experiment.capacity(),
        message_count: codebook.message_count(),
        realized_rate: codebook.realized_rate(),
        effective_rate: codebook.effective_rate(),
        trials: acc.trials,
        error_count: acc.errors,
        error_rate: acc.errors as f64 / acc.trials as f64,
        error_rate_ci: [lo, hi],
        empirical_var_theta: acc.theta.variance(),
        predicted_var_theta: experiment.predicted_var_theta(),
        analytic_error_bound: experiment.analytic_bound()?,
        leakage: experiment.leakage()?,
        power_audit,
        diagnostics: acc.diagnostics(),
        theta_kurtosis_for_tolerance: acc.theta.excess_kurtosis(),
    })
}
