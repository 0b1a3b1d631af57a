use serde::{Deserialize, Serialize};

use super::{compare_bounds, run_experiment_with, ChannelSpec, ExperimentConfig, RunOptions};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisRange {
    pub start: f64,
    pub stop: f64,
    pub steps: u32,
}

impl AxisRange {
    /// `steps` evenly spaced points from `start` to `stop` inclusive.
    pub fn points(&self) -> Vec<f64> {
        match self.steps {
            0 => Vec::new(),
            1 => vec![self.start],
            s => (0..s)
                .map(|k| self.start + (self.stop - self.start) * k as f64 / (s - 1) as f64)
                .collect(),
        }
    }
}

/// Exactly one of the axes must be present.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxes {
    pub n: Option<AxisRange>,
    pub rate: Option<AxisRange>,
    pub n_s: Option<AxisRange>,
    pub eta: Option<AxisRange>,
    pub trials: Option<AxisRange>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub base: ExperimentConfig,
    pub sweep: SweepAxes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Axis {
    N,
    Rate,
    MeanPhotons,
    Eta,
    Trials,
}

impl Axis {
    fn name(self) -> &'static str {
        match self {
            Axis::N => "n",
            Axis::Rate => "rate",
            Axis::MeanPhotons => "n_s",
            Axis::Eta => "eta",
            Axis::Trials => "trials",
        }
    }
}

impl SweepAxes {
    fn single(&self) -> Result<(Axis, AxisRange)> {
        let present: Vec<(Axis, AxisRange)> = [
            (Axis::N, self.n),
            (Axis::Rate, self.rate),
            (Axis::MeanPhotons, self.n_s),
            (Axis::Eta, self.eta),
            (Axis::Trials, self.trials),
        ]
        .into_iter()
        .filter_map(|(a, r)| r.map(|r| (a, r)))
        .collect();
        match present.as_slice() {
            [one] => Ok(*one),
            [] => Err(Error::Config("sweep needs one axis".into())),
            many => Err(Error::Config(format!(
                "sweep over one axis at a time; got {}",
                many.iter().map(|(a, _)| a.name()).collect::<Vec<_>>().join(", ")
            ))),
        }
    }
}

/// One sweep point: the scalar fields of its report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub axis: &'static str,
    pub value: f64,
    pub n: u32,
    pub rate: f64,
    pub n_s: f64,
    pub eta: Option<f64>,
    pub sigma2: f64,
    pub capacity: f64,
    pub trials: u64,
    pub message_count: u64,
    pub realized_rate: f64,
    pub effective_rate: f64,
    pub error_count: u64,
    pub error_rate: f64,
    pub error_rate_ci_lo: f64,
    pub error_rate_ci_hi: f64,
    pub empirical_var_theta: f64,
    pub predicted_var_theta: f64,
    pub analytic_error_bound: f64,
    pub leakage_per_mode_bits: Option<f64>,
    pub max_abs_offdiag_corr: Option<f64>,
    pub theta_skewness: f64,
    pub theta_excess_kurtosis: f64,
    pub verdict_pass: bool,
}

fn as_count(axis: Axis, value: f64) -> Result<u64> {
    let rounded = value.round();
    if !(rounded >= 1.0 && rounded <= u32::MAX as f64) {
        return Err(Error::Config(format!("{} = {value} is not a positive integer", axis.name())));
    }
    Ok(rounded as u64)
}

fn config_at(base: &ExperimentConfig, axis: Axis, value: f64) -> Result<ExperimentConfig> {
    let mut cfg = base.clone();
    match axis {
        Axis::N => cfg.n = as_count(axis, value)? as u32,
        Axis::Rate => cfg.rate = value,
        Axis::MeanPhotons => cfg.channel.set_mean_photons(value),
        Axis::Eta => match &mut cfg.channel {
            ChannelSpec::Thermal(p) => p.eta = value,
            ChannelSpec::Affine(_) => {
                return Err(Error::Config("eta can only be swept on a thermal channel".into()))
            }
        },
        Axis::Trials => cfg.trials = as_count(axis, value)?,
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Run one experiment per point of the single swept axis.
pub fn run_sweep(config: &SweepConfig, options: &RunOptions) -> Result<Vec<SweepRow>> {
    let (axis, range) = config.sweep.single()?;
    let points = range.points();
    if points.is_empty() {
        return Err(Error::Config("sweep axis needs steps >= 1".into()));
    }
    let options = RunOptions {
        keep_transcripts: false,
        ..options.clone()
    };
    points
        .into_iter()
        .map(|value| {
            let cfg = config_at(&config.base, axis, value)?;
            let (report, _) = run_experiment_with(&cfg, &options)?;
            let verdict = compare_bounds(&report);
            Ok(SweepRow {
                axis: axis.name(),
                value,
                n: cfg.n,
                rate: cfg.rate,
                n_s: cfg.channel.mean_photons(),
                eta: match cfg.channel {
                    ChannelSpec::Thermal(p) => Some(p.eta),
                    ChannelSpec::Affine(_) => None,
                },
                sigma2: report.noise_variance,
                capacity: report.capacity,
                trials: report.trials,
                message_count: report.message_count,
                realized_rate: report.realized_rate,
                effective_rate: report.effective_rate,
                error_count: report.error_count,
                error_rate: report.error_rate,
                error_rate_ci_lo: report.error_rate_ci[0],
                error_rate_ci_hi: report.error_rate_ci[1],
                empirical_var_theta: report.empirical_var_theta,
                predicted_var_theta: report.predicted_var_theta,
                analytic_error_bound: report.analytic_error_bound.value,
                leakage_per_mode_bits: report.leakage.map(|l| l.per_mode_bits),
                max_abs_offdiag_corr: report.diagnostics.max_abs_offdiag_corr,
                theta_skewness: report.diagnostics.theta_skewness,
                theta_excess_kurtosis: report.diagnostics.theta_excess_kurtosis,
                verdict_pass: verdict.pass,
            })
        })
        .collect()
}
