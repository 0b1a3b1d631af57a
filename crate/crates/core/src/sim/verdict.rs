use std::fmt;

use serde::Serialize;

use super::ExperimentReport;
use crate::channel::NoiseFamily;

/// Standard errors allowed on every statistical comparison.
pub const SE_MULTIPLIER: f64 = 5.0;
/// Smallest relative tolerance on the variance ratio of `Theta_n`.
pub const VAR_RATIO_FLOOR: f64 = 0.05;
/// Below this `Var[Theta_n] / (a^2 (N_S + Var[N]))` the decoder error is
/// lost in the rounding of `Y_0` and the variance row is omitted.
const RESOLVABLE_VARIANCE_RATIO: f64 = 1e-20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictRow {
    pub quantity: String,
    pub empirical: f64,
    pub predicted: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub rows: Vec<VerdictRow>,
    pub pass: bool,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<28} {:>14} {:>14} {:>12}  verdict",
            "quantity", "empirical", "predicted", "tolerance"
        )?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<28} {:>14.6e} {:>14.6e} {:>12.3e}  {}",
                r.quantity,
                r.empirical,
                r.predicted,
                r.tolerance,
                if r.pass { "PASS" } else { "FAIL" }
            )?;
        }
        write!(f, "overall: {}", if self.pass { "PASS" } else { "FAIL" })
    }
}

/// Compare a report's empirical quantities with their analytic predictions.
///
/// Gaussianity rows (feedback correlation, skewness and kurtosis of
/// `Theta_n`) only appear for Gaussian noise; for other families only
/// second-moment identities are predicted.
pub fn compare_bounds(report: &ExperimentReport) -> Verdict {
    let trials = report.trials as f64;
    let mut rows = Vec::new();

    let bound = report.analytic_error_bound.value;
    let p = bound.clamp(0.0, 1.0);
    let tol = SE_MULTIPLIER * (p * (1.0 - p) / trials).sqrt();
    rows.push(VerdictRow {
        quantity: "error_rate".into(),
        empirical: report.error_rate,
        predicted: bound,
        tolerance: tol,
        pass: report.error_rate <= bound + tol,
    });

    let n_s = report.config.channel.mean_photons();
    let scale = report.gain.powi(2) * (n_s + report.noise_variance);
    if report.predicted_var_theta > RESOLVABLE_VARIANCE_RATIO * scale && report.trials >= 2 {
        let ratio = report.empirical_var_theta / report.predicted_var_theta;
        let kurt = report.theta_kurtosis_for_tolerance;
        let se = ((kurt + 2.0).max(0.0) / trials).sqrt();
        let tol = (SE_MULTIPLIER * se).max(VAR_RATIO_FLOOR);
        rows.push(VerdictRow {
            quantity: "var_theta_ratio".into(),
            empirical: ratio,
            predicted: 1.0,
            tolerance: tol,
            pass: (ratio - 1.0).abs() <= tol,
        });
    }

    for audit in &report.power_audit {
        let (tol, pass) = if audit.round == 0 {
            // Every midpoint lies inside [-sqrt(N_S), sqrt(N_S)].
            (0.0, audit.mean <= audit.limit)
        } else {
            // Constant powers (bounded noise) have zero standard error; leave rounding room.
            let tol = (SE_MULTIPLIER * audit.standard_error).max(1e-12 * audit.limit);
            (tol, (audit.mean - audit.limit).abs() <= tol)
        };
        rows.push(VerdictRow {
            quantity: format!("power_round_{}", audit.round),
            empirical: audit.mean,
            predicted: audit.limit,
            tolerance: tol,
            pass,
        });
    }

    if report.noise_family == NoiseFamily::Gaussian {
        let d = &report.diagnostics;
        if let Some(corr) = d.max_abs_offdiag_corr {
            let tol = SE_MULTIPLIER / trials.sqrt();
            rows.push(VerdictRow {
                quantity: "max_abs_offdiag_corr".into(),
                empirical: corr,
                predicted: 0.0,
                tolerance: tol,
                pass: corr < tol,
            });
        }
        let tol = SE_MULTIPLIER * (6.0 / trials).sqrt();
        rows.push(VerdictRow {
            quantity: "theta_skewness".into(),
            empirical: d.theta_skewness,
            predicted: 0.0,
            tolerance: tol,
            pass: d.theta_skewness.abs() < tol,
        });
        let tol = SE_MULTIPLIER * (24.0 / trials).sqrt();
        rows.push(VerdictRow {
            quantity: "theta_excess_kurtosis".into(),
            empirical: d.theta_excess_kurtosis,
            predicted: 0.0,
            tolerance: tol,
            pass: d.theta_excess_kurtosis.abs() < tol,
        });
    }

    let pass = rows.iter().all(|r| r.pass);
    Verdict { rows, pass }
}
