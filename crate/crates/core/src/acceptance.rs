//! The built-in verification suite behind `skwire verify`.
//!
//! Each criterion runs at pinned parameters and a pinned seed and reports a
//! single pass/fail outcome. Monte Carlo criteria use 10^5 trials.

use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channel::{AffineChannel, EveTap, NoiseFamily, NoiseModel, ThermalWiretapParams};
use crate::infotheory::{
    awgn_capacity, induced_sigma2, leakage_budget, phi, phi_inverse, sk_error_bound, tetration_bound_for_order,
    tetration_order, BoundQuery, RateQuery, TetrationBound,
};
use crate::protocol::{make_codebook, make_schedule_perturbed, mmse_oracle, run_protocol, FixedNoise};
use crate::sim::{
    run_experiment_with, AffineSpec, ChannelSpec, ExperimentConfig, ExperimentReport, MessageSelection, RunOptions,
};
pub use crate::sim::DEFAULT_SEED;
use crate::Result;

pub const TRIALS: u64 = 100_000;

#[derive(Debug, Clone)]
pub struct AcceptanceOptions {
    pub seed: u64,
    /// Threads for the Monte Carlo criteria; `None` uses the global pool.
    pub threads: Option<usize>,
    /// Second thread count used by the determinism check.
    pub alt_threads: usize,
    /// Relative error injected into the schedule contraction (0 in real runs).
    pub schedule_perturbation: f64,
}

impl Default for AcceptanceOptions {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            threads: None,
            alt_threads: 4,
            schedule_perturbation: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:>2} {} {:<34} {:>7.2}s  {}",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }
}

pub const CRITERIA: [(u8, &str); 10] = [
    (1, "conditional-variance identity"),
    (2, "recursion/oracle equivalence"),
    (3, "decoder statistic variance"),
    (4, "error-probability bound"),
    (5, "power constraint"),
    (6, "non-gaussian affine channels"),
    (7, "feedback independence, gaussianity"),
    (8, "leakage budget"),
    (9, "tetration machinery"),
    (10, "determinism across thread counts"),
];

/// Run criterion `id` (1..=10).
pub fn run_criterion(id: u8, opts: &AcceptanceOptions) -> CriterionOutcome {
    let start = Instant::now();
    let result = match id {
        1 => criterion_1(opts),
        2 => criterion_2(opts),
        3 => criterion_3(opts),
        4 => criterion_4(opts),
        5 => criterion_5(opts),
        6 => criterion_6(opts),
        7 => criterion_7(opts),
        8 => criterion_8(),
        9 => criterion_9(opts),
        10 => criterion_10(opts),
        _ => Ok((false, format!("no criterion {id}"))),
    };
    let (pass, detail) = result.unwrap_or_else(|e| (false, format!("error: {e}")));
    let name = CRITERIA.iter().find(|(i, _)| *i == id).map_or("unknown", |(_, n)| n);
    CriterionOutcome {
        id,
        name,
        pass,
        detail,
        elapsed: start.elapsed(),
    }
}

pub fn run_all(opts: &AcceptanceOptions) -> Vec<CriterionOutcome> {
    CRITERIA.iter().map(|(id, _)| run_criterion(*id, opts)).collect()
}

type Check = Result<(bool, String)>;

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn criterion_1(opts: &AcceptanceOptions) -> Check {
    let mut worst = 0.0f64;
    for eta in [0.1, 0.3, 0.5, 0.8, 1.0] {
        for n_th in [0.0, 0.5, 2.0] {
            for n_s in [0.5, 3.0, 10.0] {
                for n in [1u32, 10, 50] {
                    let sigma2 = induced_sigma2(eta, n_th)?;
                    let s = make_schedule_perturbed(n, n_s, sigma2, 1.0, opts.schedule_perturbation)?;
                    let p_h = awgn_capacity(n_s, sigma2)?;
                    let expected = sigma2 * (-2.0 * n as f64 * p_h).exp2();
                    worst = worst.max(relative(s.final_variance(), expected));
                }
            }
        }
    }
    Ok((worst < 1e-12, format!("max relative error {worst:.3e} over 135 points (tol 1e-12)")))
}

fn criterion_2(opts: &AcceptanceOptions) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x02);
    let tap = EveTap::new(1.0)?;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.gen_range(1..=20u32);
        let n_s: f64 = rng.gen_range(0.2..10.0);
        let sigma2: f64 = rng.gen_range(0.2..5.0);
        let channel = AffineChannel::new(1.0, NoiseModel::gaussian(sigma2)?)?;
        let codebook = make_codebook(n, 0.5, n_s)?;
        let schedule = make_schedule_perturbed(n, n_s, sigma2, 1.0, opts.schedule_perturbation)?;
        let message = rng.gen_range(1..=codebook.message_count());
        let mut noise = FixedNoise {
            forward: (0..=n).map(|_| sigma2.sqrt() * rng.sample::<f64, _>(StandardNormal)).collect(),
            tap: 0.0,
        };
        let t = run_protocol(message, &codebook, &schedule, &channel, &tap, &mut noise)?;
        let oracle = mmse_oracle(&t.outputs[1..], &schedule)?;
        let recursive = *t.bob_estimates.last().expect("n >= 1");
        // Scale by the noise standard deviation so estimates near zero do not blow up the ratio.
        let err = (recursive - oracle).abs() / oracle.abs().max(sigma2.sqrt());
        worst = worst.max(err);
    }
    Ok((worst < 1e-9, format!("max relative error {worst:.3e} over 100 transcripts (tol 1e-9)")))
}

fn thermal_reference(n: u32, rate: f64, seed: u64) -> Result<ExperimentConfig> {
    // eta = 1/4, n_th = 0 gives sigma2 = 1 and P_H = 1.
    Ok(ExperimentConfig {
        channel: ChannelSpec::Thermal(ThermalWiretapParams::new(0.25, 0.0, 3.0)?),
        tap: EveTap::new(1.0)?,
        n,
        rate,
        trials: TRIALS,
        seed,
        message_selection: MessageSelection::UniformRandom,
    })
}

fn affine_reference(family: NoiseFamily, gain: f64, n: u32, rate: f64, seed: u64) -> Result<ExperimentConfig> {
    Ok(ExperimentConfig {
        channel: ChannelSpec::Affine(AffineSpec {
            gain,
            noise: NoiseModel::new(family, 1.0, 0.0)?,
            n_s: 3.0,
        }),
        tap: EveTap::new(1.0)?,
        n,
        rate,
        trials: TRIALS,
        seed,
        message_selection: MessageSelection::UniformRandom,
    })
}

fn run(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<ExperimentReport> {
    let opts = RunOptions {
        threads,
        keep_transcripts: false,
    };
    run_experiment_with(cfg, &opts).map(|(r, _)| r)
}

fn var_ratio(r: &ExperimentReport) -> f64 {
    r.empirical_var_theta / r.predicted_var_theta
}

fn criterion_3(opts: &AcceptanceOptions) -> Check {
    let r = run(&thermal_reference(10, 0.5, opts.seed)?, opts.threads)?;
    let ratio = var_ratio(&r);
    Ok((
        (0.95..=1.05).contains(&ratio),
        format!("var ratio {ratio:.4} (predicted {:.4e}, tol [0.95, 1.05])", r.predicted_var_theta),
    ))
}

fn binomial_allowance(bound: f64, trials: u64) -> f64 {
    bound + 5.0 * (bound * (1.0 - bound) / trials as f64).sqrt()
}

fn criterion_4(opts: &AcceptanceOptions) -> Check {
    let p_h = 1.0;
    let a = run(&thermal_reference(10, 0.5 * p_h, opts.seed)?, opts.threads)?;
    let a_bound_small = a.analytic_error_bound.ln_value < 1e-300f64.ln();
    let a_pass = a.error_count == 0 && a_bound_small;

    // (b) uses the bound at the nominal rate, which is below the one at the
    // codebook's rounded-up rate the report carries.
    let rate = 0.95 * p_h;
    let b = run(&thermal_reference(2, rate, opts.seed)?, opts.threads)?;
    let bound = sk_error_bound(&BoundQuery::new(2, rate, RateQuery::from_channel(0.25, 0.0, 3.0)?)?);
    let limit = binomial_allowance(bound, b.trials);
    let b_pass = b.error_rate <= limit;
    Ok((
        a_pass && b_pass,
        format!(
            "(a) {} errors, ln bound {:.1}; (b) rate {:.5} <= {:.5} (bound {:.5}, at realized rate {:.5})",
            a.error_count, a.analytic_error_bound.ln_value, b.error_rate, limit, bound, b.analytic_error_bound.value
        ),
    ))
}

fn criterion_5(opts: &AcceptanceOptions) -> Check {
    let r = run(&thermal_reference(10, 0.5, opts.seed)?, opts.threads)?;
    let mut pass = true;
    let mut worst_z = 0.0f64;
    for row in &r.power_audit {
        if row.round == 0 {
            pass &= row.mean <= row.limit;
        } else {
            let z = (row.mean - row.limit).abs() / row.standard_error;
            worst_z = worst_z.max(z);
            pass &= z <= 5.0;
        }
    }
    Ok((
        pass,
        format!(
            "round 0 mean {:.4} <= 3; rounds >= 1 worst |z| {worst_z:.2} (tol 5)",
            r.power_audit[0].mean
        ),
    ))
}

fn criterion_6(opts: &AcceptanceOptions) -> Check {
    let mut pass = true;
    let mut ratios = Vec::new();
    let mut rates = Vec::new();
    for family in [NoiseFamily::TwoPoint, NoiseFamily::Uniform] {
        for gain in [1.0, 2.0] {
            let r = run(&affine_reference(family, gain, 8, 0.5, opts.seed)?, opts.threads)?;
            let ratio = var_ratio(&r);
            pass &= (0.95..=1.05).contains(&ratio);
            ratios.push(format!("{ratio:.4}"));

            // C = 1 bit for N_S = 3, Var[N] = 1.
            let e = run(&affine_reference(family, gain, 2, 0.9, opts.seed)?, opts.threads)?;
            pass &= e.error_rate <= e.analytic_error_bound.value;
            rates.push(format!("{:.4}<={:.4}", e.error_rate, e.analytic_error_bound.value));
        }
    }
    Ok((
        pass,
        format!("var ratios [{}]; error rates [{}]", ratios.join(", "), rates.join(", ")),
    ))
}

fn criterion_7(opts: &AcceptanceOptions) -> Check {
    let r = run(&thermal_reference(6, 0.5, opts.seed)?, opts.threads)?;
    let t = r.trials as f64;
    let d = &r.diagnostics;
    let corr = d.max_abs_offdiag_corr.unwrap_or(f64::NAN);
    let skew_tol = 5.0 * (6.0 / t).sqrt();
    let kurt_tol = 5.0 * (24.0 / t).sqrt();
    let pass = corr < 0.0158 && d.theta_skewness.abs() < skew_tol && d.theta_excess_kurtosis.abs() < kurt_tol;
    Ok((
        pass,
        format!(
            "max |corr| {corr:.4} (<0.0158), skew {:.4} (<{skew_tol:.4}), ex. kurt {:.4} (<{kurt_tol:.4})",
            d.theta_skewness, d.theta_excess_kurtosis
        ),
    ))
}

fn criterion_8() -> Check {
    let (eta, n_th, n_s, tap) = (0.5f64, 0.0, 2.0, 1.0);
    let sigma2 = induced_sigma2(eta, n_th)?;
    let budgets = [9u32, 99, 999]
        .iter()
        .map(|&n| leakage_budget(eta, n_th, n_s, sigma2, tap, n).map(|b| (n, b)))
        .collect::<Result<Vec<_>>>()?;
    let at_99 = budgets[1].1.per_mode_bits;
    let value_ok = (at_99 - 0.029037).abs() <= 1e-6;
    let total = budgets[0].1.total_bits;
    let scaling_ok = budgets
        .iter()
        .all(|(n, b)| b.total_bits == total && relative(b.per_mode_bits * (*n as f64 + 1.0), total) < 1e-15);
    Ok((
        value_ok && scaling_ok,
        format!("per mode at n=99 {at_99:.7} (0.029037 +- 1e-6); 1/(n+1) scaling {scaling_ok}"),
    ))
}

fn criterion_9(opts: &AcceptanceOptions) -> Check {
    let (n_s, sigma2) = (3.0f64, 1.0);
    let q = RateQuery::new(n_s, sigma2, 1.0, 0.0)?;
    let p_h = q.coherent_rate();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x09);
    let mut residual = 0.0f64;
    for _ in 0..100 {
        let rate = rng.gen_range(1e-3..p_h);
        let nu = phi_inverse(rate, n_s, sigma2)?;
        residual = residual.max((phi(nu, n_s, sigma2)? - rate).abs());
    }

    let mut monotone = true;
    let mut previous = i64::MIN;
    for n in 1..=500u32 {
        let order = tetration_order(&BoundQuery::new(n, 0.5, q)?)?;
        monotone &= order >= previous;
        previous = order;
    }

    let first = tetration_bound_for_order::<f64>(1)?;
    let first_ok = matches!(first, TetrationBound::Finite { order: 1, .. })
        && (first.value() - (-1.0f64).exp()).abs() <= 1e-15;
    let underflow_ok = (4..=8).all(|k| {
        matches!(tetration_bound_for_order::<f64>(k), Ok(TetrationBound::Underflow { order }) if order as i64 == k)
    });
    Ok((
        residual < 1e-10 && monotone && first_ok && underflow_ok,
        format!(
            "phi round trip {residual:.2e} (<1e-10); f(n) nondecreasing {monotone}; 1/e {first_ok}; underflow from 4 {underflow_ok}"
        ),
    ))
}

fn criterion_10(opts: &AcceptanceOptions) -> Check {
    let mut configs = vec![
        thermal_reference(10, 0.5, opts.seed)?,
        thermal_reference(2, 0.95, opts.seed)?,
        thermal_reference(6, 0.5, opts.seed)?,
    ];
    for family in [NoiseFamily::TwoPoint, NoiseFamily::Uniform] {
        for gain in [1.0, 2.0] {
            configs.push(affine_reference(family, gain, 8, 0.5, opts.seed)?);
            configs.push(affine_reference(family, gain, 2, 0.9, opts.seed)?);
        }
    }
    let mut identical = 0;
    for cfg in &configs {
        let one = run(cfg, Some(1))?.to_json();
        let many = run(cfg, Some(opts.alt_threads))?.to_json();
        identical += usize::from(one == many);
    }
    Ok((
        identical == configs.len(),
        format!(
            "{identical}/{} reports byte-identical (1 vs {} threads)",
            configs.len(),
            opts.alt_threads
        ),
    ))
}
