use skwire_core::channel::{EveTap, NoiseFamily, NoiseModel, ThermalWiretapParams};
use skwire_core::infotheory::{induced_sigma2, leakage_budget};
use skwire_core::sim::{
    run_experiment, run_experiment_with, run_sweep, AffineSpec, AxisRange, ChannelSpec, ExperimentConfig,
    MessageSelection, RunOptions, SweepAxes, SweepConfig,
};

fn thermal(eta: f64, n_s: f64, n: u32, rate: f64, trials: u64) -> ExperimentConfig {
    ExperimentConfig {
        channel: ChannelSpec::Thermal(ThermalWiretapParams::new(eta, 0.0, n_s).unwrap()),
        tap: EveTap::new(1.0).unwrap(),
        n,
        rate,
        trials,
        seed: 99,
        message_selection: MessageSelection::UniformRandom,
    }
}

#[test]
fn reports_are_pure_functions_of_the_config() {
    let cfg = thermal(0.25, 3.0, 4, 0.9, 5_000);
    let a = run_experiment(&cfg).unwrap().to_json();
    let b = run_experiment(&cfg).unwrap().to_json();
    assert_eq!(a, b);
    for threads in [1, 3, 8] {
        let opts = RunOptions { threads: Some(threads), keep_transcripts: false };
        assert_eq!(run_experiment_with(&cfg, &opts).unwrap().0.to_json(), a);
    }
    let mut other = cfg.clone();
    other.seed += 1;
    assert_ne!(run_experiment(&other).unwrap().to_json(), a);
}

#[test]
fn transcripts_come_back_in_trial_order() {
    let cfg = thermal(0.25, 3.0, 3, 0.5, 2_500);
    let opts = RunOptions { threads: Some(4), keep_transcripts: true };
    let (report, transcripts) = run_experiment_with(&cfg, &opts).unwrap();
    assert_eq!(transcripts.len(), 2_500);
    assert!(transcripts.iter().enumerate().all(|(i, (t, _))| *t == i as u64));
    let errors = transcripts.iter().filter(|(_, t)| t.is_error()).count() as u64;
    assert_eq!(errors, report.error_count);
}

#[test]
fn error_count_nonincreasing_in_n() {
    let sweep = SweepConfig {
        base: thermal(0.25, 3.0, 2, 0.6, 20_000),
        sweep: SweepAxes {
            n: Some(AxisRange { start: 2.0, stop: 8.0, steps: 4 }),
            ..Default::default()
        },
    };
    let rows = run_sweep(&sweep, &RunOptions::default()).unwrap();
    assert_eq!(rows.iter().map(|r| r.n).collect::<Vec<_>>(), vec![2, 4, 6, 8]);
    for w in rows.windows(2) {
        let overlap = w[1].error_rate_ci_lo <= w[0].error_rate_ci_hi;
        assert!(w[1].error_count <= w[0].error_count || overlap, "{:?} -> {:?}", w[0].n, w[1].n);
    }
}

#[test]
fn leakage_matches_closed_form_and_shrinks_with_n() {
    let sweep = SweepConfig {
        base: thermal(0.5, 2.0, 9, 0.3, 10),
        sweep: SweepAxes {
            n: Some(AxisRange { start: 9.0, stop: 99.0, steps: 4 }),
            ..Default::default()
        },
    };
    let rows = run_sweep(&sweep, &RunOptions::default()).unwrap();
    let sigma2 = induced_sigma2(0.5, 0.0).unwrap();
    for r in &rows {
        let direct = leakage_budget(0.5, 0.0, 2.0, sigma2, 1.0, r.n).unwrap();
        assert_eq!(r.leakage_per_mode_bits, Some(direct.per_mode_bits));
    }
    assert!(rows.windows(2).all(|w| w[1].leakage_per_mode_bits < w[0].leakage_per_mode_bits));
}

#[test]
fn power_audit_holds_for_non_gaussian_noise() {
    let cfg = ExperimentConfig {
        channel: ChannelSpec::Affine(AffineSpec {
            gain: -1.5,
            noise: NoiseModel::new(NoiseFamily::ShiftedExponential, 0.8, 0.3).unwrap(),
            n_s: 2.0,
        }),
        tap: EveTap::new(1.0).unwrap(),
        n: 5,
        rate: 0.5,
        trials: 40_000,
        seed: 5,
        message_selection: MessageSelection::RoundRobin,
    };
    let report = run_experiment(&cfg).unwrap();
    assert!(report.leakage.is_none());
    assert!(report.power_audit[0].mean <= 2.0);
    for row in &report.power_audit[1..] {
        assert!((row.mean - 2.0).abs() <= 5.0 * row.standard_error, "{row:?}");
    }
    let ratio = report.empirical_var_theta / report.predicted_var_theta;
    assert!((0.93..=1.07).contains(&ratio), "{ratio}");
}

#[test]
fn config_json_round_trip_and_strictness() {
    let cfg = thermal(0.25, 3.0, 10, 0.5, 100);
    let json = serde_json::to_string(&cfg).unwrap();
    assert_eq!(ExperimentConfig::from_json(&json).unwrap(), cfg);

    let typo = json.replace("\"trials\"", "\"trails\"");
    assert!(ExperimentConfig::from_json(&typo).is_err());

    let minimal = r#"{"channel":{"thermal":{"eta":0.25,"n_th":0.0,"n_s":3.0}},"tap":{"variance":1.0},"n":10,"rate":0.5,"trials":100}"#;
    let parsed = ExperimentConfig::from_json(minimal).unwrap();
    assert_eq!(parsed.seed, 0x5eed_f33d);
    assert_eq!(parsed.message_selection, MessageSelection::UniformRandom);
}
