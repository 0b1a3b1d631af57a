use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use skwire_core::acceptance::{run_criterion, AcceptanceOptions, CRITERIA};
use skwire_core::channel::{EveTap, ThermalWiretapParams};
use skwire_core::protocol::Transcript;
use skwire_core::sim::{
    bounds_table, compare_bounds, rates_table, run_experiment_with, run_sweep, ChannelSpec, ExperimentConfig,
    MessageSelection, RunOptions, SweepConfig, DEFAULT_SEED,
};

use crate::args::{BoundsArgs, Cli, Command, Format, ParamFlags, RatesArgs, SimulateArgs, SweepArgs, VerifyArgs};
use crate::error::{CliError, CliResult};
use crate::output::{emit, render_record, render_rows, write_file};

pub fn run(cli: Cli) -> CliResult<()> {
    if cli.threads == Some(0) {
        return Err(CliError::Config("--threads must be at least 1".into()));
    }
    match cli.command {
        Command::Rates(a) => rates(a),
        Command::Bounds(a) => bounds(a),
        Command::Simulate(a) => simulate(a, cli.threads),
        Command::Sweep(a) => sweep(a, cli.threads),
        Command::Verify(a) => verify(a, cli.threads),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn missing(flag: &str) -> CliError {
    CliError::Config(format!("missing --{flag} (or give --config)"))
}

/// The config file (if any) with every given flag applied on top.
fn build_config(p: &ParamFlags) -> CliResult<ExperimentConfig> {
    let mut cfg = match &p.config {
        Some(path) => read_json(path)?,
        None => ExperimentConfig {
            channel: ChannelSpec::Thermal(ThermalWiretapParams {
                eta: p.eta.ok_or_else(|| missing("eta"))?,
                n_th: p.n_th.unwrap_or(0.0),
                n_s: p.n_s.ok_or_else(|| missing("n-s"))?,
            }),
            tap: EveTap {
                variance: p.tap_variance.unwrap_or(1.0),
            },
            n: p.n.ok_or_else(|| missing("n"))?,
            rate: p.rate.ok_or_else(|| missing("rate"))?,
            trials: p.trials.unwrap_or(1),
            seed: DEFAULT_SEED,
            message_selection: MessageSelection::default(),
        },
    };
    match &mut cfg.channel {
        ChannelSpec::Thermal(t) => {
            if let Some(eta) = p.eta {
                t.eta = eta;
            }
            if let Some(n_th) = p.n_th {
                t.n_th = n_th;
            }
        }
        ChannelSpec::Affine(_) if p.eta.is_some() || p.n_th.is_some() => {
            return Err(CliError::Config("--eta and --n-th only apply to thermal channels".into()))
        }
        ChannelSpec::Affine(_) => {}
    }
    if let Some(n_s) = p.n_s {
        cfg.channel.set_mean_photons(n_s);
    }
    if let Some(n) = p.n {
        cfg.n = n;
    }
    if let Some(rate) = p.rate {
        cfg.rate = rate;
    }
    if let Some(trials) = p.trials {
        cfg.trials = trials;
    }
    if let Some(v) = p.tap_variance {
        cfg.tap.variance = v;
    }
    if let Some(seed) = p.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn rates(a: RatesArgs) -> CliResult<()> {
    let cfg = build_config(&a.params)?;
    let table = rates_table(&cfg.channel, cfg.n, cfg.rate, a.squeezed)?;
    emit(a.out.as_deref(), &render_record(&table, a.format)?)
}

fn bounds(a: BoundsArgs) -> CliResult<()> {
    let cfg = build_config(&a.params)?;
    let table = bounds_table(&cfg.channel, cfg.n, cfg.rate, &cfg.tap)?;
    emit(a.out.as_deref(), &render_record(&table, a.format)?)
}

fn write_transcripts(path: &Path, transcripts: &[(u64, Transcript<f64>)]) -> CliResult<()> {
    let file = fs::File::create(path).map_err(CliError::io(path))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    let to_io = |e: csv::Error| CliError::Io {
        path: path.to_path_buf(),
        source: e.into(),
    };
    for (trial, t) in transcripts {
        for row in t.csv_rows(*trial) {
            w.serialize(row).map_err(to_io)?;
        }
    }
    w.flush().map_err(CliError::io(path))
}

fn simulate(a: SimulateArgs, threads: Option<usize>) -> CliResult<()> {
    if a.params.config.is_none() && a.params.trials.is_none() {
        return Err(missing("trials"));
    }
    let cfg = build_config(&a.params)?;
    let opts = RunOptions {
        threads,
        keep_transcripts: a.dump_transcripts,
    };
    let (report, transcripts) = run_experiment_with(&cfg, &opts)?;

    fs::create_dir_all(&a.out).map_err(CliError::io(&a.out))?;
    write_file(&a.out.join("report.json"), &(report.to_json() + "\n"))?;
    if a.dump_transcripts {
        write_transcripts(&a.out.join("transcripts.csv"), &transcripts)?;
    }

    let verdict = compare_bounds(&report);
    let text = match a.format {
        Format::Table => verdict.to_string(),
        Format::Json => render_record(&verdict, Format::Json)?,
        Format::Csv => render_rows(&verdict.rows, Format::Csv)?,
    };
    emit(None, &text)?;
    if verdict.pass {
        Ok(())
    } else {
        Err(CliError::Verdict)
    }
}

fn sweep(a: SweepArgs, threads: Option<usize>) -> CliResult<()> {
    let mut cfg: SweepConfig = read_json(&a.config)?;
    if let Some(seed) = a.seed {
        cfg.base.seed = seed;
    }
    let rows = run_sweep(
        &cfg,
        &RunOptions {
            threads,
            keep_transcripts: false,
        },
    )?;
    emit(a.out.as_deref(), &render_rows(&rows, a.format)?)
}

fn verify(a: VerifyArgs, threads: Option<usize>) -> CliResult<()> {
    let opts = AcceptanceOptions {
        seed: a.seed.unwrap_or(DEFAULT_SEED),
        threads,
        schedule_perturbation: a.perturb_schedule.unwrap_or(0.0),
        ..AcceptanceOptions::default()
    };
    let mut failed = 0;
    let mut stdout = std::io::stdout().lock();
    for (id, _) in CRITERIA {
        let outcome = run_criterion(id, &opts);
        failed += usize::from(!outcome.pass);
        writeln!(stdout, "{outcome}")
            .and_then(|_| stdout.flush())
            .map_err(CliError::io(Path::new("<stdout>")))?;
    }
    writeln!(stdout, "{} passed, {failed} failed", CRITERIA.len() - failed)
        .map_err(CliError::io(Path::new("<stdout>")))?;
    if failed == 0 {
        Ok(())
    } else {
        Err(CliError::Verdict)
    }
}
