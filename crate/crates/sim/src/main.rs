use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use aiot_phy::SampleWaveform;
use aiot_sim::runner::{trial_seed, TrialContext};
use aiot_sim::scheme::{resolve, SchemeKind};
use aiot_sim::{presets, read_records, run_experiment, snr_gap, write_records, ExperimentConfig, RunOptions, SimError};

#[derive(Parser)]
#[command(name = "aiot-sim", version, about = "Ambient-IoT link-level BLER simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run an experiment and write its CSV.
    Run {
        /// Config file, or the name of a shipped preset.
        config: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        /// Write 0 for wall_seconds so repeated runs give identical bytes.
        #[arg(long)]
        no_timing: bool,
    },
    /// Shipped presets.
    Presets {
        #[command(subcommand)]
        cmd: PresetCmd,
    },
    /// Check a config without running it.
    Validate { config: String },
    /// Required-SNR difference `b − a` at a target BLER.
    Gap {
        csv: PathBuf,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long, default_value_t = 0.1)]
        bler: f64,
    },
    /// Write one trial's waveform in the dump format.
    Dump {
        config: String,
        #[arg(long)]
        out: PathBuf,
        /// Scheme label; defaults to the first curve.
        #[arg(long)]
        scheme: Option<String>,
        /// Omit for a noiseless dump.
        #[arg(long)]
        snr: Option<f64>,
        #[arg(long, value_enum, default_value_t = Stage::Rx)]
        stage: Stage,
    },
}

#[derive(Subcommand)]
enum PresetCmd {
    List,
    /// Print a preset's TOML.
    Show { name: String },
}

#[derive(Clone, Copy, ValueEnum)]
enum Stage {
    /// Backscatter coefficients before any channel.
    Tx,
    /// Faded, superposed and noisy reader input.
    Rx,
}

fn load(config: &str) -> aiot_sim::Result<ExperimentConfig> {
    let path = Path::new(config);
    if !path.exists() {
        if let Some(text) = presets::preset(config) {
            return ExperimentConfig::from_toml_str(text);
        }
    }
    ExperimentConfig::from_file(path)
}

fn exit_code(e: &SimError) -> u8 {
    match e {
        SimError::Config { .. } | SimError::Toml(_) => 2,
        SimError::TargetNotBracketed { .. } => 3,
        _ => 1,
    }
}

fn dump(cfg: &ExperimentConfig, label: Option<&str>, snr: Option<f64>, stage: Stage) -> aiot_sim::Result<SampleWaveform> {
    let schemes = resolve(cfg)?;
    let scheme = match label {
        Some(l) => schemes
            .iter()
            .find(|s| s.label == l)
            .ok_or_else(|| SimError::config("schemes", format!("no scheme `{l}`")))?,
        None => &schemes[0],
    };
    let mut cfg = cfg.clone();
    cfg.noise = snr.is_some();
    let ctx = TrialContext::new(&cfg, scheme);
    let seed = trial_seed(cfg.seed, 0, 0);
    let snr = snr.unwrap_or(0.0);
    match &scheme.kind {
        SchemeKind::CodedBpsk => Err(SimError::config("experiment", "cc_awgn has no sampled waveform")),
        SchemeKind::Pdrch(link) => {
            let (_, tx, _, _, rx, _) = ctx.pdrch_waveform(link, cfg.noise.then_some(snr), seed)?;
            Ok(match stage {
                Stage::Tx => tx,
                Stage::Rx => rx,
            })
        }
        SchemeKind::Fdma { .. } => {
            let t = ctx.fdma_waveform(cfg.noise.then_some(snr), seed)?;
            Ok(match stage {
                Stage::Rx => t.rx,
                Stage::Tx => {
                    let mut sum = t.links[0].coeffs.clone();
                    for l in &t.links[1..] {
                        for (a, b) in sum.samples.iter_mut().zip(&l.coeffs.samples) {
                            *a += b;
                        }
                    }
                    sum
                }
            })
        }
    }
}

fn run(cli: Cli) -> aiot_sim::Result<()> {
    match cli.cmd {
        Cmd::Run {
            config,
            out,
            seed,
            workers,
            no_timing,
        } => {
            let mut cfg = load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let opts = RunOptions {
                workers,
                timing: !no_timing,
            };
            let records = run_experiment(&cfg, &opts)?;
            match out {
                Some(p) => write_records(BufWriter::new(File::create(p)?), &records)?,
                None => write_records(std::io::stdout().lock(), &records)?,
            }
        }
        Cmd::Presets { cmd: PresetCmd::List } => {
            for (name, text) in presets::PRESETS {
                println!("{name}\t{}", presets::describe(text));
            }
        }
        Cmd::Presets {
            cmd: PresetCmd::Show { name },
        } => {
            let text = presets::preset(&name).ok_or_else(|| SimError::config("preset", format!("no preset `{name}`")))?;
            print!("{text}");
        }
        Cmd::Validate { config } => {
            let cfg = load(&config)?;
            println!("ok: {} ({} curves)", cfg.name, resolve(&cfg)?.len());
        }
        Cmd::Gap { csv, a, b, bler } => {
            let records = read_records(BufReader::new(File::open(csv)?))?;
            let gap = snr_gap(&records, &a, &b, bler)?;
            println!("{gap:.3}");
        }
        Cmd::Dump {
            config,
            out,
            scheme,
            snr,
            stage,
        } => {
            let cfg = load(&config)?;
            let wave = dump(&cfg, scheme.as_deref(), snr, stage)?;
            let mut w = BufWriter::new(File::create(out)?);
            aiot_sim::dump::write_dump(&mut w, &wave)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
