//! Command-line front end.
//!
//! Exit codes: 0 success, 2 parse/usage error, 3 simulation error,
//! 4 detection error.

use clap::{Parser, Subcommand, ValueEnum};
use doptag::experiment::{run_experiment, ExperimentSpec};
use doptag::scene_file::load_scene;
use doptag::session::{run_session, SessionError};
use doptag::tables::{reproduce_table, TableId};
use doptag::wav;
use doptag_core::dsp::{process_recording, PipelineConfig};
use doptag_core::scene::{simulate_session, ChannelParams, NoiseKind, Recording};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_PARSE: u8 = 2;
const EXIT_SIMULATION: u8 = 3;
const EXIT_DETECTION: u8 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NoiseArg {
    None,
    Ambient,
    Music,
    Conversation,
}

impl From<NoiseArg> for NoiseKind {
    fn from(n: NoiseArg) -> NoiseKind {
        match n {
            NoiseArg::None => NoiseKind::None,
            NoiseArg::Ambient => NoiseKind::Ambient,
            NoiseArg::Music => NoiseKind::Music,
            NoiseArg::Conversation => NoiseKind::Conversation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

fn channel(noise: NoiseArg, snr_db: f64) -> ChannelParams {
    if noise == NoiseArg::None {
        ChannelParams::quiet()
    } else {
        ChannelParams {
            noise_kind: noise.into(),
            target_snr_db: snr_db,
            ..ChannelParams::default()
        }
    }
}

#[derive(Parser)]
#[command(name = "doptag", about = "Doppler-effect acoustic photo tagging toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a session and write one WAV per sweep and receiver.
    Simulate {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10.0)]
        snr_db: f64,
        #[arg(long, value_enum, default_value_t = NoiseArg::Ambient)]
        noise: NoiseArg,
        /// Output directory for the WAV files.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the receiver pipeline on a WAV file and print the shift estimate.
    Analyze {
        wav: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Simulate and resolve one full session against ground truth.
    Session {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10.0)]
        snr_db: f64,
        #[arg(long, value_enum, default_value_t = NoiseArg::Ambient)]
        noise: NoiseArg,
        /// Fixed row count (default: estimated from the eigengap).
        #[arg(long)]
        k_rows: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Reproduce the published reference tables and report deviations.
    Tables {
        /// I, II, III, or all.
        #[arg(default_value = "all")]
        which: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run a seeded grid of sessions and emit CSV.
    Experiment {
        #[arg(long)]
        scene: PathBuf,
        /// Sweep-A distances in meters.
        #[arg(long, value_delimiter = ',', default_value = "3")]
        distances: Vec<f64>,
        #[arg(long, default_value_t = 10.0)]
        snr_db: f64,
        #[arg(long, value_enum, default_value_t = NoiseArg::Ambient)]
        noise: NoiseArg,
        #[arg(long, default_value_t = 20)]
        reps: u32,
        #[arg(long, default_value_t = 0)]
        seed_base: u64,
        /// Output CSV path (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate {
            scene,
            seed,
            snr_db,
            noise,
            out,
        } => {
            let loaded = match load_scene(&scene) {
                Ok(l) => l,
                Err(e) => return fail(EXIT_PARSE, e),
            };
            let session =
                match simulate_session(&loaded.scene, &loaded.plan, &channel(noise, snr_db), seed)
                {
                    Ok(s) => s,
                    Err(e) => return fail(EXIT_SIMULATION, e),
                };
            if let Err(e) = std::fs::create_dir_all(&out) {
                return fail(EXIT_SIMULATION, format!("cannot create {}: {e}", out.display()));
            }
            for (si, recordings) in session.recordings.iter().enumerate() {
                let sweep = if si == 0 { "a" } else { "b" };
                for rec in recordings {
                    let path = out.join(format!("sweep_{sweep}_{}.wav", rec.receiver_name));
                    if let Err(e) = wav::write_wav(&path, &rec.samples, rec.nominal_rate as u32) {
                        return fail(EXIT_SIMULATION, e);
                    }
                }
            }
            println!(
                "{}",
                serde_json::to_string_pretty(&session.ground_truth).unwrap()
            );
            ExitCode::SUCCESS
        }
        Command::Analyze { wav: path, format } => {
            let (samples, rate) = match wav::read_wav(&path) {
                Ok(r) => r,
                Err(e) => return fail(EXIT_PARSE, e),
            };
            let rec = Recording {
                receiver_name: path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default(),
                samples,
                nominal_rate: rate as f64,
                true_rate: rate as f64,
            };
            let est = match process_recording(&rec, &PipelineConfig::default()) {
                Ok(e) => e,
                Err(e) => return fail(EXIT_DETECTION, e),
            };
            match format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&est).unwrap()),
                _ => println!(
                    "{}: delta_f {:.3} Hz (coarse {:.3}), local f0 {:.3} Hz, degraded {}",
                    est.receiver_name, est.delta_f, est.coarse_delta_f, est.f0_local, est.degraded
                ),
            }
            ExitCode::SUCCESS
        }
        Command::Session {
            scene,
            seed,
            snr_db,
            noise,
            k_rows,
            format,
        } => {
            let loaded = match load_scene(&scene) {
                Ok(l) => l,
                Err(e) => return fail(EXIT_PARSE, e),
            };
            let outcome = match run_session(&loaded, &channel(noise, snr_db), seed, k_rows) {
                Ok(o) => o,
                Err(e @ SessionError::Simulation(_)) => return fail(EXIT_SIMULATION, e),
                Err(e) => return fail(EXIT_DETECTION, e),
            };
            match format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&outcome).unwrap()),
                _ => {
                    for (i, row) in outcome.layout.rows.iter().enumerate() {
                        println!("row {}: {}", i + 1, row.join(", "));
                    }
                    for (name, reason) in &outcome.layout.excluded {
                        println!("excluded: {name} ({reason:?})");
                    }
                    println!(
                        "matched: {} (partial credit {:.3})",
                        outcome.matched, outcome.partial_credit
                    );
                }
            }
            ExitCode::SUCCESS
        }
        Command::Tables { which, format } => {
            let ids: Vec<TableId> = if which == "all" {
                vec![TableId::I, TableId::II, TableId::III]
            } else {
                match which.parse() {
                    Ok(id) => vec![id],
                    Err(e) => return fail(EXIT_PARSE, e),
                }
            };
            let mut worst: f64 = 0.0;
            for id in ids {
                let report = reproduce_table(id);
                match format {
                    Format::Json => {
                        println!("{}", serde_json::to_string_pretty(&report).unwrap())
                    }
                    _ => print!("{}", report.render_text()),
                }
                worst = worst.max(report.max_deviation);
            }
            if worst > 0.1 {
                return fail(
                    EXIT_DETECTION,
                    format!("max table deviation {worst:.4} deg exceeds 0.1 deg"),
                );
            }
            ExitCode::SUCCESS
        }
        Command::Experiment {
            scene,
            distances,
            snr_db,
            noise,
            reps,
            seed_base,
            out,
        } => {
            let loaded = match load_scene(&scene) {
                Ok(l) => l,
                Err(e) => return fail(EXIT_PARSE, e),
            };
            let spec = ExperimentSpec {
                distances,
                channels: vec![(noise.into(), snr_db)],
                repetitions: reps,
                seed_base,
            };
            let report = match run_experiment(&loaded, &spec) {
                Ok(r) => r,
                Err(e) => return fail(EXIT_SIMULATION, e),
            };
            match out {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, &report.csv) {
                        return fail(EXIT_SIMULATION, format!("cannot write {}: {e}", path.display()));
                    }
                }
                None => print!("{}", report.csv),
            }
            ExitCode::SUCCESS
        }
    }
}
