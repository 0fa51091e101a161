//! Seeded experiment sweeps over distance and channel grids, reported as
//! CSV.
//!
//! CSV schema, one header line then one row per record:
//! `kind,cell,distance_m,noise,snr_db,rep,seed,matched,partial_credit,accuracy`
//! - `kind = raw`: one session; `matched` is 0/1, `accuracy` is empty.
//! - `kind = aggregate`: one per cell; `matched` is the match count,
//!   `partial_credit` is the mean, `accuracy = matched / repetitions`.
//! Aggregates are recomputable from the raw rows of the same cell.

use crate::scene_file::LoadedScene;
use crate::session::{run_session, SessionError};
use doptag_core::scene::{ChannelParams, NoiseKind, SweepPlan};

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    /// Sweep-A distances; the scene is rebuilt at each.
    pub distances: Vec<f64>,
    /// Channel grid: (noise kind, SNR dB at the 3 m reference).
    pub channels: Vec<(NoiseKind, f64)>,
    pub repetitions: u32,
    pub seed_base: u64,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            distances: vec![3.0],
            channels: vec![(NoiseKind::Ambient, 10.0)],
            repetitions: 20,
            seed_base: 0,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("repetitions must be >= 1")]
    NoRepetitions,
    #[error("empty grid")]
    EmptyGrid,
    #[error("cell distance={distance} noise={noise:?} snr={snr} rep={rep}: {source}")]
    Cell {
        distance: f64,
        noise: NoiseKind,
        snr: f64,
        rep: u32,
        source: SessionError,
    },
}

/// Rebuild the loaded scene with sweep A at a new distance. Receiver
/// positions stay fixed; only the camera height and plan move.
pub fn with_distance(loaded: &LoadedScene, distance: f64) -> LoadedScene {
    let mut out = loaded.clone();
    out.scene.camera_position.y = distance;
    let spec = loaded.plan.sweeps[0].spec;
    out.plan = match loaded.two_sweep_w {
        Some(w) => SweepPlan::two_sweep(distance, w, spec),
        None => SweepPlan::single(distance, spec),
    };
    out
}

fn channel_for(noise: NoiseKind, snr_db: f64) -> ChannelParams {
    if noise == NoiseKind::None {
        ChannelParams::quiet()
    } else {
        ChannelParams {
            noise_kind: noise,
            target_snr_db: snr_db,
            ..ChannelParams::default()
        }
    }
}

fn cell_seed(seed_base: u64, cell: u64, rep: u32) -> u64 {
    seed_base
        .wrapping_add(cell.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(rep as u64)
}

fn noise_name(noise: NoiseKind) -> &'static str {
    match noise {
        NoiseKind::None => "none",
        NoiseKind::Ambient => "ambient",
        NoiseKind::Music => "music",
        NoiseKind::Conversation => "conversation",
    }
}

#[derive(Debug, Clone)]
pub struct CellSummary {
    pub distance: f64,
    pub noise: NoiseKind,
    pub snr_db: f64,
    pub matched: u32,
    pub accuracy: f64,
    pub mean_partial_credit: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub csv: String,
    pub cells: Vec<CellSummary>,
}

/// Run the full grid. Each session's seed derives only from
/// (seed_base, cell index, repetition), so reruns are byte-identical.
pub fn run_experiment(
    loaded: &LoadedScene,
    spec: &ExperimentSpec,
) -> Result<ExperimentReport, ExperimentError> {
    if spec.repetitions < 1 {
        return Err(ExperimentError::NoRepetitions);
    }
    if spec.distances.is_empty() || spec.channels.is_empty() {
        return Err(ExperimentError::EmptyGrid);
    }
    let mut csv = String::from(
        "kind,cell,distance_m,noise,snr_db,rep,seed,matched,partial_credit,accuracy\n",
    );
    let mut cells = Vec::new();
    let mut cell_index: u64 = 0;
    for &distance in &spec.distances {
        let at_distance = with_distance(loaded, distance);
        for &(noise, snr_db) in &spec.channels {
            let channel = channel_for(noise, snr_db);
            let mut matched = 0u32;
            let mut credit_sum = 0.0;
            for rep in 0..spec.repetitions {
                let seed = cell_seed(spec.seed_base, cell_index, rep);
                let outcome = run_session(&at_distance, &channel, seed, None).map_err(
                    |source| ExperimentError::Cell {
                        distance,
                        noise,
                        snr: snr_db,
                        rep,
                        source,
                    },
                )?;
                matched += outcome.matched as u32;
                credit_sum += outcome.partial_credit;
                csv.push_str(&format!(
                    "raw,{cell_index},{distance},{noise},{snr_db},{rep},{seed},{m},{credit:.6},\n",
                    noise = noise_name(noise),
                    m = outcome.matched as u32,
                    credit = outcome.partial_credit,
                ));
            }
            let accuracy = matched as f64 / spec.repetitions as f64;
            let mean_credit = credit_sum / spec.repetitions as f64;
            csv.push_str(&format!(
                "aggregate,{cell_index},{distance},{noise},{snr_db},,,{matched},{mean_credit:.6},{accuracy:.6}\n",
                noise = noise_name(noise),
            ));
            cells.push(CellSummary {
                distance,
                noise,
                snr_db,
                matched,
                accuracy,
                mean_partial_credit: mean_credit,
            });
            cell_index += 1;
        }
    }
    Ok(ExperimentReport { csv, cells })
}
