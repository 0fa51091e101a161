//! End-to-end session runner: simulate, run the receiver pipeline on every
//! recording, collect replies, and resolve the tag layout.

use crate::scene_file::LoadedScene;
use doptag_core::dsp::{process_recording, PipelineConfig, ShiftEstimate};
use doptag_core::geometry::integrate_velocity;
use doptag_core::scene::{simulate_session, ChannelParams, SceneError, ACCEL_RATE};
use doptag_core::tag::{resolve_session, ReplyMessage, SessionConfig, SweepId, TagLayout};
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum SessionError {
    #[error("simulation: {0}")]
    Simulation(SceneError),
    #[error("detection: {0}")]
    Detection(String),
}

/// Result of one simulated session, compared against geometric ground truth.
#[derive(Debug, Clone, Serialize)]
pub struct SessionOutcome {
    pub layout: TagLayout,
    pub ground_truth: TagLayout,
    pub matched: bool,
    pub partial_credit: f64,
    /// Accelerometer-integrated peak speed per sweep.
    pub v_hat: Vec<f64>,
    pub estimates: Vec<ShiftEstimate>,
}

/// Simulate one session and resolve it. Receivers whose pipeline fails are
/// left unanswered; the resolver then excludes them with `NoReply`.
pub fn run_session(
    loaded: &LoadedScene,
    channel: &ChannelParams,
    seed: u64,
    k_rows: Option<usize>,
) -> Result<SessionOutcome, SessionError> {
    let session = simulate_session(&loaded.scene, &loaded.plan, channel, seed)
        .map_err(SessionError::Simulation)?;
    let pipeline = PipelineConfig::default();
    let mut replies = Vec::new();
    let mut estimates = Vec::new();
    let mut v_hat = Vec::new();
    for (si, recordings) in session.recordings.iter().enumerate() {
        let trace = &session.sweep_traces[si];
        let (_, peak, _) = integrate_velocity(&trace.accel_readings, 0.0, 1.0 / ACCEL_RATE)
            .map_err(|e| SessionError::Detection(format!("velocity integration: {e}")))?;
        v_hat.push(peak);
        let sweep_id = if si == 0 { SweepId::A } else { SweepId::B };
        for rec in recordings {
            if let Ok(est) = process_recording(rec, &pipeline) {
                replies.push(ReplyMessage {
                    name: rec.receiver_name.clone(),
                    delta_f: est.delta_f,
                    sweep_id,
                    degraded: est.degraded,
                });
                estimates.push(est);
            }
        }
    }
    let names: Vec<String> = loaded.scene.everyone().map(|r| r.name.clone()).collect();
    let config = SessionConfig {
        fov: loaded.scene.fov,
        v_s_a: v_hat[0],
        v_s_b: v_hat.get(1).copied(),
        l: loaded.scene.camera_position.y,
        w: loaded.two_sweep_w,
        group_members: names,
        reply_timeout: 1.0,
        sound_speed: 340.0,
        f0: 20_000.0,
    };
    let k = k_rows.or(loaded.k_rows);
    let layout = resolve_session(&replies, &config, k, loaded.row_scale)
        .map_err(|e| SessionError::Detection(format!("row clustering: {e}")))?;
    let matched = layout.matches(&session.ground_truth);
    let partial_credit = layout.partial_credit(&session.ground_truth);
    Ok(SessionOutcome {
        layout,
        ground_truth: session.ground_truth,
        matched,
        partial_credit,
        v_hat,
        estimates,
    })
}
