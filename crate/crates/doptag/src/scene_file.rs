//! JSON scene files: geometry, sweep plan, and clustering hints.
//!
//! Schema (angles in degrees, lengths in meters):
//! ```json
//! {
//!   "camera": { "x": 0.0, "y": 3.0 },
//!   "fov_deg": 100.0,
//!   "receivers": [ { "name": "ann", "x": -1.75, "y": 0.0 } ],
//!   "bystanders": [ { "name": "zed", "x": 4.0, "y": 0.0 } ],
//!   "rows": [ ["ann", "bob"], ["cat"] ],
//!   "sweep": {
//!     "v_peak": 3.4, "duration": 1.0, "lead_in": 0.2,
//!     "motion_duration": 0.1, "two_sweep_w": 1.5
//!   },
//!   "row_scale": 0.75,
//!   "k_rows": 2
//! }
//! ```
//! `bystanders`, `rows`, `sweep`, `row_scale` and `k_rows` are optional.
//! A `two_sweep_w` entry switches the plan to two sweeps (A at the camera,
//! B at that lateral distance).

use doptag_core::geometry::PlanarPoint;
use doptag_core::scene::{Receiver, Scene, SweepPlan, SweepSpec};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum SceneFileError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },
    #[error("{path}: {reason}")]
    Invalid { path: String, reason: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointFile {
    x: f64,
    y: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReceiverFile {
    name: String,
    x: f64,
    y: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SweepFile {
    v_peak: Option<f64>,
    duration: Option<f64>,
    lead_in: Option<f64>,
    motion_duration: Option<f64>,
    two_sweep_w: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneFile {
    camera: PointFile,
    fov_deg: f64,
    receivers: Vec<ReceiverFile>,
    #[serde(default)]
    bystanders: Vec<ReceiverFile>,
    #[serde(default)]
    rows: Option<Vec<Vec<String>>>,
    #[serde(default)]
    sweep: Option<SweepFile>,
    #[serde(default)]
    row_scale: Option<f64>,
    #[serde(default)]
    k_rows: Option<usize>,
}

/// A validated scene plus everything the session runner needs.
#[derive(Debug, Clone)]
pub struct LoadedScene {
    pub scene: Scene,
    pub plan: SweepPlan,
    /// Lateral B-sweep distance for two-sweep plans.
    pub two_sweep_w: Option<f64>,
    pub row_scale: f64,
    pub k_rows: Option<usize>,
}

pub fn load_scene(path: &Path) -> Result<LoadedScene, SceneFileError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| SceneFileError::Io {
        path: shown.clone(),
        source,
    })?;
    parse_scene(&text, &shown)
}

pub fn parse_scene(text: &str, shown_path: &str) -> Result<LoadedScene, SceneFileError> {
    let file: SceneFile =
        serde_json::from_str(text).map_err(|source| SceneFileError::Json {
            path: shown_path.to_string(),
            source,
        })?;
    let invalid = |reason: String| SceneFileError::Invalid {
        path: shown_path.to_string(),
        reason,
    };
    if !(file.fov_deg > 0.0 && file.fov_deg < 180.0) {
        return Err(invalid(format!(
            "fov_deg must be in (0, 180), got {}",
            file.fov_deg
        )));
    }
    let to_rx = |r: &ReceiverFile| Receiver {
        name: r.name.clone(),
        position: PlanarPoint::new(r.x, r.y),
    };
    let scene = Scene {
        camera_position: PlanarPoint::new(file.camera.x, file.camera.y),
        fov: file.fov_deg.to_radians(),
        receivers: file.receivers.iter().map(to_rx).collect(),
        rows_ground_truth: file.rows.clone(),
        bystanders: file.bystanders.iter().map(to_rx).collect(),
    };
    scene
        .validate()
        .map_err(|e| invalid(format!("scene: {e}")))?;

    let sw = file.sweep.unwrap_or_default();
    let base = SweepSpec::default();
    let spec = SweepSpec {
        v_peak: sw.v_peak.unwrap_or(base.v_peak),
        duration: sw.duration.unwrap_or(base.duration),
        lead_in: sw.lead_in.unwrap_or(base.lead_in),
        motion_duration: sw.motion_duration.unwrap_or(base.motion_duration),
        ..base
    };
    let l = file.camera.y;
    if !(l > 0.0) {
        return Err(invalid(format!("camera.y (sweep distance) must be positive, got {l}")));
    }
    let plan = match sw.two_sweep_w {
        Some(w) if w > 0.0 => SweepPlan::two_sweep(l, w, spec),
        Some(w) => {
            return Err(invalid(format!("sweep.two_sweep_w must be positive, got {w}")))
        }
        None => SweepPlan::single(l, spec),
    };
    let row_scale = file.row_scale.unwrap_or(0.75);
    if !(row_scale > 0.0) {
        return Err(invalid(format!("row_scale must be positive, got {row_scale}")));
    }
    Ok(LoadedScene {
        scene,
        plan,
        two_sweep_w: sw.two_sweep_w,
        row_scale,
        k_rows: file.k_rows,
    })
}
