//! Sender-side orchestration: reply collection over an in-process transport,
//! FOV screening, single-row ordering, two-sweep localization and the final
//! tag layout.

use crate::cluster;
use crate::geometry::{self, PlanarPoint, Side};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SweepId {
    A,
    B,
}

/// One receiver's reply: its name and the shift it measured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplyMessage {
    pub name: String,
    pub delta_f: f64,
    pub sweep_id: SweepId,
    pub degraded: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExclusionReason {
    OutOfFov,
    NoReply,
    ToneNotDetected,
    Inconsistent,
}

/// The final product: ordered rows of names plus everyone excluded, with a
/// reason each.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TagLayout {
    /// Front row first; each row left-to-right in the picture.
    pub rows: Vec<Vec<String>>,
    pub excluded: Vec<(String, ExclusionReason)>,
    /// Estimated signed angle per name (radians), where known.
    pub angles: Vec<(String, f64)>,
    /// Estimated coordinates per name (two-sweep sessions only).
    pub coordinates: Vec<(String, PlanarPoint)>,
    /// Non-fatal notes (ties, degraded estimates).
    pub warnings: Vec<String>,
}

impl TagLayout {
    pub fn placed_count(&self) -> usize {
        self.rows.iter().map(|r| r.len()).sum()
    }

    /// Layout equality as used for the accuracy metric: same rows in the
    /// same order with the same names in the same order, and the same set of
    /// excluded names (reasons may differ).
    pub fn matches(&self, other: &TagLayout) -> bool {
        if self.rows != other.rows {
            return false;
        }
        let mut a: Vec<&str> = self.excluded.iter().map(|(n, _)| n.as_str()).collect();
        let mut b: Vec<&str> = other.excluded.iter().map(|(n, _)| n.as_str()).collect();
        a.sort_unstable();
        b.sort_unstable();
        a == b
    }

    /// Per-position partial credit: the fraction of placed-or-excluded names
    /// judged identically (same row index and position, or excluded in both).
    pub fn partial_credit(&self, truth: &TagLayout) -> f64 {
        let mut total = 0usize;
        let mut hit = 0usize;
        for (ri, row) in truth.rows.iter().enumerate() {
            for (pi, name) in row.iter().enumerate() {
                total += 1;
                if self
                    .rows
                    .get(ri)
                    .and_then(|r| r.get(pi))
                    .is_some_and(|n| n == name)
                {
                    hit += 1;
                }
            }
        }
        for (name, _) in truth.excluded.iter() {
            total += 1;
            if self.excluded.iter().any(|(n, _)| n == name) {
                hit += 1;
            }
        }
        if total == 0 {
            1.0
        } else {
            hit as f64 / total as f64
        }
    }
}

#[derive(Debug, Clone)]
pub struct SessionConfig {
    /// Field of view in radians.
    pub fov: f64,
    /// Peak sweep speed per sweep, as measured by the accelerometer path.
    pub v_s_a: f64,
    pub v_s_b: Option<f64>,
    /// Distance of sweep A from the group (Eq-frame camera height).
    pub l: f64,
    /// Lateral distance of sweep B (two-sweep sessions).
    pub w: Option<f64>,
    pub group_members: Vec<String>,
    pub reply_timeout: f64,
    pub sound_speed: f64,
    pub f0: f64,
}

/// In-process message bus standing in for the WiFi transport. Replies carry
/// a simulated arrival time; collection honors the timeout.
#[derive(Debug, Default, Clone)]
pub struct MessageBus {
    inbox: Vec<(f64, ReplyMessage)>,
}

impl MessageBus {
    pub fn new() -> Self {
        MessageBus::default()
    }

    pub fn post(&mut self, arrival_time: f64, reply: ReplyMessage) {
        self.inbox.push((arrival_time, reply));
    }

    /// Post with zero delay.
    pub fn post_now(&mut self, reply: ReplyMessage) {
        self.post(0.0, reply);
    }
}

/// Collect every reply that arrived within the timeout. Duplicate replies
/// from one name for the same sweep: first arrival wins, later ones are
/// dropped with a warning.
pub fn collect_replies(
    bus: &MessageBus,
    timeout: f64,
) -> (Vec<ReplyMessage>, Vec<String>) {
    let mut arrived: Vec<(f64, &ReplyMessage)> = bus
        .inbox
        .iter()
        .filter(|(t, _)| *t <= timeout)
        .map(|(t, r)| (*t, r))
        .collect();
    arrived.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut replies: Vec<ReplyMessage> = Vec::new();
    let mut warnings = Vec::new();
    for (_, r) in arrived {
        if replies
            .iter()
            .any(|p| p.name == r.name && p.sweep_id == r.sweep_id)
        {
            warnings.push(alloc::format!("duplicate reply from {} ignored", r.name));
        } else {
            replies.push(r.clone());
        }
    }
    (replies, warnings)
}

/// A reply annotated with its recovered signed angle.
#[derive(Debug, Clone)]
pub struct ScreenedReply {
    pub reply: ReplyMessage,
    /// Signed alpha: positive toward image-left.
    pub alpha: f64,
}

/// Screen replies against the FOV: strict |alpha| < fov/2. Impossible shifts
/// become `Inconsistent` exclusions rather than errors.
pub fn screen_fov(
    replies: &[ReplyMessage],
    v_s: f64,
    config: &SessionConfig,
) -> (Vec<ScreenedReply>, Vec<(String, ExclusionReason, f64)>) {
    let mut included = Vec::new();
    let mut excluded = Vec::new();
    for reply in replies {
        let observed = config.f0 + reply.delta_f;
        match geometry::angle_from_shift(observed, config.f0, config.sound_speed, v_s) {
            Ok(angle) => {
                let alpha = angle.signed_alpha();
                if geometry::in_fov(alpha, config.fov) {
                    included.push(ScreenedReply {
                        reply: reply.clone(),
                        alpha,
                    });
                } else {
                    excluded.push((reply.name.clone(), ExclusionReason::OutOfFov, alpha));
                }
            }
            Err(_) => {
                excluded.push((reply.name.clone(), ExclusionReason::Inconsistent, f64::NAN));
            }
        }
    }
    (included, excluded)
}

/// Order one row of replies left-to-right: shifts descending, ties broken by
/// name with a warning (a tie means sub-bin separation).
pub fn order_single_row(included: &[ScreenedReply]) -> (Vec<String>, Vec<String>) {
    let mut sorted: Vec<&ScreenedReply> = included.iter().collect();
    sorted.sort_by(|a, b| {
        b.reply
            .delta_f
            .partial_cmp(&a.reply.delta_f)
            .unwrap()
            .then_with(|| a.reply.name.cmp(&b.reply.name))
    });
    let mut warnings = Vec::new();
    for pair in sorted.windows(2) {
        if pair[0].reply.delta_f == pair[1].reply.delta_f {
            warnings.push(alloc::format!(
                "shift tie between {} and {}: sub-bin separation",
                pair[0].reply.name,
                pair[1].reply.name
            ));
        }
    }
    (
        sorted.into_iter().map(|r| r.reply.name.clone()).collect(),
        warnings,
    )
}

fn signed_beta(reply: &ReplyMessage, v_s: f64, config: &SessionConfig) -> Option<f64> {
    let observed = config.f0 + reply.delta_f;
    let angle = geometry::angle_from_shift(observed, config.f0, config.sound_speed, v_s).ok()?;
    // sweep B moves toward +y: positive shift means the receiver is above
    // the B axis, which is positive beta in the intersection frame
    Some(match angle.side {
        Side::Right => -angle.alpha,
        _ => angle.alpha,
    })
}

/// Localize every name present in both sweeps via the two sight-line
/// intersection. Missing sweep-B replies become `NoReply` exclusions,
/// degenerate intersections `Inconsistent`.
pub fn localize_multi_row(
    screened_a: &[ScreenedReply],
    replies_b: &[ReplyMessage],
    config: &SessionConfig,
) -> (Vec<(String, PlanarPoint)>, Vec<(String, ExclusionReason)>) {
    let w = config.w.unwrap_or(1.0);
    let v_s_b = config.v_s_b.unwrap_or(config.v_s_a);
    let mut coords = Vec::new();
    let mut excluded = Vec::new();
    for sa in screened_a {
        let Some(rb) = replies_b.iter().find(|r| r.name == sa.reply.name) else {
            excluded.push((sa.reply.name.clone(), ExclusionReason::NoReply));
            continue;
        };
        let Some(beta) = signed_beta(rb, v_s_b, config) else {
            excluded.push((sa.reply.name.clone(), ExclusionReason::Inconsistent));
            continue;
        };
        // the intersection frame measures alpha positive toward +x, which is
        // image-right, so the doppler-signed alpha flips
        let alpha_frame = -sa.alpha;
        match geometry::intersect_two_sweeps(alpha_frame, beta, config.l, w) {
            Ok(p) => coords.push((sa.reply.name.clone(), p)),
            Err(_) => excluded.push((sa.reply.name.clone(), ExclusionReason::Inconsistent)),
        }
    }
    (coords, excluded)
}

/// Assemble the final layout from two-sweep coordinates: cluster depths into
/// rows, order rows front first, each row left-to-right by x.
pub fn build_layout_multi_row(
    coordinates: &[(String, PlanarPoint)],
    k: Option<usize>,
    scale: f64,
    config: &SessionConfig,
) -> Result<TagLayout, cluster::ClusterError> {
    let mut layout = TagLayout::default();
    if coordinates.is_empty() {
        return Ok(layout);
    }
    // depth = distance from sweep A along its optical axis
    let depths: Vec<f64> = coordinates.iter().map(|(_, p)| config.l - p.y).collect();
    let assignment = cluster::cluster_rows(&depths, k, scale)?;
    if !assignment.converged {
        layout
            .warnings
            .push(String::from("k-means hit its iteration cap; best-so-far labels used"));
    }
    let k = assignment.row_means.len();
    let mut rows: Vec<Vec<(String, f64)>> = vec![Vec::new(); k];
    for (i, (name, p)) in coordinates.iter().enumerate() {
        rows[assignment.labels[i]].push((name.clone(), p.x));
        layout.coordinates.push((name.clone(), *p));
    }
    for row in rows.iter_mut() {
        row.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    }
    layout.rows = rows
        .into_iter()
        .filter(|r| !r.is_empty())
        .map(|r| r.into_iter().map(|(n, _)| n).collect())
        .collect();
    Ok(layout)
}

/// Run the whole sender side for one session's replies.
///
/// `replies` holds everything that arrived in time (both sweeps). Missing
/// group members become `NoReply`; screening happens on sweep A; one sweep
/// means a single row, two sweeps means localization plus row clustering.
pub fn resolve_session(
    replies: &[ReplyMessage],
    config: &SessionConfig,
    k_rows: Option<usize>,
    row_scale: f64,
) -> Result<TagLayout, cluster::ClusterError> {
    let replies_a: Vec<ReplyMessage> = replies
        .iter()
        .filter(|r| r.sweep_id == SweepId::A)
        .cloned()
        .collect();
    let replies_b: Vec<ReplyMessage> = replies
        .iter()
        .filter(|r| r.sweep_id == SweepId::B)
        .cloned()
        .collect();
    let (screened, screened_out) = screen_fov(&replies_a, config.v_s_a, config);
    let two_sweep = config.v_s_b.is_some() && !replies_b.is_empty();

    let mut layout = if two_sweep {
        let (coords, localization_excluded) = localize_multi_row(&screened, &replies_b, config);
        let mut layout = build_layout_multi_row(&coords, k_rows, row_scale, config)?;
        layout.excluded.extend(localization_excluded);
        layout
    } else {
        let (order, warnings) = order_single_row(&screened);
        let mut layout = TagLayout::default();
        if !order.is_empty() {
            layout.rows = vec![order];
        }
        layout.warnings = warnings;
        layout
    };
    for s in &screened {
        layout.angles.push((s.reply.name.clone(), s.alpha));
    }
    for (name, reason, alpha) in screened_out {
        if alpha.is_finite() {
            layout.angles.push((name.clone(), alpha));
        }
        layout.excluded.push((name, reason));
    }
    // completeness: every group member is placed or excluded
    for member in &config.group_members {
        let placed = layout.rows.iter().flatten().any(|n| n == member);
        let excluded = layout.excluded.iter().any(|(n, _)| n == member);
        if !placed && !excluded {
            let reason = if replies.iter().any(|r| r.name == *member) {
                ExclusionReason::Inconsistent
            } else {
                ExclusionReason::NoReply
            };
            layout.excluded.push((member.clone(), reason));
        }
    }
    Ok(layout)
}
