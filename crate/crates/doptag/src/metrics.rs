//! Aggregate metrics over sessions: exact-layout accuracy plus per-person
//! inclusion precision, recall, and fallout.

use doptag_core::tag::TagLayout;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("layouts ({0}) and truths ({1}) differ in length")]
    LengthMismatch(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    /// Fraction of sessions whose full layout matched ground truth.
    pub accuracy: f64,
    /// |inside AND tagged| / |tagged|.
    pub precision: f64,
    /// |inside AND tagged| / |inside|.
    pub recall: f64,
    /// |outside AND tagged| / |outside|.
    pub fallout: f64,
    pub sessions: usize,
    pub matched: usize,
    pub tagged_inside: usize,
    pub tagged_outside: usize,
    pub inside_total: usize,
    pub outside_total: usize,
    pub tagged_total: usize,
}

fn ratio(num: usize, den: usize, empty: f64) -> f64 {
    if den == 0 {
        empty
    } else {
        num as f64 / den as f64
    }
}

/// Compare estimated layouts against ground truths. A person counts as
/// "inside" when ground truth places them in a row, "tagged" when the
/// estimate does. Counts aggregate over all sessions before the division.
pub fn compute_metrics(
    layouts: &[TagLayout],
    truths: &[TagLayout],
) -> Result<MetricsReport, MetricsError> {
    if layouts.len() != truths.len() {
        return Err(MetricsError::LengthMismatch(layouts.len(), truths.len()));
    }
    let mut matched = 0;
    let mut tagged_inside = 0;
    let mut tagged_outside = 0;
    let mut inside_total = 0;
    let mut outside_total = 0;
    let mut tagged_total = 0;
    for (layout, truth) in layouts.iter().zip(truths.iter()) {
        if layout.matches(truth) {
            matched += 1;
        }
        let tagged =
            |name: &str| layout.rows.iter().any(|row| row.iter().any(|n| n == name));
        for row in &truth.rows {
            for name in row {
                inside_total += 1;
                if tagged(name) {
                    tagged_inside += 1;
                    tagged_total += 1;
                }
            }
        }
        for (name, _) in &truth.excluded {
            outside_total += 1;
            if tagged(name) {
                tagged_outside += 1;
                tagged_total += 1;
            }
        }
    }
    Ok(MetricsReport {
        accuracy: ratio(matched, layouts.len(), 1.0),
        precision: ratio(tagged_inside, tagged_total, 1.0),
        recall: ratio(tagged_inside, inside_total, 1.0),
        fallout: ratio(tagged_outside, outside_total, 0.0),
        sessions: layouts.len(),
        matched,
        tagged_inside,
        tagged_outside,
        inside_total,
        outside_total,
        tagged_total,
    })
}
