//! Closed-form physics and geometry: Doppler shifts, angle inversion, the
//! camera/speaker gap correction, angular resolution bounds, bandpass
//! undersampling arithmetic, and two-sweep triangulation.
//!
//! Everything here is a pure function of its arguments.

#[allow(unused_imports)] // shadowed by std's f64 methods under cargo test
use crate::math::FloatExt;
use core::f64::consts::{FRAC_PI_2, PI};
use serde::{Deserialize, Serialize};

/// Tolerance used when clamping arccos arguments: numerical jitter up to this
/// much past [-1, 1] is clamped, anything larger is an inconsistent
/// measurement.
pub const ACOS_CLAMP_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicsConstants {
    /// Speed of sound in m/s.
    pub sound_speed: f64,
    /// Emitted tone frequency in Hz.
    pub tone_frequency_f0: f64,
}

impl Default for PhysicsConstants {
    fn default() -> Self {
        PhysicsConstants {
            sound_speed: 340.0,
            tone_frequency_f0: 20_000.0,
        }
    }
}

impl PhysicsConstants {
    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.sound_speed > 0.0) {
            return Err(GeometryError::Domain("sound_speed must be positive"));
        }
        if !(self.tone_frequency_f0 > 0.0 && self.tone_frequency_f0 < 22_050.0) {
            return Err(GeometryError::Domain(
                "tone frequency must lie in (0, 22050) Hz",
            ));
        }
        Ok(())
    }
}

/// Which side of the camera's optical axis a shift places the receiver on.
/// Under a leftward sweep a positive shift means the receiver is to the
/// camera's left in the picture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
    Unknown,
}

/// Angle recovered from a Doppler shift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleResult {
    /// Angle to the sweep motion direction, in [0, pi].
    pub theta: f64,
    /// Angle to the optical axis: |pi/2 - theta|, in [0, pi/2].
    pub alpha: f64,
    pub side: Side,
}

impl AngleResult {
    /// Alpha with the sweep sign convention applied: positive toward the
    /// image-left side, negative toward image-right.
    pub fn signed_alpha(&self) -> f64 {
        match self.side {
            Side::Right => -self.alpha,
            _ => self.alpha,
        }
    }
}

/// FFT sizing that fixes the angular resolution bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolutionParams {
    pub sample_rate_fs: f64,
    pub fft_points_n: usize,
}

impl ResolutionParams {
    pub fn new(sample_rate_fs: f64, fft_points_n: usize) -> Self {
        ResolutionParams {
            sample_rate_fs,
            fft_points_n,
        }
    }

    /// Q = Fs / (f0 * N_FFT), always recomputed from the fields.
    pub fn q(&self, f0: f64) -> f64 {
        self.sample_rate_fs / (f0 * self.fft_points_n as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarPoint {
    pub x: f64,
    pub y: f64,
}

impl PlanarPoint {
    pub fn new(x: f64, y: f64) -> Self {
        PlanarPoint { x, y }
    }

    pub fn distance_to(&self, other: &PlanarPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeometryError {
    /// Input outside the mathematical domain of the operation.
    Domain(&'static str),
    /// A shift too large to be explained by the claimed sweep speed.
    InconsistentMeasurement,
    /// No angle in (0, pi) satisfies the resolution bound.
    NoSolution,
    /// Two sweep lines are (near) parallel and cannot be intersected.
    DegenerateGeometry,
    EmptyInput,
}

impl core::fmt::Display for GeometryError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            GeometryError::Domain(msg) => write!(f, "domain error: {msg}"),
            GeometryError::InconsistentMeasurement => {
                write!(f, "shift inconsistent with claimed sweep speed")
            }
            GeometryError::NoSolution => write!(f, "no distinguishable angle exists"),
            GeometryError::DegenerateGeometry => write!(f, "sweep lines are near parallel"),
            GeometryError::EmptyInput => write!(f, "empty input sequence"),
        }
    }
}

/// f = (c + v_R) / (c - v_S) * f0, with speeds taken along the line toward
/// the other party.
pub fn doppler_frequency(
    f0: f64,
    c: f64,
    v_sender_toward: f64,
    v_receiver_toward: f64,
) -> Result<f64, GeometryError> {
    if v_sender_toward.abs() >= c {
        return Err(GeometryError::Domain("sender speed must be below c"));
    }
    Ok((c + v_receiver_toward) / (c - v_sender_toward) * f0)
}

/// Shift observed by a stationary receiver at angle `theta` to the motion of
/// a sender sweeping at peak speed `v_s`. Analytic forward model; the exact
/// inverse of [`angle_from_shift`].
pub fn shift_for_geometry(theta: f64, f0: f64, c: f64, v_s: f64) -> f64 {
    c / (c - v_s * theta.cos()) * f0 - f0
}

/// Invert an observed frequency into the angle pair (theta, alpha).
///
/// theta = arccos((c / v_S) * (1 - f0 / f)); alpha = |pi/2 - theta|. The
/// arccos argument is clamped into [-1, 1] when within `ACOS_CLAMP_EPS`,
/// otherwise the measurement is rejected as inconsistent.
pub fn angle_from_shift(
    observed_f: f64,
    f0: f64,
    c: f64,
    v_s: f64,
) -> Result<AngleResult, GeometryError> {
    if !(v_s > 0.0) {
        return Err(GeometryError::Domain("sweep speed must be positive"));
    }
    let arg = (c / v_s) * (1.0 - f0 / observed_f);
    if arg.abs() > 1.0 + ACOS_CLAMP_EPS {
        return Err(GeometryError::InconsistentMeasurement);
    }
    let theta = arg.clamp(-1.0, 1.0).acos();
    let alpha = (FRAC_PI_2 - theta).abs();
    let side = if observed_f > f0 {
        Side::Left
    } else if observed_f < f0 {
        Side::Right
    } else {
        Side::Unknown
    };
    Ok(AngleResult { theta, alpha, side })
}

/// Which side of the optical axis the receiver sits relative to the speaker
/// offset, for the gap correction of `camera_corrected_angle`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapSide {
    TowardSpeaker,
    AwayFromSpeaker,
}

/// Correct the speaker-relative angle `alpha` into the camera-relative angle
/// alpha' = arctan(tan(alpha) +- L/H). The caller compares |alpha - alpha'|.
pub fn camera_corrected_angle(
    alpha: f64,
    gap_l: f64,
    distance_h: f64,
    side: GapSide,
) -> Result<f64, GeometryError> {
    if !(alpha >= 0.0 && alpha < FRAC_PI_2) {
        return Err(GeometryError::Domain("alpha must lie in [0, pi/2)"));
    }
    if !(distance_h > 0.0) {
        return Err(GeometryError::Domain("distance must be positive"));
    }
    let ratio = gap_l / distance_h;
    let t = match side {
        GapSide::AwayFromSpeaker => alpha.tan() + ratio,
        GapSide::TowardSpeaker => alpha.tan() - ratio,
    };
    Ok(t.atan())
}

/// Integrate accelerometer samples into a velocity series.
///
/// v[k] = v0 + sum_{i<=k} a[i] * dt. Returns the series together with the
/// peak |v| and its index (first occurrence on ties).
pub fn integrate_velocity(
    accel_samples: &[f64],
    v0: f64,
    dt: f64,
) -> Result<(alloc::vec::Vec<f64>, f64, usize), GeometryError> {
    if accel_samples.is_empty() {
        return Err(GeometryError::EmptyInput);
    }
    if !(dt > 0.0) {
        return Err(GeometryError::Domain("dt must be positive"));
    }
    let mut series = alloc::vec::Vec::with_capacity(accel_samples.len());
    let mut v = v0;
    let mut peak = f64::NEG_INFINITY;
    let mut peak_index = 0;
    for (i, a) in accel_samples.iter().enumerate() {
        v += a * dt;
        series.push(v);
        if v.abs() > peak {
            peak = v.abs();
            peak_index = i;
        }
    }
    Ok((series, peak, peak_index))
}

/// True iff two receivers at angles alpha and beta (cos(alpha) > cos(beta))
/// produce shifts more than one FFT bin apart.
pub fn resolution_predicate(
    alpha: f64,
    beta: f64,
    res: ResolutionParams,
    v_s: f64,
    c: f64,
    f0: f64,
) -> Result<bool, GeometryError> {
    if alpha.cos() <= beta.cos() {
        return Err(GeometryError::Domain("requires cos(alpha) > cos(beta)"));
    }
    let lhs = (1.0 / (c - v_s * alpha.cos()) - 1.0 / (c - v_s * beta.cos())) * c * f0
        * res.fft_points_n as f64
        / res.sample_rate_fs;
    Ok(lhs > 1.0)
}

/// Smallest beta > alpha that is distinguishable from alpha at the given
/// resolution: the infimum satisfying the one-bin separation bound.
pub fn min_distinguishable_beta(
    alpha: f64,
    res: ResolutionParams,
    v_s: f64,
    c: f64,
    f0: f64,
) -> Result<f64, GeometryError> {
    if !(alpha > 0.0 && alpha < PI) {
        return Err(GeometryError::Domain("alpha must lie in (0, pi)"));
    }
    if !(v_s > 0.0) {
        return Err(GeometryError::Domain("sweep speed must be positive"));
    }
    let q = res.q(f0);
    let ca = alpha.cos();
    let bound = (-q * c + v_s * ca * (1.0 + q)) / (v_s * (1.0 - q + q * v_s * ca / c));
    if !(-1.0..=1.0).contains(&bound) {
        return Err(GeometryError::NoSolution);
    }
    Ok(bound.acos())
}

/// Validity of a bandpass undersampling rate: the band [fL, fH] folds
/// alias-free under `new_rate` with decimation zone index `n`.
pub fn undersampling_rate_valid(f_l: f64, f_h: f64, new_rate: f64, n: u32) -> bool {
    if !(0.0 < f_l && f_l < f_h) || n < 1 {
        return false;
    }
    let n_max = (f_h / (f_h - f_l)).floor() as u32;
    if n > n_max {
        return false;
    }
    let lower = 2.0 * f_h / n as f64;
    if new_rate < lower {
        return false;
    }
    if n > 1 {
        let upper = 2.0 * f_l / (n - 1) as f64;
        if new_rate > upper {
            return false;
        }
    }
    true
}

/// Fold a frequency into the first Nyquist zone of `new_rate`.
///
/// Returns the aliased frequency in [0, new_rate/2] and whether the zone
/// mapping mirrors the band (odd zones invert orientation).
pub fn alias_frequency(f: f64, new_rate: f64) -> (f64, bool) {
    let half = new_rate / 2.0;
    let r = f - (f / new_rate).floor() * new_rate;
    if r <= half {
        (r, false)
    } else {
        (new_rate - r, true)
    }
}

/// Intersect the two sweep sight lines of the Fig. 5(b) frame.
///
/// Sweep A sits at (0, L) with its optical axis toward -y; its sight line to
/// the receiver makes the angle alpha + pi/2 with the x axis. Sweep B sits at
/// (-W, 0) with its sight line at angle beta from the x axis. Solved in
/// point-direction form so alpha = 0 (a vertical line) needs no special case.
pub fn intersect_two_sweeps(
    alpha: f64,
    beta: f64,
    l: f64,
    w: f64,
) -> Result<PlanarPoint, GeometryError> {
    if !(l > 0.0 && w > 0.0) {
        return Err(GeometryError::Domain("L and W must be positive"));
    }
    // Direction of l1 is (cos(alpha+pi/2), sin(alpha+pi/2)) = (-sin a, cos a);
    // direction of l2 is (cos b, sin b). The lines are parallel iff the cross
    // product -cos(alpha - beta) vanishes.
    let cross = -(alpha - beta).cos();
    if cross.abs() < 1e-9 {
        return Err(GeometryError::DegenerateGeometry);
    }
    // Solve A + t*d1 = B + s*d2 for t.
    let (d1x, d1y) = (-alpha.sin(), alpha.cos());
    let (d2x, d2y) = (beta.cos(), beta.sin());
    let (rx, ry) = (-w - 0.0, 0.0 - l);
    let t = (rx * d2y - ry * d2x) / (d1x * d2y - d1y * d2x);
    Ok(PlanarPoint::new(t * d1x, l + t * d1y))
}

/// Strict FOV membership: |alpha| < fov / 2, boundary excluded.
pub fn in_fov(alpha: f64, fov: f64) -> bool {
    alpha.abs() < fov / 2.0
}
