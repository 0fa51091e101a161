//! Deterministic, seeded synthesis of a photo session: speaker sweep
//! trajectories, per-receiver microphone recordings with Doppler, 1/d
//! attenuation, noise and sampling clock offset, plus ground-truth labels.
//!
//! Frame convention (Fig. 5(b) of the write-ups this follows): the group
//! stands near the origin. The camera / sweep position A is at (0, L) with
//! its optical axis toward -y; sweep position B is at (-W, 0) with its axis
//! toward +x. Sweep A moves the speaker toward -x ("leftward": a receiver at
//! smaller x appears further left in the picture and sees a positive shift);
//! sweep B moves toward +y.

use crate::fft;
use crate::geometry::PlanarPoint;
#[allow(unused_imports)] // shadowed by std's f64 methods under cargo test
use crate::math::FloatExt;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const NOMINAL_RATE: f64 = 44_100.0;
pub const ACCEL_RATE: f64 = 100.0;
/// Reference distance at which `target_snr_db` is defined.
pub const SNR_REF_DISTANCE: f64 = 3.0;
/// Tone amplitude at the reference distance (full scale = 1.0).
pub const REF_AMPLITUDE: f64 = 0.25;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Receiver {
    pub name: String,
    pub position: PlanarPoint,
}

/// Geometry of one photo session.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scene {
    /// Camera / sweep-A location; the optical axis points from here toward -y.
    pub camera_position: PlanarPoint,
    /// Field of view in radians.
    pub fov: f64,
    /// Group members expected in the picture.
    pub receivers: Vec<Receiver>,
    /// Optional ground-truth row assignment, front row first.
    pub rows_ground_truth: Option<Vec<Vec<String>>>,
    /// Group members standing outside the FOV (they still reply).
    pub bystanders: Vec<Receiver>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SceneError {
    NoReceivers,
    DuplicateName(String),
    NonFinitePosition(String),
    BadRowAssignment(String),
    ReceiverAtSpeaker(String),
    BadConfig(&'static str),
    UnknownReceiver(String),
}

impl core::fmt::Display for SceneError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SceneError::NoReceivers => write!(f, "scene needs at least one receiver"),
            SceneError::DuplicateName(n) => write!(f, "duplicate receiver name: {n}"),
            SceneError::NonFinitePosition(n) => write!(f, "non-finite position for {n}"),
            SceneError::BadRowAssignment(n) => write!(f, "row assignment names unknown member {n}"),
            SceneError::ReceiverAtSpeaker(n) => write!(f, "receiver {n} coincides with speaker"),
            SceneError::BadConfig(m) => write!(f, "bad config: {m}"),
            SceneError::UnknownReceiver(n) => write!(f, "unknown receiver {n}"),
        }
    }
}

impl Scene {
    pub fn validate(&self) -> Result<(), SceneError> {
        if self.receivers.is_empty() {
            return Err(SceneError::NoReceivers);
        }
        let mut names: Vec<&str> = Vec::new();
        for r in self.receivers.iter().chain(self.bystanders.iter()) {
            if names.contains(&r.name.as_str()) {
                return Err(SceneError::DuplicateName(r.name.clone()));
            }
            names.push(&r.name);
            if !r.position.x.is_finite() || !r.position.y.is_finite() {
                return Err(SceneError::NonFinitePosition(r.name.clone()));
            }
        }
        if !self.camera_position.x.is_finite() || !self.camera_position.y.is_finite() {
            return Err(SceneError::NonFinitePosition(String::from("camera")));
        }
        if !(self.fov > 0.0 && self.fov < PI) {
            return Err(SceneError::BadConfig("fov must lie in (0, pi)"));
        }
        if let Some(rows) = &self.rows_ground_truth {
            for name in rows.iter().flatten() {
                if !self.receivers.iter().any(|r| &r.name == name) {
                    return Err(SceneError::BadRowAssignment(name.clone()));
                }
            }
        }
        Ok(())
    }

    pub fn everyone(&self) -> impl Iterator<Item = &Receiver> {
        self.receivers.iter().chain(self.bystanders.iter())
    }

    pub fn find(&self, name: &str) -> Option<&Receiver> {
        self.everyone().find(|r| r.name == name)
    }
}

/// Shape of one speaker sweep. The velocity profile is a raised cosine over
/// `motion_duration`, preceded by a stationary lead-in; the camera point sits
/// at the middle of the displacement, where the peak speed occurs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub v_peak: f64,
    pub duration: f64,
    pub lead_in: f64,
    pub motion_duration: f64,
    /// RMS of the additive Gaussian error on the synthetic accelerometer.
    pub accel_noise_rms: f64,
}

/// Default accelerometer noise, calibrated so the RMS error of the
/// integrated peak speed lands near the 0.10 m/s budget for the default
/// sweep shape.
pub const DEFAULT_ACCEL_NOISE_RMS: f64 = 2.0;

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            v_peak: 3.4,
            duration: 1.0,
            lead_in: 0.2,
            motion_duration: 0.1,
            accel_noise_rms: DEFAULT_ACCEL_NOISE_RMS,
        }
    }
}

/// A synthesized speaker trajectory along its motion axis.
#[derive(Debug, Clone)]
pub struct SweepTrace {
    pub spec: SweepSpec,
    pub sample_rate: f64,
    /// Signed displacement from the camera point, per audio sample.
    pub positions: Vec<f64>,
    /// Speed along the motion axis, per audio sample.
    pub velocities: Vec<f64>,
    /// Synthetic accelerometer readings at 100 Hz (finite-difference
    /// derivative of the velocity profile plus seeded error).
    pub accel_readings: Vec<f64>,
}

fn velocity_at(spec: &SweepSpec, t: f64) -> f64 {
    let tau = t - spec.lead_in;
    if tau <= 0.0 || tau >= spec.motion_duration {
        0.0
    } else {
        spec.v_peak / 2.0 * (1.0 - (2.0 * PI * tau / spec.motion_duration).cos())
    }
}

/// Closed-form integral of the raised-cosine velocity from motion start.
fn displacement_at(spec: &SweepSpec, t: f64) -> f64 {
    let tau = (t - spec.lead_in).clamp(0.0, spec.motion_duration);
    let m = spec.motion_duration;
    spec.v_peak / 2.0 * (tau - m / (2.0 * PI) * (2.0 * PI * tau / m).sin())
}

/// Synthesize one sweep: trajectory plus noisy accelerometer trace.
pub fn synthesize_sweep(spec: &SweepSpec, seed: u64) -> Result<SweepTrace, SceneError> {
    if !(spec.v_peak > 0.0) || !(spec.duration > 0.0) {
        return Err(SceneError::BadConfig("v_peak and duration must be positive"));
    }
    if spec.lead_in < 0.0 || spec.lead_in + spec.motion_duration > spec.duration {
        return Err(SceneError::BadConfig("lead_in + motion must fit in duration"));
    }
    let n = (spec.duration * NOMINAL_RATE).round() as usize;
    let mid = displacement_at(spec, spec.lead_in + spec.motion_duration / 2.0);
    let mut positions = Vec::with_capacity(n);
    let mut velocities = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 / NOMINAL_RATE;
        positions.push(displacement_at(spec, t) - mid);
        velocities.push(velocity_at(spec, t));
    }
    let dt = 1.0 / ACCEL_RATE;
    let n_acc = (spec.duration * ACCEL_RATE).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut accel_readings = Vec::with_capacity(n_acc);
    for k in 0..n_acc {
        // finite difference so the rectangular integration in
        // integrate_velocity telescopes back to the exact velocity
        let a = (velocity_at(spec, (k + 1) as f64 * dt) - velocity_at(spec, k as f64 * dt)) / dt;
        accel_readings.push(a + gaussian(&mut rng) * spec.accel_noise_rms);
    }
    Ok(SweepTrace {
        spec: *spec,
        sample_rate: NOMINAL_RATE,
        positions,
        velocities,
        accel_readings,
    })
}

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NoiseKind {
    None,
    Ambient,
    Music,
    Conversation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quantization {
    Float,
    Pcm16,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub noise_kind: NoiseKind,
    /// In-band SNR in dB, defined at the 3 m reference distance.
    pub target_snr_db: f64,
    /// Maximum |clock offset| in ppm; each receiver draws uniformly in
    /// [-max, max].
    pub sco_ppm_max: f64,
    pub quantization: Quantization,
}

impl Default for ChannelParams {
    fn default() -> Self {
        ChannelParams {
            noise_kind: NoiseKind::Ambient,
            target_snr_db: 10.0,
            sco_ppm_max: 30.0,
            quantization: Quantization::Pcm16,
        }
    }
}

impl ChannelParams {
    /// Quiet channel: no noise, no clock offset, float samples.
    pub fn quiet() -> Self {
        ChannelParams {
            noise_kind: NoiseKind::None,
            target_snr_db: f64::INFINITY,
            sco_ppm_max: 0.0,
            quantization: Quantization::Float,
        }
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        if self.sco_ppm_max.abs() > 200.0 {
            return Err(SceneError::BadConfig("|clock offset| must be <= 200 ppm"));
        }
        if self.target_snr_db.is_nan() {
            return Err(SceneError::BadConfig("target SNR must not be NaN"));
        }
        Ok(())
    }
}

/// One receiver's sampled waveform.
#[derive(Debug, Clone)]
pub struct Recording {
    pub receiver_name: String,
    pub samples: Vec<f64>,
    pub nominal_rate: f64,
    pub true_rate: f64,
}

/// Placement of one sweep: where the camera point is and which way the
/// speaker moves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPlacement {
    pub origin: PlanarPoint,
    /// Unit vector of the speaker motion.
    pub motion_dir: PlanarPoint,
}

impl SweepPlacement {
    /// Sweep A: camera at (0, L) looking toward -y, speaker moving toward -x.
    pub fn position_a(l: f64) -> Self {
        SweepPlacement {
            origin: PlanarPoint::new(0.0, l),
            motion_dir: PlanarPoint::new(-1.0, 0.0),
        }
    }

    /// Sweep B: at (-W, 0) looking toward +x, speaker moving toward +y.
    pub fn position_b(w: f64) -> Self {
        SweepPlacement {
            origin: PlanarPoint::new(-w, 0.0),
            motion_dir: PlanarPoint::new(0.0, 1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tone {
    pub f0: f64,
    pub bandwidth: f64,
}

impl Default for Tone {
    fn default() -> Self {
        Tone {
            f0: 20_000.0,
            bandwidth: 2_000.0,
        }
    }
}

/// Render the waveform one receiver hears during one sweep.
///
/// The instantaneous frequency is recomputed per sample from the speaker's
/// position and velocity, the amplitude follows 1/distance, noise is scaled
/// so the in-band SNR at the 3 m reference equals `target_snr_db`, and the
/// waveform is sampled on the receiver's own (offset) clock.
pub fn render_recording(
    scene: &Scene,
    receiver_name: &str,
    sweep: &SweepTrace,
    placement: &SweepPlacement,
    tone: Tone,
    channel: &ChannelParams,
    sco_ppm: f64,
    sound_speed: f64,
    seed: u64,
) -> Result<Recording, SceneError> {
    let receiver = scene
        .find(receiver_name)
        .ok_or_else(|| SceneError::UnknownReceiver(String::from(receiver_name)))?;
    channel.validate()?;
    let true_rate = NOMINAL_RATE * (1.0 + sco_ppm * 1e-6);
    let n = (sweep.spec.duration * NOMINAL_RATE).round() as usize;
    let rx = receiver.position;

    let speaker_pos = |idx: usize| -> PlanarPoint {
        let s = sweep.positions[idx.min(sweep.positions.len() - 1)];
        PlanarPoint::new(
            placement.origin.x + placement.motion_dir.x * s,
            placement.origin.y + placement.motion_dir.y * s,
        )
    };

    // constant propagation delay per receiver
    let d0 = rx.distance_to(&speaker_pos(0));
    if d0 < 1e-6 {
        return Err(SceneError::ReceiverAtSpeaker(String::from(receiver_name)));
    }
    let delay = d0 / sound_speed;

    let mut samples = Vec::with_capacity(n);
    let mut phase = 0.0f64;
    for i in 0..n {
        let t_rx = i as f64 / true_rate;
        let t_emit = (t_rx - delay).max(0.0);
        let idx = (t_emit * sweep.sample_rate) as usize;
        let sp = speaker_pos(idx);
        let dist = rx.distance_to(&sp);
        if dist < 1e-6 {
            return Err(SceneError::ReceiverAtSpeaker(String::from(receiver_name)));
        }
        let v = sweep.velocities[idx.min(sweep.velocities.len() - 1)];
        // speed component toward the receiver
        let toward = (placement.motion_dir.x * (rx.x - sp.x) + placement.motion_dir.y * (rx.y - sp.y))
            / dist
            * v;
        let f_inst = tone.f0 * sound_speed / (sound_speed - toward);
        phase += 2.0 * PI * f_inst / true_rate;
        let amp = REF_AMPLITUDE * SNR_REF_DISTANCE / dist;
        samples.push(amp * phase.sin());
    }

    if channel.noise_kind != NoiseKind::None && channel.target_snr_db.is_finite() {
        add_noise(&mut samples, tone, channel, seed);
    }
    if channel.quantization == Quantization::Pcm16 {
        for s in samples.iter_mut() {
            let clamped = s.clamp(-1.0, 1.0);
            *s = (clamped * 32767.0).round() / 32767.0;
        }
    }
    Ok(Recording {
        receiver_name: String::from(receiver_name),
        samples,
        nominal_rate: NOMINAL_RATE,
        true_rate,
    })
}

/// Mean power of a signal inside [f_lo, f_hi], estimated from one FFT over
/// the whole record. Also used by tests to verify the injected SNR.
pub fn in_band_power(samples: &[f64], rate: f64, f_lo: f64, f_hi: f64) -> f64 {
    let n_fft = fft::next_pow2(samples.len());
    let spec = fft::real_magnitude_spectrum(samples, n_fft);
    let bin_hz = rate / n_fft as f64;
    let lo = (f_lo / bin_hz).round() as usize;
    let hi = ((f_hi / bin_hz).round() as usize).min(spec.len() - 1);
    // Parseval with one-sided doubling; normalized per input sample
    let mut p = 0.0;
    for m in spec[lo..=hi].iter() {
        p += 2.0 * m * m;
    }
    p / (n_fft as f64 * samples.len() as f64)
}

fn add_noise(samples: &mut [f64], tone: Tone, channel: &ChannelParams, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6e6f_6973); // distinct stream per purpose
    let n = samples.len();
    let mut noise: Vec<f64> = (0..n).map(|_| gaussian(&mut rng)).collect();
    match channel.noise_kind {
        NoiseKind::Music | NoiseKind::Conversation => {
            // gentle one-pole low-pass body plus a weak wideband component;
            // only the in-band SNR is calibrated
            let cutoff = if channel.noise_kind == NoiseKind::Music {
                4_000.0
            } else {
                2_000.0
            };
            let a = (-2.0 * PI * cutoff / NOMINAL_RATE).exp();
            let mut state = 0.0;
            for x in noise.iter_mut() {
                state = a * state + (1.0 - a) * *x;
                *x = state * 8.0 + *x * 0.3;
            }
        }
        _ => {}
    }
    // calibrate so the measured in-band noise power equals the tone power a
    // 3 m receiver would see, divided by the target SNR
    let f_lo = tone.f0 - tone.bandwidth / 4.0;
    let f_hi = tone.f0 + tone.bandwidth / 4.0;
    let p_noise = in_band_power(&noise, NOMINAL_RATE, f_lo, f_hi);
    let p_tone_ref = REF_AMPLITUDE * REF_AMPLITUDE / 2.0;
    let target = p_tone_ref / libm::pow(10.0, channel.target_snr_db / 10.0);
    let gain = (target / p_noise).sqrt();
    for (s, w) in samples.iter_mut().zip(noise.iter()) {
        *s += gain * w;
    }
}

/// A planned sweep inside a session.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannedSweep {
    pub placement: SweepPlacement,
    pub spec: SweepSpec,
}

#[derive(Debug, Clone)]
pub struct SweepPlan {
    pub sweeps: Vec<PlannedSweep>,
}

impl SweepPlan {
    /// Single sweep from position A at distance `l` from the group.
    pub fn single(l: f64, spec: SweepSpec) -> Self {
        SweepPlan {
            sweeps: vec![PlannedSweep {
                placement: SweepPlacement::position_a(l),
                spec,
            }],
        }
    }

    /// Two sweeps: A at distance `l`, B at lateral distance `w`.
    pub fn two_sweep(l: f64, w: f64, spec: SweepSpec) -> Self {
        SweepPlan {
            sweeps: vec![
                PlannedSweep {
                    placement: SweepPlacement::position_a(l),
                    spec,
                },
                PlannedSweep {
                    placement: SweepPlacement::position_b(w),
                    spec,
                },
            ],
        }
    }
}

/// Ground truth and synthesized recordings of one full session.
#[derive(Debug, Clone)]
pub struct Session {
    /// recordings[sweep_index][receiver_index aligned with scene.everyone()]
    pub recordings: Vec<Vec<Recording>>,
    pub sweep_traces: Vec<SweepTrace>,
    pub ground_truth: crate::tag::TagLayout,
}

/// True signed angle from the sweep-A optical axis (positive = image-left =
/// positive shift under the leftward sweep).
pub fn true_alpha_from_a(camera: PlanarPoint, receiver: PlanarPoint) -> f64 {
    // axis -y, image-left is -x
    (-(receiver.x - camera.x)).atan2(camera.y - receiver.y)
}

/// Ground-truth layout derived purely from geometry.
pub fn ground_truth_layout(scene: &Scene) -> crate::tag::TagLayout {
    use crate::tag::{ExclusionReason, TagLayout};
    let mut included: Vec<&Receiver> = Vec::new();
    let mut layout = TagLayout::default();
    for r in scene.everyone() {
        let alpha = true_alpha_from_a(scene.camera_position, r.position);
        layout.angles.push((r.name.clone(), alpha));
        if crate::geometry::in_fov(alpha, scene.fov) {
            included.push(r);
        } else {
            layout
                .excluded
                .push((r.name.clone(), ExclusionReason::OutOfFov));
        }
    }
    // rows: ground-truth assignment if present, else everyone on one row
    let mut rows: Vec<Vec<&Receiver>> = match &scene.rows_ground_truth {
        Some(gt_rows) => gt_rows
            .iter()
            .map(|row| {
                row.iter()
                    .filter_map(|name| included.iter().find(|r| &r.name == name).copied())
                    .collect()
            })
            .collect(),
        None => vec![included.clone()],
    };
    rows.retain(|row| !row.is_empty());
    for row in rows.iter_mut() {
        // image left-to-right: descending signed alpha = ascending -alpha
        row.sort_by(|a, b| {
            let aa = true_alpha_from_a(scene.camera_position, a.position);
            let ab = true_alpha_from_a(scene.camera_position, b.position);
            ab.partial_cmp(&aa).unwrap()
        });
    }
    layout.rows = rows
        .into_iter()
        .map(|row| row.into_iter().map(|r| r.name.clone()).collect())
        .collect();
    layout
}

/// Run the full synthesis for one session: sweeps, recordings, ground truth.
/// Deterministic for a fixed seed.
pub fn simulate_session(
    scene: &Scene,
    plan: &SweepPlan,
    channel: &ChannelParams,
    seed: u64,
) -> Result<Session, SceneError> {
    scene.validate()?;
    channel.validate()?;
    if plan.sweeps.is_empty() {
        return Err(SceneError::BadConfig("plan needs at least one sweep"));
    }
    if let Some(rows) = &scene.rows_ground_truth {
        if rows.len() >= 2 && plan.sweeps.len() < 2 {
            return Err(SceneError::BadConfig(
                "multi-row scenes need a two-sweep plan",
            ));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<String> = scene.everyone().map(|r| r.name.clone()).collect();
    let sco: Vec<f64> = names
        .iter()
        .map(|_| {
            if channel.sco_ppm_max > 0.0 {
                rng.gen_range(-channel.sco_ppm_max..=channel.sco_ppm_max)
            } else {
                0.0
            }
        })
        .collect();

    let mut recordings = Vec::with_capacity(plan.sweeps.len());
    let mut sweep_traces = Vec::with_capacity(plan.sweeps.len());
    for (si, planned) in plan.sweeps.iter().enumerate() {
        let trace = synthesize_sweep(&planned.spec, seed.wrapping_add(1 + si as u64))?;
        let mut per_receiver = Vec::with_capacity(names.len());
        for (ri, name) in names.iter().enumerate() {
            let rec_seed = seed
                .wrapping_mul(0x9e37_79b9_7f4a_7c15)
                .wrapping_add((si as u64) << 32)
                .wrapping_add(ri as u64);
            per_receiver.push(render_recording(
                scene,
                name,
                &trace,
                &planned.placement,
                Tone::default(),
                channel,
                sco[ri],
                340.0,
                rec_seed,
            )?);
        }
        recordings.push(per_receiver);
        sweep_traces.push(trace);
    }
    Ok(Session {
        recordings,
        sweep_traces,
        ground_truth: ground_truth_layout(scene),
    })
}
