//! The receiver pipeline: bandpass filter, undersampling decimation, framed
//! zero-padded FFT, tone detection with the 1.5x energy rule, SCO-referenced
//! coarse shift, and border-line refinement.

use crate::fft;
use crate::geometry::alias_frequency;
#[allow(unused_imports)] // shadowed by std's f64 methods under cargo test
use crate::math::FloatExt;
use crate::scene::Recording;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Order-10 Butterworth bandpass realized as five cascaded second-order
/// sections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    pub order: usize,
    pub center: f64,
    pub bandwidth: f64,
}

impl Default for FilterSpec {
    fn default() -> Self {
        FilterSpec {
            order: 10,
            center: 20_000.0,
            bandwidth: 2_000.0,
        }
    }
}

/// One biquad: y = b0 x + b1 x1 + b2 x2 - a1 y1 - a2 y2 (a0 normalized).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub a1: f64,
    pub a2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SosFilter {
    pub sections: Vec<Biquad>,
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DspError {
    BandOutsideNyquist,
    RecordingTooShort,
    ToneNotDetected,
    BadSpec(&'static str),
}

impl core::fmt::Display for DspError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            DspError::BandOutsideNyquist => write!(f, "filter band falls outside Nyquist"),
            DspError::RecordingTooShort => write!(f, "recording shorter than one frame"),
            DspError::ToneNotDetected => write!(f, "no frame passed the tone energy test"),
            DspError::BadSpec(m) => write!(f, "bad spec: {m}"),
        }
    }
}

/// Design the bandpass as an analog Butterworth prototype, lowpass-to-
/// bandpass transformed, then bilinear-mapped with prewarped band edges.
pub fn design_bandpass(spec: &FilterSpec, rate: f64) -> Result<SosFilter, DspError> {
    if spec.order % 2 != 0 || spec.order == 0 {
        return Err(DspError::BadSpec("bandpass order must be even"));
    }
    let f_lo = spec.center - spec.bandwidth / 2.0;
    let f_hi = spec.center + spec.bandwidth / 2.0;
    if !(f_lo > 0.0 && f_hi < rate / 2.0) {
        return Err(DspError::BandOutsideNyquist);
    }
    let n_proto = spec.order / 2;
    let fs2 = 2.0 * rate;
    // prewarped analog band edges
    let w_lo = fs2 * (PI * f_lo / rate).tan();
    let w_hi = fs2 * (PI * f_hi / rate).tan();
    let w0 = (w_lo * w_hi).sqrt();
    let bw = w_hi - w_lo;

    // prototype lowpass poles on the unit circle's left half
    let mut analog_poles: Vec<Complex64> = Vec::with_capacity(spec.order);
    for k in 1..=n_proto {
        let theta = PI * (2.0 * k as f64 + n_proto as f64 - 1.0) / (2.0 * n_proto as f64);
        let p = Complex64::new(theta.cos(), theta.sin());
        // lowpass-to-bandpass: s -> (s^2 + w0^2)/(bw*s); each prototype pole
        // splits into two analog poles
        let bp = p * (bw / 2.0);
        let disc = (bp * bp - Complex64::new(w0 * w0, 0.0)).sqrt();
        analog_poles.push(bp + disc);
        analog_poles.push(bp - disc);
    }

    // bilinear transform of poles; zeros land at z = +1 (n) and z = -1 (n)
    let digital_poles: Vec<Complex64> = analog_poles
        .iter()
        .map(|&s| (Complex64::new(fs2, 0.0) + s) / (Complex64::new(fs2, 0.0) - s))
        .collect();

    // pair each upper-half-plane pole with its conjugate into one section
    let mut upper: Vec<Complex64> = digital_poles
        .iter()
        .copied()
        .filter(|p| p.im >= 0.0)
        .collect();
    upper.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
    if upper.len() != n_proto {
        return Err(DspError::BadSpec("pole pairing failed"));
    }
    let mut sections: Vec<Biquad> = upper
        .iter()
        .map(|p| Biquad {
            b0: 1.0,
            b1: 0.0,
            b2: -1.0, // zeros at z = +1 and z = -1
            a1: -2.0 * p.re,
            a2: p.norm_sqr(),
        })
        .collect();

    // normalize |H| = 1 at the center frequency
    let mut filt = SosFilter {
        sections: sections.clone(),
        gain: 1.0,
    };
    let h = frequency_response(&filt, spec.center, rate).norm();
    if !(h.is_finite() && h > 0.0) {
        return Err(DspError::BadSpec("degenerate response at center"));
    }
    let per_section = libm::pow(1.0 / h, 1.0 / n_proto as f64);
    for s in sections.iter_mut() {
        s.b0 *= per_section;
        s.b2 *= per_section;
    }
    filt.sections = sections;
    Ok(filt)
}

/// Complex response of the cascade at frequency `f`.
pub fn frequency_response(filter: &SosFilter, f: f64, rate: f64) -> Complex64 {
    let w = 2.0 * PI * f / rate;
    let z1 = Complex64::new(w.cos(), -w.sin()); // z^-1
    let z2 = z1 * z1;
    let mut h = Complex64::new(filter.gain, 0.0);
    for s in &filter.sections {
        let num = Complex64::new(s.b0, 0.0) + z1 * s.b1 + z2 * s.b2;
        let den = Complex64::new(1.0, 0.0) + z1 * s.a1 + z2 * s.a2;
        h *= num / den;
    }
    h
}

/// Largest pole magnitude of the cascade (stability check).
pub fn max_pole_magnitude(filter: &SosFilter) -> f64 {
    filter
        .sections
        .iter()
        .map(|s| {
            // |roots of z^2 + a1 z + a2| ; for complex pairs this is sqrt(a2)
            let disc = s.a1 * s.a1 - 4.0 * s.a2;
            if disc < 0.0 {
                s.a2.sqrt()
            } else {
                let r1 = (-s.a1 + disc.sqrt()) / 2.0;
                let r2 = (-s.a1 - disc.sqrt()) / 2.0;
                r1.abs().max(r2.abs())
            }
        })
        .fold(0.0, f64::max)
}

/// Forward-only (causal) cascade filtering.
pub fn filter_signal(filter: &SosFilter, input: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = input.iter().map(|&x| x * filter.gain).collect();
    for s in &filter.sections {
        let (mut x1, mut x2, mut y1, mut y2) = (0.0, 0.0, 0.0, 0.0);
        for v in out.iter_mut() {
            let x0 = *v;
            let y0 = s.b0 * x0 + s.b1 * x1 + s.b2 * x2 - s.a1 * y1 - s.a2 * y2;
            x2 = x1;
            x1 = x0;
            y2 = y1;
            y1 = y0;
            *v = y0;
        }
    }
    out
}

/// Keep every `factor`-th sample. The caller must have bandpass-filtered the
/// input first.
pub fn decimate(filtered: &Recording, factor: usize) -> Recording {
    Recording {
        receiver_name: filtered.receiver_name.clone(),
        samples: filtered.samples.iter().copied().step_by(factor).collect(),
        nominal_rate: filtered.nominal_rate / factor as f64,
        true_rate: filtered.true_rate / factor as f64,
    }
}

/// Framing and FFT sizing of the undersampled stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameSpec {
    pub frame_length: f64,
    pub overlap: f64,
    pub fft_points: usize,
    pub post_decimation_rate: f64,
}

impl Default for FrameSpec {
    fn default() -> Self {
        FrameSpec {
            frame_length: 0.010,
            overlap: 0.75,
            fft_points: 2048,
            post_decimation_rate: 6_300.0,
        }
    }
}

impl FrameSpec {
    pub fn frame_samples(&self) -> usize {
        (self.frame_length * self.post_decimation_rate).round() as usize
    }

    pub fn hop(&self) -> usize {
        ((self.frame_samples() as f64) * (1.0 - self.overlap)).round().max(1.0) as usize
    }

    pub fn bin_hz(&self) -> f64 {
        self.post_decimation_rate / self.fft_points as f64
    }
}

/// Per-frame one-sided magnitude spectra, Hann-windowed and zero-padded.
#[derive(Debug, Clone)]
pub struct Spectrogram {
    pub frames: Vec<Vec<f64>>,
    pub bin_hz: f64,
}

pub fn frame_spectra(decimated: &Recording, spec: &FrameSpec) -> Result<Spectrogram, DspError> {
    let frame = spec.frame_samples();
    let hop = spec.hop();
    let n = decimated.samples.len();
    if n < frame {
        return Err(DspError::RecordingTooShort);
    }
    let window = fft::hann_window(frame);
    let count = (n - frame) / hop + 1;
    let mut frames = Vec::with_capacity(count);
    let mut buf = vec![0.0; frame];
    for fi in 0..count {
        let start = fi * hop;
        for (j, b) in buf.iter_mut().enumerate() {
            *b = decimated.samples[start + j] * window[j];
        }
        frames.push(fft::real_magnitude_spectrum(&buf, spec.fft_points));
    }
    Ok(Spectrogram {
        frames,
        bin_hz: spec.bin_hz(),
    })
}

/// Tone detection thresholds. A frame counts as tone-bearing when its
/// in-band energy exceeds 1.5x the whole-record frame mean; the lead-in
/// stability gate rejects recordings whose "tone" is just noise peaks
/// wandering inside the band.
pub const ENERGY_RATIO: f64 = 1.5;
const STABILITY_FRAMES: usize = 5;
const STABILITY_TOLERANCE_HZ: f64 = 100.0;
/// Peaks more than this far from the nominal aliased tone mean the first
/// tone-bearing frame was already moving; fall back to the nominal reference.
const LEAD_IN_FALLBACK_HZ: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoarseShift {
    pub f0_local: f64,
    pub coarse_delta_f: f64,
    pub peak_frame_index: usize,
    pub degraded: bool,
}

fn band_bins(lo_hz: f64, hi_hz: f64, bin_hz: f64, n_bins: usize) -> (usize, usize) {
    let lo = (lo_hz / bin_hz).floor().max(0.0) as usize;
    let hi = ((hi_hz / bin_hz).ceil() as usize).min(n_bins - 1);
    (lo, hi.max(lo))
}

fn frame_energy_ratio(frame: &[f64], lo: usize, hi: usize) -> f64 {
    let band: f64 = frame[lo..=hi].iter().map(|m| m * m).sum();
    let total: f64 = frame.iter().map(|m| m * m).sum();
    if total <= 0.0 {
        return 0.0;
    }
    let band_mean = band / (hi - lo + 1) as f64;
    let total_mean = total / frame.len() as f64;
    band_mean / total_mean
}

fn band_peak_hz(frame: &[f64], lo: usize, hi: usize, bin_hz: f64) -> f64 {
    let mut best = lo;
    let mut best_m = -1.0;
    for (i, m) in frame[lo..=hi].iter().enumerate() {
        if *m > best_m {
            best_m = *m;
            best = lo + i;
        }
    }
    best as f64 * bin_hz
}

/// Detect the tone and extract the coarse shift.
///
/// A frame is tone-bearing when the mean in-band energy is at least 1.5x the
/// whole-frame mean. The reference frequency comes from the first
/// tone-bearing frame (the stationary lead-in cancels the clock offset); the
/// coarse shift is the per-frame peak-minus-reference of largest magnitude.
pub fn detect_and_extract(
    spectrogram: &Spectrogram,
    spec: &FrameSpec,
    tone_f0: f64,
    half_band: f64,
) -> Result<CoarseShift, DspError> {
    let bin_hz = spectrogram.bin_hz;
    let n_bins = spec.fft_points / 2 + 1;
    let (f0_alias, _) = alias_frequency(tone_f0, spec.post_decimation_rate);
    let (nom_lo, nom_hi) = band_bins(
        (f0_alias - half_band).max(0.0),
        (f0_alias + half_band).min(spec.post_decimation_rate / 2.0),
        bin_hz,
        n_bins,
    );

    // first pass: nominal band
    let tone_frames: Vec<usize> = spectrogram
        .frames
        .iter()
        .enumerate()
        .filter(|(_, fr)| frame_energy_ratio(fr, nom_lo, nom_hi) >= ENERGY_RATIO)
        .map(|(i, _)| i)
        .collect();
    let Some(&first) = tone_frames.first() else {
        return Err(DspError::ToneNotDetected);
    };

    // lead-in stability gate: the first tone-bearing frames must agree on a
    // peak, otherwise the band just contains noise
    let head: Vec<f64> = tone_frames
        .iter()
        .take(STABILITY_FRAMES)
        .map(|&i| band_peak_hz(&spectrogram.frames[i], nom_lo, nom_hi, bin_hz))
        .collect();
    if head.len() >= 2 {
        let mut sorted = head.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = sorted[sorted.len() / 2];
        if head.iter().any(|p| (p - median).abs() > STABILITY_TOLERANCE_HZ) {
            return Err(DspError::ToneNotDetected);
        }
    }

    let mut f0_local = band_peak_hz(&spectrogram.frames[first], nom_lo, nom_hi, bin_hz);
    let mut degraded = false;
    if (f0_local - f0_alias).abs() > LEAD_IN_FALLBACK_HZ {
        // no stationary lead-in visible; fall back to the nominal reference
        f0_local = f0_alias;
        degraded = true;
    }

    // second pass: track the band around the local reference
    let (lo, hi) = band_bins(
        (f0_local - half_band).max(0.0),
        (f0_local + half_band).min(spec.post_decimation_rate / 2.0),
        bin_hz,
        n_bins,
    );
    let mut coarse = 0.0;
    let mut peak_frame_index = first;
    for (i, frame) in spectrogram.frames.iter().enumerate() {
        if frame_energy_ratio(frame, lo, hi) < ENERGY_RATIO {
            continue;
        }
        let shift = band_peak_hz(frame, lo, hi, bin_hz) - f0_local;
        if shift.abs() > coarse.abs() {
            coarse = shift;
            peak_frame_index = i;
        }
    }
    Ok(CoarseShift {
        f0_local,
        coarse_delta_f: coarse,
        peak_frame_index,
        degraded,
    })
}

/// Border-line refinement: one full-record spectrum at true bin resolution,
/// then the outermost bin above 10% of the in-range peak on the side away
/// from the reference.
pub fn refine_shift(
    decimated: &Recording,
    coarse_delta_f: f64,
    f0_local: f64,
    xi: f64,
) -> (f64, bool) {
    let n = decimated.samples.len();
    let n_fft = fft::next_pow2(n.max(2048));
    let window = fft::hann_window(n);
    let windowed: Vec<f64> = decimated
        .samples
        .iter()
        .zip(window.iter())
        .map(|(s, w)| s * w)
        .collect();
    let spectrum = fft::real_magnitude_spectrum(&windowed, n_fft);
    let bin_hz = decimated.nominal_rate / n_fft as f64;
    let center = f0_local + coarse_delta_f;
    let lo = (((center - xi) / bin_hz).floor()).max(0.0) as usize;
    let hi = (((center + xi) / bin_hz).ceil() as usize).min(spectrum.len() - 1);
    if lo >= hi {
        return (coarse_delta_f, true);
    }
    let peak = spectrum[lo..=hi].iter().fold(0.0f64, |a, &b| a.max(b));
    if peak <= 0.0 {
        return (coarse_delta_f, true);
    }
    let threshold = 0.1 * peak;
    let border_bin = if coarse_delta_f > 0.0 {
        (lo..=hi).rev().find(|&b| spectrum[b] >= threshold)
    } else if coarse_delta_f < 0.0 {
        (lo..=hi).find(|&b| spectrum[b] >= threshold)
    } else {
        // zero coarse shift: no outward side, take the in-range peak
        (lo..=hi).max_by(|&a, &b| spectrum[a].partial_cmp(&spectrum[b]).unwrap())
    };
    match border_bin {
        // a border bin at the range boundary means the 10% contour lies
        // outside the search window: the border was not located, keep coarse
        Some(b) if coarse_delta_f > 0.0 && b == hi => (coarse_delta_f, true),
        Some(b) if coarse_delta_f < 0.0 && b == lo => (coarse_delta_f, true),
        Some(b) => (b as f64 * bin_hz - f0_local, false),
        None => (coarse_delta_f, true),
    }
}

/// Receiver output for one recording.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftEstimate {
    pub receiver_name: String,
    /// Aliased reference frequency from the stationary lead-in, Hz.
    pub f0_local: f64,
    /// Refined shift, Hz; sign is meaningful.
    pub delta_f: f64,
    pub coarse_delta_f: f64,
    pub detected: bool,
    pub peak_frame_index: usize,
    pub degraded: bool,
}

/// Everything the pipeline needs to run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub filter: FilterSpec,
    pub frames: FrameSpec,
    pub decimation: usize,
    /// Border search half-width, Hz.
    pub xi: f64,
    /// Half-width of the tone energy band, Hz (500 = the 19.5..20.5 kHz rule).
    pub half_band: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            filter: FilterSpec::default(),
            frames: FrameSpec::default(),
            decimation: 7,
            xi: 10.0,
            half_band: 500.0,
        }
    }
}

/// The full receiver pipeline: filter, decimate, frame, detect, refine.
pub fn process_recording(
    rec: &Recording,
    config: &PipelineConfig,
) -> Result<ShiftEstimate, DspError> {
    let filter = design_bandpass(&config.filter, rec.nominal_rate)?;
    let filtered = Recording {
        receiver_name: rec.receiver_name.clone(),
        samples: filter_signal(&filter, &rec.samples),
        nominal_rate: rec.nominal_rate,
        true_rate: rec.true_rate,
    };
    let decimated = decimate(&filtered, config.decimation);
    let spectrogram = frame_spectra(&decimated, &config.frames)?;
    let coarse = detect_and_extract(
        &spectrogram,
        &config.frames,
        config.filter.center,
        config.half_band,
    )?;
    let (delta_f, refine_degraded) = refine_shift(
        &decimated,
        coarse.coarse_delta_f,
        coarse.f0_local,
        config.xi,
    );
    Ok(ShiftEstimate {
        receiver_name: rec.receiver_name.clone(),
        f0_local: coarse.f0_local,
        delta_f,
        coarse_delta_f: coarse.coarse_delta_f,
        detected: true,
        peak_frame_index: coarse.peak_frame_index,
        degraded: coarse.degraded || refine_degraded,
    })
}
