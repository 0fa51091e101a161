//! Radix-2 FFT and window helpers for the receiver pipeline.

#[allow(unused_imports)] // shadowed by std's f64 methods under cargo test
use crate::math::FloatExt;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

/// In-place iterative radix-2 DIT FFT. `buf.len()` must be a power of two.
pub fn fft_in_place(buf: &mut [Complex64]) {
    let n = buf.len();
    assert!(n.is_power_of_two(), "FFT length must be a power of two");
    if n <= 1 {
        return;
    }
    // bit-reversal permutation
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            buf.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let ang = -2.0 * PI / len as f64;
        let wlen = Complex64::new(ang.cos(), ang.sin());
        for start in (0..n).step_by(len) {
            let mut w = Complex64::new(1.0, 0.0);
            for k in 0..len / 2 {
                let u = buf[start + k];
                let v = buf[start + k + len / 2] * w;
                buf[start + k] = u + v;
                buf[start + k + len / 2] = u - v;
                w *= wlen;
            }
        }
        len <<= 1;
    }
}

/// One-sided magnitude spectrum of a real signal, zero-padded to `n_fft`
/// points (a power of two). Returns n_fft/2 + 1 magnitudes.
pub fn real_magnitude_spectrum(signal: &[f64], n_fft: usize) -> Vec<f64> {
    assert!(n_fft.is_power_of_two());
    let mut buf = vec![Complex64::new(0.0, 0.0); n_fft];
    for (slot, &s) in buf.iter_mut().zip(signal.iter()) {
        *slot = Complex64::new(s, 0.0);
    }
    fft_in_place(&mut buf);
    buf[..n_fft / 2 + 1].iter().map(|c| c.norm()).collect()
}

/// Periodic Hann window of length `n`.
pub fn hann_window(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 * (1.0 - (2.0 * PI * i as f64 / n as f64).cos()))
        .collect()
}

/// Smallest power of two >= n.
pub fn next_pow2(n: usize) -> usize {
    n.next_power_of_two()
}
