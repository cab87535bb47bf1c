//! In-place FFT. Radix-2 for power-of-two lengths, direct DFT otherwise.
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

pub(crate) fn fft(buf: &mut [Complex64]) {
    transform(buf, -1.0);
}

/// Inverse transform, scaled by 1/N.
pub(crate) fn ifft(buf: &mut [Complex64]) {
    transform(buf, 1.0);
    let n = buf.len() as f64;
    for x in buf.iter_mut() {
        *x /= n;
    }
}

fn transform(buf: &mut [Complex64], sign: f64) {
    let n = buf.len();
    if n <= 1 {
        return;
    }
    if !n.is_power_of_two() {
        let out: Vec<Complex64> = (0..n)
            .map(|k| {
                buf.iter()
                    .enumerate()
                    .map(|(t, &x)| x * Complex64::cis(sign * 2.0 * PI * ((k * t) % n) as f64 / n as f64))
                    .sum()
            })
            .collect();
        buf.copy_from_slice(&out);
        return;
    }
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            buf.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let w = Complex64::cis(sign * 2.0 * PI / len as f64);
        for chunk in buf.chunks_mut(len) {
            let mut wk = Complex64::new(1.0, 0.0);
            let (lo, hi) = chunk.split_at_mut(len / 2);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let t = *b * wk;
                *b = *a - t;
                *a += t;
                wk *= w;
            }
        }
        len <<= 1;
    }
}

#[cfg(test)]
/// Magnitude of the DTFT of `x` at `freq` (Hz) for sample rate `fs`.
pub(crate) fn tone_magnitude(x: &[Complex64], freq: f64, fs: f64) -> f64 {
    let w = -2.0 * PI * freq / fs;
    x.iter()
        .enumerate()
        .map(|(t, &s)| s * Complex64::cis(w * t as f64))
        .sum::<Complex64>()
        .norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn dft(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                (0..n)
                    .map(|t| x[t] * Complex64::cis(-2.0 * PI * (k * t) as f64 / n as f64))
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_direct_dft() {
        for n in [1usize, 2, 8, 12, 64] {
            let x: Vec<Complex64> = (0..n)
                .map(|i| Complex64::new((i as f64 * 0.7).sin(), (i as f64 * 1.3).cos()))
                .collect();
            let mut y = x.clone();
            fft(&mut y);
            for (a, b) in y.iter().zip(dft(&x)) {
                assert!((a - b).norm() < 1e-9);
            }
            ifft(&mut y);
            for (a, b) in y.iter().zip(&x) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn tone_magnitude_of_bin_centre() {
        let x = vec![Complex64::new(1.0, 0.0); 16];
        assert!((tone_magnitude(&x, 0.0, 16.0) - 16.0).abs() < 1e-12);
        assert!(tone_magnitude(&x, 1.0, 16.0) < 1e-9);
    }
}
