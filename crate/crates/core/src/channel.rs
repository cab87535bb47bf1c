//! Fading channels, the backscatter cascade and receiver noise.
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

use crate::{Error, Result, SampleWaveform};

/// TDL-A normalised delays (multiples of the delay spread), TR 38.901 Table 7.7.2-1.
pub const TDL_A_DELAYS: [f64; 23] = [
    0.0000, 0.3819, 0.4025, 0.5868, 0.4610, 0.5375, 0.6708, 0.5750, 0.7618, 1.5375, 1.8978, 2.2242, 2.1718, 2.4942,
    2.5119, 3.0582, 4.0810, 4.4579, 4.5695, 4.7966, 5.0066, 5.3043, 9.6586,
];

/// TDL-A tap powers in dB, same table.
pub const TDL_A_POWERS_DB: [f64; 23] = [
    -13.4, 0.0, -2.2, -4.0, -6.0, -8.2, -9.9, -10.5, -7.5, -15.9, -6.6, -16.7, -12.4, -15.2, -10.8, -11.3, -12.7,
    -16.2, -18.3, -18.9, -16.6, -19.9, -29.7,
];

const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelProfile {
    Awgn,
    TdlA,
}

/// One quasi-static draw of a tapped delay line.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// `(delay in seconds, complex gain)`.
    pub taps: Vec<(f64, Complex64)>,
    pub profile: ChannelProfile,
    pub delay_spread: f64,
    pub doppler: f64,
}

impl ChannelRealization {
    pub fn unit() -> Self {
        Self::flat(Complex64::new(1.0, 0.0))
    }

    pub fn flat(gain: Complex64) -> Self {
        Self {
            taps: vec![(0.0, gain)],
            profile: ChannelProfile::Awgn,
            delay_spread: 0.0,
            doppler: 0.0,
        }
    }

    pub fn total_power(&self) -> f64 {
        self.taps.iter().map(|t| t.1.norm_sqr()).sum()
    }

    /// Sum of tap gains: the response to a single tone at the carrier.
    pub fn dc_gain(&self) -> Complex64 {
        self.taps.iter().map(|t| t.1).sum()
    }

    /// Taps with delays rounded to whole samples at `sample_rate`.
    /// Taps landing on the same sample are summed; output is sorted by delay.
    pub fn sampled_taps(&self, sample_rate: f64) -> Vec<(usize, Complex64)> {
        let mut out: Vec<(usize, Complex64)> = Vec::new();
        for &(d, g) in &self.taps {
            let k = (d * sample_rate).round() as usize;
            match out.iter_mut().find(|t| t.0 == k) {
                Some(t) => t.1 += g,
                None => out.push((k, g)),
            }
        }
        out.sort_by_key(|t| t.0);
        out
    }

    /// Frequency response at `freq` Hz of the sample-rounded delay line.
    pub fn response(&self, freq: f64, sample_rate: f64) -> Complex64 {
        self.sampled_taps(sample_rate)
            .iter()
            .map(|&(d, g)| g * Complex64::cis(-2.0 * PI * freq * d as f64 / sample_rate))
            .sum()
    }
}

/// Doppler shift for a terminal speed at a carrier frequency.
pub fn doppler_hz(speed_kmh: f64, carrier_hz: f64) -> f64 {
    speed_kmh / 3.6 * carrier_hz / SPEED_OF_LIGHT
}

fn cn01<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * core::f64::consts::FRAC_1_SQRT_2
}

/// Draw independent Rayleigh taps with the profile's power-delay profile,
/// normalised to unit mean total power.
pub fn realize_with<R: Rng + ?Sized>(
    profile: ChannelProfile,
    delay_spread: f64,
    doppler: f64,
    rng: &mut R,
) -> ChannelRealization {
    let taps = match profile {
        ChannelProfile::Awgn => vec![(0.0, Complex64::new(1.0, 0.0))],
        ChannelProfile::TdlA => {
            let lin: Vec<f64> = TDL_A_POWERS_DB.iter().map(|p| 10f64.powf(p / 10.0)).collect();
            let total: f64 = lin.iter().sum();
            TDL_A_DELAYS
                .iter()
                .zip(&lin)
                .map(|(&d, &p)| (d * delay_spread, cn01(rng) * (p / total).sqrt()))
                .collect()
        }
    };
    ChannelRealization {
        taps,
        profile,
        delay_spread,
        doppler,
    }
}

pub fn realize(profile: ChannelProfile, delay_spread: f64, doppler: f64, seed: u64) -> ChannelRealization {
    let mut rng = rand::rngs::SmallRng::seed_from_u64(seed);
    realize_with(profile, delay_spread, doppler, &mut rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    Monostatic,
    Bistatic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CascadeConfig {
    pub topology: Topology,
    /// Carrier frequency, bookkeeping only.
    pub cw_freq: f64,
    /// Residual CW at the reader in dB relative to the signal; `None` is off.
    pub cw_leak_db: Option<f64>,
}

impl Default for CascadeConfig {
    fn default() -> Self {
        Self {
            topology: Topology::Monostatic,
            cw_freq: 900e6,
            cw_leak_db: None,
        }
    }
}

/// Convolve `x` with sample-rounded taps; the output grows by the largest delay.
pub fn convolve(x: &[Complex64], taps: &[(usize, Complex64)]) -> Vec<Complex64> {
    let max_d = taps.iter().map(|t| t.0).max().unwrap_or(0);
    let mut y = vec![Complex64::new(0.0, 0.0); x.len() + max_d];
    for &(d, g) in taps {
        for (yi, &xi) in y[d..].iter_mut().zip(x) {
            *yi += g * xi;
        }
    }
    y
}

/// Reader-side signal of one device: `conv(h_d2r, g1 · coeffs)` with
/// `g1 = Σ h_cw2d` for a single-tone CW, plus optional CW leakage.
pub fn backscatter_cascade(
    coeffs: &SampleWaveform,
    h_cw2d: &ChannelRealization,
    h_d2r: &ChannelRealization,
    cfg: &CascadeConfig,
) -> SampleWaveform {
    let g1 = h_cw2d.dc_gain();
    let taps: Vec<(usize, Complex64)> = h_d2r
        .sampled_taps(coeffs.sample_rate)
        .into_iter()
        .map(|(d, g)| (d, g * g1))
        .collect();
    let mut samples = convolve(&coeffs.samples, &taps);
    if let Some(leak_db) = cfg.cw_leak_db {
        let p = samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / samples.len().max(1) as f64;
        let a = (p * 10f64.powf(leak_db / 10.0)).sqrt();
        for s in samples.iter_mut() {
            *s += a;
        }
    }
    SampleWaveform {
        samples,
        sample_rate: coeffs.sample_rate,
        center_offset: coeffs.center_offset,
    }
}

/// Per-user cascade inputs.
#[derive(Debug, Clone)]
pub struct UserLink {
    pub coeffs: SampleWaveform,
    pub h_cw2d: ChannelRealization,
    pub h_d2r: ChannelRealization,
}

/// Synchronous sum of independently faded users (shorter ones zero-padded).
pub fn fdma_superpose(users: &[UserLink], cfg: &CascadeConfig) -> Result<SampleWaveform> {
    let first = users.first().ok_or(Error::InvalidConfig("no users to superpose"))?;
    let fs = first.coeffs.sample_rate;
    let mut out: Vec<Complex64> = Vec::new();
    for u in users {
        if u.coeffs.sample_rate != fs {
            return Err(Error::RateMismatch);
        }
        if cfg.cw_leak_db.is_some() {
            let y = backscatter_cascade(&u.coeffs, &u.h_cw2d, &u.h_d2r, cfg);
            if y.len() > out.len() {
                out.resize(y.len(), Complex64::new(0.0, 0.0));
            }
            for (o, s) in out.iter_mut().zip(y.samples) {
                *o += s;
            }
            continue;
        }
        let g1 = u.h_cw2d.dc_gain();
        let taps = u.h_d2r.sampled_taps(fs);
        let max_d = taps.iter().map(|t| t.0).max().unwrap_or(0);
        let len = u.coeffs.len() + max_d;
        if len > out.len() {
            out.resize(len, Complex64::new(0.0, 0.0));
        }
        for (d, g) in taps {
            let g = g * g1;
            for (o, &x) in out[d..].iter_mut().zip(&u.coeffs.samples) {
                *o += g * x;
            }
        }
    }
    Ok(SampleWaveform::new(out, fs))
}

/// Noise variance per complex sample for a given SNR.
pub fn noise_variance(snr_db: f64, signal_power_ref: f64) -> f64 {
    signal_power_ref / 10f64.powf(snr_db / 10.0)
}

/// Add circular Gaussian noise of variance `signal_power_ref / 10^(snr/10)`;
/// `None` leaves the waveform untouched.
pub fn add_awgn<R: Rng + ?Sized>(
    wave: &mut SampleWaveform,
    snr_db: Option<f64>,
    signal_power_ref: f64,
    rng: &mut R,
) -> Result<f64> {
    if !(signal_power_ref > 0.0) {
        return Err(Error::InvalidConfig("signal power reference must be positive"));
    }
    let Some(snr) = snr_db else {
        return Ok(0.0);
    };
    let var = noise_variance(snr, signal_power_ref);
    let sd = var.sqrt();
    for s in wave.samples.iter_mut() {
        *s += cn01(rng) * sd;
    }
    Ok(var)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::ChaCha8Rng;

    fn wave(n: usize, seed: u64) -> SampleWaveform {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SampleWaveform::new((0..n).map(|_| cn01(&mut rng)).collect(), 1e6)
    }

    #[test]
    fn awgn_profile_is_unit_tap() {
        let h = realize(ChannelProfile::Awgn, 30e-9, 0.0, 1);
        assert_eq!(h.taps, [(0.0, Complex64::new(1.0, 0.0))]);
    }

    #[test]
    fn tdl_a_table_shape() {
        assert_eq!(TDL_A_DELAYS.len(), TDL_A_POWERS_DB.len());
        let h = realize(ChannelProfile::TdlA, 30e-9, 2.5, 1);
        assert!((h.taps[22].0 - 9.6586 * 30e-9).abs() < 1e-18);
    }

    #[test]
    fn tdl_a_mean_power_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 100_000;
        let mean: f64 = (0..n)
            .map(|_| realize_with(ChannelProfile::TdlA, 30e-9, 0.0, &mut rng).total_power())
            .sum::<f64>()
            / n as f64;
        assert!((mean - 1.0).abs() < 0.01, "{mean}");
    }

    #[test]
    fn different_seeds_are_uncorrelated() {
        let n = 10_000;
        let a: Vec<Complex64> = (0..n).map(|i| realize(ChannelProfile::TdlA, 30e-9, 0.0, 2 * i).dc_gain()).collect();
        let b: Vec<Complex64> = (0..n).map(|i| realize(ChannelProfile::TdlA, 30e-9, 0.0, 2 * i + 1).dc_gain()).collect();
        let num: Complex64 = a.iter().zip(&b).map(|(x, y)| x * y.conj()).sum();
        let pa: f64 = a.iter().map(|x| x.norm_sqr()).sum();
        let pb: f64 = b.iter().map(|x| x.norm_sqr()).sum();
        let rho = num.norm() / (pa * pb).sqrt();
        assert!(rho < 0.05, "{rho}");
    }

    #[test]
    fn flat_cascades() {
        let x = wave(64, 3);
        let cfg = CascadeConfig::default();
        let unit = ChannelRealization::unit();
        assert_eq!(backscatter_cascade(&x, &unit, &unit, &cfg).samples, x.samples);
        let g1 = Complex64::new(0.3, -0.4);
        let g2 = Complex64::new(-1.1, 0.2);
        let y = backscatter_cascade(&x, &ChannelRealization::flat(g1), &ChannelRealization::flat(g2), &cfg);
        for (a, b) in y.samples.iter().zip(&x.samples) {
            assert!((a - g1 * g2 * b).norm() < 1e-12);
        }
    }

    #[test]
    fn cascade_is_linear() {
        let (x, y) = (wave(200, 4), wave(200, 5));
        let h1 = realize(ChannelProfile::TdlA, 300e-9, 0.0, 6);
        let h2 = realize(ChannelProfile::TdlA, 300e-9, 0.0, 7);
        let cfg = CascadeConfig::default();
        let (a, b) = (Complex64::new(0.5, 1.0), Complex64::new(-2.0, 0.1));
        let mix = SampleWaveform::new(x.samples.iter().zip(&y.samples).map(|(p, q)| a * p + b * q).collect(), 1e6);
        let lhs = backscatter_cascade(&mix, &h1, &h2, &cfg);
        let cx = backscatter_cascade(&x, &h1, &h2, &cfg);
        let cy = backscatter_cascade(&y, &h1, &h2, &cfg);
        for i in 0..lhs.len() {
            assert!((lhs.samples[i] - (a * cx.samples[i] + b * cy.samples[i])).norm() < 1e-10);
        }
    }

    #[test]
    fn double_rayleigh_has_heavier_lower_tail() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 50_000;
        let mut single: Vec<f64> = (0..n).map(|_| cn01(&mut rng).norm()).collect();
        let mut double: Vec<f64> = (0..n).map(|_| (cn01(&mut rng) * cn01(&mut rng)).norm()).collect();
        single.sort_by(f64::total_cmp);
        double.sort_by(f64::total_cmp);
        for q in [0.01, 0.05, 0.1] {
            let i = (q * n as f64) as usize;
            assert!(double[i] < single[i], "quantile {q}");
        }
    }

    #[test]
    fn awgn_power_and_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut w = SampleWaveform::new(vec![Complex64::new(0.0, 0.0); 1_000_000], 1.0);
        let var = add_awgn(&mut w, Some(0.0), 1.0, &mut rng).unwrap();
        assert_eq!(var, 1.0);
        let n = w.len() as f64;
        let p = w.power();
        assert!((p - 1.0).abs() < 0.02, "{p}");
        let (mr, mi) = w.samples.iter().fold((0.0, 0.0), |a, s| (a.0 + s.re, a.1 + s.im));
        assert!((mr / n).abs() < 5e-3 && (mi / n).abs() < 5e-3);
        let vr = w.samples.iter().map(|s| s.re * s.re).sum::<f64>() / n;
        let vi = w.samples.iter().map(|s| s.im * s.im).sum::<f64>() / n;
        assert!((vr - 0.5).abs() < 0.01 && (vi - 0.5).abs() < 0.01);
        let k = w.samples.iter().map(|s| s.re.powi(4)).sum::<f64>() / n / (vr * vr);
        assert!((k - 3.0).abs() < 0.05, "kurtosis {k}");
        let mut clean = wave(16, 10);
        let before = clean.clone();
        add_awgn(&mut clean, None, 1.0, &mut rng).unwrap();
        assert_eq!(clean, before);
    }

    #[test]
    fn superposition() {
        let cfg = CascadeConfig::default();
        let u1 = UserLink {
            coeffs: wave(100, 11),
            h_cw2d: realize(ChannelProfile::TdlA, 30e-9, 0.0, 12),
            h_d2r: realize(ChannelProfile::TdlA, 30e-9, 0.0, 13),
        };
        let single = fdma_superpose(&[u1.clone()], &cfg).unwrap();
        assert_eq!(single, backscatter_cascade(&u1.coeffs, &u1.h_cw2d, &u1.h_d2r, &cfg));
        let mut silent = u1.clone();
        silent.coeffs.samples.iter_mut().for_each(|s| *s = Complex64::new(0.0, 0.0));
        assert_eq!(fdma_superpose(&[u1.clone(), silent], &cfg).unwrap(), single);
        let mut other = u1.clone();
        other.coeffs.sample_rate = 2e6;
        assert_eq!(fdma_superpose(&[u1, other], &cfg), Err(Error::RateMismatch));
    }

    #[test]
    fn cw_leak_adds_constant() {
        let x = SampleWaveform::new(vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)], 1.0);
        let cfg = CascadeConfig {
            cw_leak_db: Some(0.0),
            ..CascadeConfig::default()
        };
        let u = ChannelRealization::unit();
        let y = backscatter_cascade(&x, &u, &u, &cfg);
        assert_eq!(y.samples, [Complex64::new(2.0, 0.0), Complex64::new(0.0, 0.0)]);
    }

    #[test]
    fn doppler_at_three_kmh() {
        assert!((doppler_hz(3.0, 900e6) - 2.5).abs() < 0.01);
    }
}
