//! Square-wave baseband modulation for the device-to-reader link.
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};

use crate::linecode::LineTrellis;
use crate::{BitBlock, ChipSequence, Error, Level, Result, SampleWaveform};
use Level::{High as H, Low as L};

/// Ratio between the two MSK square-wave frequencies.
pub const MSK_HIGH_FACTOR: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SquareKind {
    Ook,
    Bpsk,
    Qpsk,
    Msk,
}

impl SquareKind {
    pub fn name(&self) -> &'static str {
        match self {
            SquareKind::Ook => "square_ook",
            SquareKind::Bpsk => "square_bpsk",
            SquareKind::Qpsk => "square_qpsk",
            SquareKind::Msk => "square_msk",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquareWaveScheme {
    pub kind: SquareKind,
    /// Fundamental of the square wave (bit 0 for MSK).
    pub f_shift: f64,
    pub bit_rate: f64,
}

impl SquareWaveScheme {
    pub fn new(kind: SquareKind, f_shift: f64, bit_rate: f64) -> Result<Self> {
        let s = Self {
            kind,
            f_shift,
            bit_rate,
        };
        s.cycles_per_bit()?;
        Ok(s)
    }

    /// Square-wave cycles per bit at `f_shift`.
    pub fn cycles_per_bit(&self) -> Result<usize> {
        if !(self.f_shift > 0.0 && self.bit_rate > 0.0) {
            return Err(Error::InvalidConfig("frequencies must be positive"));
        }
        let c = self.f_shift / self.bit_rate;
        let r = c.round();
        if r < 1.0 || (c - r).abs() > 1e-9 * c.max(1.0) {
            return Err(Error::NonIntegerCyclesPerBit);
        }
        Ok(r as usize)
    }

    pub fn chips_per_bit(&self) -> usize {
        let c = self.cycles_per_bit().unwrap_or(1);
        match self.kind {
            SquareKind::Ook | SquareKind::Bpsk => 2 * c,
            // 4 chips per cycle, a symbol is two bits
            SquareKind::Qpsk => 4 * c,
            SquareKind::Msk => 6 * c,
        }
    }

    pub fn chip_rate(&self) -> f64 {
        self.bit_rate * self.chips_per_bit() as f64
    }

    /// Highest square-wave fundamental the scheme emits.
    pub fn max_fundamental(&self) -> f64 {
        match self.kind {
            SquareKind::Msk => self.f_shift * MSK_HIGH_FACTOR,
            _ => self.f_shift,
        }
    }
}

fn square(cycles: usize, phase_chips: usize, chips_per_cycle: usize) -> impl Iterator<Item = Level> {
    let half = chips_per_cycle / 2;
    (0..cycles * chips_per_cycle).map(move |i| {
        let k = (i + chips_per_cycle - phase_chips) % chips_per_cycle;
        if k < half {
            H
        } else {
            L
        }
    })
}

/// Chips of one MSK bit whose first half-cycle is `first`.
fn msk_bit(bit: u8, cycles: usize, first: Level) -> Vec<Level> {
    let half = if bit == 0 { 3 } else { 2 };
    let mut level = first;
    let mut out = Vec::with_capacity(6 * cycles);
    for _ in 0..(6 * cycles) / half {
        out.extend(core::iter::repeat_n(level, half));
        level = !level;
    }
    out
}

pub fn square_modulate(bits: &BitBlock, scheme: &SquareWaveScheme) -> Result<ChipSequence> {
    let c = scheme.cycles_per_bit()?;
    let b = bits.bits();
    let mut chips = Vec::with_capacity(b.len() * scheme.chips_per_bit());
    match scheme.kind {
        SquareKind::Ook => {
            for &x in b {
                if x == 1 {
                    chips.extend(square(c, 0, 2));
                } else {
                    chips.extend(core::iter::repeat_n(L, 2 * c));
                }
            }
        }
        SquareKind::Bpsk => {
            for &x in b {
                chips.extend(square(c, usize::from(x), 2));
            }
        }
        SquareKind::Qpsk => {
            if b.len() % 2 != 0 {
                return Err(Error::OddBitCountForQpsk);
            }
            for pair in b.chunks(2) {
                let k = usize::from(pair[0] * 2 + pair[1]);
                chips.extend(square(2 * c, k, 4));
            }
        }
        SquareKind::Msk => {
            let mut last = L;
            for &x in b {
                let bit = msk_bit(x, c, !last);
                last = *bit.last().expect("non-empty bit");
                chips.extend(bit);
            }
        }
    }
    ChipSequence::uniform(chips, scheme.chips_per_bit(), 1.0 / scheme.chip_rate())
}

/// Trellis of the phase-continuous MSK wave: state = level of the last chip.
pub fn msk_trellis(scheme: &SquareWaveScheme) -> Result<LineTrellis> {
    let c = scheme.cycles_per_bit()?;
    let mut branches = Vec::with_capacity(4);
    for s in 0..2 {
        let last = if s == 0 { H } else { L };
        for b in 0..2u8 {
            let chips = msk_bit(b, c, !last);
            let end = usize::from(*chips.last().expect("non-empty bit") == L);
            branches.push((end, chips));
        }
    }
    Ok(LineTrellis::from_branches(2, 1, branches))
}

/// Reflection coefficients for the two chip levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackscatterMap {
    pub high: Complex64,
    pub low: Complex64,
}

impl BackscatterMap {
    pub fn ask() -> Self {
        Self {
            high: Complex64::new(1.0, 0.0),
            low: Complex64::new(0.0, 0.0),
        }
    }

    pub fn psk() -> Self {
        Self {
            high: Complex64::new(1.0, 0.0),
            low: Complex64::new(-1.0, 0.0),
        }
    }

    pub fn new(high: Complex64, low: Complex64) -> Result<Self> {
        if high.norm() > 1.0 + 1e-12 || low.norm() > 1.0 + 1e-12 {
            return Err(Error::InvalidConfig("passive reflection needs |coefficient| <= 1"));
        }
        Ok(Self { high, low })
    }

    pub fn coeff(&self, level: Level) -> Complex64 {
        match level {
            H => self.high,
            L => self.low,
        }
    }

    pub fn is_ask(&self) -> bool {
        *self == Self::ask()
    }
}

/// Reject mappings the spec leaves undefined (square-OOK needs ASK).
pub fn check_mapping(scheme: &SquareWaveScheme, map: &BackscatterMap) -> Result<()> {
    if scheme.kind == SquareKind::Ook && !map.is_ask() {
        return Err(Error::UnsupportedMapping("square-OOK requires ASK backscatter"));
    }
    Ok(())
}

/// Expand chips to coefficient samples; `sample_rate` must be a whole
/// multiple of the chip rate.
pub fn backscatter_apply(chips: &ChipSequence, map: &BackscatterMap, sample_rate: f64) -> Result<SampleWaveform> {
    let spc = sample_rate * chips.chip_duration();
    let r = spc.round();
    if r < 1.0 || (spc - r).abs() > 1e-6 {
        return Err(Error::NonIntegerOversampling);
    }
    let samples = chips
        .chips()
        .iter()
        .flat_map(|&l| core::iter::repeat_n(map.coeff(l), r as usize))
        .collect();
    Ok(SampleWaveform::new(samples, sample_rate))
}

/// Point-sample the chip waveform at sample centres for any rate (used when
/// a clock error makes the oversampling non-integer). `len` samples are
/// produced; time past the last chip is silent.
pub fn backscatter_render(chips: &ChipSequence, map: &BackscatterMap, sample_rate: f64, len: usize) -> SampleWaveform {
    let d = chips.chip_duration();
    let c = chips.chips();
    let samples = (0..len)
        .map(|i| {
            let t = (i as f64 + 0.5) / sample_rate;
            let k = (t / d) as usize;
            c.get(k).map_or(Complex64::new(0.0, 0.0), |&l| map.coeff(l))
        })
        .collect();
    SampleWaveform::new(samples, sample_rate)
}

/// Device clock error bound in ppm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SfoModel {
    pub sfo_ppm: f64,
}

impl SfoModel {
    pub fn new(sfo_ppm: f64) -> Self {
        Self { sfo_ppm }
    }

    /// Relative clock error, uniform in ±ppm·1e-6.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.sfo_ppm == 0.0 {
            0.0
        } else {
            let b = self.sfo_ppm.abs() * 1e-6;
            rng.random_range(-b..=b)
        }
    }
}

/// Run the device clock fast by `(1+ε)`: every chip shortens, every
/// square-wave frequency scales up. Returns the drawn ε too.
pub fn apply_sfo(chips: ChipSequence, sfo: &SfoModel, seed: u64) -> (ChipSequence, f64) {
    let mut rng = rand::rngs::SmallRng::seed_from_u64(seed);
    let eps = sfo.draw(&mut rng);
    (stretch(chips, eps), eps)
}

pub fn stretch(chips: ChipSequence, eps: f64) -> ChipSequence {
    let d = chips.chip_duration() / (1.0 + eps);
    chips.with_chip_duration(d)
}

/// Same clock error applied to an already sampled device waveform by
/// sample-and-hold resampling.
pub fn apply_sfo_waveform(wave: &SampleWaveform, eps: f64) -> SampleWaveform {
    let n = (wave.len() as f64 / (1.0 + eps)).round() as usize;
    let samples = (0..n)
        .map(|i| {
            let k = ((i as f64 + 0.5) * (1.0 + eps)) as usize;
            wave.samples[k.min(wave.len() - 1)]
        })
        .collect();
    SampleWaveform {
        samples,
        sample_rate: wave.sample_rate,
        center_offset: wave.center_offset,
    }
}

/// User `k` (from 1) gets `f1 · 2^(k−1)`.
pub fn fdma_plan(n_users: usize, f1: f64) -> Result<Vec<f64>> {
    if n_users == 0 {
        return Err(Error::InvalidConfig("at least one FDMA user"));
    }
    Ok((0..n_users).map(|k| f1 * (1u64 << k) as f64).collect())
}
