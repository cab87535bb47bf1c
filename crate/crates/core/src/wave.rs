use alloc::vec::Vec;
use core::ops::Not;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// Two-level chip value before it is mapped to a backscatter coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    High,
    Low,
}

impl Level {
    /// Antipodal value: High → +1, Low → −1.
    pub fn sign(self) -> f64 {
        match self {
            Level::High => 1.0,
            Level::Low => -1.0,
        }
    }

    /// Chip-wise product of two ±1 levels.
    pub fn mul(self, other: Level) -> Level {
        if self == other {
            Level::High
        } else {
            Level::Low
        }
    }
}

impl Not for Level {
    type Output = Level;

    fn not(self) -> Level {
        match self {
            Level::High => Level::Low,
            Level::Low => Level::High,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChipsPerBit {
    Uniform(usize),
    /// Variable-length codes such as PIE.
    PerBit(Vec<usize>),
}

/// A two-level chip stream with a common chip duration.
#[derive(Debug, Clone, PartialEq)]
pub struct ChipSequence {
    chips: Vec<Level>,
    chip_duration: f64,
    chips_per_bit: ChipsPerBit,
}

impl ChipSequence {
    pub fn new(chips: Vec<Level>, chip_duration: f64, chips_per_bit: ChipsPerBit) -> Result<Self> {
        if chips.is_empty() {
            return Err(Error::EmptyBlock);
        }
        if !(chip_duration > 0.0 && chip_duration.is_finite()) {
            return Err(Error::InvalidConfig("chip duration must be positive"));
        }
        let total = match &chips_per_bit {
            ChipsPerBit::Uniform(n) if *n > 0 && chips.len() % n == 0 => chips.len(),
            ChipsPerBit::PerBit(v) => v.iter().sum(),
            _ => 0,
        };
        if total != chips.len() {
            return Err(Error::InvalidConfig("chips do not tile the declared bits"));
        }
        Ok(Self {
            chips,
            chip_duration,
            chips_per_bit,
        })
    }

    pub fn uniform(chips: Vec<Level>, chips_per_bit: usize, chip_duration: f64) -> Result<Self> {
        Self::new(chips, chip_duration, ChipsPerBit::Uniform(chips_per_bit))
    }

    pub fn chips(&self) -> &[Level] {
        &self.chips
    }

    pub fn len(&self) -> usize {
        self.chips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chips.is_empty()
    }

    pub fn chip_duration(&self) -> f64 {
        self.chip_duration
    }

    pub fn chip_rate(&self) -> f64 {
        1.0 / self.chip_duration
    }

    pub fn chips_per_bit(&self) -> &ChipsPerBit {
        &self.chips_per_bit
    }

    /// Uniform chips-per-bit, if the code has one.
    pub fn uniform_chips_per_bit(&self) -> Option<usize> {
        match self.chips_per_bit {
            ChipsPerBit::Uniform(n) => Some(n),
            ChipsPerBit::PerBit(_) => None,
        }
    }

    pub fn bit_count(&self) -> usize {
        match &self.chips_per_bit {
            ChipsPerBit::Uniform(n) => self.chips.len() / n,
            ChipsPerBit::PerBit(v) => v.len(),
        }
    }

    pub fn duration(&self) -> f64 {
        self.chip_duration * self.chips.len() as f64
    }

    /// Number of level changes between adjacent chips.
    pub fn transitions(&self) -> usize {
        self.chips.windows(2).filter(|w| w[0] != w[1]).count()
    }

    /// Same chips on a new time base.
    pub fn with_chip_duration(mut self, chip_duration: f64) -> Self {
        self.chip_duration = chip_duration;
        self
    }

    /// Rescale so that each bit lasts `bit_duration` (uniform codes only).
    pub fn with_bit_duration(self, bit_duration: f64) -> Self {
        let n = self.uniform_chips_per_bit().unwrap_or(1);
        self.with_chip_duration(bit_duration / n as f64)
    }

    pub fn into_chips(self) -> Vec<Level> {
        self.chips
    }
}

/// Complex baseband samples at a declared rate.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleWaveform {
    pub samples: Vec<Complex64>,
    pub sample_rate: f64,
    /// Offset of the baseband origin from the carrier, in Hz.
    pub center_offset: f64,
}

impl SampleWaveform {
    pub fn new(samples: Vec<Complex64>, sample_rate: f64) -> Self {
        Self {
            samples,
            sample_rate,
            center_offset: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum()
    }

    /// Mean power per sample.
    pub fn power(&self) -> f64 {
        if self.samples.is_empty() {
            0.0
        } else {
            self.energy() / self.samples.len() as f64
        }
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    /// Time average over `[t0, t1)` seconds. Sample `i` holds over
    /// `[i, i+1) / sample_rate`; partly covered samples are weighted by overlap.
    pub fn mean_over(&self, t0: f64, t1: f64) -> Complex64 {
        let a = (t0 * self.sample_rate).max(0.0);
        let b = (t1 * self.sample_rate).min(self.samples.len() as f64);
        if b <= a {
            return Complex64::new(0.0, 0.0);
        }
        let first = a as usize;
        let last = (b.ceil() as usize).min(self.samples.len());
        let mut acc = Complex64::new(0.0, 0.0);
        for i in first..last {
            let lo = a.max(i as f64);
            let hi = b.min(i as f64 + 1.0);
            acc += self.samples[i] * (hi - lo);
        }
        acc / (b - a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use Level::{High as H, Low as L};

    #[test]
    fn chip_sequence_tiling_is_checked() {
        assert!(ChipSequence::uniform(vec![H, L, H], 2, 1.0).is_err());
        let pie = ChipSequence::new(vec![H, L, H, H, H, L], 1.0, ChipsPerBit::PerBit(vec![2, 4]));
        assert_eq!(pie.unwrap().bit_count(), 2);
    }

    #[test]
    fn fractional_means() {
        let w = SampleWaveform::new((0..4).map(|i| Complex64::new(i as f64, 0.0)).collect(), 2.0);
        assert_eq!(w.mean_over(0.0, 1.0).re, 0.5);
        assert!((w.mean_over(0.25, 1.25).re - 1.0).abs() < 1e-12);
        assert!((w.mean_over(0.75, 0.875).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn level_product_is_xnor() {
        assert_eq!(H.mul(H), H);
        assert_eq!(L.mul(L), H);
        assert_eq!(H.mul(L), L);
        assert_eq!(!H, L);
    }
}
