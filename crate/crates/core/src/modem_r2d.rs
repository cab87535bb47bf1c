//! Reader-to-device OOK carried on an OFDM transmitter.
//!
//! OOK-1 switches whole OFDM symbols on and off. OOK-4 draws several chips
//! inside one OFDM symbol by fitting subcarrier coefficients to the chip
//! pattern. The cyclic prefix would otherwise paste the symbol tail in front
//! of the first chip; check chips make that tail equal to the first chip.
//!
//! With `c` check chips the body `[d1 … dM]` becomes
//! `[d1 … dM, !d1 … !dc, dc … d1]`: the inversions pair up with the copies
//! (or with each other) into valid Manchester symbols and the body ends on
//! `d1`. The first chip is shortened by the CP length so CP + first chip make
//! one nominal chip. On air every OFDM symbol then carries `M + 2c` chips of
//! length `(n_fft + cp) / (M + 2c)` samples (boundaries rounded).
//!
//! The text this follows can also be read as the CP equalling the inverse of
//! the first chip; that reading puts a false edge right after the CP, so the
//! copy reading is used.
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::fft::{fft, ifft};
use crate::linecode::{decode_chips, manchester_encode, pie_encode, LineCodeKind};
use crate::{BitBlock, BlockRole, ChipSequence, Error, Level, Result, SampleWaveform};
use Level::{High as H, Low as L};

/// Relative RMS error above which an allocation cannot draw the OOK chips.
pub const MAX_LS_RESIDUAL: f64 = 0.6;

#[derive(Debug, Clone, PartialEq)]
pub struct OfdmGrid {
    pub n_fft: usize,
    pub cp_len: usize,
    /// Subcarrier indices relative to DC, contiguous.
    pub allocated: Vec<i32>,
    pub sample_rate: f64,
}

impl Default for OfdmGrid {
    fn default() -> Self {
        Self {
            n_fft: 256,
            cp_len: 18,
            allocated: (-6..6).collect(),
            sample_rate: 3.84e6,
        }
    }
}

impl OfdmGrid {
    pub fn new(n_fft: usize, cp_len: usize, allocated: Vec<i32>, sample_rate: f64) -> Result<Self> {
        let g = Self {
            n_fft,
            cp_len,
            allocated,
            sample_rate,
        };
        g.validate()?;
        Ok(g)
    }

    /// `n` contiguous subcarriers centred on DC.
    pub fn centred(n_fft: usize, cp_len: usize, n: usize, sample_rate: f64) -> Result<Self> {
        let lo = -(n as i32 / 2);
        Self::new(n_fft, cp_len, (lo..lo + n as i32).collect(), sample_rate)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_fft < 2 {
            return Err(Error::InvalidGrid("FFT size below 2"));
        }
        if self.cp_len >= self.n_fft {
            return Err(Error::InvalidGrid("cyclic prefix must be shorter than the FFT"));
        }
        if self.allocated.is_empty() {
            return Err(Error::InvalidGrid("no subcarriers allocated"));
        }
        if self.allocated.windows(2).any(|w| w[1] != w[0] + 1) {
            return Err(Error::InvalidGrid("allocation must be contiguous and ascending"));
        }
        let half = self.n_fft as i32 / 2;
        if self.allocated.len() > self.n_fft || self.allocated[0] < -half || *self.allocated.last().unwrap() >= half + (self.n_fft as i32 % 2) {
            return Err(Error::InvalidGrid("allocation exceeds the FFT"));
        }
        if !(self.sample_rate > 0.0) {
            return Err(Error::InvalidGrid("sample rate must be positive"));
        }
        Ok(())
    }

    pub fn symbol_len(&self) -> usize {
        self.n_fft + self.cp_len
    }

    fn bin(&self, k: i32) -> usize {
        k.rem_euclid(self.n_fft as i32) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OokMode {
    Ook1,
    Ook4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum R2dCode {
    Manchester,
    Pie,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OokSymbolPlan {
    pub mode: OokMode,
    /// Data chips per OFDM symbol.
    pub m: usize,
    pub check_chips: usize,
    /// Prefix the chip stream with a known `[H, L]` pair for threshold setting.
    pub preamble: bool,
}

impl OokSymbolPlan {
    pub fn ook1() -> Self {
        Self {
            mode: OokMode::Ook1,
            m: 1,
            check_chips: 0,
            preamble: false,
        }
    }

    pub fn ook4(m: usize, check_chips: usize) -> Result<Self> {
        let p = Self {
            mode: OokMode::Ook4,
            m,
            check_chips,
            preamble: false,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_preamble(mut self, on: bool) -> Self {
        self.preamble = on;
        self
    }

    /// OOK-4 with `check_chips = 0` is allowed only to show the false-edge
    /// problem.
    pub fn validate(&self) -> Result<()> {
        match self.mode {
            OokMode::Ook1 if self.m != 1 || self.check_chips != 0 => {
                Err(Error::InvalidConfig("OOK-1 carries one chip and no check chips"))
            }
            OokMode::Ook4 if self.m < 2 => Err(Error::InvalidConfig("OOK-4 needs at least 2 chips per symbol")),
            OokMode::Ook4 if self.check_chips > self.m / 2 => Err(Error::TooManyCheckChips {
                requested: self.check_chips,
                chips: self.m,
            }),
            _ => Ok(()),
        }
    }

    /// Chips on air per OFDM symbol.
    pub fn on_air_chips(&self) -> usize {
        self.m + 2 * self.check_chips
    }
}

/// Line-code the bits and check that they fill whole OFDM symbols.
pub fn ook_target_waveform(bits: &BitBlock, plan: &OokSymbolPlan, code: R2dCode) -> Result<ChipSequence> {
    plan.validate()?;
    let coded = match code {
        R2dCode::Manchester => manchester_encode(bits)?,
        R2dCode::Pie => pie_encode(bits, 1.0)?,
    };
    let chips = if plan.preamble {
        let mut c = vec![H, L];
        c.extend_from_slice(coded.chips());
        let mut per = vec![2];
        match coded.chips_per_bit() {
            crate::ChipsPerBit::Uniform(n) => per.extend(core::iter::repeat_n(*n, bits.len())),
            crate::ChipsPerBit::PerBit(v) => per.extend_from_slice(v),
        }
        ChipSequence::new(c, coded.chip_duration(), crate::ChipsPerBit::PerBit(per))?
    } else {
        coded
    };
    if chips.len() % plan.m != 0 {
        return Err(Error::ChipCountNotDivisible {
            chips: chips.len(),
            per_symbol: plan.m,
        });
    }
    Ok(chips)
}

/// Append `!d1 … !dc, dc … d1` to one symbol's data chips.
pub fn insert_check_chips(symbol_chips: &[Level], plan: &OokSymbolPlan) -> Result<Vec<Level>> {
    let c = plan.check_chips;
    if c > symbol_chips.len() / 2 {
        return Err(Error::TooManyCheckChips {
            requested: c,
            chips: symbol_chips.len(),
        });
    }
    let mut out = symbol_chips.to_vec();
    out.extend(symbol_chips[..c].iter().map(|&l| !l));
    out.extend(symbol_chips[..c].iter().rev());
    Ok(out)
}

/// On-air chip boundaries `round(j·E/K)` for `K` chips in `E` samples.
fn boundaries(total: usize, chips: usize) -> Vec<usize> {
    (0..=chips)
        .map(|j| ((j * total) as f64 / chips as f64).round() as usize)
        .collect()
}

/// Ideal OFDM-body levels (`n_fft` samples) for one symbol's on-air chips:
/// the on-air layout minus the CP samples at the front.
pub fn body_target(on_air: &[Level], grid: &OfdmGrid, plan: &OokSymbolPlan) -> Result<Vec<Level>> {
    let e = grid.symbol_len();
    let cp = grid.cp_len;
    if plan.check_chips == 0 {
        // plain OOK-4: chips tile the body, CP is whatever the tail is
        let b = boundaries(grid.n_fft, on_air.len());
        return Ok(expand(on_air, &b));
    }
    let b = boundaries(e, on_air.len());
    if b[1] <= cp {
        return Err(Error::InvalidGrid("cyclic prefix longer than one OOK chip"));
    }
    Ok(expand(on_air, &b)[cp..].to_vec())
}

fn expand(chips: &[Level], b: &[usize]) -> Vec<Level> {
    let mut out = Vec::with_capacity(*b.last().unwrap_or(&0));
    for (j, &l) in chips.iter().enumerate() {
        out.extend(core::iter::repeat_n(l, b[j + 1] - b[j]));
    }
    out
}

/// Prepend the cyclic prefix.
pub fn add_cp<T: Copy>(body: &[T], cp: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(body.len() + cp);
    out.extend_from_slice(&body[body.len() - cp..]);
    out.extend_from_slice(body);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthMethod {
    /// Least-squares fit on the allocation (DFT projection).
    Ls,
    /// DFT-spread: sample the target at `|alloc|` points and precode.
    DftSpread,
}

fn on_off(l: Level) -> f64 {
    match l {
        H => 1.0,
        L => 0.0,
    }
}

/// Frequency-domain coefficients of one OFDM body.
fn synth_coefficients(target: &[f64], grid: &OfdmGrid, method: SynthMethod) -> Vec<Complex64> {
    let n = grid.n_fft;
    let mut spec = vec![Complex64::new(0.0, 0.0); n];
    match method {
        SynthMethod::Ls => {
            let mut x: Vec<Complex64> = target.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            fft(&mut x);
            for &k in &grid.allocated {
                let b = grid.bin(k);
                spec[b] = x[b];
            }
        }
        SynthMethod::DftSpread => {
            let m = grid.allocated.len();
            let mut s: Vec<Complex64> = (0..m)
                .map(|i| {
                    let t = ((i as f64 + 0.5) * n as f64 / m as f64) as usize;
                    Complex64::new(target[t.min(n - 1)], 0.0)
                })
                .collect();
            fft(&mut s);
            // DFT-spread bin j sits on the allocated subcarrier congruent to j mod m
            let scale = n as f64 / m as f64;
            for &k in &grid.allocated {
                let j = k.rem_euclid(m as i32) as usize;
                spec[grid.bin(k)] = s[j] * scale;
            }
        }
    }
    spec
}

/// Synthesize one OOK-4 symbol body (LS or DFT-spread) and add the CP.
/// Returns the samples and the relative RMS residual of the body.
pub fn ofdm_synthesize(target: &[Level], grid: &OfdmGrid, method: SynthMethod) -> Result<(Vec<Complex64>, f64)> {
    grid.validate()?;
    if target.len() != grid.n_fft {
        return Err(Error::LengthMismatch {
            expected: grid.n_fft,
            got: target.len(),
        });
    }
    let t: Vec<f64> = target.iter().map(|&l| on_off(l)).collect();
    let mut body = synth_coefficients(&t, grid, method);
    ifft(&mut body);
    let err: f64 = body.iter().zip(&t).map(|(x, &y)| (x - y).norm_sqr()).sum();
    let pow: f64 = t.iter().map(|v| v * v).sum();
    let residual = if pow > 0.0 { (err / pow).sqrt() } else { 0.0 };
    if residual > MAX_LS_RESIDUAL {
        return Err(Error::AllocationTooSmall(residual));
    }
    Ok((add_cp(&body, grid.cp_len), residual))
}

/// OOK-1 ON symbol: a unit-modulus quadratic-phase sequence on the allocation.
pub fn ook1_symbol(on: bool, grid: &OfdmGrid) -> Vec<Complex64> {
    let n = grid.n_fft;
    if !on {
        return vec![Complex64::new(0.0, 0.0); grid.symbol_len()];
    }
    let m = grid.allocated.len();
    let mut spec = vec![Complex64::new(0.0, 0.0); n];
    for (i, &k) in grid.allocated.iter().enumerate() {
        let ph = -PI * (i * (i + 1)) as f64 / m as f64;
        spec[grid.bin(k)] = Complex64::cis(ph) * (n as f64 / (m as f64).sqrt());
    }
    ifft(&mut spec);
    add_cp(&spec, grid.cp_len)
}

/// Full R2D transmit chain: line code, segment, check chips, synthesis, CP.
pub fn r2d_transmit(
    bits: &BitBlock,
    plan: &OokSymbolPlan,
    code: R2dCode,
    grid: &OfdmGrid,
    method: SynthMethod,
) -> Result<SampleWaveform> {
    let chips = ook_target_waveform(bits, plan, code)?;
    let mut samples = Vec::new();
    for sym in chips.chips().chunks(plan.m) {
        match plan.mode {
            OokMode::Ook1 => samples.extend(ook1_symbol(sym[0] == H, grid)),
            OokMode::Ook4 => {
                let on_air = insert_check_chips(sym, plan)?;
                let body = body_target(&on_air, grid, plan)?;
                samples.extend(ofdm_synthesize(&body, grid, method)?.0);
            }
        }
    }
    Ok(SampleWaveform::new(samples, grid.sample_rate))
}

/// Ideal on-air levels (CP included) of the whole R2D transmission.
pub fn on_air_levels(bits: &BitBlock, plan: &OokSymbolPlan, code: R2dCode, grid: &OfdmGrid) -> Result<Vec<Level>> {
    let chips = ook_target_waveform(bits, plan, code)?;
    let mut out = Vec::new();
    for sym in chips.chips().chunks(plan.m) {
        match plan.mode {
            OokMode::Ook1 => out.extend(core::iter::repeat_n(sym[0], grid.symbol_len())),
            OokMode::Ook4 => {
                let on_air = insert_check_chips(sym, plan)?;
                out.extend(add_cp(&body_target(&on_air, grid, plan)?, grid.cp_len));
            }
        }
    }
    Ok(out)
}

/// Manchester rule on a sampled level sequence: every run must last one or
/// two chips (±25 %) and the chips must pair into mid-bit transitions.
pub fn manchester_validate(levels: &[Level], chip_len: f64) -> Result<()> {
    let mut chips = Vec::new();
    let mut start = 0;
    for i in 1..=levels.len() {
        if i == levels.len() || levels[i] != levels[start] {
            let run = (i - start) as f64;
            let n = (run / chip_len).round();
            if !(n == 1.0 || n == 2.0) || (run - n * chip_len).abs() > 0.25 * chip_len {
                return Err(Error::ManchesterViolation(chips.len() / 2));
            }
            chips.extend(core::iter::repeat_n(levels[start], n as usize));
            start = i;
        }
    }
    if chips.len() % 2 != 0 {
        return Err(Error::ManchesterViolation(chips.len() / 2));
    }
    decode_chips(&chips, LineCodeKind::Manchester).map(|_| ())
}

/// Envelope-detector receiver with genie symbol timing.
///
/// Each on-air chip is measured by the mean envelope over its central half;
/// check chips are dropped. Manchester compares the two half-bit energies;
/// PIE slices at the midpoint of the preamble (or of the extreme chip
/// energies without one) and discriminates pulse durations.
pub fn envelope_decode(rx: &SampleWaveform, plan: &OokSymbolPlan, code: R2dCode, grid: &OfdmGrid) -> Result<BitBlock> {
    plan.validate()?;
    let e = grid.symbol_len();
    let symbols = rx.len() / e;
    let k = match plan.mode {
        OokMode::Ook1 => 1,
        OokMode::Ook4 => plan.on_air_chips(),
    };
    let mut energy = Vec::with_capacity(symbols * plan.m);
    for s in 0..symbols {
        let sym = &rx.samples[s * e..(s + 1) * e];
        let b = match plan.mode {
            OokMode::Ook1 => vec![grid.cp_len, e],
            OokMode::Ook4 => boundaries(e, k),
        };
        for j in 0..plan.m {
            let (lo, hi) = (b[j], b[j + 1]);
            let q = (hi - lo) / 4;
            let seg = &sym[lo + q..hi - q];
            energy.push(seg.iter().map(|v| v.norm()).sum::<f64>() / seg.len().max(1) as f64);
        }
    }
    let (payload, threshold) = if plan.preamble {
        if energy.len() < 2 {
            return Err(Error::BlockTooShort {
                len: energy.len(),
                crc_len: 2,
            });
        }
        (&energy[2..], (energy[0] + energy[1]) / 2.0)
    } else {
        let (lo, hi) = energy.iter().fold((f64::MAX, f64::MIN), |a, &v| (a.0.min(v), a.1.max(v)));
        (&energy[..], (lo + hi) / 2.0)
    };
    match code {
        R2dCode::Manchester => {
            let bits = payload
                .chunks(2)
                .enumerate()
                .map(|(i, p)| {
                    if p.len() != 2 || (p[0] - p[1]).abs() < 1e-9 * (p[0] + p[1]).max(1e-300) {
                        Err(Error::ManchesterViolation(i))
                    } else {
                        Ok(u8::from(p[1] > p[0]))
                    }
                })
                .collect::<Result<Vec<u8>>>()?;
            BitBlock::new(bits, BlockRole::Message)
        }
        R2dCode::Pie => {
            let mut levels: Vec<Level> = payload.iter().map(|&v| if v > threshold { H } else { L }).collect();
            // padding OFF chips after the last pulse are not data
            while levels.len() >= 2 && levels[levels.len() - 1] == L && levels[levels.len() - 2] == L {
                levels.pop();
            }
            let bits = decode_chips(&levels, LineCodeKind::Pie)?;
            BitBlock::new(bits.into_bits(), BlockRole::Message)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn msg(bits: &[u8]) -> BitBlock {
        BitBlock::message(bits.to_vec()).unwrap()
    }

    fn bits12(m: u32) -> Vec<u8> {
        (0..12).map(|i| ((m >> (11 - i)) & 1) as u8).collect()
    }

    #[test]
    fn target_segmentation() {
        let c = ook_target_waveform(&msg(&[1, 0]), &OokSymbolPlan::ook1(), R2dCode::Manchester).unwrap();
        assert_eq!(c.chips(), &[L, H, H, L]);
        let p4 = OokSymbolPlan::ook4(4, 1).unwrap();
        let c = ook_target_waveform(&msg(&[1, 0]), &p4, R2dCode::Manchester).unwrap();
        assert_eq!(c.chips(), &[L, H, H, L]);
        assert_eq!(
            ook_target_waveform(&msg(&[1]), &p4, R2dCode::Manchester),
            Err(Error::ChipCountNotDivisible { chips: 2, per_symbol: 4 })
        );
        let pie = ook_target_waveform(&msg(&[0, 0]), &p4, R2dCode::Pie).unwrap();
        assert_eq!(pie.chips(), &[H, L, H, L]);
    }

    #[test]
    fn plan_limits() {
        assert_eq!(
            OokSymbolPlan::ook4(4, 3),
            Err(Error::TooManyCheckChips { requested: 3, chips: 4 })
        );
        assert!(OokSymbolPlan::ook4(1, 0).is_err());
    }

    #[test]
    fn check_chips_construction_and_validator() {
        let grid = OfdmGrid::default();
        let plan = OokSymbolPlan::ook4(4, 1).unwrap();
        let on_air = insert_check_chips(&[H, L, L, H], &plan).unwrap();
        assert_eq!(on_air, [H, L, L, H, L, H]);
        let body = body_target(&on_air, &grid, &plan).unwrap();
        assert_eq!(body.len(), 256);
        let sym = add_cp(&body, grid.cp_len);
        // CP merges with the shortened first chip into one nominal chip
        let nominal = 274.0 / 6.0;
        let first_run = sym.iter().take_while(|&&l| l == H).count() as f64;
        assert!((first_run - nominal).abs() <= 1.0);
        manchester_validate(&sym, nominal).unwrap();
        // two check chips: inverted pair then mirrored copies
        let p2 = OokSymbolPlan::ook4(4, 2).unwrap();
        assert_eq!(insert_check_chips(&[H, L, L, H], &p2).unwrap(), [H, L, L, H, L, H, L, H]);
    }

    #[test]
    fn chip_lengths_within_one_sample_of_nominal() {
        let grid = OfdmGrid::default();
        let plan = OokSymbolPlan::ook4(4, 1).unwrap();
        for m in 0u32..1 << 12 {
            let lv = on_air_levels(&msg(&bits12(m)), &plan, R2dCode::Manchester, &grid).unwrap();
            for sym in lv.chunks(grid.symbol_len()) {
                let mut run = 1usize;
                let nominal = grid.symbol_len() as f64 / 6.0;
                for i in 1..=sym.len() {
                    if i == sym.len() || sym[i] != sym[i - 1] {
                        let chips = (run as f64 / nominal).round();
                        assert!((run as f64 - chips * nominal).abs() <= 1.0 + 1e-9, "run {run}");
                        run = 1;
                    } else {
                        run += 1;
                    }
                }
            }
            manchester_validate(&lv, grid.symbol_len() as f64 / 6.0).unwrap();
        }
    }

    #[test]
    fn without_check_chips_the_cp_breaks_manchester() {
        let grid = OfdmGrid::default();
        let plan = OokSymbolPlan::ook4(4, 0).unwrap();
        let mut violations = 0;
        for m in 0u32..1 << 12 {
            let lv = on_air_levels(&msg(&bits12(m)), &plan, R2dCode::Manchester, &grid).unwrap();
            if manchester_validate(&lv, grid.symbol_len() as f64 / 4.0).is_err() {
                violations += 1;
            }
        }
        assert!(violations > 0);
        // [0,0] → H,L,H,L: the CP pastes a short L ahead of the first H
        let lv = on_air_levels(&msg(&[0, 0]), &plan, R2dCode::Manchester, &grid).unwrap();
        assert_eq!(lv[0], L);
        assert!(manchester_validate(&lv, 274.0 / 4.0).is_err());
    }

    #[test]
    fn ls_on_full_grid_is_exact_and_residual_shrinks_with_bandwidth() {
        let plan = OokSymbolPlan::ook4(4, 1).unwrap();
        let on_air = insert_check_chips(&[L, H, H, L], &plan).unwrap();
        let full = OfdmGrid::new(256, 18, (-128..128).collect(), 3.84e6).unwrap();
        let body = body_target(&on_air, &full, &plan).unwrap();
        let (sym, r) = ofdm_synthesize(&body, &full, SynthMethod::Ls).unwrap();
        assert!(r < 1e-12);
        for (x, l) in sym[18..].iter().zip(&body) {
            assert!((x - Complex64::new(on_off(*l), 0.0)).norm() < 1e-12);
        }
        let mut last = f64::MAX;
        for n in [4usize, 8, 12, 24, 48, 96, 256] {
            let g = OfdmGrid::centred(256, 18, n, 3.84e6).unwrap();
            let t: Vec<f64> = body.iter().map(|&l| on_off(l)).collect();
            let mut x = synth_coefficients(&t, &g, SynthMethod::Ls);
            ifft(&mut x);
            let err: f64 = x.iter().zip(&t).map(|(a, &b)| (a - b).norm_sqr()).sum();
            assert!(err <= last + 1e-9, "{n}");
            last = err;
        }
        let tiny = OfdmGrid::centred(256, 18, 1, 3.84e6).unwrap();
        assert!(matches!(
            ofdm_synthesize(&body, &tiny, SynthMethod::Ls),
            Err(Error::AllocationTooSmall(_))
        ));
    }

    #[test]
    fn cp_equals_tail() {
        let grid = OfdmGrid::default();
        let w = r2d_transmit(
            &msg(&[0, 1, 1, 0]),
            &OokSymbolPlan::ook4(4, 1).unwrap(),
            R2dCode::Manchester,
            &grid,
            SynthMethod::Ls,
        )
        .unwrap();
        for sym in w.samples.chunks(grid.symbol_len()) {
            assert_eq!(&sym[..18], &sym[256..]);
        }
    }

    #[test]
    fn ook1_on_off() {
        let grid = OfdmGrid::default();
        let on = ook1_symbol(true, &grid);
        let off = ook1_symbol(false, &grid);
        assert!(off.iter().all(|v| v.norm() == 0.0));
        let mut body = on[18..].to_vec();
        fft(&mut body);
        for (b, v) in body.iter().enumerate() {
            let k = if b < 128 { b as i32 } else { b as i32 - 256 };
            assert_eq!(v.norm() > 1e-9, grid.allocated.contains(&k));
        }
        let w = r2d_transmit(&msg(&[1, 0, 1]), &OokSymbolPlan::ook1(), R2dCode::Manchester, &grid, SynthMethod::Ls)
            .unwrap();
        assert_eq!(
            envelope_decode(&w, &OokSymbolPlan::ook1(), R2dCode::Manchester, &grid).unwrap().bits(),
            &[1, 0, 1]
        );
    }

    #[test]
    fn ook4_round_trip_all_12_bit_messages() {
        let grid = OfdmGrid::default();
        let plan = OokSymbolPlan::ook4(4, 1).unwrap();
        for method in [SynthMethod::Ls, SynthMethod::DftSpread] {
            for m in 0u32..1 << 12 {
                let bits = bits12(m);
                let w = r2d_transmit(&msg(&bits), &plan, R2dCode::Manchester, &grid, method).unwrap();
                let out = envelope_decode(&w, &plan, R2dCode::Manchester, &grid).unwrap();
                assert_eq!(out.bits(), &bits[..], "{method:?} {m}");
            }
        }
    }

    #[test]
    fn pie_over_ook4_with_preamble() {
        let grid = OfdmGrid::default();
        let plan = OokSymbolPlan::ook4(4, 1).unwrap().with_preamble(true);
        // preamble 2 + PIE chips 2+4+2+4+2 = 16
        let bits = [0, 1, 0, 1, 0];
        let w = r2d_transmit(&msg(&bits), &plan, R2dCode::Pie, &grid, SynthMethod::Ls).unwrap();
        assert_eq!(envelope_decode(&w, &plan, R2dCode::Pie, &grid).unwrap().bits(), &bits);
    }
}
