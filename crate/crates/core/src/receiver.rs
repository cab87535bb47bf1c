//! Reader-side D2R reception: per-branch frequency extraction, coherent
//! metrics with genie channel knowledge, and non-coherent hard decisions.
//!
//! A branch is one spectral line of the device waveform, `±k·f` for odd
//! harmonic `k` of each square-wave fundamental `f`. Each branch is mixed to
//! DC, integrated-and-dumped to a few samples per bit, and low-pass filtered.
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::channel::ChannelRealization;
use crate::fft::fft;
use crate::linecode::{self, linecode_correlate_decode, linecode_soft_decode, BitTiming, LineCodeKind, LineTrellis};
use crate::modem_d2r::{msk_trellis, square_modulate, BackscatterMap, SquareKind, SquareWaveScheme};
use crate::{BitBlock, BlockRole, ChipSequence, Error, Level, LlrBlock, Result, SampleWaveform};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReceiverMode {
    CoherentSoft,
    NoncoherentHard,
}

/// Where the front end mixes a user with clock error `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClockTuning {
    /// At the device's actual lines `k·f·(1+ε)`.
    Tracked,
    /// At the planned lines `k·f`; the residual offset is left in the stream.
    Nominal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverConfig {
    pub mode: ReceiverMode,
    /// Odd harmonics to combine.
    pub harmonics: Vec<u32>,
    /// One-sided low-pass bandwidth per branch; `None` is twice the rate at
    /// which the mixed-down level can change (see [`D2rWaveform::level_rate`]).
    pub filter_bw: Option<f64>,
    pub fir_taps: usize,
    /// Lower bound on samples per bit after integrate-and-dump.
    pub min_samples_per_bit: usize,
    /// Bits per pattern in non-coherent correlation detection.
    pub pattern_window: usize,
    /// Bit timing always follows the device clock; this only moves the mixer.
    pub tuning: ClockTuning,
}

impl Default for ReceiverConfig {
    fn default() -> Self {
        Self {
            mode: ReceiverMode::CoherentSoft,
            harmonics: vec![1],
            filter_bw: None,
            fir_taps: 129,
            min_samples_per_bit: 16,
            pattern_window: 3,
            tuning: ClockTuning::Tracked,
        }
    }
}

impl ReceiverConfig {
    pub fn combining() -> Self {
        Self {
            harmonics: vec![1, 3, 5],
            ..Self::default()
        }
    }

    /// Low-pass bandwidth applied to `w`'s branches.
    pub fn bandwidth(&self, w: &D2rWaveform) -> f64 {
        self.filter_bw.unwrap_or(2.0 * w.level_rate())
    }

    pub fn validate(&self) -> Result<()> {
        if self.harmonics.is_empty() {
            return Err(Error::InvalidReceiver("no harmonics selected"));
        }
        if self.harmonics.iter().any(|h| h % 2 == 0) {
            return Err(Error::InvalidReceiver("harmonics must be odd"));
        }
        if self.fir_taps % 2 == 0 {
            return Err(Error::InvalidReceiver("FIR length must be odd"));
        }
        if self.min_samples_per_bit < 2 {
            return Err(Error::InvalidReceiver("need at least 2 samples per bit"));
        }
        if matches!(self.filter_bw, Some(b) if !(b > 0.0)) {
            return Err(Error::InvalidReceiver("filter bandwidth must be positive"));
        }
        if !(1..=12).contains(&self.pattern_window) {
            return Err(Error::InvalidReceiver("pattern window must be 1 to 12 bits"));
        }
        Ok(())
    }
}

/// What a device sends on the D2R link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum D2rWaveform {
    Square(SquareWaveScheme),
    Line { kind: LineCodeKind, bit_rate: f64 },
}

impl D2rWaveform {
    pub fn bit_rate(&self) -> f64 {
        match self {
            D2rWaveform::Square(s) => s.bit_rate,
            D2rWaveform::Line { bit_rate, .. } => *bit_rate,
        }
    }

    pub fn chips_per_bit(&self) -> Result<usize> {
        match self {
            D2rWaveform::Square(s) => Ok(s.chips_per_bit()),
            D2rWaveform::Line { kind, .. } => kind
                .chips_per_bit()
                .ok_or(Error::UnsupportedKind("variable-length line code on D2R")),
        }
    }

    pub fn chip_rate(&self) -> Result<f64> {
        Ok(self.chips_per_bit()? as f64 * self.bit_rate())
    }

    /// Square-wave fundamentals; empty for baseband FM0.
    pub fn fundamentals(&self) -> Vec<f64> {
        match self {
            D2rWaveform::Square(s) if s.kind == SquareKind::Msk => vec![s.f_shift, s.max_fundamental()],
            D2rWaveform::Square(s) => vec![s.f_shift],
            D2rWaveform::Line { kind, bit_rate } => match kind.subcarrier_cycles() {
                Some(m) => vec![m as f64 * bit_rate],
                None => Vec::new(),
            },
        }
    }

    /// Highest fundamental, used for the sample-rate policy.
    pub fn max_fundamental(&self) -> f64 {
        self.fundamentals().into_iter().fold(self.bit_rate(), f64::max)
    }

    pub fn modulate(&self, bits: &BitBlock) -> Result<ChipSequence> {
        match self {
            D2rWaveform::Square(s) => square_modulate(bits, s),
            D2rWaveform::Line { kind, bit_rate } => {
                Ok(linecode::encode(bits, *kind)?.with_bit_duration(1.0 / bit_rate))
            }
        }
    }

    /// Level changes per second of a branch stream: once per bit for square
    /// waves and enhanced Manchester, once per half-bit for the other line codes.
    pub fn level_rate(&self) -> f64 {
        match self {
            D2rWaveform::Square(_)
            | D2rWaveform::Line {
                kind: LineCodeKind::EnhancedManchester { .. },
                ..
            } => self.bit_rate(),
            D2rWaveform::Line { .. } => 2.0 * self.bit_rate(),
        }
    }

    /// Bits per detection symbol (2 for QPSK).
    pub fn bits_per_symbol(&self) -> usize {
        match self {
            D2rWaveform::Square(s) if s.kind == SquareKind::Qpsk => 2,
            _ => 1,
        }
    }
}

/// Smallest multiple of the chip rate that is at least `oversample` times the
/// fastest fundamental.
pub fn sample_rate_policy(waveforms: &[D2rWaveform], oversample: f64) -> Result<f64> {
    let mut chip = 0.0f64;
    let mut fmax = 0.0f64;
    for w in waveforms {
        chip = chip.max(w.chip_rate()?);
        fmax = fmax.max(w.max_fundamental());
    }
    for w in waveforms {
        let r = w.chip_rate()? / chip;
        if (r - r.round()).abs() > 1e-9 && (chip / w.chip_rate()? - (chip / w.chip_rate()?).round()).abs() > 1e-9 {
            return Err(Error::NonIntegerOversampling);
        }
    }
    // chip rates of the users must divide the chosen rate
    let mut fs = chip * (oversample * fmax / chip).ceil().max(1.0);
    while waveforms.iter().any(|w| {
        let r = fs / w.chip_rate().unwrap_or(fs);
        (r - r.round()).abs() > 1e-9
    }) {
        fs += chip;
    }
    Ok(fs)
}

/// Spectral lines `±k·f·(1+ε)` for every fundamental, or DC for FM0.
pub fn branch_freqs(w: &D2rWaveform, harmonics: &[u32], eps: f64) -> Vec<f64> {
    let f = w.fundamentals();
    if f.is_empty() {
        return vec![0.0];
    }
    let mut out = Vec::new();
    for &base in &f {
        for &k in harmonics {
            let nu = base * k as f64 * (1.0 + eps);
            out.push(nu);
            out.push(-nu);
        }
    }
    out
}

/// Integrate-and-dump factor: largest `D` dividing the samples per bit that
/// keeps at least `min_spb` samples per bit.
pub fn decimation(sample_rate: f64, bit_rate: f64, min_spb: usize) -> usize {
    let n = sample_rate / bit_rate;
    let ni = n.round() as usize;
    if (n - ni as f64).abs() < 1e-9 && ni > 0 {
        (1..=ni).rev().find(|d| ni % d == 0 && ni / d >= min_spb).unwrap_or(1)
    } else {
        ((n / min_spb as f64).floor() as usize).max(1)
    }
}

/// Hamming-windowed sinc low-pass, unit DC gain.
pub fn lowpass_taps(taps: usize, cutoff: f64, sample_rate: f64) -> Vec<f64> {
    let fc = cutoff / sample_rate;
    let mid = (taps / 2) as f64;
    let mut h: Vec<f64> = (0..taps)
        .map(|i| {
            let x = i as f64 - mid;
            let s = if x == 0.0 { 2.0 * fc } else { (2.0 * PI * fc * x).sin() / (PI * x) };
            let w = if taps > 1 {
                0.54 - 0.46 * (2.0 * PI * i as f64 / (taps - 1) as f64).cos()
            } else {
                1.0
            };
            s * w
        })
        .collect();
    let sum: f64 = h.iter().sum();
    h.iter_mut().for_each(|v| *v /= sum);
    h
}

/// Linear-phase FIR with the group delay removed (output aligned to input).
pub fn fir_filter(x: &[Complex64], h: &[f64]) -> Vec<Complex64> {
    let mid = h.len() / 2;
    let n = x.len();
    (0..n)
        .map(|m| {
            let lo = (m + mid + 1).saturating_sub(h.len());
            let hi = (m + mid).min(n - 1);
            let mut acc = Complex64::new(0.0, 0.0);
            for j in lo..=hi {
                acc += x[j] * h[m + mid - j];
            }
            acc
        })
        .collect()
}

/// Mix one spectral line to DC, integrate-and-dump by `decim`, low-pass.
pub fn extract_branch(
    rx: &SampleWaveform,
    freq: f64,
    decim: usize,
    filter_bw: f64,
    fir_taps: usize,
) -> Result<SampleWaveform> {
    let fs = rx.sample_rate;
    if freq.abs() >= fs / 2.0 {
        return Err(Error::HarmonicBeyondNyquist {
            harmonic: 0,
            freq_hz: freq,
        });
    }
    let step = Complex64::cis(-2.0 * PI * freq / fs);
    let mut rot = Complex64::cis(-PI * freq / fs);
    let mut dec = Vec::with_capacity(rx.len() / decim + 1);
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, &s) in rx.samples.iter().enumerate() {
        acc += s * rot;
        rot *= step;
        if i % 4096 == 4095 {
            // keep the phasor on the unit circle
            rot = Complex64::cis(-2.0 * PI * freq * (i as f64 + 1.5) / fs);
        }
        if (i + 1) % decim == 0 {
            dec.push(acc / decim as f64);
            acc = Complex64::new(0.0, 0.0);
        }
    }
    let fd = fs / decim as f64;
    let out = if 2.0 * filter_bw < fd {
        fir_filter(&dec, &lowpass_taps(fir_taps, filter_bw, fd))
    } else {
        dec
    };
    Ok(SampleWaveform {
        samples: out,
        sample_rate: fd,
        center_offset: freq,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub freq: f64,
    pub stream: SampleWaveform,
}

/// Mean power of `x` within `±bw` of `w`'s fundamental lines (DC for
/// baseband FM0), read off a zero-padded periodogram.
pub fn inband_power(x: &SampleWaveform, w: &D2rWaveform, bw: f64) -> f64 {
    let n = x.len();
    if n == 0 {
        return 0.0;
    }
    let m = n.next_power_of_two();
    let mut buf = x.samples.clone();
    buf.resize(m, Complex64::new(0.0, 0.0));
    fft(&mut buf);
    let lines = branch_freqs(w, &[1], 0.0);
    let df = x.sample_rate / m as f64;
    let sum: f64 = buf
        .iter()
        .enumerate()
        .filter(|&(k, _)| {
            let f = if k < m / 2 { k as f64 * df } else { (k as f64 - m as f64) * df };
            lines.iter().any(|&c| (f - c).abs() <= bw)
        })
        .map(|(_, v)| v.norm_sqr())
        .sum();
    sum / (m as f64 * n as f64)
}

/// Per-branch streams of one user. `eps` is the user's clock error.
pub fn extract_user(rx: &SampleWaveform, w: &D2rWaveform, eps: f64, cfg: &ReceiverConfig) -> Result<Vec<Branch>> {
    cfg.validate()?;
    let fs = rx.sample_rate;
    let bw = cfg.bandwidth(w);
    let decim = decimation(fs, w.bit_rate(), cfg.min_samples_per_bit);
    for base in w.fundamentals() {
        for &k in &cfg.harmonics {
            let f = base * k as f64 * (1.0 + eps);
            if f >= fs / 2.0 {
                return Err(Error::HarmonicBeyondNyquist { harmonic: k, freq_hz: f });
            }
        }
    }
    let tuned = match cfg.tuning {
        ClockTuning::Tracked => eps,
        ClockTuning::Nominal => 0.0,
    };
    branch_freqs(w, &cfg.harmonics, tuned)
        .into_iter()
        .map(|freq| {
            Ok(Branch {
                freq,
                stream: extract_branch(rx, freq, decim, bw, cfg.fir_taps)?,
            })
        })
        .collect()
}

/// Genie end-to-end gain of each branch: `g1 · H_d2r(ν)` on the sample grid.
pub fn cascade_gains(
    branches: &[Branch],
    h_cw2d: &ChannelRealization,
    h_d2r: &ChannelRealization,
    sample_rate: f64,
) -> Vec<Complex64> {
    let g1 = h_cw2d.dc_gain();
    branches.iter().map(|b| g1 * h_d2r.response(b.freq, sample_rate)).collect()
}

/// Candidate symbols and how their metrics become LLRs.
#[derive(Debug, Clone)]
pub enum Detector {
    /// Memoryless, one pattern per symbol value (`2^bits_per_symbol` of them).
    Symbolwise { patterns: Vec<Vec<Level>>, bits: usize },
    Trellis(LineTrellis),
}

impl Detector {
    pub fn for_waveform(w: &D2rWaveform) -> Result<Self> {
        match w {
            D2rWaveform::Square(s) => match s.kind {
                SquareKind::Msk => Ok(Detector::Trellis(msk_trellis(s)?)),
                SquareKind::Qpsk => {
                    let patterns = [[0, 0], [0, 1], [1, 0], [1, 1]]
                        .iter()
                        .map(|p| Ok(square_modulate(&BitBlock::message(p.to_vec())?, s)?.into_chips()))
                        .collect::<Result<Vec<_>>>()?;
                    Ok(Detector::Symbolwise { patterns, bits: 2 })
                }
                _ => {
                    let patterns = [0u8, 1]
                        .iter()
                        .map(|&b| Ok(square_modulate(&BitBlock::message(vec![b])?, s)?.into_chips()))
                        .collect::<Result<Vec<_>>>()?;
                    Ok(Detector::Symbolwise { patterns, bits: 1 })
                }
            },
            D2rWaveform::Line { kind, .. } => {
                let t = LineTrellis::new(*kind)?;
                if t.states() == 1 {
                    Ok(Detector::Symbolwise {
                        patterns: t.patterns().to_vec(),
                        bits: 1,
                    })
                } else {
                    Ok(Detector::Trellis(t))
                }
            }
        }
    }

    pub fn patterns(&self) -> &[Vec<Level>] {
        match self {
            Detector::Symbolwise { patterns, .. } => patterns,
            Detector::Trellis(t) => t.patterns(),
        }
    }

    /// Sub-symbol segments the patterns need.
    pub fn segments(&self) -> usize {
        match self {
            Detector::Symbolwise { .. } => 1,
            Detector::Trellis(_) => 2,
        }
    }

    /// Segments actually correlated per symbol: each pattern segment is split
    /// further, up to `8 / segments()` ways, as long as every piece spans whole
    /// cycles of every fundamental. Finer pieces follow a residual frequency
    /// offset within the symbol instead of averaging the signal away.
    pub fn split_segments(&self, w: &D2rWaveform) -> usize {
        let base = self.segments();
        let per_seg = w.bits_per_symbol() as f64 / w.bit_rate() / base as f64;
        let cycles: Vec<f64> = w.fundamentals().iter().map(|f| f * per_seg).collect();
        if cycles.is_empty() {
            return base;
        }
        let whole = |c: f64, d: usize| {
            let x = c / d as f64;
            (x - x.round()).abs() < 1e-9 && x.round() >= 1.0
        };
        let d = (1..=8 / base).rev().find(|&d| cycles.iter().all(|&c| whole(c, d))).unwrap_or(1);
        base * d
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Mean of `coeff(chip(t)) · e^{−j2πνt}` over `[a, b)` for a pattern starting
/// at 0 with chip length `d`, divided by the sample-and-hold droop.
fn template(pattern: &[Level], d: f64, map: &BackscatterMap, nu: f64, a: f64, b: f64, fs: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    let first = (a / d).floor().max(0.0) as usize;
    for (i, &l) in pattern.iter().enumerate().skip(first) {
        let c0 = (i as f64 * d).max(a);
        let c1 = ((i + 1) as f64 * d).min(b);
        if c1 <= c0 {
            if i as f64 * d >= b {
                break;
            }
            continue;
        }
        let integral = if nu == 0.0 {
            Complex64::new(c1 - c0, 0.0)
        } else {
            let w = -2.0 * PI * nu;
            (Complex64::cis(w * c1) - Complex64::cis(w * c0)) / Complex64::new(0.0, w)
        };
        acc += map.coeff(l) * integral;
    }
    acc / (b - a) / sinc(nu / fs)
}

/// Genie knowledge the coherent receiver is given.
#[derive(Debug, Clone)]
pub struct Genie {
    /// Composite gain per branch.
    pub gains: Vec<Complex64>,
    pub noise_var: f64,
    pub eps: f64,
    /// Native sample rate of the received waveform.
    pub sample_rate: f64,
}

/// Log-likelihood of every candidate pattern for every symbol,
/// `metrics[s * P + p]`.
pub fn coherent_metrics(
    branches: &[Branch],
    w: &D2rWaveform,
    map: &BackscatterMap,
    genie: &Genie,
    detector: &Detector,
    symbols: usize,
) -> Result<Vec<f64>> {
    if genie.gains.len() != branches.len() {
        return Err(Error::LengthMismatch {
            expected: branches.len(),
            got: genie.gains.len(),
        });
    }
    if !(genie.noise_var > 0.0) {
        return Err(Error::InvalidReceiver("noise variance must be positive"));
    }
    let sym_dur = w.bits_per_symbol() as f64 / (w.bit_rate() * (1.0 + genie.eps));
    let patterns = detector.patterns();
    let chip_d = sym_dur / patterns[0].len() as f64;
    let segs = detector.split_segments(w);
    let seg_dur = sym_dur / segs as f64;
    let n_seg = seg_dur * genie.sample_rate;
    let fs = genie.sample_rate;
    // templates[b][p][j] relative to symbol start
    let templates: Vec<Vec<Vec<Complex64>>> = branches
        .iter()
        .zip(&genie.gains)
        .map(|(br, &h)| {
            patterns
                .iter()
                .map(|p| {
                    (0..segs)
                        .map(|j| h * template(p, chip_d, map, br.freq, j as f64 * seg_dur, (j + 1) as f64 * seg_dur, fs))
                        .collect()
                })
                .collect()
        })
        .collect();
    let np = patterns.len();
    let scale = n_seg / genie.noise_var;
    let mut metrics = vec![0.0; symbols * np];
    for (b, br) in branches.iter().enumerate() {
        for s in 0..symbols {
            let t0 = s as f64 * sym_dur;
            let rot = Complex64::cis(-2.0 * PI * br.freq * t0);
            for j in 0..segs {
                let a = t0 + j as f64 * seg_dur;
                let z = br.stream.mean_over(a, a + seg_dur);
                for p in 0..np {
                    let t = templates[b][p][j] * rot;
                    metrics[s * np + p] += scale * (2.0 * (t.conj() * z).re - t.norm_sqr());
                }
            }
        }
    }
    Ok(metrics)
}

/// Coherent soft demodulation to coded-bit LLRs (positive ⇒ 0).
pub fn coherent_llrs(
    branches: &[Branch],
    w: &D2rWaveform,
    map: &BackscatterMap,
    genie: &Genie,
    n_bits: usize,
) -> Result<LlrBlock> {
    let det = Detector::for_waveform(w)?;
    let bps = w.bits_per_symbol();
    if n_bits % bps != 0 {
        return Err(Error::OddBitCountForQpsk);
    }
    let symbols = n_bits / bps;
    let metrics = coherent_metrics(branches, w, map, genie, &det, symbols)?;
    match &det {
        Detector::Trellis(t) => linecode_soft_decode(&metrics, t),
        Detector::Symbolwise { patterns, bits } => {
            let np = patterns.len();
            let mut llrs = Vec::with_capacity(n_bits);
            for s in 0..symbols {
                let m = &metrics[s * np..(s + 1) * np];
                for k in 0..*bits {
                    let shift = bits - 1 - k;
                    let (mut best0, mut best1) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
                    for (p, &v) in m.iter().enumerate() {
                        if (p >> shift) & 1 == 0 {
                            best0 = best0.max(v);
                        } else {
                            best1 = best1.max(v);
                        }
                    }
                    llrs.push(best0 - best1);
                }
            }
            LlrBlock::new(llrs, genie.noise_var)
        }
    }
}

/// Non-coherent hard decisions for FM0 / MMS by pattern correlation over
/// `window` bits, combining every branch.
pub fn noncoherent_bits(branches: &[Branch], w: &D2rWaveform, eps: f64, n_bits: usize, window: usize) -> Result<BitBlock> {
    let kind = match w {
        D2rWaveform::Line {
            kind: k @ (LineCodeKind::Fm0 | LineCodeKind::Mms { .. }),
            ..
        } => *k,
        _ => return Err(Error::UnsupportedKind("non-coherent detection needs FM0 or MMS")),
    };
    let streams: Vec<SampleWaveform> = branches.iter().map(|b| b.stream.clone()).collect();
    let timing = BitTiming {
        start: 0.0,
        bit_duration: 1.0 / (w.bit_rate() * (1.0 + eps)),
        bits: n_bits,
    };
    let out = linecode_correlate_decode(&streams, kind, &timing, window)?;
    BitBlock::new(out.into_bits(), BlockRole::Coded)
}
