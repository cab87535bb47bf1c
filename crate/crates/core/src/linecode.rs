//! RFID-style line codes and their decoders.
//!
//! Encoders emit chips with a nominal bit duration of 1 s (PIE: Tari of 1 s);
//! rescale with [`ChipSequence::with_bit_duration`].
use alloc::vec;
use alloc::vec::Vec;

use crate::{BitBlock, BlockRole, ChipSequence, ChipsPerBit, Complex64, Error, Level, LlrBlock, Result, SampleWaveform};
use Level::{High as H, Low as L};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineCodeKind {
    Pie,
    Manchester,
    /// Manchester at subcarrier granularity, `m` cycles per bit.
    EnhancedManchester { m: usize },
    Fm0,
    /// Miller-modulated subcarrier with `m` cycles per bit.
    Mms { m: usize },
}

impl LineCodeKind {
    pub fn mms(m: usize) -> Result<Self> {
        check_m(m)?;
        Ok(LineCodeKind::Mms { m })
    }

    pub fn enhanced_manchester(m: usize) -> Result<Self> {
        check_m(m)?;
        Ok(LineCodeKind::EnhancedManchester { m })
    }

    pub fn subcarrier_cycles(&self) -> Option<usize> {
        match *self {
            LineCodeKind::Mms { m } | LineCodeKind::EnhancedManchester { m } => Some(m),
            _ => None,
        }
    }

    /// Chips per bit for the uniform codes.
    pub fn chips_per_bit(&self) -> Option<usize> {
        match *self {
            LineCodeKind::Pie => None,
            LineCodeKind::Manchester | LineCodeKind::Fm0 => Some(2),
            LineCodeKind::Mms { m } | LineCodeKind::EnhancedManchester { m } => Some(2 * m),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            LineCodeKind::Pie => "pie",
            LineCodeKind::Manchester => "manchester",
            LineCodeKind::EnhancedManchester { .. } => "enh_manchester",
            LineCodeKind::Fm0 => "fm0",
            LineCodeKind::Mms { .. } => "mms",
        }
    }
}

fn check_m(m: usize) -> Result<()> {
    if matches!(m, 2 | 4 | 8) {
        Ok(())
    } else {
        Err(Error::InvalidM(m))
    }
}

fn uniform(chips: Vec<Level>, per_bit: usize) -> Result<ChipSequence> {
    ChipSequence::uniform(chips, per_bit, 1.0 / per_bit as f64)
}

/// PIE: data-0 is one Tari (H,L), data-1 two Tari (H,H,H,L); chip = Tari/2.
pub fn pie_encode(bits: &BitBlock, tari: f64) -> Result<ChipSequence> {
    let mut chips = Vec::with_capacity(bits.len() * 4);
    let mut per_bit = Vec::with_capacity(bits.len());
    for &b in bits.bits() {
        if b == 0 {
            chips.extend_from_slice(&[H, L]);
            per_bit.push(2);
        } else {
            chips.extend_from_slice(&[H, H, H, L]);
            per_bit.push(4);
        }
    }
    ChipSequence::new(chips, tari / 2.0, ChipsPerBit::PerBit(per_bit))
}

/// 0 → H,L and 1 → L,H.
pub fn manchester_encode(bits: &BitBlock) -> Result<ChipSequence> {
    let chips = bits
        .bits()
        .iter()
        .flat_map(|&b| if b == 0 { [H, L] } else { [L, H] })
        .collect();
    uniform(chips, 2)
}

/// Bit 0 → (H,L)^m, bit 1 → (L,H)^m.
pub fn enhanced_manchester_encode(bits: &BitBlock, m: usize) -> Result<ChipSequence> {
    check_m(m)?;
    let mut chips = Vec::with_capacity(bits.len() * 2 * m);
    for &b in bits.bits() {
        let pair = if b == 0 { [H, L] } else { [L, H] };
        for _ in 0..m {
            chips.extend_from_slice(&pair);
        }
    }
    uniform(chips, 2 * m)
}

pub fn fm0_encode(bits: &BitBlock, initial_level: Level) -> Result<ChipSequence> {
    let mut level = initial_level;
    let mut chips = Vec::with_capacity(bits.len() * 2);
    for &b in bits.bits() {
        let first = !level;
        let second = if b == 1 { first } else { !first };
        chips.push(first);
        chips.push(second);
        level = second;
    }
    uniform(chips, 2)
}

/// Baseband Miller half-bits (two per bit). Starts High with an implied
/// preceding 1.
pub fn miller_baseband(bits: &[u8]) -> Vec<Level> {
    let mut level = H;
    let mut prev = 1u8;
    let mut out = Vec::with_capacity(bits.len() * 2);
    for &b in bits {
        let (first, second) = miller_step(level, prev, b);
        out.push(first);
        out.push(second);
        level = second;
        prev = b;
    }
    out
}

fn miller_step(level: Level, prev: u8, b: u8) -> (Level, Level) {
    let first = if prev == 0 && b == 0 { !level } else { level };
    let second = if b == 1 { !first } else { first };
    (first, second)
}

/// Subcarrier of `m` cycles over one bit of `2m` chips.
pub fn subcarrier(m: usize) -> Vec<Level> {
    (0..2 * m).map(|i| if i % 2 == 0 { H } else { L }).collect()
}

fn mms_chips(first: Level, second: Level, m: usize) -> Vec<Level> {
    subcarrier(m)
        .into_iter()
        .enumerate()
        .map(|(i, s)| s.mul(if i < m { first } else { second }))
        .collect()
}

pub fn mms_encode(bits: &BitBlock, m: usize) -> Result<ChipSequence> {
    check_m(m)?;
    let base = miller_baseband(bits.bits());
    let chips = base
        .chunks(2)
        .flat_map(|h| mms_chips(h[0], h[1], m))
        .collect();
    uniform(chips, 2 * m)
}

pub fn encode(bits: &BitBlock, kind: LineCodeKind) -> Result<ChipSequence> {
    match kind {
        LineCodeKind::Pie => pie_encode(bits, 1.0),
        LineCodeKind::Manchester => manchester_encode(bits),
        LineCodeKind::EnhancedManchester { m } => enhanced_manchester_encode(bits, m),
        LineCodeKind::Fm0 => fm0_encode(bits, H),
        LineCodeKind::Mms { m } => mms_encode(bits, m),
    }
}

/// Hard decoding of a clean chip stream.
pub fn decode_chips(chips: &[Level], kind: LineCodeKind) -> Result<BitBlock> {
    let bits = match kind {
        LineCodeKind::Pie => return pie_decode_chips(chips),
        LineCodeKind::Manchester => chips
            .chunks(2)
            .enumerate()
            .map(|(i, c)| match c {
                [H, L] => Ok(0),
                [L, H] => Ok(1),
                _ => Err(Error::ManchesterViolation(i)),
            })
            .collect::<Result<Vec<u8>>>()?,
        _ => {
            let trellis = LineTrellis::new(kind)?;
            let per = trellis.chips_per_bit();
            if chips.len() % per != 0 {
                return Err(Error::LengthMismatch {
                    expected: chips.len() / per * per,
                    got: chips.len(),
                });
            }
            let metrics: Vec<f64> = chips
                .chunks(per)
                .flat_map(|c| {
                    trellis
                        .patterns()
                        .iter()
                        .map(|p| p.iter().zip(c).filter(|(a, b)| a == b).count() as f64)
                        .collect::<Vec<_>>()
                })
                .collect();
            linecode_soft_decode(&metrics, &trellis)?.hard_decisions()
        }
    };
    BitBlock::new(bits, BlockRole::Coded)
}

/// Runs of High followed by one Low; 1 High → 0, 3 High → 1.
fn pie_decode_chips(chips: &[Level]) -> Result<BitBlock> {
    let mut bits = Vec::new();
    let mut run = 0;
    for (i, &c) in chips.iter().enumerate() {
        match c {
            H => run += 1,
            L => {
                match run {
                    1 => bits.push(0),
                    3 => bits.push(1),
                    _ => return Err(Error::PieViolation(i)),
                }
                run = 0;
            }
        }
    }
    if run != 0 {
        return Err(Error::PieViolation(chips.len()));
    }
    BitBlock::new(bits, BlockRole::Coded)
}

/// Line-code trellis: one branch per (state, bit), each emitting one of a
/// few distinct chip patterns.
#[derive(Debug, Clone)]
pub struct LineTrellis {
    states: usize,
    initial: usize,
    next: Vec<usize>,
    pattern: Vec<usize>,
    patterns: Vec<Vec<Level>>,
}

impl LineTrellis {
    /// FM0 state = current level; Miller state = (level, previous bit);
    /// Manchester variants have one state.
    pub fn new(kind: LineCodeKind) -> Result<Self> {
        let lvl = |s: usize| if s & 1 == 0 { H } else { L };
        let idx = |l: Level| usize::from(l == L);
        let mut branches = Vec::new();
        let (states, initial) = match kind {
            LineCodeKind::Pie => return Err(Error::UnsupportedKind("PIE has no fixed-length trellis")),
            LineCodeKind::Manchester | LineCodeKind::EnhancedManchester { .. } => {
                let m = kind.subcarrier_cycles().unwrap_or(1);
                for b in 0..2u8 {
                    let mut chips = Vec::new();
                    for _ in 0..m {
                        chips.extend_from_slice(if b == 0 { &[H, L] } else { &[L, H] });
                    }
                    branches.push((0, chips));
                }
                (1, 0)
            }
            LineCodeKind::Fm0 => {
                for s in 0..2 {
                    for b in 0..2u8 {
                        let first = !lvl(s);
                        let second = if b == 1 { first } else { !first };
                        branches.push((idx(second), vec![first, second]));
                    }
                }
                (2, 0)
            }
            LineCodeKind::Mms { m } => {
                check_m(m)?;
                for s in 0..4 {
                    let level = lvl(s);
                    let prev = (s >> 1) as u8;
                    for b in 0..2u8 {
                        let (first, second) = miller_step(level, prev, b);
                        branches.push((idx(second) | (usize::from(b) << 1), mms_chips(first, second, m)));
                    }
                }
                // High level, previous bit 1
                (4, 2)
            }
        };
        Ok(Self::from_branches(states, initial, branches))
    }

    /// Build from `(next_state, chips)` per branch, ordered `state * 2 + bit`.
    pub fn from_branches(states: usize, initial: usize, branches: Vec<(usize, Vec<Level>)>) -> Self {
        assert_eq!(branches.len(), states * 2);
        let mut patterns: Vec<Vec<Level>> = Vec::new();
        let mut next = Vec::with_capacity(branches.len());
        let mut pattern = Vec::with_capacity(branches.len());
        for (ns, chips) in branches {
            let p = match patterns.iter().position(|q| *q == chips) {
                Some(p) => p,
                None => {
                    patterns.push(chips);
                    patterns.len() - 1
                }
            };
            next.push(ns);
            pattern.push(p);
        }
        Self {
            states,
            initial,
            next,
            pattern,
            patterns,
        }
    }

    pub fn states(&self) -> usize {
        self.states
    }

    /// Distinct chip patterns; metrics are indexed by these.
    pub fn patterns(&self) -> &[Vec<Level>] {
        &self.patterns
    }

    pub fn chips_per_bit(&self) -> usize {
        self.patterns[0].len()
    }

    /// Chips of the path driven by `bits` (an encoder for any trellis).
    pub fn path_chips(&self, bits: &[u8]) -> Vec<Level> {
        let mut s = self.initial;
        let mut out = Vec::new();
        for &b in bits {
            let br = s * 2 + usize::from(b);
            out.extend_from_slice(&self.patterns[self.pattern[br]]);
            s = self.next[br];
        }
        out
    }
}

/// Max-log forward-backward over a line-code trellis.
///
/// `metrics[t * P + p]` is the log-likelihood of pattern `p` in bit `t`
/// (P = number of distinct patterns). The start state is known, the end state
/// is free. Positive LLR ⇒ bit 0.
pub fn linecode_soft_decode(metrics: &[f64], trellis: &LineTrellis) -> Result<LlrBlock> {
    let p = trellis.patterns.len();
    if metrics.is_empty() || metrics.len() % p != 0 {
        return Err(Error::LengthMismatch {
            expected: (metrics.len() / p).max(1) * p,
            got: metrics.len(),
        });
    }
    let n = metrics.len() / p;
    let s = trellis.states;
    let gamma = |t: usize, br: usize| metrics[t * p + trellis.pattern[br]];
    let mut alpha = vec![f64::NEG_INFINITY; (n + 1) * s];
    alpha[trellis.initial] = 0.0;
    for t in 0..n {
        for st in 0..s {
            let a = alpha[t * s + st];
            if a == f64::NEG_INFINITY {
                continue;
            }
            for b in 0..2 {
                let br = st * 2 + b;
                let ns = trellis.next[br];
                let v = a + gamma(t, br);
                let slot = &mut alpha[(t + 1) * s + ns];
                if v > *slot {
                    *slot = v;
                }
            }
        }
    }
    let mut beta = vec![0.0; s];
    let mut llrs = vec![0.0; n];
    for t in (0..n).rev() {
        let mut best = [f64::NEG_INFINITY; 2];
        let mut prev = vec![f64::NEG_INFINITY; s];
        for st in 0..s {
            for b in 0..2 {
                let br = st * 2 + b;
                let g = gamma(t, br) + beta[trellis.next[br]];
                best[b] = best[b].max(alpha[t * s + st] + g);
                prev[st] = prev[st].max(g);
            }
        }
        llrs[t] = best[0] - best[1];
        beta = prev;
    }
    LlrBlock::new(llrs, 1.0)
}

/// Bit timing for sampled decoding: first bit starts at `start` seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BitTiming {
    pub start: f64,
    pub bit_duration: f64,
    pub bits: usize,
}

/// Non-coherent hard decoding by correlation with known level patterns.
///
/// `streams` are complex envelopes of the code's baseband part (for MMS: after
/// removing the subcarrier, one stream per sideband). For every bit, the
/// half-bit means over a window of `window` bits centred on it are correlated
/// with each level pattern the code can produce there, from any start state;
/// the pattern with the largest `Σ |⟨z, p⟩|²` over streams decides the bit.
/// The unknown channel phase drops out of the magnitude. A one-bit window is
/// the differential test `Re(z1 · conj z2)` between the two half-bits.
pub fn linecode_correlate_decode(
    streams: &[SampleWaveform],
    kind: LineCodeKind,
    timing: &BitTiming,
    window: usize,
) -> Result<BitBlock> {
    let states = match kind {
        LineCodeKind::Fm0 => 2,
        LineCodeKind::Mms { .. } => 4,
        _ => return Err(Error::UnsupportedKind("differential detection needs FM0 or MMS")),
    };
    if window == 0 || window > 12 {
        return Err(Error::InvalidReceiver("pattern window must be 1 to 12 bits"));
    }
    let n = timing.bits;
    let half = timing.bit_duration / 2.0;
    let z: Vec<Vec<Complex64>> = streams
        .iter()
        .map(|w| {
            (0..2 * n)
                .map(|k| {
                    let t0 = timing.start + k as f64 * half;
                    w.mean_over(t0, t0 + half)
                })
                .collect()
        })
        .collect();
    let step = |s: usize, b: u8| -> (Level, Level, usize) {
        let level = if s & 1 == 0 { H } else { L };
        match kind {
            LineCodeKind::Fm0 => {
                let first = !level;
                let second = if b == 1 { first } else { !first };
                (first, second, usize::from(second == L))
            }
            _ => {
                let (first, second) = miller_step(level, (s >> 1) as u8, b);
                (first, second, usize::from(second == L) | (usize::from(b) << 1))
            }
        }
    };
    let w = window.min(n.max(1));
    let mut bits = Vec::with_capacity(n);
    let mut acc = vec![Complex64::new(0.0, 0.0); z.len()];
    for i in 0..n {
        let lo = i.saturating_sub((w - 1) / 2).min(n.saturating_sub(w));
        let centre = i - lo;
        let mut best = [f64::NEG_INFINITY; 2];
        for s0 in 0..states {
            for pat in 0..1usize << w {
                let mut s = s0;
                let mut metric = 0.0;
                acc.fill(Complex64::new(0.0, 0.0));
                for j in 0..w {
                    let b = ((pat >> (w - 1 - j)) & 1) as u8;
                    let (first, second, next) = step(s, b);
                    s = next;
                    let k = 2 * (lo + j);
                    for (a, zs) in acc.iter_mut().zip(&z) {
                        *a += zs[k] * first.sign() + zs[k + 1] * second.sign();
                    }
                }
                for a in &acc {
                    metric += a.norm_sqr();
                }
                let b = (pat >> (w - 1 - centre)) & 1;
                if metric > best[b] {
                    best[b] = metric;
                }
            }
        }
        bits.push(u8::from(best[1] > best[0]));
    }
    BitBlock::new(bits, BlockRole::Coded)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn msg(bits: &[u8]) -> BitBlock {
        BitBlock::message(bits.to_vec()).unwrap()
    }

    fn random_bits(rng: &mut impl Rng, n: usize) -> Vec<u8> {
        (0..n).map(|_| rng.random_range(0..2)).collect()
    }

    /// Level of a Miller-coded signal at every half-bit, from the textbook
    /// rule: a transition mid-bit for 1, at the boundary between two 0s.
    fn miller_oracle(bits: &[u8]) -> Vec<Level> {
        let mut out = Vec::new();
        let mut level = H;
        for (i, &b) in bits.iter().enumerate() {
            if i > 0 && b == 0 && bits[i - 1] == 0 {
                level = !level;
            }
            out.push(level);
            if b == 1 {
                level = !level;
            }
            out.push(level);
        }
        out
    }

    #[test]
    fn pie_shapes() {
        let z = pie_encode(&msg(&[0]), 1.0).unwrap();
        assert_eq!(z.chips(), &[H, L]);
        assert_eq!(pie_encode(&msg(&[1]), 1.0).unwrap().chips(), &[H, H, H, L]);
        let s = pie_encode(&msg(&[0, 1, 0]), 2.0).unwrap();
        assert!((s.duration() - 8.0).abs() < 1e-12, "4 Tari");
        assert_eq!(decode_chips(s.chips(), LineCodeKind::Pie).unwrap().bits(), &[0, 1, 0]);
    }

    #[test]
    fn manchester_shapes_and_exhaustive_round_trip() {
        assert_eq!(manchester_encode(&msg(&[0, 1])).unwrap().chips(), &[H, L, L, H]);
        for m in 0u32..1 << 16 {
            let bits: Vec<u8> = (0..16).map(|i| ((m >> (15 - i)) & 1) as u8).collect();
            let c = manchester_encode(&msg(&bits)).unwrap();
            assert!(c.chips().chunks(2).all(|p| p[0] != p[1]));
            assert_eq!(decode_chips(c.chips(), LineCodeKind::Manchester).unwrap().bits(), &bits[..]);
        }
        assert_eq!(
            decode_chips(&[H, L, H, H], LineCodeKind::Manchester),
            Err(Error::ManchesterViolation(1))
        );
    }

    #[test]
    fn fm0_rules() {
        assert_eq!(fm0_encode(&msg(&[1, 1]), H).unwrap().chips(), &[L, L, H, H]);
        assert_eq!(fm0_encode(&msg(&[0]), H).unwrap().chips(), &[L, H]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..500 {
            let bits = random_bits(&mut rng, 12);
            let c = fm0_encode(&msg(&bits), H).unwrap();
            let ch = c.chips();
            assert_ne!(ch[0], H, "boundary inversion before the first bit");
            for (i, &b) in bits.iter().enumerate() {
                if i > 0 {
                    assert_ne!(ch[2 * i - 1], ch[2 * i]);
                }
                assert_eq!(ch[2 * i] != ch[2 * i + 1], b == 0);
            }
            if seen.insert(bits.clone()) {
                assert_eq!(decode_chips(ch, LineCodeKind::Fm0).unwrap().bits(), &bits[..]);
            }
        }
    }

    #[test]
    fn mms_matches_chip_product_oracle() {
        assert_eq!(mms_encode(&msg(&[1]), 2).unwrap().chips(), &[H, L, L, H]);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for m in [2, 4, 8] {
            for _ in 0..200 {
                let bits = random_bits(&mut rng, 20);
                let c = mms_encode(&msg(&bits), m).unwrap();
                assert_eq!(c.len(), 2 * m * bits.len());
                let base = miller_oracle(&bits);
                let sc = subcarrier(m);
                for (i, &chip) in c.chips().iter().enumerate() {
                    let bit = i / (2 * m);
                    let half = (i % (2 * m)) / m;
                    // removing the subcarrier leaves baseband Miller
                    assert_eq!(chip.mul(sc[i % (2 * m)]), base[2 * bit + half]);
                }
                assert_eq!(decode_chips(c.chips(), LineCodeKind::Mms { m }).unwrap().bits(), &bits[..]);
            }
        }
        assert_eq!(mms_encode(&msg(&[1]), 3), Err(Error::InvalidM(3)));
    }

    #[test]
    fn miller_double_zero_inverts_only_at_boundary() {
        let c = mms_encode(&msg(&[0, 0]), 2).unwrap();
        let base: Vec<Level> = c.chips().iter().zip(subcarrier(2).iter().cycle()).map(|(a, b)| a.mul(*b)).collect();
        assert_eq!(base, [H, H, H, H, L, L, L, L]);
    }

    #[test]
    fn mms_subcarrier_peak_is_m_over_t() {
        // Constant input: the spectrum peak sits at m cycles per bit.
        let bits = msg(&[1; 32]);
        for m in [2, 4, 8] {
            let c = mms_encode(&bits, m).unwrap();
            let x: Vec<crate::Complex64> = c.chips().iter().map(|l| crate::Complex64::new(l.sign(), 0.0)).collect();
            let fs = (2 * m) as f64;
            let mags: Vec<f64> = (1..4 * m).map(|k| crate::fft::tone_magnitude(&x, k as f64 * 0.25, fs)).collect();
            let peak = mags.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0 + 1;
            let f = peak as f64 * 0.25;
            assert!((f - m as f64).abs() <= 0.5, "m={m} peak at {f}");
        }
    }

    #[test]
    fn enhanced_manchester_is_manchester_per_subcarrier_cycle() {
        let c = enhanced_manchester_encode(&msg(&[0, 1]), 2).unwrap();
        assert_eq!(c.chips(), &[H, L, H, L, L, H, L, H]);
        let per_cycle: Vec<u8> = c.chips().chunks(2).map(|p| if p == [H, L] { 0 } else { 1 }).collect();
        assert_eq!(per_cycle, [0, 0, 1, 1]);
    }

    #[test]
    fn uniform_lengths() {
        let bits = msg(&[1, 0, 0, 1, 1]);
        for kind in [
            LineCodeKind::Manchester,
            LineCodeKind::Fm0,
            LineCodeKind::Mms { m: 4 },
            LineCodeKind::EnhancedManchester { m: 8 },
        ] {
            let c = encode(&bits, kind).unwrap();
            assert_eq!(c.len(), kind.chips_per_bit().unwrap() * bits.len());
            assert!((c.duration() - 5.0).abs() < 1e-12);
        }
    }

    #[test]
    fn soft_decoder_recovers_noiseless_metrics() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for kind in [LineCodeKind::Fm0, LineCodeKind::Mms { m: 2 }, LineCodeKind::Mms { m: 4 }] {
            let t = LineTrellis::new(kind).unwrap();
            for _ in 0..100 {
                let bits = random_bits(&mut rng, 40);
                let chips = encode(&msg(&bits), kind).unwrap();
                assert_eq!(t.path_chips(&bits), chips.chips());
                let metrics: Vec<f64> = chips
                    .chips()
                    .chunks(t.chips_per_bit())
                    .flat_map(|c| {
                        t.patterns()
                            .iter()
                            .map(|p| p.iter().zip(c).map(|(a, b)| a.sign() * b.sign()).sum::<f64>())
                            .collect::<Vec<_>>()
                    })
                    .collect();
                let llr = linecode_soft_decode(&metrics, &t).unwrap();
                assert_eq!(llr.hard_decisions(), bits);
                assert!(llr.llrs().iter().all(|l| l.abs() > 0.0));
            }
        }
    }

    #[test]
    fn soft_decoder_checks_length() {
        let t = LineTrellis::new(LineCodeKind::Fm0).unwrap();
        let p = t.patterns().len();
        assert!(linecode_soft_decode(&vec![0.0; p + 1], &t).is_err());
        assert!(LineTrellis::new(LineCodeKind::Pie).is_err());
    }

    fn envelope(chips: &[Level], spc: usize, phase: f64, strip_sub: Option<usize>) -> SampleWaveform {
        let h = crate::Complex64::from_polar(0.7, phase);
        let samples = chips
            .iter()
            .enumerate()
            .flat_map(|(i, l)| {
                let s = strip_sub.map_or(1.0, |m| if (i % (2 * m)) % 2 == 0 { 1.0 } else { -1.0 });
                core::iter::repeat(h * (l.sign() * s)).take(spc)
            })
            .collect();
        SampleWaveform::new(samples, spc as f64 * chips.len() as f64)
    }

    fn noisy_halves(rng: &mut ChaCha8Rng, halves: &[f64], sd: f64) -> SampleWaveform {
        let h = crate::Complex64::from_polar(1.0, rng.random_range(0.0..6.28));
        let s = halves
            .iter()
            .map(|&v| h * v + crate::Complex64::new(sd * (rng.random::<f64>() - 0.5), sd * (rng.random::<f64>() - 0.5)))
            .collect();
        SampleWaveform::new(s, 2.0)
    }

    #[test]
    fn one_bit_window_is_half_bit_differential() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for kind in [LineCodeKind::Fm0, LineCodeKind::Mms { m: 2 }] {
            let flat = if kind == LineCodeKind::Fm0 { 1 } else { 0 };
            for _ in 0..50 {
                let halves: Vec<f64> = (0..80).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
                let w = noisy_halves(&mut rng, &halves, 3.0);
                let timing = BitTiming {
                    start: 0.0,
                    bit_duration: 1.0,
                    bits: 40,
                };
                let out = linecode_correlate_decode(&[w.clone()], kind, &timing, 1).unwrap();
                let expect: Vec<u8> = w
                    .samples
                    .chunks(2)
                    .map(|p| if (p[0] * p[1].conj()).re >= 0.0 { flat } else { 1 - flat })
                    .collect();
                assert_eq!(out.bits(), &expect[..]);
            }
        }
    }

    #[test]
    fn wider_windows_make_fewer_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for kind in [LineCodeKind::Fm0, LineCodeKind::Mms { m: 2 }] {
            let mut errs = [0usize; 2];
            for _ in 0..200 {
                let bits = random_bits(&mut rng, 64);
                let c = encode(&msg(&bits), kind).unwrap();
                let m = kind.subcarrier_cycles().unwrap_or(1);
                let per = 2 * m;
                let halves: Vec<f64> = c
                    .chips()
                    .chunks(m)
                    .enumerate()
                    .map(|(i, ch)| {
                        let sc = if kind == LineCodeKind::Fm0 { H } else { subcarrier(m)[(i * m) % per] };
                        ch[0].mul(sc).sign()
                    })
                    .collect();
                let w = noisy_halves(&mut rng, &halves, 2.4);
                let timing = BitTiming {
                    start: 0.0,
                    bit_duration: 1.0,
                    bits: 64,
                };
                for (e, win) in errs.iter_mut().zip([1, 5]) {
                    let out = linecode_correlate_decode(&[w.clone()], kind, &timing, win).unwrap();
                    *e += out.bits().iter().zip(&bits).filter(|(a, b)| a != b).count();
                }
            }
            assert!(errs[1] * 10 < errs[0] * 8, "{kind:?} {errs:?}");
        }
    }

    #[test]
    fn differential_correlation_noiseless() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for (kind, window) in [LineCodeKind::Fm0, LineCodeKind::Mms { m: 2 }].into_iter().flat_map(|k| [(k, 1), (k, 3), (k, 4)]) {
            let bits = random_bits(&mut rng, 64);
            let c = encode(&msg(&bits), kind).unwrap();
            let w = envelope(c.chips(), 3, 1.1, kind.subcarrier_cycles());
            let timing = BitTiming {
                start: 0.0,
                bit_duration: w.duration() / 64.0,
                bits: 64,
            };
            let out = linecode_correlate_decode(&[w], kind, &timing, window).unwrap();
            assert_eq!(out.bits(), &bits[..], "{kind:?}");
        }
        let w = SampleWaveform::new(vec![crate::Complex64::new(1.0, 0.0); 4], 4.0);
        let t = BitTiming {
            start: 0.0,
            bit_duration: 1.0,
            bits: 1,
        };
        assert!(matches!(
            linecode_correlate_decode(&[w], LineCodeKind::Manchester, &t, 1),
            Err(Error::UnsupportedKind(_))
        ));
    }
}
