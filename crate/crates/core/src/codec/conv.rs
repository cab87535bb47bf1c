use alloc::vec::Vec;

use crate::{BitBlock, BlockRole, Error, Result};

const K7_PREFIX: [u32; 3] = [0o133, 0o171, 0o165];
const K7_FOURTH: [u32; 3] = [0o117, 0o127, 0o137];
const K6_SETS: [[u32; 6]; 3] = [
    [0o45, 0o73, 0o75, 0o67, 0o57, 0o55],
    [0o55, 0o67, 0o77, 0o51, 0o53, 0o73],
    [0o77, 0o73, 0o55, 0o45, 0o67, 0o65],
];

/// Which of the searched nested polynomial sets to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolyOption {
    A,
    B,
    C,
}

impl PolyOption {
    fn index(self) -> usize {
        match self {
            PolyOption::A => 0,
            PolyOption::B => 1,
            PolyOption::C => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Termination {
    /// Start in state 0 and flush with K−1 zeros.
    ZeroTail,
    /// Start in the state given by the last K−1 message bits.
    TailBiting,
}

/// Parse an octal generator string such as `"133"`.
pub fn parse_octal(s: &str) -> Result<u32> {
    u32::from_str_radix(s.trim().trim_start_matches("0o"), 8)
        .map_err(|_| Error::InvalidPolynomial("not an octal generator"))
}

/// A convolutional code drawn from a nested polynomial set.
///
/// Generator bit K−1 (the leftmost octal digit's top bit) taps the newest
/// input bit, as in the LTE code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NestedCcConfig {
    constraint_length: usize,
    polys: Vec<u32>,
    option: Option<PolyOption>,
    rate_index: usize,
    termination: Termination,
}

impl NestedCcConfig {
    /// One of the searched nested sets: K=7 gives rates 1/2..1/4, K=6 rates 1/2..1/6.
    pub fn nested(
        constraint_length: usize,
        option: PolyOption,
        rate_index: usize,
        termination: Termination,
    ) -> Result<Self> {
        let polys = match constraint_length {
            7 => {
                let mut p = K7_PREFIX.to_vec();
                p.push(K7_FOURTH[option.index()]);
                p
            }
            6 => K6_SETS[option.index()].to_vec(),
            _ => return Err(Error::InvalidConfig("constraint length must be 6 or 7")),
        };
        Self::build(constraint_length, polys, Some(option), rate_index, termination)
    }

    /// Arbitrary generator list, e.g. `["133", "171"]`; all generators are used.
    pub fn custom(
        constraint_length: usize,
        polys_octal: &[&str],
        termination: Termination,
    ) -> Result<Self> {
        let polys = polys_octal
            .iter()
            .map(|s| parse_octal(s))
            .collect::<Result<Vec<_>>>()?;
        let n = polys.len();
        Self::build(constraint_length, polys, None, n, termination)
    }

    fn build(
        constraint_length: usize,
        polys: Vec<u32>,
        option: Option<PolyOption>,
        rate_index: usize,
        termination: Termination,
    ) -> Result<Self> {
        if !(2..=16).contains(&constraint_length) {
            return Err(Error::InvalidConfig("constraint length out of range"));
        }
        if rate_index < 2 || rate_index > polys.len() {
            return Err(Error::InvalidConfig("rate index must be within 2..=number of generators"));
        }
        if polys.iter().any(|&p| p >> (constraint_length - 1) != 1) {
            return Err(Error::InvalidPolynomial("generator must have exactly K bits with the top bit set"));
        }
        Ok(Self {
            constraint_length,
            polys,
            option,
            rate_index,
            termination,
        })
    }

    pub fn with_rate_index(mut self, rate_index: usize) -> Result<Self> {
        if rate_index < 2 || rate_index > self.polys.len() {
            return Err(Error::InvalidConfig("rate index must be within 2..=number of generators"));
        }
        self.rate_index = rate_index;
        Ok(self)
    }

    pub fn with_termination(mut self, termination: Termination) -> Self {
        self.termination = termination;
        self
    }

    pub fn constraint_length(&self) -> usize {
        self.constraint_length
    }

    /// Number of active generators (code rate 1/n).
    pub fn n(&self) -> usize {
        self.rate_index
    }

    /// The whole nested set.
    pub fn polys(&self) -> &[u32] {
        &self.polys
    }

    /// The generators in use.
    pub fn generators(&self) -> &[u32] {
        &self.polys[..self.rate_index]
    }

    pub fn option(&self) -> Option<PolyOption> {
        self.option
    }

    pub fn termination(&self) -> Termination {
        self.termination
    }

    pub fn memory(&self) -> usize {
        self.constraint_length - 1
    }

    /// Trellis states, 2^(K−1).
    pub fn state_count(&self) -> usize {
        1 << self.memory()
    }

    /// Trellis steps for a message of `msg_len` bits.
    pub fn steps(&self, msg_len: usize) -> usize {
        match self.termination {
            Termination::ZeroTail => msg_len + self.memory(),
            Termination::TailBiting => msg_len,
        }
    }

    pub fn codeword_len(&self, msg_len: usize) -> usize {
        self.n() * self.steps(msg_len)
    }

    /// Inverse of [`codeword_len`](Self::codeword_len), if the length is valid.
    pub fn message_len(&self, codeword_len: usize) -> Option<usize> {
        if codeword_len % self.n() != 0 {
            return None;
        }
        let steps = codeword_len / self.n();
        match self.termination {
            Termination::ZeroTail => steps.checked_sub(self.memory()).filter(|&m| m > 0),
            Termination::TailBiting => (steps >= self.memory() && steps > 0).then_some(steps),
        }
    }

    /// Output word (bit i = generator i) when `input` enters a register in `state`.
    pub(crate) fn output_word(&self, state: usize, input: u8) -> u32 {
        let reg = ((input as u32) << self.memory()) | state as u32;
        self.generators()
            .iter()
            .enumerate()
            .fold(0, |w, (i, &g)| w | (((reg & g).count_ones() & 1) << i))
    }
}

/// Shift-register encoder. The state keeps the most recent input in bit K−2.
#[derive(Debug, Clone)]
pub struct ConvEncoder<'a> {
    cfg: &'a NestedCcConfig,
    state: usize,
}

impl<'a> ConvEncoder<'a> {
    pub fn new(cfg: &'a NestedCcConfig, state: usize) -> Self {
        Self {
            cfg,
            state: state & (cfg.state_count() - 1),
        }
    }

    /// Register state a tail-biting encoder starts (and ends) in.
    pub fn tail_biting_state(cfg: &NestedCcConfig, msg: &[u8]) -> usize {
        let m = cfg.memory();
        msg[msg.len() - m..]
            .iter()
            .fold(0, |s, &b| (s >> 1) | ((b as usize) << (m - 1)))
    }

    pub fn state(&self) -> usize {
        self.state
    }

    /// Shift one bit in and return the output word (bit i = generator i).
    pub fn push(&mut self, bit: u8) -> u32 {
        let word = self.cfg.output_word(self.state, bit);
        self.state = ((self.state >> 1) | ((bit as usize) << (self.cfg.memory() - 1)))
            & (self.cfg.state_count() - 1);
        word
    }
}

fn check_message(msg: &BitBlock, cfg: &NestedCcConfig) -> Result<()> {
    msg.expect_role(&[BlockRole::Message, BlockRole::MessageWithCrc], "message")?;
    if cfg.termination() == Termination::TailBiting && msg.len() < cfg.memory() {
        return Err(Error::MessageTooShort {
            len: msg.len(),
            needed: cfg.memory(),
        });
    }
    Ok(())
}

/// Output words of the encoder, one per trellis step.
fn encode_words(msg: &[u8], cfg: &NestedCcConfig) -> Vec<u32> {
    let start = match cfg.termination() {
        Termination::ZeroTail => 0,
        Termination::TailBiting => ConvEncoder::tail_biting_state(cfg, msg),
    };
    let mut enc = ConvEncoder::new(cfg, start);
    let flush = match cfg.termination() {
        Termination::ZeroTail => cfg.memory(),
        Termination::TailBiting => 0,
    };
    msg.iter()
        .copied()
        .chain(core::iter::repeat(0).take(flush))
        .map(|b| enc.push(b))
        .collect()
}

/// Encode with interlaced output: for each input bit, generators 1..n in order.
pub fn cc_encode(msg: &BitBlock, cfg: &NestedCcConfig) -> Result<BitBlock> {
    check_message(msg, cfg)?;
    let n = cfg.n();
    let bits = encode_words(msg.bits(), cfg)
        .into_iter()
        .flat_map(|w| (0..n).map(move |i| ((w >> i) & 1) as u8))
        .collect();
    BitBlock::new(bits, BlockRole::Coded)
}

/// Polynomial-sweep encoding: n passes over the message, pass i with only
/// generator i active. The output is a fixed permutation of [`cc_encode`].
pub fn cc_encode_swept(msg: &BitBlock, cfg: &NestedCcConfig) -> Result<BitBlock> {
    check_message(msg, cfg)?;
    let n = cfg.n();
    let mut bits = Vec::with_capacity(cfg.codeword_len(msg.len()));
    for i in 0..n {
        let single = NestedCcConfig {
            polys: alloc::vec![cfg.generators()[i], cfg.generators()[i]],
            option: None,
            rate_index: 2,
            ..cfg.clone()
        };
        bits.extend(encode_words(msg.bits(), &single).into_iter().map(|w| (w & 1) as u8));
    }
    BitBlock::new(bits, BlockRole::Coded)
}

/// Swept (polynomial-major) order back to interlaced order: stream `i`, bit
/// `j` moves to position `j·n + i`.
pub fn deinterleave_swept<T: Copy>(swept: &[T], n: usize) -> Vec<T> {
    let steps = swept.len() / n;
    (0..swept.len())
        .map(|p| swept[(p % n) * steps + p / n])
        .collect()
}

/// Interlaced order to swept order.
pub fn interleave_swept<T: Copy>(interlaced: &[T], n: usize) -> Vec<T> {
    let steps = interlaced.len() / n;
    (0..interlaced.len())
        .map(|q| interlaced[(q % steps) * n + q / steps])
        .collect()
}
