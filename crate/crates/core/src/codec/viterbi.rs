use alloc::vec;
use alloc::vec::Vec;

use super::conv::{cc_encode, deinterleave_swept, ConvEncoder, NestedCcConfig, Termination};
use crate::{BitBlock, BlockRole, Error, LlrBlock, Result};

/// How tail-biting codewords are searched.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailBitingSearch {
    /// Circular Viterbi: the block is extended by `overlap` sections on each
    /// side (wrapped copies) and decoded from flat metrics; the middle decisions
    /// fix a start state, which one constrained pass then searches exactly.
    /// `None` uses eight times the code memory.
    WrapAround { overlap: Option<usize> },
    /// One constrained Viterbi run per start state (exact ML, 2^(K−1) times the work).
    Exhaustive,
}

impl Default for TailBitingSearch {
    fn default() -> Self {
        TailBitingSearch::WrapAround { overlap: None }
    }
}

pub enum DecoderInput<'a> {
    Soft(&'a LlrBlock),
    Hard(&'a BitBlock),
}

/// Viterbi decoder for a nested convolutional code.
#[derive(Debug, Clone)]
pub struct ViterbiDecoder {
    cfg: NestedCcConfig,
    search: TailBitingSearch,
    /// Output word for (state, input), indexed `state * 2 + input`.
    outputs: Vec<u32>,
}

impl ViterbiDecoder {
    pub fn new(cfg: NestedCcConfig) -> Self {
        let outputs = (0..cfg.state_count())
            .flat_map(|s| [cfg.output_word(s, 0), cfg.output_word(s, 1)])
            .collect();
        Self {
            cfg,
            search: TailBitingSearch::default(),
            outputs,
        }
    }

    pub fn with_search(mut self, search: TailBitingSearch) -> Self {
        self.search = search;
        self
    }

    pub fn config(&self) -> &NestedCcConfig {
        &self.cfg
    }

    pub fn state_count(&self) -> usize {
        self.cfg.state_count()
    }

    /// Decode soft or hard input. With `interleaved` the input is in swept
    /// (polynomial-major) order and is de-permuted first.
    ///
    /// The returned metric is the correlation `Σ ±LLR` of the decoded codeword
    /// for soft input and its Hamming distance to the input for hard input.
    pub fn decode(&self, input: DecoderInput<'_>, interleaved: bool) -> Result<(BitBlock, f64)> {
        let (mut llrs, hard) = match input {
            DecoderInput::Soft(l) => (l.llrs().to_vec(), false),
            DecoderInput::Hard(b) => (
                b.bits()
                    .iter()
                    .map(|&x| if x == 0 { 1.0 } else { -1.0 })
                    .collect::<Vec<_>>(),
                true,
            ),
        };
        let msg_len = self
            .cfg
            .message_len(llrs.len())
            .ok_or(Error::LengthMismatch {
                expected: self.cfg.codeword_len(llrs.len() / self.cfg.n()),
                got: llrs.len(),
            })?;
        if interleaved {
            llrs = deinterleave_swept(&llrs, self.cfg.n());
        }
        let bits = self.decode_llrs(&llrs, msg_len);
        let message = BitBlock::new(bits, BlockRole::Message)?;
        let codeword = cc_encode(&message, &self.cfg)?;
        let corr: f64 = codeword
            .bits()
            .iter()
            .zip(&llrs)
            .map(|(&c, &l)| if c == 0 { l } else { -l })
            .sum();
        let metric = if hard {
            (llrs.len() as f64 - corr) / 2.0
        } else {
            corr
        };
        Ok((message, metric))
    }

    /// Maximum-likelihood message bits for interlaced LLRs.
    pub fn decode_llrs(&self, llrs: &[f64], msg_len: usize) -> Vec<u8> {
        let steps = self.cfg.steps(msg_len);
        let states = self.state_count();
        match self.cfg.termination() {
            Termination::ZeroTail => {
                let mut init = vec![f64::NEG_INFINITY; states];
                init[0] = 0.0;
                let (_, decisions) = self.forward(llrs, steps, &init);
                let mut bits = self.traceback(&decisions, 0);
                bits.truncate(msg_len);
                bits
            }
            Termination::TailBiting => match self.search {
                TailBitingSearch::WrapAround { overlap } => {
                    let d = overlap.unwrap_or(8 * self.cfg.memory());
                    let sections: Vec<usize> = (0..steps + 2 * d)
                        .map(|j| (j + steps * (d / steps + 1) - d) % steps)
                        .collect();
                    let (fin, decisions) = self.forward_sections(llrs, &sections, &vec![0.0; states]);
                    let bits = self.traceback(&decisions, argmax(&fin));
                    // best tail-biting path through the state those bits imply
                    let s0 = ConvEncoder::tail_biting_state(&self.cfg, &bits[d..d + steps]);
                    let mut init = vec![f64::NEG_INFINITY; states];
                    init[s0] = 0.0;
                    let (_, decisions) = self.forward(llrs, steps, &init);
                    self.traceback(&decisions, s0)
                }
                TailBitingSearch::Exhaustive => {
                    let mut best: Option<(f64, usize, Vec<u64>)> = None;
                    for s0 in 0..states {
                        let mut init = vec![f64::NEG_INFINITY; states];
                        init[s0] = 0.0;
                        let (fin, decisions) = self.forward(llrs, steps, &init);
                        if best.as_ref().map_or(true, |(m, _, _)| fin[s0] > *m) {
                            best = Some((fin[s0], s0, decisions));
                        }
                    }
                    let (_, s0, decisions) = best.expect("at least one state");
                    self.traceback(&decisions, s0)
                }
            },
        }
    }

    /// Add-compare-select over `steps` trellis sections. Returns the final
    /// metrics and, per step, a bitmask of the chosen predecessor low bit.
    fn forward(&self, llrs: &[f64], steps: usize, init: &[f64]) -> (Vec<f64>, Vec<u64>) {
        let sections: Vec<usize> = (0..steps).collect();
        self.forward_sections(llrs, &sections, init)
    }

    /// Same over an arbitrary sequence of trellis sections.
    fn forward_sections(&self, llrs: &[f64], sections: &[usize], init: &[f64]) -> (Vec<f64>, Vec<u64>) {
        let n = self.cfg.n();
        let states = self.state_count();
        let mem = self.cfg.memory();
        let mut metrics = init.to_vec();
        let mut next = vec![0.0; states];
        let mut branch = vec![0.0; 1 << n];
        let mut decisions = Vec::with_capacity(sections.len());
        for &t in sections {
            let l = &llrs[t * n..(t + 1) * n];
            // branch[w] = Σ_i ±l_i, minus sign where word bit i is 1
            branch[0] = l.iter().sum();
            for w in 1..branch.len() {
                let j = w.trailing_zeros() as usize;
                branch[w] = branch[w & (w - 1)] - 2.0 * l[j];
            }
            let mut mask = 0u64;
            for (s_next, slot) in next.iter_mut().enumerate() {
                let input = s_next >> (mem - 1);
                let p0 = (s_next << 1) & (states - 1);
                let p1 = p0 | 1;
                let m0 = metrics[p0] + branch[self.outputs[p0 * 2 + input] as usize];
                let m1 = metrics[p1] + branch[self.outputs[p1 * 2 + input] as usize];
                if m1 > m0 {
                    *slot = m1;
                    mask |= 1 << s_next;
                } else {
                    *slot = m0;
                }
            }
            core::mem::swap(&mut metrics, &mut next);
            decisions.push(mask);
        }
        (metrics, decisions)
    }

    fn traceback(&self, decisions: &[u64], end_state: usize) -> Vec<u8> {
        let mem = self.cfg.memory();
        let states = self.state_count();
        let mut bits = vec![0u8; decisions.len()];
        let mut s = end_state;
        for (t, mask) in decisions.iter().enumerate().rev() {
            bits[t] = (s >> (mem - 1)) as u8;
            s = ((s << 1) & (states - 1)) | ((mask >> s) & 1) as usize;
        }
        bits
    }
}

/// First index of the maximum (lowest state wins ties).
fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Convenience wrapper around [`ViterbiDecoder::decode`].
pub fn viterbi_decode(
    input: DecoderInput<'_>,
    cfg: &NestedCcConfig,
    interleaved: bool,
) -> Result<(BitBlock, f64)> {
    ViterbiDecoder::new(cfg.clone()).decode(input, interleaved)
}
