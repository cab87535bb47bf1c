use alloc::vec::Vec;

use crate::{Error, Result};

/// Where a block sits in the coding chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockRole {
    Message,
    MessageWithCrc,
    Coded,
}

impl BlockRole {
    pub(crate) fn name(self) -> &'static str {
        match self {
            BlockRole::Message => "message",
            BlockRole::MessageWithCrc => "message-with-CRC",
            BlockRole::Coded => "coded",
        }
    }
}

/// A non-empty sequence of bits (one `u8` per bit, values 0 or 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitBlock {
    bits: Vec<u8>,
    role: BlockRole,
}

impl BitBlock {
    pub fn new(bits: Vec<u8>, role: BlockRole) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::EmptyBlock);
        }
        if let Some(&b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidBit(b));
        }
        Ok(Self { bits, role })
    }

    pub fn message(bits: Vec<u8>) -> Result<Self> {
        Self::new(bits, BlockRole::Message)
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn into_bits(self) -> Vec<u8> {
        self.bits
    }

    pub fn role(&self) -> BlockRole {
        self.role
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub(crate) fn expect_role(&self, allowed: &[BlockRole], expected: &'static str) -> Result<()> {
        if allowed.contains(&self.role) {
            Ok(())
        } else {
            Err(Error::WrongRole {
                expected,
                got: self.role.name(),
            })
        }
    }
}

/// Soft decisions for coded bits. Positive values favour bit 0.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrBlock {
    llrs: Vec<f64>,
    scale: f64,
}

impl LlrBlock {
    /// `scale` records the noise normalisation the LLRs were computed with.
    pub fn new(llrs: Vec<f64>, scale: f64) -> Result<Self> {
        if llrs.is_empty() {
            return Err(Error::EmptyBlock);
        }
        if llrs.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("LLRs must be finite"));
        }
        Ok(Self { llrs, scale })
    }

    /// Noise-free LLRs of fixed magnitude for a known bit sequence.
    pub fn from_bits(bits: &[u8], magnitude: f64) -> Result<Self> {
        Self::new(
            bits.iter()
                .map(|&b| if b == 0 { magnitude } else { -magnitude })
                .collect(),
            1.0,
        )
    }

    pub fn llrs(&self) -> &[f64] {
        &self.llrs
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.llrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.llrs.is_empty()
    }

    pub fn hard_decisions(&self) -> Vec<u8> {
        self.llrs.iter().map(|&l| u8::from(l < 0.0)).collect()
    }
}
