use alloc::vec::Vec;
use core::fmt;

use crate::{BitBlock, BlockRole, Error, Result};

/// CRC lengths the nested generator supports.
pub const CRC_LENGTHS: [usize; 3] = [6, 11, 16];

/// Polynomial over GF(2); bit `i` of the mask is the coefficient of `x^i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Gf2Poly(u32);

impl Gf2Poly {
    pub const fn from_mask(mask: u32) -> Self {
        Self(mask)
    }

    pub fn from_exponents(exponents: &[u32]) -> Self {
        Self(exponents.iter().fold(0, |m, &e| m | (1 << e)))
    }

    /// Parse a degree-descending hex coefficient string such as `0x10861`.
    pub fn from_hex(s: &str) -> Result<Self> {
        let digits = s
            .trim()
            .trim_start_matches("0x")
            .trim_start_matches("0X");
        u32::from_str_radix(digits, 16)
            .map(Self)
            .map_err(|_| Error::InvalidPolynomial("not a hex coefficient string"))
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    pub fn degree(self) -> Option<u32> {
        (self.0 != 0).then(|| 31 - self.0.leading_zeros())
    }

    /// Coefficients from the highest degree down to the constant term.
    pub fn coefficients(self) -> Vec<u8> {
        match self.degree() {
            None => Vec::from([0]),
            Some(d) => (0..=d).rev().map(|i| ((self.0 >> i) & 1) as u8).collect(),
        }
    }

    fn constant_term(self) -> bool {
        self.0 & 1 == 1
    }
}

impl fmt::Display for Gf2Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Some(d) = self.degree() else {
            return f.write_str("0");
        };
        let mut first = true;
        for i in (0..=d).rev().filter(|&i| (self.0 >> i) & 1 == 1) {
            if !first {
                f.write_str("+")?;
            }
            first = false;
            match i {
                0 => f.write_str("1")?,
                1 => f.write_str("x")?,
                _ => write!(f, "x^{i}")?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrcVariant {
    /// Extends the NR CRC-6 generator `x^6+x^5+1`.
    NrBased,
    /// Searched set with better CRC-16 detection.
    NewSearch,
}

/// A nested CRC: one degree-16 generator serving lengths 6, 11 and 16.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrcSpec {
    nested_poly: Gf2Poly,
    lengths: [usize; 3],
    variant: CrcVariant,
}

impl CrcSpec {
    pub fn new(variant: CrcVariant) -> Self {
        let nested_poly = match variant {
            CrcVariant::NrBased => Gf2Poly::from_exponents(&[16, 11, 6, 5, 0]),
            CrcVariant::NewSearch => Gf2Poly::from_exponents(&[16, 11, 6, 4, 3, 0]),
        };
        Self {
            nested_poly,
            lengths: CRC_LENGTHS,
            variant,
        }
    }

    pub fn nr_based() -> Self {
        Self::new(CrcVariant::NrBased)
    }

    pub fn new_search() -> Self {
        Self::new(CrcVariant::NewSearch)
    }

    /// Build a spec from a configured generator, validating every derived length.
    pub fn from_poly(nested_poly: Gf2Poly, variant: CrcVariant) -> Result<Self> {
        if nested_poly.degree() != Some(16) {
            return Err(Error::InvalidPolynomial("nested CRC generator must have degree 16"));
        }
        if !nested_poly.constant_term() {
            return Err(Error::InvalidPolynomial("CRC generator needs a constant term"));
        }
        let spec = Self {
            nested_poly,
            lengths: CRC_LENGTHS,
            variant,
        };
        for len in CRC_LENGTHS {
            let p = spec.derive(len)?;
            debug_assert_eq!(p.degree(), Some(len as u32));
            debug_assert!(p.constant_term());
        }
        Ok(spec)
    }

    pub fn nested_poly(&self) -> Gf2Poly {
        self.nested_poly
    }

    pub fn lengths(&self) -> &[usize] {
        &self.lengths
    }

    pub fn variant(&self) -> CrcVariant {
        self.variant
    }

    fn check_length(&self, length: usize) -> Result<()> {
        if self.lengths.contains(&length) {
            Ok(())
        } else {
            Err(Error::UnsupportedLength(length))
        }
    }

    /// Degree-`length` generator: the nested terms of degree ≤ `length`, with
    /// the leading term forced on.
    pub fn derive(&self, length: usize) -> Result<Gf2Poly> {
        self.check_length(length)?;
        let low = self.nested_poly.mask() & ((1u32 << length) - 1);
        Ok(Gf2Poly(low | (1 << length)))
    }
}

/// Remainder of `bits(x)·x^L mod poly` with a zero-initialised register, no
/// reflection and no final XOR. `bits[0]` is the highest-degree coefficient.
pub fn crc_remainder(bits: &[u8], poly: Gf2Poly) -> u32 {
    let len = poly.degree().expect("nonzero generator");
    let mask = (1u32 << len) - 1;
    let taps = poly.mask() & mask;
    let mut reg = 0u32;
    for &b in bits {
        let feedback = ((reg >> (len - 1)) & 1) ^ u32::from(b);
        reg = (reg << 1) & mask;
        if feedback == 1 {
            reg ^= taps;
        }
    }
    reg
}

pub fn crc_derive(spec: &CrcSpec, length: usize) -> Result<Gf2Poly> {
    spec.derive(length)
}

/// Append the `length`-bit CRC to a message block.
pub fn crc_attach(msg: &BitBlock, spec: &CrcSpec, length: usize) -> Result<BitBlock> {
    msg.expect_role(&[BlockRole::Message], "message")?;
    let poly = spec.derive(length)?;
    let rem = crc_remainder(msg.bits(), poly);
    let mut bits = Vec::with_capacity(msg.len() + length);
    bits.extend_from_slice(msg.bits());
    bits.extend((0..length).rev().map(|i| ((rem >> i) & 1) as u8));
    BitBlock::new(bits, BlockRole::MessageWithCrc)
}

/// True iff the trailing `length` bits match the CRC of the leading bits.
pub fn crc_check(block: &BitBlock, spec: &CrcSpec, length: usize) -> Result<bool> {
    block.expect_role(&[BlockRole::MessageWithCrc], "message-with-CRC")?;
    let poly = spec.derive(length)?;
    if block.len() <= length {
        return Err(Error::BlockTooShort {
            len: block.len(),
            crc_len: length,
        });
    }
    let (msg, tail) = block.bits().split_at(block.len() - length);
    let rem = crc_remainder(msg, poly);
    Ok(tail
        .iter()
        .enumerate()
        .all(|(i, &b)| ((rem >> (length - 1 - i)) & 1) as u8 == b))
}

/// Byte-at-a-time CRC engine, MSB first, for bulk Monte-Carlo checks.
#[derive(Clone)]
pub struct CrcTable {
    len: u32,
    width: u32,
    table: [u32; 256],
}

impl CrcTable {
    pub fn new(poly: Gf2Poly) -> Self {
        let len = poly.degree().expect("nonzero generator");
        // Register is left-aligned to at least 8 bits so short CRCs share the
        // byte-wise update.
        let width = len.max(8);
        let wmask = if width == 32 { u32::MAX } else { (1u32 << width) - 1 };
        let taps = (poly.mask() & ((1u32 << len) - 1)) << (width - len);
        let mut table = [0u32; 256];
        for (i, slot) in table.iter_mut().enumerate() {
            let mut reg = (i as u32) << (width - 8);
            for _ in 0..8 {
                let top = (reg >> (width - 1)) & 1;
                reg = (reg << 1) & wmask;
                if top == 1 {
                    reg ^= taps;
                }
            }
            *slot = reg;
        }
        Self { len, width, table }
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// CRC of a byte string whose bits are read MSB first.
    pub fn remainder(&self, bytes: &[u8]) -> u32 {
        let wmask = if self.width == 32 { u32::MAX } else { (1u32 << self.width) - 1 };
        let mut reg = 0u32;
        for &byte in bytes {
            let idx = ((reg >> (self.width - 8)) as u8 ^ byte) as usize;
            reg = ((reg << 8) & wmask) ^ self.table[idx];
        }
        reg >> (self.width - self.len)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Schoolbook long division over GF(2) on coefficient vectors.
    fn long_division_remainder(msg: &[u8], gen: &[u8]) -> Vec<u8> {
        let l = gen.len() - 1;
        let mut work: Vec<u8> = msg.to_vec();
        work.extend(core::iter::repeat(0).take(l));
        for i in 0..msg.len() {
            if work[i] == 1 {
                for (j, &g) in gen.iter().enumerate() {
                    work[i + j] ^= g;
                }
            }
        }
        work[msg.len()..].to_vec()
    }

    fn bits_of(rem: u32, len: usize) -> Vec<u8> {
        (0..len).rev().map(|i| ((rem >> i) & 1) as u8).collect()
    }

    #[test]
    fn derived_polynomials() {
        let nr = CrcSpec::nr_based();
        assert_eq!(nr.derive(6).unwrap(), Gf2Poly::from_exponents(&[6, 5, 0]));
        assert_eq!(nr.derive(11).unwrap(), Gf2Poly::from_exponents(&[11, 6, 5, 0]));
        assert_eq!(nr.derive(16).unwrap(), Gf2Poly::from_exponents(&[16, 11, 6, 5, 0]));
        let ns = CrcSpec::new_search();
        assert_eq!(ns.derive(6).unwrap(), Gf2Poly::from_exponents(&[6, 4, 3, 0]));
        assert_eq!(ns.derive(16).unwrap().mask(), 0x10859);
        assert_eq!(nr.derive(8), Err(Error::UnsupportedLength(8)));
    }

    #[test]
    fn hex_round_trip_and_display() {
        let p = Gf2Poly::from_hex("0x10861").unwrap();
        assert_eq!(p, CrcSpec::nr_based().nested_poly());
        assert_eq!(alloc::format!("{p}"), "x^16+x^11+x^6+x^5+1");
        assert!(CrcSpec::from_poly(Gf2Poly::from_hex("0x1086").unwrap(), CrcVariant::NrBased).is_err());
        assert!(CrcSpec::from_poly(p, CrcVariant::NrBased).is_ok());
    }

    #[test]
    fn zero_message_has_zero_crc() {
        let msg = BitBlock::message(vec![0; 8]).unwrap();
        for spec in [CrcSpec::nr_based(), CrcSpec::new_search()] {
            let out = crc_attach(&msg, &spec, 6).unwrap();
            assert_eq!(&out.bits()[8..], &[0; 6]);
        }
    }

    #[test]
    fn single_leading_one_matches_long_division() {
        // x^7 · x^6 = x^13 mod (x^6+x^5+1)
        let msg = BitBlock::message(vec![1, 0, 0, 0, 0, 0, 0, 0]).unwrap();
        let out = crc_attach(&msg, &CrcSpec::nr_based(), 6).unwrap();
        let expected = long_division_remainder(msg.bits(), &[1, 1, 0, 0, 0, 0, 1]);
        assert_eq!(&out.bits()[8..], expected.as_slice());
        assert_eq!(expected, vec![0, 1, 1, 1, 0, 1]);
    }

    #[test]
    fn random_128_bit_message_matches_long_division() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let bits: Vec<u8> = (0..128).map(|_| rng.random_range(0..2)).collect();
        for spec in [CrcSpec::nr_based(), CrcSpec::new_search()] {
            for len in CRC_LENGTHS {
                let gen = spec.derive(len).unwrap().coefficients();
                let expected = long_division_remainder(&bits, &gen);
                let got = crc_remainder(&bits, spec.derive(len).unwrap());
                assert_eq!(bits_of(got, len), expected, "{:?} L={len}", spec.variant());
            }
        }
    }

    #[test]
    fn table_engine_agrees_with_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for spec in [CrcSpec::nr_based(), CrcSpec::new_search()] {
            for len in CRC_LENGTHS {
                let poly = spec.derive(len).unwrap();
                let table = CrcTable::new(poly);
                for _ in 0..50 {
                    let bytes: Vec<u8> = (0..16).map(|_| rng.random()).collect();
                    let bits: Vec<u8> = bytes
                        .iter()
                        .flat_map(|&b| (0..8).rev().map(move |i| (b >> i) & 1))
                        .collect();
                    assert_eq!(table.remainder(&bytes), crc_remainder(&bits, poly));
                }
            }
        }
    }

    #[test]
    fn check_rejects_short_and_wrong_role() {
        let spec = CrcSpec::nr_based();
        let short = BitBlock::new(vec![1; 6], BlockRole::MessageWithCrc).unwrap();
        assert_eq!(
            crc_check(&short, &spec, 6),
            Err(Error::BlockTooShort { len: 6, crc_len: 6 })
        );
        let msg = BitBlock::message(vec![1; 10]).unwrap();
        assert!(matches!(crc_check(&msg, &spec, 6), Err(Error::WrongRole { .. })));
    }

    #[test]
    fn single_bit_flips_are_detected() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let bits: Vec<u8> = (0..64).map(|_| rng.random_range(0..2)).collect();
        let msg = BitBlock::message(bits).unwrap();
        for spec in [CrcSpec::nr_based(), CrcSpec::new_search()] {
            for len in CRC_LENGTHS {
                let block = crc_attach(&msg, &spec, len).unwrap();
                assert!(crc_check(&block, &spec, len).unwrap());
                for i in 0..block.len() {
                    let mut b = block.bits().to_vec();
                    b[i] ^= 1;
                    let bad = BitBlock::new(b, BlockRole::MessageWithCrc).unwrap();
                    assert!(!crc_check(&bad, &spec, len).unwrap());
                }
            }
        }
    }
}
