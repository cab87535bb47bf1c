//! Channel coding: nested CRC and nested convolutional codes.
//!
//! CRC lengths 6, 11 and 16 share one degree-16 generator; shorter CRCs use the
//! generator's low-order terms. Convolutional codes come from nested polynomial
//! sets so that the first `n` generators give a rate-1/n code, and can be
//! emitted either interlaced or polynomial by polynomial (a block interleaver
//! that needs no coded-bit buffer).

mod conv;
mod crc;
mod viterbi;

pub use conv::{
    cc_encode, cc_encode_swept, deinterleave_swept, interleave_swept, parse_octal, ConvEncoder,
    NestedCcConfig, PolyOption, Termination,
};
pub use crc::{
    crc_attach, crc_check, crc_derive, crc_remainder, CrcSpec, CrcTable, CrcVariant, Gf2Poly,
    CRC_LENGTHS,
};
pub use viterbi::{viterbi_decode, DecoderInput, TailBitingSearch, ViterbiDecoder};
