use thiserror::Error;

/// Errors raised by the PHY primitives.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty bit block")]
    EmptyBlock,
    #[error("bit value {0} is not 0 or 1")]
    InvalidBit(u8),
    #[error("operation expects a {expected} block, got {got}")]
    WrongRole {
        expected: &'static str,
        got: &'static str,
    },
    #[error("unsupported CRC length {0}")]
    UnsupportedLength(usize),
    #[error("block of {len} bits is too short for a {crc_len}-bit CRC")]
    BlockTooShort { len: usize, crc_len: usize },
    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(&'static str),
    #[error("invalid code configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("message of {len} bits is shorter than the {needed} bits tail-biting needs")]
    MessageTooShort { len: usize, needed: usize },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("subcarrier cycles per bit must be 2, 4 or 8 (got {0})")]
    InvalidM(usize),
    #[error("QPSK needs an even number of bits")]
    OddBitCountForQpsk,
    #[error("square-wave frequency does not give a whole number of cycles per bit")]
    NonIntegerCyclesPerBit,
    #[error("sample rate is not an integer multiple of the chip rate")]
    NonIntegerOversampling,
    #[error("backscatter mapping is not allowed for this scheme: {0}")]
    UnsupportedMapping(&'static str),
    #[error("chip count {chips} is not divisible by {per_symbol} chips per OFDM symbol")]
    ChipCountNotDivisible { chips: usize, per_symbol: usize },
    #[error("{requested} check chips do not fit a {chips}-chip symbol")]
    TooManyCheckChips { requested: usize, chips: usize },
    #[error("allocation too small: relative LS residual {0:.3}")]
    AllocationTooSmall(f64),
    #[error("invalid OFDM grid: {0}")]
    InvalidGrid(&'static str),
    #[error("Manchester rule violated in bit {0}")]
    ManchesterViolation(usize),
    #[error("PIE pulse of {0} chips cannot be decoded")]
    PieViolation(usize),
    #[error("sample rates differ between superposed waveforms")]
    RateMismatch,
    #[error("harmonic {harmonic} at {freq_hz} Hz is beyond Nyquist")]
    HarmonicBeyondNyquist { harmonic: u32, freq_hz: f64 },
    #[error("invalid receiver configuration: {0}")]
    InvalidReceiver(&'static str),
    #[error("line code not supported by this receiver path: {0}")]
    UnsupportedKind(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
