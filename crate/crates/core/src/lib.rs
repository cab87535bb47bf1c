//! Physical-layer building blocks for ambient-IoT backscatter links.
//!
//! The crate is `no_std` (it needs `alloc`) and holds only pure signal
//! processing: nested CRC and convolutional coding, RFID-style line codes,
//! square-wave baseband modulation for the device-to-reader link, OOK-over-OFDM
//! synthesis for the reader-to-device link, fading channels and the reader-side
//! receiver. Experiment drivers, file formats and the CLI live in `aiot-sim`.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod bits;
pub mod channel;
pub mod codec;
mod error;
mod fft;
pub mod linecode;
pub mod modem_d2r;
pub mod modem_r2d;
pub mod receiver;
mod wave;

pub use bits::{BitBlock, BlockRole, LlrBlock};
pub use error::{Error, Result};
pub use wave::{ChipSequence, ChipsPerBit, Level, SampleWaveform};

pub use num_complex::Complex64;
