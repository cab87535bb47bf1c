//! Monte-Carlo BLER harness around `aiot-phy`: declarative experiment
//! configs, SNR sweeps over a rayon pool, CSV results and waveform dumps.
pub mod config;
pub mod csv_io;
pub mod dump;
pub mod error;
pub mod interp;
pub mod presets;
pub mod runner;
pub mod scheme;

pub use config::{ExperimentConfig, ExperimentKind};
pub use csv_io::{read_records, write_records, BlerRecord};
pub use error::{Result, SimError};
pub use interp::{interpolate_required_snr, required_snr_for, snr_gap};
pub use runner::{run_experiment, RunOptions};
