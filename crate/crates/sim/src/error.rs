use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    /// A config value is missing, malformed or violates a module invariant.
    #[error("config key `{key}`: {msg}")]
    Config { key: String, msg: String },
    #[error("config file is not valid TOML: {0}")]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Phy(#[from] aiot_phy::Error),
    #[error("target BLER {target} is not bracketed by the records of `{label}`")]
    TargetNotBracketed { label: String, target: f64 },
    #[error("no records for scheme `{0}`")]
    UnknownLabel(String),
    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed CSV: {0}")]
    Schema(String),
    #[error("malformed waveform dump: {0}")]
    Dump(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl SimError {
    pub fn config(key: impl Into<String>, msg: impl Into<String>) -> Self {
        SimError::Config {
            key: key.into(),
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
