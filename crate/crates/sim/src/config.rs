//! Experiment configuration files.
//!
//! A config is a TOML document read as flat dotted keys: `rx.harmonics = [1]`
//! and a `[rx]` table holding `harmonics = [1]` are the same key. Every key
//! is optional except `experiment`; unknown keys are rejected by name.
//!
//! | key | type | default |
//! |---|---|---|
//! | `experiment` | `cc_awgn`, `pdrch_fading`, `fdma_sfo`, `custom` | required |
//! | `name` | string, CSV `experiment` column | the experiment kind |
//! | `info_bits` | integer | 128 |
//! | `seed` | integer | 1 |
//! | `schemes` | list of scheme labels | per experiment |
//! | `noise.snr_db_list` (alias `snr_grid`) | strictly increasing dB list | `[0, 2, 4, 6, 8, 10]` |
//! | `noise.enabled` | bool; `false` is the no-noise flag | true |
//! | `stop.max_trials` | integer | 100000 |
//! | `stop.min_block_errors` | integer, at least 20 | 200 |
//! | `stop.batch` | trials between stop checks | 64 |
//! | `stop.min_bler` | skip the rest of a curve once a point is below | none |
//! | `cc.polys` | octal generator strings | `["133", "171"]` |
//! | `cc.constraint_length` | integer | from the generators |
//! | `cc.termination` | `tail_biting`, `zero_tail` | `tail_biting` |
//! | `cc.interleaved` | bool, swept output order | false |
//! | `crc.length` | 0, 6, 11 or 16 | 0 |
//! | `crc.variant` | `nr_based`, `new_search` | `nr_based` |
//! | `d2r.scheme` | `square_ook`, `square_bpsk`, `square_qpsk`, `square_msk` | (custom only) |
//! | `d2r.baseline` | `fm0`, `mms2`, `mms4`, `mms8`, `enh_manchester` | (custom only) |
//! | `d2r.f_shift_hz` | Hz | 240e3 |
//! | `d2r.bit_rate` | bit/s | 60e3 |
//! | `d2r.backscatter` | `psk`, `ask` | `psk` |
//! | `d2r.oversample` | sample rate over fastest fundamental | 16 |
//! | `channel.profile` | `awgn`, `tdl_a` | `awgn` |
//! | `channel.delay_spread_ns` | ns | 30 |
//! | `channel.speed_kmh` | km/h | 3 |
//! | `channel.topology` | `monostatic`, `bistatic` | `monostatic` |
//! | `channel.cw_leak_db` | dB relative to the signal | off |
//! | `channel.cw_freq_hz` | Hz | 900e6 |
//! | `rx.mode` | `coherent`, `noncoherent` (custom only) | `coherent` |
//! | `rx.harmonics` | odd integers | `[1]` |
//! | `rx.filter_bw_hz` | Hz | twice the level rate: 2·Rb for square waves and enhanced Manchester, 4·Rb for FM0/MMS |
//! | `rx.fir_taps` | odd integer | 129 |
//! | `rx.clock_tuning` | `nominal` (mix at planned lines), `tracked` (at the device's lines) | `nominal` |
//! | `rx.pattern_window_bits` | 1 to 12, bits per non-coherent pattern (centred on the decided bit) | 3 |
//! | `fdma.users` | integer | 4 |
//! | `fdma.f1_hz` | Hz | 60e3 |
//! | `sfo.ppm_list` | ppm values, one curve each | `[0]` |
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use aiot_phy::channel::{CascadeConfig, ChannelProfile, Topology};
use aiot_phy::codec::{CrcVariant, Termination};
use aiot_phy::receiver::ClockTuning;

use crate::error::{Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    CcAwgn,
    PdrchFading,
    FdmaSfo,
    Custom,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::CcAwgn => "cc_awgn",
            ExperimentKind::PdrchFading => "pdrch_fading",
            ExperimentKind::FdmaSfo => "fdma_sfo",
            ExperimentKind::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StopRule {
    pub max_trials: u64,
    pub min_block_errors: u64,
    pub batch: u64,
    pub min_bler: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodeSettings {
    pub polys: Vec<String>,
    pub constraint_length: usize,
    pub termination: Termination,
    pub interleaved: bool,
    pub crc_length: usize,
    pub crc_variant: CrcVariant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backscatter {
    Psk,
    Ask,
}

#[derive(Debug, Clone, PartialEq)]
pub struct D2rSettings {
    pub scheme: Option<String>,
    pub baseline: Option<String>,
    pub f_shift: f64,
    pub bit_rate: f64,
    pub backscatter: Backscatter,
    pub oversample: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSettings {
    pub profile: ChannelProfile,
    /// Seconds.
    pub delay_spread: f64,
    pub speed_kmh: f64,
    pub cascade: CascadeConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RxSettings {
    pub coherent: bool,
    pub harmonics: Vec<u32>,
    pub filter_bw: Option<f64>,
    pub fir_taps: usize,
    pub pattern_window: usize,
    pub tuning: ClockTuning,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdmaSettings {
    pub users: usize,
    pub f1: f64,
    pub sfo_ppm: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub experiment: ExperimentKind,
    pub info_bits: usize,
    pub seed: u64,
    pub snr_grid: Vec<f64>,
    pub noise: bool,
    pub stop: StopRule,
    pub schemes: Vec<String>,
    pub code: CodeSettings,
    pub d2r: D2rSettings,
    pub channel: ChannelSettings,
    pub rx: RxSettings,
    pub fdma: FdmaSettings,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse()?;
        let mut keys = Keys::default();
        flatten("", &table, &mut keys.map);
        let cfg = parse(&mut keys)?;
        keys.finish()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Checks every module invariant by building the schemes once.
    pub fn validate(&self) -> Result<()> {
        if self.info_bits == 0 {
            return Err(SimError::config("info_bits", "must be positive"));
        }
        if self.snr_grid.is_empty() {
            return Err(SimError::config("noise.snr_db_list", "empty SNR grid"));
        }
        if self.snr_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(SimError::config("noise.snr_db_list", "must be strictly increasing"));
        }
        if self.stop.min_block_errors < 20 {
            return Err(SimError::config("stop.min_block_errors", "must be at least 20"));
        }
        if self.stop.max_trials == 0 || self.stop.batch == 0 {
            return Err(SimError::config("stop.max_trials", "must be positive"));
        }
        if let Some(b) = self.stop.min_bler {
            if !(b > 0.0 && b < 1.0) {
                return Err(SimError::config("stop.min_bler", "must lie in (0, 1)"));
            }
        }
        if let Some(&h) = self.rx.harmonics.iter().find(|&&h| h % 2 == 0) {
            return Err(SimError::config("rx.harmonics", format!("harmonic {h} is even")));
        }
        crate::scheme::resolve(self).map(|_| ())
    }
}

#[derive(Default)]
struct Keys {
    map: BTreeMap<String, toml::Value>,
    used: BTreeSet<String>,
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, toml::Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            toml::Value::Table(t) => flatten(&key, t, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

fn number(key: &str, v: &toml::Value) -> Result<f64> {
    match v {
        toml::Value::Integer(i) => Ok(*i as f64),
        toml::Value::Float(f) if f.is_finite() => Ok(*f),
        _ => Err(SimError::config(key, "expected a number")),
    }
}

impl Keys {
    fn get(&mut self, key: &str) -> Option<toml::Value> {
        let v = self.map.get(key).cloned();
        if v.is_some() {
            self.used.insert(key.to_string());
        }
        v
    }

    fn f64(&mut self, key: &str, default: f64) -> Result<f64> {
        Ok(self.opt_f64(key)?.unwrap_or(default))
    }

    fn opt_f64(&mut self, key: &str) -> Result<Option<f64>> {
        self.get(key).map(|v| number(key, &v)).transpose()
    }

    fn uint(&mut self, key: &str, default: u64) -> Result<u64> {
        match self.get(key) {
            None => Ok(default),
            Some(toml::Value::Integer(i)) if i >= 0 => Ok(i as u64),
            Some(_) => Err(SimError::config(key, "expected a non-negative integer")),
        }
    }

    fn bool(&mut self, key: &str, default: bool) -> Result<bool> {
        match self.get(key) {
            None => Ok(default),
            Some(toml::Value::Boolean(b)) => Ok(b),
            Some(_) => Err(SimError::config(key, "expected true or false")),
        }
    }

    fn opt_string(&mut self, key: &str) -> Result<Option<String>> {
        match self.get(key) {
            None => Ok(None),
            Some(toml::Value::String(s)) => Ok(Some(s)),
            Some(_) => Err(SimError::config(key, "expected a string")),
        }
    }

    fn list(&mut self, key: &str) -> Result<Option<Vec<toml::Value>>> {
        match self.get(key) {
            None => Ok(None),
            Some(toml::Value::Array(a)) => Ok(Some(a)),
            Some(_) => Err(SimError::config(key, "expected a list")),
        }
    }

    fn f64_list(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        self.list(key)?
            .map(|a| a.iter().map(|v| number(key, v)).collect())
            .transpose()
    }

    fn string_list(&mut self, key: &str) -> Result<Option<Vec<String>>> {
        self.list(key)?
            .map(|a| {
                a.into_iter()
                    .map(|v| match v {
                        toml::Value::String(s) => Ok(s),
                        _ => Err(SimError::config(key, "expected a list of strings")),
                    })
                    .collect()
            })
            .transpose()
    }

    fn choice<T: Copy>(&mut self, key: &str, options: &[(&str, T)], default: T) -> Result<T> {
        match self.opt_string(key)? {
            None => Ok(default),
            Some(s) => options.iter().find(|o| o.0 == s).map(|o| o.1).ok_or_else(|| {
                let names: Vec<&str> = options.iter().map(|o| o.0).collect();
                SimError::config(key, format!("`{s}` is not one of {}", names.join(", ")))
            }),
        }
    }

    fn finish(&self) -> Result<()> {
        match self.map.keys().find(|k| !self.used.contains(*k)) {
            Some(k) => Err(SimError::config(k.as_str(), "unknown key")),
            None => Ok(()),
        }
    }
}

fn parse(k: &mut Keys) -> Result<ExperimentConfig> {
    use ExperimentKind::*;
    let experiment = match k.opt_string("experiment")? {
        None => return Err(SimError::config("experiment", "missing")),
        Some(s) => [CcAwgn, PdrchFading, FdmaSfo, Custom]
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| SimError::config("experiment", format!("unknown experiment `{s}`")))?,
    };
    let name = k.opt_string("name")?.unwrap_or_else(|| experiment.name().to_string());
    let info_bits = k.uint("info_bits", 128)? as usize;
    let seed = k.uint("seed", 1)?;

    let grid = k.f64_list("noise.snr_db_list")?;
    let alias = k.f64_list("snr_grid")?;
    let snr_grid = match (grid, alias) {
        (Some(_), Some(_)) => return Err(SimError::config("snr_grid", "given together with noise.snr_db_list")),
        (Some(g), None) | (None, Some(g)) => g,
        (None, None) => vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0],
    };
    let noise = k.bool("noise.enabled", true)?;
    let stop = StopRule {
        max_trials: k.uint("stop.max_trials", 100_000)?,
        min_block_errors: k.uint("stop.min_block_errors", 200)?,
        batch: k.uint("stop.batch", 64)?,
        min_bler: k.opt_f64("stop.min_bler")?,
    };
    let schemes = k.string_list("schemes")?.unwrap_or_default();

    let polys = k
        .string_list("cc.polys")?
        .unwrap_or_else(|| vec!["133".into(), "171".into()]);
    let mut inferred = 0;
    for p in &polys {
        let v = aiot_phy::codec::parse_octal(p).map_err(|e| SimError::config("cc.polys", e.to_string()))?;
        inferred = inferred.max(32 - v.leading_zeros() as usize);
    }
    let code = CodeSettings {
        constraint_length: k.uint("cc.constraint_length", inferred as u64)? as usize,
        polys,
        termination: k.choice(
            "cc.termination",
            &[("tail_biting", Termination::TailBiting), ("zero_tail", Termination::ZeroTail)],
            Termination::TailBiting,
        )?,
        interleaved: k.bool("cc.interleaved", false)?,
        crc_length: k.uint("crc.length", 0)? as usize,
        crc_variant: k.choice(
            "crc.variant",
            &[("nr_based", CrcVariant::NrBased), ("new_search", CrcVariant::NewSearch)],
            CrcVariant::NrBased,
        )?,
    };
    if ![0, 6, 11, 16].contains(&code.crc_length) {
        return Err(SimError::config("crc.length", "must be 0, 6, 11 or 16"));
    }

    let d2r = D2rSettings {
        scheme: k.opt_string("d2r.scheme")?,
        baseline: k.opt_string("d2r.baseline")?,
        f_shift: k.f64("d2r.f_shift_hz", 240e3)?,
        bit_rate: k.f64("d2r.bit_rate", 60e3)?,
        backscatter: k.choice("d2r.backscatter", &[("psk", Backscatter::Psk), ("ask", Backscatter::Ask)], Backscatter::Psk)?,
        oversample: k.f64("d2r.oversample", 16.0)?,
    };
    if !(d2r.bit_rate > 0.0) {
        return Err(SimError::config("d2r.bit_rate", "must be positive"));
    }
    if !(d2r.oversample >= 2.0) {
        return Err(SimError::config("d2r.oversample", "must be at least 2"));
    }

    let channel = ChannelSettings {
        profile: k.choice("channel.profile", &[("awgn", ChannelProfile::Awgn), ("tdl_a", ChannelProfile::TdlA)], ChannelProfile::Awgn)?,
        delay_spread: k.f64("channel.delay_spread_ns", 30.0)? * 1e-9,
        speed_kmh: k.f64("channel.speed_kmh", 3.0)?,
        cascade: CascadeConfig {
            topology: k.choice(
                "channel.topology",
                &[("monostatic", Topology::Monostatic), ("bistatic", Topology::Bistatic)],
                Topology::Monostatic,
            )?,
            cw_freq: k.f64("channel.cw_freq_hz", 900e6)?,
            cw_leak_db: k.opt_f64("channel.cw_leak_db")?,
        },
    };
    if channel.delay_spread < 0.0 {
        return Err(SimError::config("channel.delay_spread_ns", "must be non-negative"));
    }

    let rx = RxSettings {
        coherent: k.choice("rx.mode", &[("coherent", true), ("noncoherent", false)], true)?,
        harmonics: match k.list("rx.harmonics")? {
            None => vec![1],
            Some(a) => a
                .iter()
                .map(|v| match v {
                    toml::Value::Integer(i) if *i > 0 => Ok(*i as u32),
                    _ => Err(SimError::config("rx.harmonics", "expected positive integers")),
                })
                .collect::<Result<_>>()?,
        },
        filter_bw: k.opt_f64("rx.filter_bw_hz")?,
        fir_taps: k.uint("rx.fir_taps", 129)? as usize,
        pattern_window: k.uint("rx.pattern_window_bits", 3)? as usize,
        tuning: k.choice(
            "rx.clock_tuning",
            &[("nominal", ClockTuning::Nominal), ("tracked", ClockTuning::Tracked)],
            ClockTuning::Nominal,
        )?,
    };
    if !(1..=12).contains(&rx.pattern_window) {
        return Err(SimError::config("rx.pattern_window_bits", "must be 1 to 12"));
    }
    if rx.harmonics.is_empty() {
        return Err(SimError::config("rx.harmonics", "empty list"));
    }

    let fdma = FdmaSettings {
        users: k.uint("fdma.users", 4)? as usize,
        f1: k.f64("fdma.f1_hz", 60e3)?,
        sfo_ppm: k.f64_list("sfo.ppm_list")?.unwrap_or_else(|| vec![0.0]),
    };

    Ok(ExperimentConfig {
        name,
        experiment,
        info_bits,
        seed,
        snr_grid,
        noise,
        stop,
        schemes,
        code,
        d2r,
        channel,
        rx,
        fdma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key_of(text: &str) -> String {
        match ExperimentConfig::from_toml_str(text) {
            Err(SimError::Config { key, .. }) => key,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn dotted_and_table_forms_agree() {
        let a = ExperimentConfig::from_toml_str("experiment = \"cc_awgn\"\nschemes = [\"k7_a_r4\"]\nstop.max_trials = 10").unwrap();
        let b = ExperimentConfig::from_toml_str("experiment = \"cc_awgn\"\nschemes = [\"k7_a_r4\"]\n[stop]\nmax_trials = 10").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.stop.max_trials, 10);
        assert_eq!(a.info_bits, 128);
    }

    #[test]
    fn errors_name_the_key() {
        let base = "experiment = \"custom\"\nd2r.scheme = \"square_bpsk\"\n";
        assert_eq!(key_of(&format!("{base}rx.harmonics = [1, 2]")), "rx.harmonics");
        assert_eq!(key_of(&format!("{base}rx.bogus = 1")), "rx.bogus");
        assert_eq!(key_of(&format!("{base}noise.snr_db_list = [2, 1]")), "noise.snr_db_list");
        assert_eq!(key_of(&format!("{base}stop.min_block_errors = 5")), "stop.min_block_errors");
        assert_eq!(key_of(&format!("{base}crc.length = 8")), "crc.length");
        assert_eq!(key_of(&format!("{base}channel.profile = \"tdl_b\"")), "channel.profile");
        assert_eq!(key_of("info_bits = 4"), "experiment");
    }
}
