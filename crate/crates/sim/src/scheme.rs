//! Scheme labels and the link setups they resolve to.
//!
//! D2R labels are `<wave>_<coh|noncoh>[_h<digits>]`, e.g. `sq_bpsk_coh`,
//! `mms2_noncoh` or `sq_bpsk_coh_h135` (harmonics 1, 3 and 5). Waves are
//! `sq_ook`, `sq_bpsk`, `sq_qpsk`, `sq_msk`, `fm0`, `mms2`, `mms4`, `mms8`
//! and `enh_manchester`. Codec-only labels are `k<K>_<a|b|c>_r<n>` for the
//! nested code of constraint length K at rate 1/n.
use aiot_phy::codec::{NestedCcConfig, PolyOption};
use aiot_phy::linecode::LineCodeKind;
use aiot_phy::modem_d2r::{check_mapping, fdma_plan, BackscatterMap, SquareKind, SquareWaveScheme};
use aiot_phy::receiver::{sample_rate_policy, D2rWaveform, ReceiverConfig, ReceiverMode};

use crate::config::{Backscatter, ExperimentConfig, ExperimentKind};
use crate::error::{Result, SimError};

/// Waveform, backscatter map and receiver of one D2R link.
#[derive(Debug, Clone)]
pub struct LinkSetup {
    pub waveform: D2rWaveform,
    pub map: BackscatterMap,
    pub rx: ReceiverConfig,
    pub sample_rate: f64,
}

#[derive(Debug, Clone)]
pub enum SchemeKind {
    /// Antipodal symbols straight into an AWGN channel.
    CodedBpsk,
    Pdrch(LinkSetup),
    /// All users share the receiver settings; `users[k]` is user k+1.
    Fdma {
        users: Vec<D2rWaveform>,
        map: BackscatterMap,
        rx: ReceiverConfig,
        sample_rate: f64,
        sfo_ppm: f64,
    },
}

/// One curve of an experiment.
#[derive(Debug, Clone)]
pub struct Scheme {
    pub label: String,
    pub code: NestedCcConfig,
    pub kind: SchemeKind,
}

fn wave_from_name(name: &str, cfg: &ExperimentConfig, f_shift: f64) -> Option<D2rWaveform> {
    let rb = cfg.d2r.bit_rate;
    let square = |k| SquareWaveScheme::new(k, f_shift, rb).ok().map(D2rWaveform::Square);
    let line = |kind| Some(D2rWaveform::Line { kind, bit_rate: rb });
    match name {
        "sq_ook" | "square_ook" => square(SquareKind::Ook),
        "sq_bpsk" | "square_bpsk" => square(SquareKind::Bpsk),
        "sq_qpsk" | "square_qpsk" => square(SquareKind::Qpsk),
        "sq_msk" | "square_msk" => square(SquareKind::Msk),
        "fm0" => line(LineCodeKind::Fm0),
        "mms2" => line(LineCodeKind::Mms { m: 2 }),
        "mms4" => line(LineCodeKind::Mms { m: 4 }),
        "mms8" => line(LineCodeKind::Mms { m: 8 }),
        "enh_manchester" => {
            // same subcarrier as the square-wave schemes
            let m = (f_shift / rb).round();
            if (f_shift / rb - m).abs() > 1e-9 {
                return None;
            }
            LineCodeKind::enhanced_manchester(m as usize).ok().and_then(line)
        }
        _ => None,
    }
}

/// Split a D2R label into wave name, coherence and optional harmonic list.
pub fn parse_d2r_label(label: &str) -> Option<(&str, bool, Option<Vec<u32>>)> {
    let (rest, harmonics) = match label.rsplit_once("_h") {
        Some((head, digits)) if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) => {
            (head, Some(digits.bytes().map(|b| u32::from(b - b'0')).collect()))
        }
        _ => (label, None),
    };
    if let Some(w) = rest.strip_suffix("_noncoh") {
        Some((w, false, harmonics))
    } else {
        rest.strip_suffix("_coh").map(|w| (w, true, harmonics))
    }
}

/// `k7_a_r4` → constraint length, option and rate index.
pub fn parse_cc_label(label: &str) -> Option<(usize, PolyOption, usize)> {
    let mut it = label.split('_');
    let k = it.next()?.strip_prefix('k')?.parse().ok()?;
    let opt = match it.next()? {
        "a" => PolyOption::A,
        "b" => PolyOption::B,
        "c" => PolyOption::C,
        _ => return None,
    };
    let n = it.next()?.strip_prefix('r')?.parse().ok()?;
    it.next().is_none().then_some((k, opt, n))
}

fn backscatter(cfg: &ExperimentConfig) -> BackscatterMap {
    match cfg.d2r.backscatter {
        Backscatter::Psk => BackscatterMap::psk(),
        Backscatter::Ask => BackscatterMap::ask(),
    }
}

fn receiver(cfg: &ExperimentConfig, coherent: bool, harmonics: Option<Vec<u32>>) -> Result<ReceiverConfig> {
    let rx = ReceiverConfig {
        mode: if coherent {
            ReceiverMode::CoherentSoft
        } else {
            ReceiverMode::NoncoherentHard
        },
        harmonics: harmonics.unwrap_or_else(|| cfg.rx.harmonics.clone()),
        filter_bw: cfg.rx.filter_bw,
        fir_taps: cfg.rx.fir_taps,
        pattern_window: cfg.rx.pattern_window,
        tuning: cfg.rx.tuning,
        ..ReceiverConfig::default()
    };
    rx.validate().map_err(|e| SimError::config("rx.harmonics", e.to_string()))?;
    if rx.fir_taps % 2 == 0 {
        return Err(SimError::config("rx.fir_taps", "must be odd"));
    }
    Ok(rx)
}

fn check_nyquist(waves: &[D2rWaveform], rx: &ReceiverConfig, fs: f64, max_eps: f64) -> Result<()> {
    for w in waves {
        for f in w.fundamentals() {
            for &k in &rx.harmonics {
                let freq = f * k as f64 * (1.0 + max_eps);
                if freq >= fs / 2.0 {
                    return Err(SimError::config(
                        "rx.harmonics",
                        format!("harmonic {k} at {freq} Hz is beyond Nyquist of {fs} Hz"),
                    ));
                }
            }
        }
    }
    Ok(())
}

fn pdrch_scheme(cfg: &ExperimentConfig, label: &str, code: &NestedCcConfig) -> Result<Scheme> {
    let bad = |msg: &str| SimError::config("schemes", format!("`{label}`: {msg}"));
    let (name, coherent, harmonics) = parse_d2r_label(label).ok_or_else(|| bad("not a D2R scheme label"))?;
    let waveform = wave_from_name(name, cfg, cfg.d2r.f_shift)
        .ok_or_else(|| bad("unknown wave or frequency shift not a whole number of cycles per bit"))?;
    let map = backscatter(cfg);
    if let D2rWaveform::Square(s) = &waveform {
        check_mapping(s, &map).map_err(|e| SimError::config("d2r.backscatter", format!("`{label}`: {e}")))?;
    }
    let is_differential = matches!(
        waveform,
        D2rWaveform::Line {
            kind: LineCodeKind::Fm0 | LineCodeKind::Mms { .. },
            ..
        }
    );
    if !coherent && !is_differential {
        return Err(bad("non-coherent reception needs FM0 or MMS"));
    }
    let rx = receiver(cfg, coherent, harmonics)?;
    let sample_rate =
        sample_rate_policy(&[waveform], cfg.d2r.oversample).map_err(|e| SimError::config("d2r.f_shift_hz", e.to_string()))?;
    check_nyquist(&[waveform], &rx, sample_rate, 0.0)?;
    Ok(Scheme {
        label: label.to_string(),
        code: code.clone(),
        kind: SchemeKind::Pdrch(LinkSetup {
            waveform,
            map,
            rx,
            sample_rate,
        }),
    })
}

fn custom_label(cfg: &ExperimentConfig) -> Result<String> {
    let name = match (&cfg.d2r.scheme, &cfg.d2r.baseline) {
        (Some(_), Some(_)) => return Err(SimError::config("d2r.baseline", "given together with d2r.scheme")),
        (None, None) => return Err(SimError::config("d2r.scheme", "custom experiments need d2r.scheme or d2r.baseline")),
        (Some(s), None) => s.replace("square_", "sq_"),
        (None, Some(b)) => b.clone(),
    };
    let mode = if cfg.rx.coherent { "coh" } else { "noncoh" };
    Ok(format!("{name}_{mode}"))
}

fn format_ppm(ppm: f64) -> String {
    crate::csv_io::fmt_sig(ppm)
}

/// Build every curve of the experiment, checking all module invariants.
pub fn resolve(cfg: &ExperimentConfig) -> Result<Vec<Scheme>> {
    let link_code = || -> Result<NestedCcConfig> {
        let polys: Vec<&str> = cfg.code.polys.iter().map(String::as_str).collect();
        NestedCcConfig::custom(cfg.code.constraint_length, &polys, cfg.code.termination)
            .map_err(|e| SimError::config("cc.polys", e.to_string()))
    };
    let schemes = match cfg.experiment {
        ExperimentKind::CcAwgn => {
            if cfg.schemes.is_empty() {
                return Err(SimError::config("schemes", "cc_awgn needs labels such as k7_a_r4"));
            }
            cfg.schemes
                .iter()
                .map(|label| {
                    let (k, opt, n) = parse_cc_label(label)
                        .ok_or_else(|| SimError::config("schemes", format!("`{label}` is not a k<K>_<a|b|c>_r<n> label")))?;
                    let code = NestedCcConfig::nested(k, opt, n, cfg.code.termination)
                        .map_err(|e| SimError::config("schemes", format!("`{label}`: {e}")))?;
                    Ok(Scheme {
                        label: label.clone(),
                        code,
                        kind: SchemeKind::CodedBpsk,
                    })
                })
                .collect::<Result<Vec<_>>>()?
        }
        ExperimentKind::PdrchFading => {
            if cfg.schemes.is_empty() {
                return Err(SimError::config("schemes", "pdrch_fading needs scheme labels"));
            }
            let code = link_code()?;
            cfg.schemes
                .iter()
                .map(|l| pdrch_scheme(cfg, l, &code))
                .collect::<Result<Vec<_>>>()?
        }
        ExperimentKind::Custom => {
            let code = link_code()?;
            if cfg.schemes.is_empty() {
                vec![pdrch_scheme(cfg, &custom_label(cfg)?, &code)?]
            } else {
                cfg.schemes
                    .iter()
                    .map(|l| pdrch_scheme(cfg, l, &code))
                    .collect::<Result<Vec<_>>>()?
            }
        }
        ExperimentKind::FdmaSfo => {
            if !cfg.schemes.is_empty() {
                return Err(SimError::config("schemes", "fdma_sfo names its curves from sfo.ppm_list"));
            }
            if cfg.fdma.sfo_ppm.is_empty() || cfg.fdma.sfo_ppm.iter().any(|p| !(*p >= 0.0 && *p < 1e6)) {
                return Err(SimError::config("sfo.ppm_list", "values must lie in [0, 1e6)"));
            }
            let code = link_code()?;
            let name = cfg.d2r.scheme.clone().unwrap_or_else(|| "square_bpsk".into());
            let freqs = fdma_plan(cfg.fdma.users, cfg.fdma.f1).map_err(|e| SimError::config("fdma.users", e.to_string()))?;
            let users = freqs
                .iter()
                .map(|&f| {
                    wave_from_name(&name, cfg, f)
                        .filter(|w| matches!(w, D2rWaveform::Square(_)))
                        .ok_or_else(|| SimError::config("d2r.scheme", format!("`{name}` at {f} Hz is not a square-wave scheme with whole cycles per bit")))
                })
                .collect::<Result<Vec<_>>>()?;
            let map = backscatter(cfg);
            if let D2rWaveform::Square(s) = &users[0] {
                check_mapping(s, &map).map_err(|e| SimError::config("d2r.backscatter", e.to_string()))?;
            }
            let rx = receiver(cfg, true, None)?;
            if !cfg.rx.coherent {
                return Err(SimError::config("rx.mode", "fdma_sfo uses the coherent receiver"));
            }
            let sample_rate =
                sample_rate_policy(&users, cfg.d2r.oversample).map_err(|e| SimError::config("fdma.f1_hz", e.to_string()))?;
            let max_eps = cfg.fdma.sfo_ppm.iter().fold(0.0f64, |a, &p| a.max(p)) * 1e-6;
            check_nyquist(&users, &rx, sample_rate, max_eps)?;
            cfg.fdma
                .sfo_ppm
                .iter()
                .map(|&ppm| Scheme {
                    label: format!("sfo_{}ppm", format_ppm(ppm)),
                    code: code.clone(),
                    kind: SchemeKind::Fdma {
                        users: users.clone(),
                        map,
                        rx: rx.clone(),
                        sample_rate,
                        sfo_ppm: ppm,
                    },
                })
                .collect()
        }
    };
    let mut seen = std::collections::BTreeSet::new();
    for s in &schemes {
        if !seen.insert(s.label.clone()) {
            return Err(SimError::config("schemes", format!("duplicate label `{}`", s.label)));
        }
        let len = cfg.info_bits + cfg.code.crc_length;
        if len < s.code.memory() {
            return Err(SimError::config("info_bits", "block shorter than the code memory"));
        }
        let coded = s.code.codeword_len(len);
        let wave_bps = match &s.kind {
            SchemeKind::Pdrch(l) => l.waveform.bits_per_symbol(),
            SchemeKind::Fdma { users, .. } => users[0].bits_per_symbol(),
            SchemeKind::CodedBpsk => 1,
        };
        if coded % wave_bps != 0 {
            return Err(SimError::config("info_bits", "codeword length must be even for QPSK"));
        }
    }
    Ok(schemes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_grammar() {
        assert_eq!(parse_d2r_label("sq_bpsk_coh"), Some(("sq_bpsk", true, None)));
        assert_eq!(parse_d2r_label("mms2_noncoh"), Some(("mms2", false, None)));
        assert_eq!(parse_d2r_label("sq_bpsk_coh_h135"), Some(("sq_bpsk", true, Some(vec![1, 3, 5]))));
        assert_eq!(parse_d2r_label("sq_bpsk"), None);
        assert_eq!(parse_cc_label("k7_b_r4"), Some((7, PolyOption::B, 4)));
        assert_eq!(parse_cc_label("k7_d_r4"), None);
        assert_eq!(parse_cc_label("k7_a_r4_x"), None);
    }

    fn cfg(extra: &str) -> Result<Vec<Scheme>> {
        resolve(&ExperimentConfig::from_toml_str(&format!("experiment = \"pdrch_fading\"\n{extra}"))?)
    }

    #[test]
    fn pdrch_labels_resolve() {
        let s = cfg("schemes = [\"sq_bpsk_coh\", \"fm0_coh\", \"mms2_noncoh\", \"enh_manchester_coh\", \"sq_msk_coh_h135\"]").unwrap();
        assert_eq!(s.len(), 5);
        match &s[3].kind {
            SchemeKind::Pdrch(l) => assert_eq!(
                l.waveform,
                D2rWaveform::Line {
                    kind: LineCodeKind::EnhancedManchester { m: 4 },
                    bit_rate: 60e3
                }
            ),
            _ => unreachable!(),
        }
        match &s[0].kind {
            SchemeKind::Pdrch(l) => assert_eq!(l.sample_rate, 3.84e6),
            _ => unreachable!(),
        }
    }

    #[test]
    fn invalid_combinations_name_a_key() {
        let key = |extra: &str| match cfg(extra) {
            Err(SimError::Config { key, .. }) => key,
            other => panic!("{other:?}"),
        };
        assert_eq!(key("schemes = [\"sq_bpsk_noncoh\"]"), "schemes");
        assert_eq!(key("schemes = [\"sq_ook_coh\"]"), "d2r.backscatter");
        assert_eq!(key("schemes = [\"sq_bpsk_coh_h9\"]"), "rx.harmonics");
        assert_eq!(key("schemes = [\"sq_bpsk_coh\", \"sq_bpsk_coh\"]"), "schemes");
        assert_eq!(key("schemes = [\"sq_bpsk_coh\"]\ncc.polys = [\"13\", \"171\"]"), "cc.polys");
    }

    #[test]
    fn fdma_curves_follow_sfo_list() {
        let c = ExperimentConfig::from_toml_str(
            "experiment = \"fdma_sfo\"\nd2r.bit_rate = 7500\nsfo.ppm_list = [0, 10000, 100000]",
        )
        .unwrap();
        let s = resolve(&c).unwrap();
        let labels: Vec<&str> = s.iter().map(|s| s.label.as_str()).collect();
        assert_eq!(labels, ["sfo_0ppm", "sfo_10000ppm", "sfo_100000ppm"]);
        match &s[0].kind {
            SchemeKind::Fdma { users, sample_rate, .. } => {
                assert_eq!(users.len(), 4);
                assert_eq!(*sample_rate, 7.68e6);
            }
            _ => unreachable!(),
        }
    }
}
