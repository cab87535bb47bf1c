//! BLER records and their CSV form.
use std::io::{Read, Write};

use crate::error::{Result, SimError};

pub const CSV_HEADER: [&str; 9] = [
    "experiment",
    "scheme_label",
    "snr_db",
    "trials",
    "block_errors",
    "bler",
    "wall_seconds",
    "seed",
    "snr_def",
];

/// One SNR point of one curve.
#[derive(Debug, Clone, PartialEq)]
pub struct BlerRecord {
    pub experiment: String,
    pub scheme_label: String,
    pub snr_db: f64,
    /// Transmitted blocks (FDMA trials count every user).
    pub trials: u64,
    pub block_errors: u64,
    pub bler: f64,
    pub wall_seconds: f64,
    pub seed: u64,
    pub snr_def: String,
    /// Blocks whose CRC check failed; only when a CRC is attached. Not in the CSV.
    pub crc_failures: Option<u64>,
}

/// `%g`-style formatting with 6 significant digits.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.5e}");
    let exp: i32 = sci.split_once('e').and_then(|(_, e)| e.parse().ok()).unwrap_or(0);
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let (mant, e) = sci.split_once('e').expect("exponent form");
        let mant = if mant.contains('.') {
            mant.trim_end_matches('0').trim_end_matches('.')
        } else {
            mant
        };
        format!("{mant}e{e}")
    }
}

pub fn write_records<W: Write>(out: W, records: &[BlerRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.experiment.clone(),
            r.scheme_label.clone(),
            fmt_sig(r.snr_db),
            r.trials.to_string(),
            r.block_errors.to_string(),
            fmt_sig(r.bler),
            fmt_sig(r.wall_seconds),
            r.seed.to_string(),
            r.snr_def.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(input: R) -> Result<Vec<BlerRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(SimError::Schema(format!("header `{}`", header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut out = Vec::new();
    for (i, row) in rd.records().enumerate() {
        let row = row?;
        let field = |j: usize| row.get(j).unwrap_or_default();
        let bad = |j: usize| SimError::Schema(format!("row {}: bad `{}` value `{}`", i + 1, CSV_HEADER[j], field(j)));
        let f = |j: usize| field(j).parse::<f64>().map_err(|_| bad(j));
        let u = |j: usize| field(j).parse::<u64>().map_err(|_| bad(j));
        out.push(BlerRecord {
            experiment: field(0).to_string(),
            scheme_label: field(1).to_string(),
            snr_db: f(2)?,
            trials: u(3)?,
            block_errors: u(4)?,
            bler: f(5)?,
            wall_seconds: f(6)?,
            seed: u(7)?,
            snr_def: field(8).to_string(),
            crc_failures: None,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(fmt_sig(0.0123456789), "0.0123457");
        assert_eq!(fmt_sig(2.0), "2");
        assert_eq!(fmt_sig(-1.5), "-1.5");
        assert_eq!(fmt_sig(123456789.0), "1.23457e8");
        assert_eq!(fmt_sig(1.5e-7), "1.5e-7");
        assert_eq!(fmt_sig(9.999999), "10");
        assert_eq!(fmt_sig(100000.0), "100000");
        assert_eq!(fmt_sig(0.1), "0.1");
    }

    #[test]
    fn round_trip() {
        let r = BlerRecord {
            experiment: "cc_awgn".into(),
            scheme_label: "k7_a_r4".into(),
            snr_db: -1.5,
            trials: 1000,
            block_errors: 37,
            bler: 0.037,
            wall_seconds: 0.0,
            seed: 9,
            snr_def: "Es/N0 per coded bit".into(),
            crc_failures: None,
        };
        let mut buf = Vec::new();
        write_records(&mut buf, &[r.clone()]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("experiment,scheme_label,snr_db,trials,block_errors,bler,wall_seconds,seed,snr_def\n"));
        assert_eq!(read_records(&buf[..]).unwrap(), vec![r]);
        assert!(matches!(read_records(&b"a,b\n"[..]), Err(SimError::Schema(_))));
    }
}
