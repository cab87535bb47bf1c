//! Waveform dumps for spectrum plots: a `sample_rate=<Hz>` line, then one
//! `re,im` line per sample.
use std::io::{BufRead, Write};

use aiot_phy::{Complex64, SampleWaveform};

use crate::error::{Result, SimError};

pub fn write_dump<W: Write>(mut out: W, wave: &SampleWaveform) -> Result<()> {
    writeln!(out, "sample_rate={}", wave.sample_rate)?;
    for s in &wave.samples {
        writeln!(out, "{:e},{:e}", s.re, s.im)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_dump<R: BufRead>(input: R) -> Result<SampleWaveform> {
    let mut lines = input.lines();
    let header = lines.next().ok_or_else(|| SimError::Dump("empty file".into()))??;
    let fs: f64 = header
        .trim()
        .strip_prefix("sample_rate=")
        .and_then(|v| v.parse().ok())
        .filter(|v: &f64| *v > 0.0)
        .ok_or_else(|| SimError::Dump(format!("bad header `{header}`")))?;
    let mut samples = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = line
            .split_once(',')
            .and_then(|(a, b)| Some(Complex64::new(a.trim().parse().ok()?, b.trim().parse().ok()?)));
        samples.push(parsed.ok_or_else(|| SimError::Dump(format!("line {}: `{line}`", i + 2)))?);
    }
    Ok(SampleWaveform::new(samples, fs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let w = SampleWaveform::new(
            vec![Complex64::new(1.0, -0.0), Complex64::new(0.1 + 0.2, -1e-300), Complex64::new(-3.5, 2.0)],
            3.84e6,
        );
        let mut buf = Vec::new();
        write_dump(&mut buf, &w).unwrap();
        assert!(buf.starts_with(b"sample_rate=3840000\n"));
        assert_eq!(read_dump(&buf[..]).unwrap(), w);
        assert!(read_dump(&b"rate=1\n"[..]).is_err());
        assert!(read_dump(&b"sample_rate=1\n1;2\n"[..]).is_err());
    }
}
