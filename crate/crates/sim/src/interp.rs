//! Required-SNR interpolation on BLER curves.
use crate::csv_io::BlerRecord;
use crate::error::{Result, SimError};

/// Weighted least-squares non-increasing fit (pool adjacent violators).
pub fn isotonic_nonincreasing(y: &[f64], w: &[f64]) -> Vec<f64> {
    // blocks of (mean, weight, count)
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(y.len());
    for (&v, &wt) in y.iter().zip(w) {
        blocks.push((v, wt, 1));
        while blocks.len() > 1 {
            let n = blocks.len();
            let (m2, w2, c2) = blocks[n - 1];
            let (m1, w1, c1) = blocks[n - 2];
            if m1 >= m2 {
                break;
            }
            let wsum = w1 + w2;
            let mean = if wsum > 0.0 { (m1 * w1 + m2 * w2) / wsum } else { (m1 + m2) / 2.0 };
            blocks.truncate(n - 2);
            blocks.push((mean, wsum, c1 + c2));
        }
    }
    blocks.iter().flat_map(|&(m, _, c)| std::iter::repeat_n(m, c)).collect()
}

/// SNR at which the fitted curve crosses `target`, interpolating
/// `log10(BLER)` linearly in dB. Records must belong to one curve.
///
/// The curve is isotonically fitted (weights = trials) before the search. A
/// zero-error point counts as half an error so the logarithm stays finite.
pub fn interpolate_required_snr(records: &[BlerRecord], target: f64) -> Result<f64> {
    let label = records.first().map(|r| r.scheme_label.clone()).unwrap_or_default();
    let not_bracketed = || SimError::TargetNotBracketed {
        label: label.clone(),
        target,
    };
    if records.is_empty() || !(target > 0.0 && target < 1.0) {
        return Err(not_bracketed());
    }
    let mut pts: Vec<&BlerRecord> = records.iter().collect();
    pts.sort_by(|a, b| a.snr_db.total_cmp(&b.snr_db));
    let y: Vec<f64> = pts.iter().map(|r| r.bler).collect();
    let w: Vec<f64> = pts.iter().map(|r| r.trials as f64).collect();
    let fit = isotonic_nonincreasing(&y, &w);
    let floor = |i: usize| fit[i].max(0.5 / pts[i].trials.max(1) as f64);
    for i in 0..pts.len() {
        if fit[i] == target {
            return Ok(pts[i].snr_db);
        }
        if i + 1 < pts.len() && fit[i] > target && fit[i + 1] < target {
            let (l0, l1) = (floor(i).log10(), floor(i + 1).log10());
            let lt = target.log10();
            if l1 >= lt {
                return Ok(pts[i + 1].snr_db);
            }
            let (s0, s1) = (pts[i].snr_db, pts[i + 1].snr_db);
            return Ok(s0 + (l0 - lt) / (l0 - l1) * (s1 - s0));
        }
    }
    Err(not_bracketed())
}

pub fn required_snr_for(records: &[BlerRecord], label: &str, target: f64) -> Result<f64> {
    let curve: Vec<BlerRecord> = records.iter().filter(|r| r.scheme_label == label).cloned().collect();
    if curve.is_empty() {
        return Err(SimError::UnknownLabel(label.to_string()));
    }
    interpolate_required_snr(&curve, target)
}

/// Required SNR of `b` minus that of `a`: positive when `a` is better.
pub fn snr_gap(records: &[BlerRecord], a: &str, b: &str, target: f64) -> Result<f64> {
    Ok(required_snr_for(records, b, target)? - required_snr_for(records, a, target)?)
}
