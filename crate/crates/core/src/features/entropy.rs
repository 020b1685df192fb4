use crate::error::{Error, Result};

/// Plug-in Shannon entropy in bits of a discrete series over the alphabet
/// `0..alphabet_size`.
///
/// Probabilities are symbol frequencies in the series; symbols that never
/// occur contribute nothing.
pub fn entropy(series: &[i64], alphabet_size: u64) -> Result<f64> {
    if series.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(&bad) = series.iter().find(|&&v| v < 0 || v as u64 >= alphabet_size) {
        return Err(Error::Range(format!(
            "symbol {bad} outside alphabet 0..{alphabet_size}"
        )));
    }
    let mut sorted = series.to_vec();
    sorted.sort_unstable();
    Ok(entropy_of_counts(
        sorted.chunk_by(|a, b| a == b).map(<[i64]>::len),
        series.len(),
    ))
}

fn entropy_of_counts(counts: impl Iterator<Item = usize>, total: usize) -> f64 {
    let n = total as f64;
    let h: f64 = counts
        .map(|c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum();
    // a single symbol gives -1 * log2(1) = -0.0
    h.max(0.0)
}

/// Entropy of a raw integer channel. Values are shifted so the minimum maps
/// to symbol 0 and the alphabet spans `max - min + 1` symbols.
pub fn channel_entropy(series: &[i64]) -> Result<f64> {
    let (min, max) = series
        .iter()
        .fold(None, |acc: Option<(i64, i64)>, &v| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
        .ok_or(Error::EmptyInput)?;
    let shifted: Vec<i64> = series.iter().map(|&v| v - min).collect();
    entropy(&shifted, (max - min) as u64 + 1)
}
