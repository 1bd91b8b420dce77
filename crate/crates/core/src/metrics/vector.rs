use crate::{Error, Result};

/// Denominator floor for [`relative_error`].
pub const RE_GUARD: f64 = 1e-12;

/// `|t - s| / max(|t|, 1e-12)`. The flag is set when the guard replaced
/// the denominator.
pub fn relative_error(true_v: f64, syn_v: f64) -> (f64, bool) {
    let denom = true_v.abs();
    if denom < RE_GUARD {
        ((true_v - syn_v).abs() / RE_GUARD, true)
    } else {
        ((true_v - syn_v).abs() / denom, false)
    }
}

fn check_lengths(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(Error::InvalidArgument("metric of empty vectors".into()));
    }
    Ok(())
}

/// Mean per-entry error. With `relative` unset this is the mean absolute
/// difference; with it set, the mean of per-entry relative errors.
pub fn mean_relative_error(true_vs: &[f64], syn_vs: &[f64], relative: bool) -> Result<f64> {
    check_lengths(true_vs, syn_vs)?;
    let total: f64 = true_vs
        .iter()
        .zip(syn_vs)
        .map(|(&t, &s)| if relative { relative_error(t, s).0 } else { (t - s).abs() })
        .sum();
    Ok(total / true_vs.len() as f64)
}

pub fn mae(a: &[f64], b: &[f64]) -> Result<f64> {
    check_lengths(a, b)?;
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64)
}

pub fn mse(a: &[f64], b: &[f64]) -> Result<f64> {
    check_lengths(a, b)?;
    Ok(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64)
}

/// Sorts both vectors in descending order and zero-pads the shorter one.
/// Returns whether padding was needed.
pub fn sorted_alignment(a: &[f64], b: &[f64]) -> (Vec<f64>, Vec<f64>, bool) {
    let sort = |v: &[f64]| {
        let mut v = v.to_vec();
        v.sort_by(|x, y| y.total_cmp(x));
        v
    };
    let (mut a, mut b) = (sort(a), sort(b));
    let padded = a.len() != b.len();
    let len = a.len().max(b.len());
    a.resize(len, 0.0);
    b.resize(len, 0.0);
    (a, b, padded)
}

/// Zero-pads the shorter vector, keeping positions. Returns whether
/// padding was needed.
pub fn padded_alignment(a: &[f64], b: &[f64]) -> (Vec<f64>, Vec<f64>, bool) {
    let len = a.len().max(b.len());
    let (mut a, mut b) = (a.to_vec(), b.to_vec());
    let padded = a.len() != b.len();
    a.resize(len, 0.0);
    b.resize(len, 0.0);
    (a, b, padded)
}
