//! Small numeric helpers shared across modules.

use ndarray::Array2;

use crate::error::{Error, Result};

/// Neumaier compensated summation. The change signals and energy terms sum
/// millions of squared deviations spanning many orders of magnitude; naive
/// accumulation eats the 1e-10 identity budgets.
pub fn comp_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Compensated sum of squares.
pub fn energy(m: &Array2<f64>) -> f64 {
    comp_sum(m.iter().map(|&v| v * v))
}

/// Reject matrices containing NaN or infinities, naming the offender.
pub fn ensure_finite(m: &Array2<f64>, what: &'static str) -> Result<()> {
    for ((r, c), &v) in m.indexed_iter() {
        if !v.is_finite() {
            return Err(Error::NonFinite { what, row: r, col: c });
        }
    }
    Ok(())
}

/// Two-pass Pearson correlation; None when either side has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        None
    } else {
        Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
    }
}

/// Median of a slice; the input order is not preserved.
pub fn median_in_place(v: &mut [f64]) -> f64 {
    assert!(!v.is_empty());
    v.sort_by(|a, b| a.partial_cmp(b).expect("non-finite in median"));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comp_sum_handles_cancellation() {
        // 1 + 1e100 - 1e100 collapses to 0 under naive summation
        let r = comp_sum([1.0, 1e100, 1.0, -1e100]);
        assert_eq!(r, 2.0);
    }

    #[test]
    fn median_odd_even() {
        assert_eq!(median_in_place(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median_in_place(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
