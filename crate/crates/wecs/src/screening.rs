//! Correlation screening: how strongly each coefficient site's deviation
//! series tracks the stack-wide change signal, and which sites survive a
//! threshold.
//!
//! With p sites and n ≲ 100 time points this is the classic
//! ultra-high-dimensional regime: ranking by absolute Pearson correlation
//! and keeping the top quantile retains the truly changed sites with high
//! probability while discarding almost everything else.

use ndarray::Array2;
use rayon::prelude::*;

use crate::change::{ChangeSignal, DeviationCube, SeriesKind};
use crate::error::{Error, Result};
use crate::util::median_in_place;

/// Pearson correlation of every site's series against the change signal.
/// Degenerate (zero-variance) sites carry 0 and are flagged so they can
/// never be selected and never poison quantiles.
#[derive(Debug, Clone)]
pub struct CorrelationMap {
    pub kind: SeriesKind,
    pub values: Array2<f64>,
    pub degenerate: Array2<bool>,
}

impl CorrelationMap {
    pub fn grid_dims(&self) -> (usize, usize) {
        self.values.dim()
    }

    /// Absolute correlations with degenerate sites forced to 0.
    pub fn abs_values(&self) -> Array2<f64> {
        self.values.mapv(f64::abs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdSpec {
    /// Select |R| > tau.
    Absolute(f64),
    /// Resolve tau as the q-th empirical quantile of |R| over
    /// non-degenerate sites, then select |R| > tau.
    Quantile(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskSource {
    D,
    T,
    Union,
}

impl MaskSource {
    pub fn name(self) -> &'static str {
        match self {
            MaskSource::D => "d",
            MaskSource::T => "t",
            MaskSource::Union => "union",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SelectionMask {
    pub indices: Array2<bool>,
    pub count: usize,
    pub source: MaskSource,
    pub spec: Option<ThresholdSpec>,
    /// Resolved threshold; None for unions.
    pub threshold: Option<f64>,
}

/// Times whose change-signal value exceeds median + k * MAD.
#[derive(Debug, Clone)]
pub struct TimeFlags {
    /// 1-based time indices, matching the series indexing d(1)..d(n).
    pub flagged: Vec<usize>,
    pub median: f64,
    pub mad: f64,
    pub k: f64,
}

impl TimeFlags {
    pub fn threshold(&self) -> f64 {
        self.median + self.k * self.mad
    }
}

/// Correlate each site's cube series with the change signal.
pub fn correlation_map(cube: &DeviationCube, signal: &ChangeSignal) -> Result<CorrelationMap> {
    if cube.kind != signal.kind {
        return Err(Error::BadParam {
            what: format!(
                "cube kind {} does not match signal kind {}",
                cube.kind.name(),
                signal.kind.name()
            ),
        });
    }
    let n = cube.len();
    if n != signal.len() {
        return Err(Error::LengthMismatch {
            what: "cube entries vs signal",
            expected: n,
            got: signal.len(),
        });
    }
    if n < 3 {
        return Err(Error::SeriesTooShort { need: 3, got: n });
    }
    let (rows, cols) = cube.grid_dims();
    let nf = n as f64;
    let y = &signal.values;
    let y_mean = y.iter().sum::<f64>() / nf;
    let syy: f64 = y.iter().map(|v| (v - y_mean) * (v - y_mean)).sum();

    let mut values = Array2::zeros((rows, cols));
    let mut degenerate = Array2::from_elem((rows, cols), false);
    let val_rows: Vec<(Vec<f64>, Vec<bool>)> = (0..rows)
        .into_par_iter()
        .map(|i| {
            let mut vrow = vec![0.0; cols];
            let mut drow = vec![false; cols];
            for j in 0..cols {
                // pass 1: site mean; pass 2: cross/self products
                let mut x_mean = 0.0;
                for e in &cube.entries {
                    x_mean += e[(i, j)];
                }
                x_mean /= nf;
                let mut sxx = 0.0;
                let mut sxy = 0.0;
                for (e, &yv) in cube.entries.iter().zip(y) {
                    let dx = e[(i, j)] - x_mean;
                    sxx += dx * dx;
                    sxy += dx * (yv - y_mean);
                }
                if sxx == 0.0 || syy == 0.0 {
                    drow[j] = true;
                } else {
                    vrow[j] = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
                }
            }
            (vrow, drow)
        })
        .collect();
    for (i, (vrow, drow)) in val_rows.into_iter().enumerate() {
        for j in 0..cols {
            values[(i, j)] = vrow[j];
            degenerate[(i, j)] = drow[j];
        }
    }
    Ok(CorrelationMap {
        kind: cube.kind,
        values,
        degenerate,
    })
}

/// q-th empirical quantile of `sorted` (ascending, 1-based rank ceil(q*p),
/// floored at rank 1).
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let p = sorted.len();
    let rank = ((q * p as f64).ceil() as usize).max(1).min(p);
    sorted[rank - 1]
}

/// Threshold the absolute correlation map.
pub fn select_indices(map: &CorrelationMap, spec: ThresholdSpec) -> Result<SelectionMask> {
    let tau = match spec {
        ThresholdSpec::Absolute(t) => {
            if !(t >= 0.0) || !t.is_finite() {
                return Err(Error::BadParam {
                    what: format!("absolute threshold must be finite and >= 0, got {t}"),
                });
            }
            t
        }
        ThresholdSpec::Quantile(q) => {
            if !(0.0..1.0).contains(&q) {
                return Err(Error::BadParam {
                    what: format!("quantile must lie in [0, 1), got {q}"),
                });
            }
            let mut vals: Vec<f64> = map
                .values
                .iter()
                .zip(map.degenerate.iter())
                .filter(|(_, &d)| !d)
                .map(|(v, _)| v.abs())
                .collect();
            if vals.is_empty() {
                return Err(Error::AllDegenerate);
            }
            vals.sort_by(|a, b| a.partial_cmp(b).expect("finite correlations"));
            quantile_sorted(&vals, q)
        }
    };
    let mut count = 0;
    let indices = Array2::from_shape_fn(map.values.dim(), |idx| {
        let selected = !map.degenerate[idx] && map.values[idx].abs() > tau;
        if selected {
            count += 1;
        }
        selected
    });
    let source = match map.kind {
        SeriesKind::D => MaskSource::D,
        SeriesKind::T => MaskSource::T,
    };
    Ok(SelectionMask {
        indices,
        count,
        source,
        spec: Some(spec),
        threshold: Some(tau),
    })
}

/// Element-wise OR of two masks on the same grid.
pub fn union_selection(a: &SelectionMask, b: &SelectionMask) -> Result<SelectionMask> {
    if a.indices.dim() != b.indices.dim() {
        return Err(Error::DimsMismatch {
            what: "selection masks",
            expected_rows: a.indices.nrows(),
            expected_cols: a.indices.ncols(),
            got_rows: b.indices.nrows(),
            got_cols: b.indices.ncols(),
        });
    }
    let mut count = 0;
    let indices = Array2::from_shape_fn(a.indices.dim(), |idx| {
        let v = a.indices[idx] || b.indices[idx];
        if v {
            count += 1;
        }
        v
    });
    Ok(SelectionMask {
        indices,
        count,
        source: MaskSource::Union,
        spec: if a.spec == b.spec { a.spec } else { None },
        threshold: None,
    })
}

/// Flag times whose signal exceeds median + k * MAD (strictly). The MAD is
/// the raw median of absolute deviations, no consistency scaling.
pub fn flag_change_times(signal: &ChangeSignal, k: f64) -> Result<TimeFlags> {
    if signal.len() < 2 {
        return Err(Error::SeriesTooShort {
            need: 2,
            got: signal.len(),
        });
    }
    if !(k >= 0.0) || !k.is_finite() {
        return Err(Error::BadParam {
            what: format!("MAD multiplier must be finite and >= 0, got {k}"),
        });
    }
    let mut work = signal.values.clone();
    let median = median_in_place(&mut work);
    let mut dev: Vec<f64> = signal.values.iter().map(|v| (v - median).abs()).collect();
    let mad = median_in_place(&mut dev);
    let threshold = median + k * mad;
    let flagged = signal
        .values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > threshold)
        .map(|(i, _)| i + 1)
        .collect();
    Ok(TimeFlags {
        flagged,
        median,
        mad,
        k,
    })
}

/// One row of the threshold/count table.
#[derive(Debug, Clone, Copy)]
pub struct ReportRow {
    pub quantile: f64,
    pub tau_d: f64,
    pub count_d: usize,
    pub tau_t: f64,
    pub count_t: usize,
    pub count_union: usize,
}

/// Threshold table plus the masks behind it and the temporal flags.
#[derive(Debug, Clone)]
pub struct ScreeningReport {
    pub rows: Vec<ReportRow>,
    /// Per quantile: (d-mask, t-mask, union mask), same order as `rows`.
    pub masks: Vec<(SelectionMask, SelectionMask, SelectionMask)>,
    pub flags_d: TimeFlags,
    pub flags_t: TimeFlags,
}

/// The quantile ladder used for threshold tables when none is given.
pub const DEFAULT_QUANTILE_GRID: [f64; 20] = [
    0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95, 0.99, 0.991, 0.992, 0.993, 0.994,
    0.995, 0.996, 0.997, 0.998, 0.999,
];

/// Build the full screening report: per-quantile thresholds, counts, masks
/// for both series, their unions, and the median + k * MAD time flags.
pub fn screening_report(
    map_d: &CorrelationMap,
    map_t: &CorrelationMap,
    signal_d: &ChangeSignal,
    signal_t: &ChangeSignal,
    quantiles: &[f64],
    mad_k: f64,
) -> Result<ScreeningReport> {
    if map_d.grid_dims() != map_t.grid_dims() {
        return Err(Error::DimsMismatch {
            what: "correlation maps",
            expected_rows: map_d.grid_dims().0,
            expected_cols: map_d.grid_dims().1,
            got_rows: map_t.grid_dims().0,
            got_cols: map_t.grid_dims().1,
        });
    }
    if quantiles.is_empty() {
        return Err(Error::BadParam {
            what: "empty quantile grid".into(),
        });
    }
    let mut rows = Vec::with_capacity(quantiles.len());
    let mut masks = Vec::with_capacity(quantiles.len());
    for &q in quantiles {
        let md = select_indices(map_d, ThresholdSpec::Quantile(q))?;
        let mt = select_indices(map_t, ThresholdSpec::Quantile(q))?;
        let mu = union_selection(&md, &mt)?;
        rows.push(ReportRow {
            quantile: q,
            tau_d: md.threshold.unwrap(),
            count_d: md.count,
            tau_t: mt.threshold.unwrap(),
            count_t: mt.count,
            count_union: mu.count,
        });
        masks.push((md, mt, mu));
    }
    Ok(ScreeningReport {
        rows,
        masks,
        flags_d: flag_change_times(signal_d, mad_k)?,
        flags_t: flag_change_times(signal_t, mad_k)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr2;

    fn cube_from(series: Vec<Vec<f64>>, dims: (usize, usize)) -> DeviationCube {
        // series[s] is the time series of site s, row-major
        let n = series[0].len();
        let entries = (0..n)
            .map(|m| {
                Array2::from_shape_vec(dims, series.iter().map(|s| s[m]).collect()).unwrap()
            })
            .collect();
        DeviationCube {
            kind: SeriesKind::D,
            entries,
        }
    }

    fn signal(values: Vec<f64>) -> ChangeSignal {
        ChangeSignal {
            kind: SeriesKind::D,
            values,
        }
    }

    #[test]
    fn single_site_correlates_with_itself() {
        let cube = cube_from(vec![vec![1.0, 4.0, 2.0, 7.0]], (1, 1));
        let sig = signal(vec![1.0, 4.0, 2.0, 7.0]);
        let map = correlation_map(&cube, &sig).unwrap();
        assert!((map.values[(0, 0)] - 1.0).abs() < 1e-15);
        assert!(!map.degenerate[(0, 0)]);
    }

    #[test]
    fn constant_site_is_degenerate() {
        let cube = cube_from(vec![vec![3.0, 3.0, 3.0], vec![1.0, 2.0, 4.0]], (1, 2));
        let sig = signal(vec![4.0, 5.0, 7.0]);
        let map = correlation_map(&cube, &sig).unwrap();
        assert_eq!(map.values[(0, 0)], 0.0);
        assert!(map.degenerate[(0, 0)]);
        assert!(!map.degenerate[(0, 1)]);
    }

    #[test]
    fn short_series_rejected() {
        let cube = cube_from(vec![vec![1.0, 2.0]], (1, 1));
        let sig = signal(vec![1.0, 2.0]);
        assert!(matches!(
            correlation_map(&cube, &sig),
            Err(Error::SeriesTooShort { .. })
        ));
    }

    #[test]
    fn kind_mismatch_rejected() {
        let cube = cube_from(vec![vec![1.0, 2.0, 3.0]], (1, 1));
        let sig = ChangeSignal {
            kind: SeriesKind::T,
            values: vec![1.0, 2.0, 3.0],
        };
        assert!(correlation_map(&cube, &sig).is_err());
    }

    fn map_of(values: Array2<f64>) -> CorrelationMap {
        let degenerate = Array2::from_elem(values.dim(), false);
        CorrelationMap {
            kind: SeriesKind::D,
            values,
            degenerate,
        }
    }

    #[test]
    fn threshold_above_max_selects_nothing() {
        let map = map_of(arr2(&[[0.2, 0.9], [-0.5, 0.1]]));
        let mask = select_indices(&map, ThresholdSpec::Absolute(0.95)).unwrap();
        assert_eq!(mask.count, 0);
    }

    #[test]
    fn zero_threshold_selects_all_nonzero() {
        let map = map_of(arr2(&[[0.2, 0.9], [-0.5, 0.1]]));
        let mask = select_indices(&map, ThresholdSpec::Absolute(0.0)).unwrap();
        assert_eq!(mask.count, 4);
    }

    #[test]
    fn median_quantile_selects_half() {
        // ten distinct values: rank 5 is tau, five strictly above
        let vals: Vec<f64> = (1..=10).map(|v| v as f64 / 20.0).collect();
        let map = map_of(Array2::from_shape_vec((2, 5), vals).unwrap());
        let mask = select_indices(&map, ThresholdSpec::Quantile(0.5)).unwrap();
        assert_eq!(mask.count, 5);
        assert_eq!(mask.threshold, Some(0.25));
    }

    #[test]
    fn degenerate_sites_never_selected() {
        let values = arr2(&[[0.0, 0.9]]);
        let mut degenerate = Array2::from_elem((1, 2), false);
        degenerate[(0, 0)] = true;
        let map = CorrelationMap {
            kind: SeriesKind::D,
            values,
            degenerate,
        };
        let mask = select_indices(&map, ThresholdSpec::Absolute(0.0)).unwrap();
        assert!(!mask.indices[(0, 0)]);
        assert_eq!(mask.count, 1);
    }

    #[test]
    fn all_degenerate_rejected() {
        let map = CorrelationMap {
            kind: SeriesKind::D,
            values: Array2::zeros((2, 2)),
            degenerate: Array2::from_elem((2, 2), true),
        };
        assert!(matches!(
            select_indices(&map, ThresholdSpec::Quantile(0.5)),
            Err(Error::AllDegenerate)
        ));
    }

    #[test]
    fn union_is_idempotent_and_counts() {
        let map = map_of(arr2(&[[0.2, 0.9], [-0.5, 0.1]]));
        let a = select_indices(&map, ThresholdSpec::Absolute(0.3)).unwrap();
        let u = union_selection(&a, &a).unwrap();
        assert_eq!(u.count, a.count);
        assert_eq!(u.indices, a.indices);

        let b = select_indices(&map, ThresholdSpec::Absolute(0.05)).unwrap();
        let u2 = union_selection(&a, &b).unwrap();
        // a is a subset of b here, so the union is b
        assert_eq!(u2.count, b.count);
    }

    #[test]
    fn flags_spike_signal() {
        let sig = signal(vec![1.0, 1.0, 1.0, 1.0, 100.0]);
        let f = flag_change_times(&sig, 2.0).unwrap();
        assert_eq!(f.median, 1.0);
        assert_eq!(f.mad, 0.0);
        assert_eq!(f.flagged, vec![5]);
    }

    #[test]
    fn flags_strict_boundary() {
        // median 2, MAD 1, threshold 4; the value 4 is not strictly above
        let sig = signal(vec![0.0, 1.0, 2.0, 3.0, 4.0]);
        let f = flag_change_times(&sig, 2.0).unwrap();
        assert_eq!(f.median, 2.0);
        assert_eq!(f.mad, 1.0);
        assert!(f.flagged.is_empty());
    }

    #[test]
    fn flags_constant_signal_empty() {
        let sig = signal(vec![5.0; 6]);
        let f = flag_change_times(&sig, 2.0).unwrap();
        assert!(f.flagged.is_empty());
    }

    #[test]
    fn report_single_quantile() {
        let vals: Vec<f64> = (1..=10).map(|v| v as f64 / 20.0).collect();
        let map = map_of(Array2::from_shape_vec((2, 5), vals).unwrap());
        let sig_d = signal(vec![1.0, 2.0, 5.0, 3.0]);
        let sig_t = ChangeSignal {
            kind: SeriesKind::T,
            values: vec![1.0, 0.5, 2.0],
        };
        let mut map_t = map.clone();
        map_t.kind = SeriesKind::T;
        let rep = screening_report(&map, &map_t, &sig_d, &sig_t, &[0.5], 2.0).unwrap();
        assert_eq!(rep.rows.len(), 1);
        assert_eq!(rep.rows[0].count_d, 5);
        assert_eq!(rep.rows[0].count_union, 5);
    }
}
