//! Separable 2D orthonormal wavelet transform, approximation-band chains,
//! and coefficient-map upsampling.
//!
//! One fixed convention throughout: analysis filters are applied as
//! correlation (no flip), downsampling keeps even phases, and the highpass
//! is the alternating-sign mirror of the lowpass. Synthesis is the adjoint
//! scatter, which inverts the analysis exactly for periodic boundaries on
//! even lengths.

mod filters;

pub use filters::{build_filter_bank, Basis, FilterBank};

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::util::{energy, ensure_finite};

/// Boundary extension for each 1D filtering pass.
///
/// `Auto` picks per pass: periodic when the length is even (keeps the
/// transform orthogonal, so Parseval and perfect reconstruction are exact),
/// half-sample symmetric reflection otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Periodic,
    Symmetric,
    Auto,
}

impl Boundary {
    pub fn parse(s: &str) -> Result<Boundary> {
        match s {
            "periodic" => Ok(Boundary::Periodic),
            "symmetric" => Ok(Boundary::Symmetric),
            "auto" => Ok(Boundary::Auto),
            _ => Err(Error::BadParam {
                what: format!("unknown boundary {s:?}; expected periodic, symmetric, or auto"),
            }),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Boundary::Periodic => "periodic",
            Boundary::Symmetric => "symmetric",
            Boundary::Auto => "auto",
        }
    }

    /// Returns true when the pass should wrap periodically.
    fn periodic_for(self, len: usize) -> Result<bool> {
        match self {
            Boundary::Periodic => {
                if len % 2 == 0 {
                    Ok(true)
                } else {
                    Err(Error::OddPeriodic { len })
                }
            }
            Boundary::Symmetric => Ok(false),
            Boundary::Auto => Ok(len % 2 == 0),
        }
    }
}

/// Level-J approximation coefficients of one image.
#[derive(Debug, Clone)]
pub struct CoeffMatrix {
    pub level: usize,
    pub values: Array2<f64>,
    pub source_dims: (usize, usize),
}

impl CoeffMatrix {
    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn cols(&self) -> usize {
        self.values.ncols()
    }
}

/// How to bring a coefficient-grid map back to pixel resolution.
pub enum Upsample<'a> {
    /// Replicate each coefficient over its 2^J x 2^J pixel footprint.
    Nearest,
    /// Run J synthesis steps with zero detail bands.
    Reconstruction {
        bank: &'a FilterBank,
        boundary: Boundary,
    },
}

fn reflect(mut t: isize, n: isize) -> usize {
    loop {
        if t < 0 {
            t = -1 - t;
        } else if t >= n {
            t = 2 * n - 1 - t;
        } else {
            return t as usize;
        }
    }
}

/// One analysis band: correlate with `f`, keep even phases.
fn analyze_band(x: &[f64], f: &[f64], periodic: bool, out: &mut [f64]) {
    let n = x.len();
    debug_assert_eq!(out.len(), n.div_ceil(2));
    if periodic {
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            let base = 2 * i;
            for (k, &fk) in f.iter().enumerate() {
                let mut t = base + k;
                if t >= n {
                    t -= n;
                    if t >= n {
                        t %= n;
                    }
                }
                acc += fk * x[t];
            }
            *o = acc;
        }
    } else {
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (k, &fk) in f.iter().enumerate() {
                acc += fk * x[reflect((2 * i + k) as isize, n as isize)];
            }
            *o = acc;
        }
    }
}

/// Adjoint of [`analyze_band`]: scatter band coefficients back to signal
/// positions. With both bands present this inverts the periodic analysis.
fn scatter_band(coef: &[f64], f: &[f64], periodic: bool, out: &mut [f64]) {
    let n = out.len();
    if periodic {
        for (i, &ci) in coef.iter().enumerate() {
            let base = 2 * i;
            for (k, &fk) in f.iter().enumerate() {
                let mut t = base + k;
                while t >= n {
                    t -= n;
                }
                out[t] += ci * fk;
            }
        }
    } else {
        for (i, &ci) in coef.iter().enumerate() {
            for (k, &fk) in f.iter().enumerate() {
                out[reflect((2 * i + k) as isize, n as isize)] += ci * fk;
            }
        }
    }
}

fn transpose(m: &Array2<f64>) -> Array2<f64> {
    // as_standard_layout: a plain t().to_owned() would keep the flipped
    // strides and break the row-slice passes
    m.t().as_standard_layout().into_owned()
}

/// Filter every row with `f` and downsample: (r, c) -> (r, ceil(c/2)).
fn pass_rows(m: &Array2<f64>, f: &[f64], boundary: Boundary) -> Result<Array2<f64>> {
    let periodic = boundary.periodic_for(m.ncols())?;
    let mut out = Array2::zeros((m.nrows(), m.ncols().div_ceil(2)));
    for (src, mut dst) in m.rows().into_iter().zip(out.rows_mut()) {
        analyze_band(
            src.as_slice().expect("standard layout"),
            f,
            periodic,
            dst.as_slice_mut().expect("standard layout"),
        );
    }
    Ok(out)
}

/// Filter every column with `f` via transpose, row pass, transpose back.
fn pass_cols(m: &Array2<f64>, f: &[f64], boundary: Boundary) -> Result<Array2<f64>> {
    Ok(transpose(&pass_rows(&transpose(m), f, boundary)?))
}

fn check_support(image: &Array2<f64>, bank: &FilterBank, boundary: Boundary) -> Result<()> {
    let (r, c) = image.dim();
    if r < bank.len() || c < bank.len() {
        let name = match boundary {
            Boundary::Periodic => "periodic",
            Boundary::Symmetric => "symmetric",
            Boundary::Auto => "auto",
        };
        return Err(Error::ImageTooSmall {
            rows: r,
            cols: c,
            need: bank.len(),
            boundary: name,
        });
    }
    Ok(())
}

/// Deepest level J such that every intermediate grid still covers the filter.
pub fn max_feasible_level(dims: (usize, usize), bank: &FilterBank) -> usize {
    let (mut r, mut c) = dims;
    let mut j = 0;
    while r >= bank.len() && c >= bank.len() {
        r = r.div_ceil(2);
        c = c.div_ceil(2);
        j += 1;
    }
    j
}

/// Single-level separable analysis.
///
/// Returns the approximation band and the three detail bands in
/// (horizontal-low/vertical-high, high/low, high/high) order, each of
/// dimension ceil(r/2) x ceil(c/2).
pub fn dwt2_level(
    image: &Array2<f64>,
    bank: &FilterBank,
    boundary: Boundary,
) -> Result<(Array2<f64>, [Array2<f64>; 3])> {
    ensure_finite(image, "image")?;
    check_support(image, bank, boundary)?;
    let h = &bank.lowpass;
    let g = &bank.highpass;
    let low = pass_rows(image, h, boundary)?;
    let high = pass_rows(image, g, boundary)?;
    let ll = pass_cols(&low, h, boundary)?;
    let lh = pass_cols(&low, g, boundary)?;
    let hl = pass_cols(&high, h, boundary)?;
    let hh = pass_cols(&high, g, boundary)?;
    Ok((ll, [lh, hl, hh]))
}

/// Inverse of [`dwt2_level`] for the periodic/even case; elsewhere the
/// adjoint scatter with boundary folding.
pub fn idwt2_level(
    approx: &Array2<f64>,
    details: &[Array2<f64>; 3],
    bank: &FilterBank,
    boundary: Boundary,
    target_dims: (usize, usize),
) -> Result<Array2<f64>> {
    let (r, c) = target_dims;
    let (cr, cc) = (r.div_ceil(2), c.div_ceil(2));
    for (m, name) in [(approx, "approx band")]
        .into_iter()
        .chain(details.iter().zip(["lh band", "hl band", "hh band"]))
    {
        if m.dim() != (cr, cc) {
            return Err(Error::DimsMismatch {
                what: name,
                expected_rows: cr,
                expected_cols: cc,
                got_rows: m.nrows(),
                got_cols: m.ncols(),
            });
        }
    }
    let h = &bank.lowpass;
    let g = &bank.highpass;
    let [lh, hl, hh] = details;
    let low = unsplit_cols(approx, Some(lh), bank, boundary, r)?;
    let high = unsplit_cols(hl, Some(hh), bank, boundary, r)?;
    let mut out = Array2::zeros((r, c));
    let periodic = boundary.periodic_for(c)?;
    for ((la, ha), mut dst) in low
        .rows()
        .into_iter()
        .zip(high.rows())
        .zip(out.rows_mut())
    {
        let dst = dst.as_slice_mut().expect("standard layout");
        scatter_band(la.as_slice().expect("layout"), h, periodic, dst);
        scatter_band(ha.as_slice().expect("layout"), g, periodic, dst);
    }
    Ok(out)
}

/// Column-direction synthesis of a low band and optional high band.
fn unsplit_cols(
    low: &Array2<f64>,
    high: Option<&Array2<f64>>,
    bank: &FilterBank,
    boundary: Boundary,
    target_rows: usize,
) -> Result<Array2<f64>> {
    let periodic = boundary.periodic_for(target_rows)?;
    let lt = transpose(low);
    let ht = high.map(transpose);
    let mut out = Array2::zeros((low.ncols(), target_rows));
    for (i, mut dst) in out.rows_mut().into_iter().enumerate() {
        let dst = dst.as_slice_mut().expect("standard layout");
        scatter_band(
            lt.row(i).as_slice().expect("layout"),
            &bank.lowpass,
            periodic,
            dst,
        );
        if let Some(ht) = &ht {
            scatter_band(
                ht.row(i).as_slice().expect("layout"),
                &bank.highpass,
                periodic,
                dst,
            );
        }
    }
    Ok(transpose(&out))
}

/// Level-J approximation chain. Only the low/low band is carried, so this
/// skips the detail filtering that [`dwt2_level`] would do and discard.
pub fn dwt2_approx(
    image: &Array2<f64>,
    bank: &FilterBank,
    level: usize,
    boundary: Boundary,
) -> Result<CoeffMatrix> {
    ensure_finite(image, "image")?;
    let source_dims = image.dim();
    let mut values = image.clone();
    for j in 0..level {
        if check_support(&values, bank, boundary).is_err() {
            return Err(Error::LevelTooDeep {
                requested: level,
                max_feasible: j + max_feasible_level(values.dim(), bank),
            });
        }
        let low = pass_rows(&values, &bank.lowpass, boundary)?;
        values = pass_cols(&low, &bank.lowpass, boundary)?;
    }
    Ok(CoeffMatrix {
        level,
        values,
        source_dims,
    })
}

/// Dimension chain source_dims -> level dims, one ceil-halving per level.
fn dims_at_level(dims: (usize, usize), level: usize) -> (usize, usize) {
    let (mut r, mut c) = dims;
    for _ in 0..level {
        r = r.div_ceil(2);
        c = c.div_ceil(2);
    }
    (r, c)
}

/// Bring a level-J coefficient map to pixel resolution.
pub fn upsample_coeff_map(
    map: &Array2<f64>,
    target_dims: (usize, usize),
    level: usize,
    mode: Upsample,
) -> Result<Array2<f64>> {
    let (er, ec) = dims_at_level(target_dims, level);
    if map.dim() != (er, ec) {
        return Err(Error::DimsMismatch {
            what: "coefficient map for target dims",
            expected_rows: er,
            expected_cols: ec,
            got_rows: map.nrows(),
            got_cols: map.ncols(),
        });
    }
    match mode {
        Upsample::Nearest => {
            let (r, c) = target_dims;
            Ok(Array2::from_shape_fn((r, c), |(i, j)| {
                map[(i >> level, j >> level)]
            }))
        }
        Upsample::Reconstruction { bank, boundary } => {
            let mut cur = map.clone();
            for j in (0..level).rev() {
                let dims = dims_at_level(target_dims, j);
                let low = unsplit_cols(&cur, None, bank, boundary, dims.0)?;
                let mut out = Array2::zeros(dims);
                let periodic = boundary.periodic_for(dims.1)?;
                for (src, mut dst) in low.rows().into_iter().zip(out.rows_mut()) {
                    scatter_band(
                        src.as_slice().expect("layout"),
                        &bank.lowpass,
                        periodic,
                        dst.as_slice_mut().expect("layout"),
                    );
                }
                cur = out;
            }
            Ok(cur)
        }
    }
}

/// Share of the image's energy kept by the level-J approximation, i.e.
/// ||synthesize(approx, zero details)||^2 / ||image||^2.
pub fn approx_energy_fraction(
    image: &Array2<f64>,
    bank: &FilterBank,
    level: usize,
    boundary: Boundary,
) -> Result<f64> {
    let total = energy(image);
    if total == 0.0 {
        return Err(Error::ZeroEnergy);
    }
    let approx = dwt2_approx(image, bank, level, boundary)?;
    let recon = upsample_coeff_map(
        &approx.values,
        image.dim(),
        level,
        Upsample::Reconstruction { bank, boundary },
    )?;
    Ok(energy(&recon) / total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr2;

    fn haar() -> FilterBank {
        build_filter_bank("haar").unwrap()
    }

    #[test]
    fn constant_image_haar_level_one() {
        let c = 3.25;
        let img = Array2::from_elem((4, 4), c);
        let (a, d) = dwt2_level(&img, &haar(), Boundary::Periodic).unwrap();
        assert_eq!(a.dim(), (2, 2));
        for &v in a.iter() {
            assert!((v - 2.0 * c).abs() < 1e-12);
        }
        for band in &d {
            assert!(band.iter().all(|&v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn impulse_haar_periodic() {
        let bank = haar();
        let mut img = Array2::zeros((8, 8));
        img[(0, 0)] = 1.0;
        let (a, _) = dwt2_level(&img, &bank, Boundary::Periodic).unwrap();
        // even-phase correlation: the impulse is hit by tap 0 in both passes,
        // so the only surviving approximation sample is h[0]^2 (one rounding
        // above 1/2 in f64)
        let h0 = bank.lowpass[0];
        assert_eq!(a[(0, 0)], h0 * h0);
        let nonzero = a.iter().filter(|v| **v != 0.0).count();
        assert_eq!(nonzero, 1);
    }

    #[test]
    fn level_zero_is_identity() {
        let img = arr2(&[[1.0, 2.0], [3.0, 4.0]]);
        let cm = dwt2_approx(&img, &haar(), 0, Boundary::Auto).unwrap();
        assert_eq!(cm.values, img);
        assert_eq!(cm.level, 0);
        assert_eq!(cm.source_dims, (2, 2));
    }

    #[test]
    fn constant_level_two_gains_four() {
        let c = 1.5;
        let img = Array2::from_elem((8, 8), c);
        let cm = dwt2_approx(&img, &haar(), 2, Boundary::Periodic).unwrap();
        assert_eq!(cm.values.dim(), (2, 2));
        for &v in cm.values.iter() {
            assert!((v - 4.0 * c).abs() < 1e-12);
        }
    }

    #[test]
    fn level_too_deep_reports_max() {
        let img = Array2::zeros((8, 8));
        let err = dwt2_approx(&img, &haar(), 9, Boundary::Auto).unwrap_err();
        match err {
            Error::LevelTooDeep { max_feasible, .. } => assert_eq!(max_feasible, 3),
            other => panic!("unexpected: {other}"),
        }
    }

    #[test]
    fn non_finite_rejected() {
        let mut img = Array2::zeros((4, 4));
        img[(1, 2)] = f64::NAN;
        assert!(dwt2_level(&img, &haar(), Boundary::Auto).is_err());
    }

    #[test]
    fn odd_periodic_rejected() {
        let img = Array2::zeros((6, 7));
        assert!(matches!(
            dwt2_level(&img, &haar(), Boundary::Periodic),
            Err(Error::OddPeriodic { len: 7 })
        ));
    }

    #[test]
    fn too_small_rejected() {
        let img = Array2::zeros((4, 4));
        let bank = build_filter_bank("sym8").unwrap();
        assert!(dwt2_level(&img, &bank, Boundary::Auto).is_err());
    }

    #[test]
    fn upsample_nearest_block_constant() {
        let map = arr2(&[[1.0]]);
        let up = upsample_coeff_map(&map, (2, 2), 1, Upsample::Nearest).unwrap();
        assert_eq!(up, Array2::from_elem((2, 2), 1.0));

        let map = arr2(&[[1.0, 2.0], [3.0, 4.0]]);
        let up = upsample_coeff_map(&map, (4, 4), 1, Upsample::Nearest).unwrap();
        assert_eq!(up[(0, 1)], 1.0);
        assert_eq!(up[(1, 3)], 2.0);
        assert_eq!(up[(3, 0)], 3.0);
        assert_eq!(up[(2, 2)], 4.0);
    }

    #[test]
    fn upsample_dims_checked() {
        let map = arr2(&[[1.0, 2.0], [3.0, 4.0]]);
        assert!(upsample_coeff_map(&map, (16, 16), 1, Upsample::Nearest).is_err());
    }

    #[test]
    fn odd_dims_fall_back_to_symmetric() {
        let img = Array2::from_shape_fn((7, 7), |(i, j)| (i * 7 + j) as f64);
        let cm = dwt2_approx(&img, &haar(), 1, Boundary::Auto).unwrap();
        assert_eq!(cm.values.dim(), (4, 4));
    }

    #[test]
    fn constant_energy_fraction_is_one() {
        let img = Array2::from_elem((16, 16), 2.0);
        for name in ["haar", "db2", "sym4"] {
            let bank = build_filter_bank(name).unwrap();
            let f = approx_energy_fraction(&img, &bank, 2, Boundary::Periodic).unwrap();
            assert!((f - 1.0).abs() < 1e-10, "{name}: {f}");
        }
    }

    #[test]
    fn zero_energy_rejected() {
        let img = Array2::zeros((8, 8));
        assert!(matches!(
            approx_energy_fraction(&img, &haar(), 1, Boundary::Auto),
            Err(Error::ZeroEnergy)
        ));
    }

    #[test]
    fn smooth_image_keeps_most_energy() {
        let img = Array2::from_shape_fn((32, 32), |(i, j)| {
            let x = i as f64 / 32.0 * std::f64::consts::TAU;
            let y = j as f64 / 32.0 * std::f64::consts::TAU;
            2.0 + x.cos() + y.cos()
        });
        let f = approx_energy_fraction(&img, &haar(), 2, Boundary::Periodic).unwrap();
        assert!(f > 0.9, "fraction {f}");
    }
}
