//! The coefficient stack: level-J approximation grids for every time point,
//! with a running coefficient sum so the temporal mean is always available
//! and appends reproduce batch builds bit for bit.

use ndarray::Array2;
use rayon::prelude::*;

use crate::dwt::{dwt2_approx, Basis, Boundary, FilterBank};
use crate::error::{Error, Result};
use crate::stack::{Domain, ImageStack};
use crate::util::{comp_sum, energy};

#[derive(Debug, Clone)]
pub struct CoeffStack {
    basis: Basis,
    level: usize,
    boundary: Boundary,
    source_dims: (usize, usize),
    coeffs: Vec<Array2<f64>>,
    /// Running sum of coefficient grids. Kept instead of the mean so that
    /// push/append and batch construction perform the identical sequence of
    /// additions: the cached mean is then bit-identical either way.
    sum: Array2<f64>,
}

impl CoeffStack {
    /// Empty single-writer builder; fill with [`CoeffStack::push_image`].
    pub fn builder(
        basis: Basis,
        level: usize,
        boundary: Boundary,
        source_dims: (usize, usize),
    ) -> CoeffStack {
        let (mut r, mut c) = source_dims;
        for _ in 0..level {
            r = r.div_ceil(2);
            c = c.div_ceil(2);
        }
        CoeffStack {
            basis,
            level,
            boundary,
            source_dims,
            coeffs: Vec::new(),
            sum: Array2::zeros((r, c)),
        }
    }

    /// Transform one more image and extend the stack in place.
    pub fn push_image(&mut self, image: &Array2<f64>) -> Result<()> {
        if image.dim() != self.source_dims {
            return Err(Error::DimsMismatch {
                what: "appended image",
                expected_rows: self.source_dims.0,
                expected_cols: self.source_dims.1,
                got_rows: image.nrows(),
                got_cols: image.ncols(),
            });
        }
        let bank = FilterBank::new(self.basis);
        let cm = dwt2_approx(image, &bank, self.level, self.boundary)?;
        self.sum += &cm.values;
        self.coeffs.push(cm.values);
        Ok(())
    }

    /// Extend by one image, returning a new stack; the receiver is untouched.
    pub fn append_image(&self, image: &Array2<f64>) -> Result<CoeffStack> {
        let mut next = self.clone();
        next.push_image(image)?;
        Ok(next)
    }

    /// Rebuild from previously stored coefficient grids. The sum is
    /// re-accumulated in storage order, so a reloaded stack continues the
    /// exact same addition sequence as the one that was saved.
    pub fn from_parts(
        basis: Basis,
        level: usize,
        boundary: Boundary,
        source_dims: (usize, usize),
        coeffs: Vec<Array2<f64>>,
    ) -> Result<CoeffStack> {
        let mut cs = CoeffStack::builder(basis, level, boundary, source_dims);
        let want = cs.sum.dim();
        for g in coeffs {
            if g.dim() != want {
                return Err(Error::DimsMismatch {
                    what: "stored coefficient grid",
                    expected_rows: want.0,
                    expected_cols: want.1,
                    got_rows: g.nrows(),
                    got_cols: g.ncols(),
                });
            }
            cs.sum += &g;
            cs.coeffs.push(g);
        }
        Ok(cs)
    }

    pub fn n(&self) -> usize {
        self.coeffs.len()
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn source_dims(&self) -> (usize, usize) {
        self.source_dims
    }

    /// Coefficient-grid dimensions (p = rows * cols screening sites).
    pub fn grid_dims(&self) -> (usize, usize) {
        self.sum.dim()
    }

    pub fn coeffs(&self) -> &[Array2<f64>] {
        &self.coeffs
    }

    /// Temporal mean grid, computed from the running sum.
    pub fn mean_coeffs(&self) -> Array2<f64> {
        assert!(self.n() > 0, "mean of empty stack");
        &self.sum / self.n() as f64
    }
}

/// Transform every image of a stack to its level-J approximation grid.
///
/// The stack must be log-domain unless `accept_raw` is set (synthetic
/// additive scenes skip the log).
pub fn build_coeff_stack(
    stack: &ImageStack,
    bank: &FilterBank,
    level: usize,
    boundary: Boundary,
    accept_raw: bool,
) -> Result<CoeffStack> {
    if stack.domain == Domain::Raw && !accept_raw {
        return Err(Error::NotLogDomain);
    }
    // transform in parallel, then fold the sum in time order
    let grids: Vec<Array2<f64>> = stack
        .images()
        .par_iter()
        .map(|img| dwt2_approx(img, bank, level, boundary).map(|cm| cm.values))
        .collect::<Result<_>>()?;
    let mut cs = CoeffStack::builder(bank.basis, level, boundary, stack.dims());
    for g in grids {
        cs.sum += &g;
        cs.coeffs.push(g);
    }
    Ok(cs)
}

/// Total, mean-explained, and deviation-explained L2 energy of the stack.
#[derive(Debug, Clone, Copy)]
pub struct EnergyApportionment {
    pub total: f64,
    pub mean_term: f64,
    pub deviation_term: f64,
    /// |total - mean_term - deviation_term| / total, or the absolute
    /// residual when total is zero.
    pub residual: f64,
}

/// Split the stack's total coefficient energy into the part carried by the
/// temporal mean and the part carried by deviations from it.
pub fn energy_apportionment(cs: &CoeffStack) -> Result<EnergyApportionment> {
    if cs.n() == 0 {
        return Err(Error::TooFewImages { need: 1, got: 0 });
    }
    let mean = cs.mean_coeffs();
    let total = comp_sum(cs.coeffs().iter().map(energy));
    let mean_term = cs.n() as f64 * energy(&mean);
    let deviation_term = comp_sum(cs.coeffs().iter().map(|x| {
        comp_sum(
            x.iter()
                .zip(mean.iter())
                .map(|(&v, &m)| (v - m) * (v - m)),
        )
    }));
    let raw = (total - mean_term - deviation_term).abs();
    let residual = if total > 0.0 { raw / total } else { raw };
    Ok(EnergyApportionment {
        total,
        mean_term,
        deviation_term,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dwt::build_filter_bank;
    use crate::stack::Channel;
    use ndarray::arr2;

    fn log_stack(images: Vec<Array2<f64>>) -> ImageStack {
        ImageStack::new(images, Channel::Generic, Domain::Log).unwrap()
    }

    #[test]
    fn identical_images_mean_equals_each() {
        let img = arr2(&[[1.0, 2.0], [3.0, 4.0]]);
        let stack = log_stack(vec![img.clone(); 5]);
        let bank = build_filter_bank("haar").unwrap();
        let cs = build_coeff_stack(&stack, &bank, 1, Boundary::Periodic, false).unwrap();
        assert_eq!(cs.n(), 5);
        let mean = cs.mean_coeffs();
        for c in cs.coeffs() {
            for (a, b) in c.iter().zip(mean.iter()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn level_zero_keeps_pixels() {
        let img = arr2(&[[1.0, 2.0], [3.0, 4.0]]);
        let stack = log_stack(vec![img.clone()]);
        let bank = build_filter_bank("db2").unwrap();
        let cs = build_coeff_stack(&stack, &bank, 0, Boundary::Auto, false).unwrap();
        assert_eq!(cs.coeffs()[0], img);
    }

    #[test]
    fn raw_domain_needs_opt_out() {
        let stack = ImageStack::new(
            vec![Array2::zeros((4, 4))],
            Channel::Generic,
            Domain::Raw,
        )
        .unwrap();
        let bank = build_filter_bank("haar").unwrap();
        assert!(matches!(
            build_coeff_stack(&stack, &bank, 1, Boundary::Auto, false),
            Err(Error::NotLogDomain)
        ));
        assert!(build_coeff_stack(&stack, &bank, 1, Boundary::Auto, true).is_ok());
    }

    #[test]
    fn apportionment_two_point_example() {
        // two 1x1 coefficient grids 0 and 2: total 4, mean term 2, deviation 2
        let stack = log_stack(vec![
            Array2::from_elem((1, 1), 0.0),
            Array2::from_elem((1, 1), 2.0),
        ]);
        let bank = build_filter_bank("haar").unwrap();
        let cs = build_coeff_stack(&stack, &bank, 0, Boundary::Auto, false).unwrap();
        let ea = energy_apportionment(&cs).unwrap();
        assert_eq!(ea.total, 4.0);
        assert_eq!(ea.mean_term, 2.0);
        assert_eq!(ea.deviation_term, 2.0);
        assert!(ea.residual < 1e-15);
    }

    #[test]
    fn identical_images_have_zero_deviation() {
        let img = arr2(&[[1.0, 2.0], [3.0, 4.0]]);
        let stack = log_stack(vec![img; 4]);
        let bank = build_filter_bank("haar").unwrap();
        let cs = build_coeff_stack(&stack, &bank, 1, Boundary::Periodic, false).unwrap();
        let ea = energy_apportionment(&cs).unwrap();
        assert!(ea.deviation_term.abs() < 1e-12);
        assert!((ea.total - ea.mean_term).abs() < 1e-12 * ea.total.max(1.0));
    }

    #[test]
    fn append_matches_push() {
        let bank = build_filter_bank("haar").unwrap();
        let imgs: Vec<Array2<f64>> = (0..3)
            .map(|m| Array2::from_shape_fn((4, 4), |(i, j)| (m * 16 + i * 4 + j) as f64))
            .collect();
        let stack = log_stack(imgs.clone());
        let batch = build_coeff_stack(&stack, &bank, 1, Boundary::Periodic, false).unwrap();

        let mut grown = CoeffStack::builder(Basis::Haar, 1, Boundary::Periodic, (4, 4));
        for img in &imgs[..2] {
            grown.push_image(img).unwrap();
        }
        let grown = grown.append_image(&imgs[2]).unwrap();
        assert_eq!(grown.n(), 3);
        assert_eq!(grown.mean_coeffs(), batch.mean_coeffs());
        for (a, b) in grown.coeffs().iter().zip(batch.coeffs()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn append_dims_checked() {
        let mut cs = CoeffStack::builder(Basis::Haar, 1, Boundary::Auto, (4, 4));
        cs.push_image(&Array2::zeros((4, 4))).unwrap();
        assert!(cs.append_image(&Array2::zeros((4, 6))).is_err());
    }

    #[test]
    fn append_to_singleton_averages() {
        let mut cs = CoeffStack::builder(Basis::Haar, 0, Boundary::Auto, (1, 1));
        cs.push_image(&Array2::from_elem((1, 1), 2.0)).unwrap();
        let cs = cs.append_image(&Array2::from_elem((1, 1), 4.0)).unwrap();
        assert_eq!(cs.mean_coeffs()[(0, 0)], 3.0);
    }
}
