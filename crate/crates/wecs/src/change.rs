//! Deviation and transition cubes and their change signals.
//!
//! For a coefficient stack X(1)..X(n) with temporal mean X-bar, the d-cube
//! holds (X(m) - X-bar)^2 per site and the t-cube (X(m+1) - X(m))^2.
//! Summing a cube entry over all sites gives the corresponding change
//! signal value: d(m) locates when the stack deviates from its mean state,
//! t(m) when consecutive images differ most.

use ndarray::Array2;
use rayon::prelude::*;

use crate::coeff::CoeffStack;
use crate::error::{Error, Result};
use crate::util::comp_sum;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    /// Squared deviation from the temporal mean; series length n.
    D,
    /// Squared transition between consecutive times; series length n - 1.
    T,
}

impl SeriesKind {
    pub fn name(self) -> &'static str {
        match self {
            SeriesKind::D => "d",
            SeriesKind::T => "t",
        }
    }
}

/// Per-site squared deviation (or transition) grids, one per time step.
#[derive(Debug, Clone)]
pub struct DeviationCube {
    pub kind: SeriesKind,
    pub entries: Vec<Array2<f64>>,
}

impl DeviationCube {
    pub fn grid_dims(&self) -> (usize, usize) {
        self.entries[0].dim()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Total change energy per time step.
#[derive(Debug, Clone)]
pub struct ChangeSignal {
    pub kind: SeriesKind,
    pub values: Vec<f64>,
}

impl ChangeSignal {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Squared deviation of every coefficient from its temporal mean.
pub fn deviation_cube(cs: &CoeffStack) -> Result<DeviationCube> {
    if cs.n() < 2 {
        return Err(Error::TooFewImages {
            need: 2,
            got: cs.n(),
        });
    }
    let mean = cs.mean_coeffs();
    let entries = cs
        .coeffs()
        .par_iter()
        .map(|x| {
            let mut e = x.clone();
            e.zip_mut_with(&mean, |v, &m| {
                let d = *v - m;
                *v = d * d;
            });
            e
        })
        .collect();
    Ok(DeviationCube {
        kind: SeriesKind::D,
        entries,
    })
}

/// Squared difference between consecutive coefficient grids.
pub fn transition_cube(cs: &CoeffStack) -> Result<DeviationCube> {
    if cs.n() < 2 {
        return Err(Error::TooFewImages {
            need: 2,
            got: cs.n(),
        });
    }
    let coeffs = cs.coeffs();
    let entries = (0..cs.n() - 1)
        .into_par_iter()
        .map(|m| {
            let mut e = coeffs[m + 1].clone();
            e.zip_mut_with(&coeffs[m], |v, &prev| {
                let d = *v - prev;
                *v = d * d;
            });
            e
        })
        .collect();
    Ok(DeviationCube {
        kind: SeriesKind::T,
        entries,
    })
}

/// Collapse each cube entry to its total energy.
pub fn change_signal(cube: &DeviationCube) -> ChangeSignal {
    let values = cube
        .entries
        .par_iter()
        .map(|e| comp_sum(e.iter().copied()))
        .collect();
    ChangeSignal {
        kind: cube.kind,
        values,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::CoeffStack;
    use crate::dwt::{Basis, Boundary};
    use ndarray::Array2;

    fn pixel_stack(values: &[f64]) -> CoeffStack {
        let mut cs = CoeffStack::builder(Basis::Haar, 0, Boundary::Auto, (1, 1));
        for &v in values {
            cs.push_image(&Array2::from_elem((1, 1), v)).unwrap();
        }
        cs
    }

    #[test]
    fn identical_images_zero_cubes() {
        let cs = pixel_stack(&[2.0, 2.0, 2.0]);
        let d = deviation_cube(&cs).unwrap();
        let t = transition_cube(&cs).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(t.len(), 2);
        assert!(d.entries.iter().all(|e| e[(0, 0)] == 0.0));
        assert!(t.entries.iter().all(|e| e[(0, 0)] == 0.0));
        let sig = change_signal(&d);
        assert!(sig.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn two_point_symmetry() {
        // X = (0, 2): mean 1, so D(1) = D(2) = 1 and d = (1, 1)
        let cs = pixel_stack(&[0.0, 2.0]);
        let d = deviation_cube(&cs).unwrap();
        assert_eq!(d.entries[0][(0, 0)], 1.0);
        assert_eq!(d.entries[1][(0, 0)], 1.0);
        let sig = change_signal(&d);
        assert_eq!(sig.values, vec![1.0, 1.0]);
    }

    #[test]
    fn linear_ramp_unit_transitions() {
        let cs = pixel_stack(&[1.0, 2.0, 3.0, 4.0]);
        let t = transition_cube(&cs).unwrap();
        let sig = change_signal(&t);
        assert_eq!(sig.values, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn single_image_rejected() {
        let cs = pixel_stack(&[1.0]);
        assert!(deviation_cube(&cs).is_err());
        assert!(transition_cube(&cs).is_err());
    }

    #[test]
    fn cubes_match_scalar_loops() {
        // fixed small stack, compared against direct triple loops
        let mut cs = CoeffStack::builder(Basis::Haar, 0, Boundary::Auto, (2, 3));
        let imgs: Vec<Array2<f64>> = (0..4)
            .map(|m| {
                Array2::from_shape_fn((2, 3), |(i, j)| ((m * 7 + i * 3 + j) % 5) as f64 * 0.5)
            })
            .collect();
        for img in &imgs {
            cs.push_image(img).unwrap();
        }
        let d = deviation_cube(&cs).unwrap();
        let t = transition_cube(&cs).unwrap();
        for i in 0..2 {
            for j in 0..3 {
                let series: Vec<f64> = imgs.iter().map(|x| x[(i, j)]).collect();
                let mean = series.iter().sum::<f64>() / 4.0;
                for m in 0..4 {
                    let want = (series[m] - mean).powi(2);
                    assert!((d.entries[m][(i, j)] - want).abs() < 1e-12);
                }
                for m in 0..3 {
                    let want = (series[m + 1] - series[m]).powi(2);
                    assert!((t.entries[m][(i, j)] - want).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn reversal_reverses_transitions() {
        let vals = [0.5, 2.0, 1.25, 4.0, 3.0];
        let fwd = change_signal(&transition_cube(&pixel_stack(&vals)).unwrap());
        let mut rev_vals = vals;
        rev_vals.reverse();
        let rev = change_signal(&transition_cube(&pixel_stack(&rev_vals)).unwrap());
        let mut flipped = rev.values.clone();
        flipped.reverse();
        assert_eq!(fwd.values, flipped);
    }
}
