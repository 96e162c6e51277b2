//! Synthetic multi-temporal ellipse scenes with ground truth, plus speckle
//! and Gaussian noise models.
//!
//! A scene starts from a fixed background of ellipses and accumulates
//! change waves: every ellipse has an onset time, and image m shows all
//! ellipses with onset <= m. Ground truth marks every pixel that differs
//! from the first image at any later time.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stack::{Channel, Domain, ImageStack};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EllipseSpec {
    /// Center in continuous pixel coordinates (row, col).
    pub center: (f64, f64),
    /// Semi-axes (a, b) in pixels, measured along the rotated frame.
    pub semi_axes: (f64, f64),
    /// Rotation of the a-axis, radians, counterclockwise in (row, col).
    pub rotation: f64,
    /// Intensity added to every covered pixel.
    pub amplitude: f64,
    /// First image index (1-based) at which the ellipse is present.
    pub onset: usize,
}

impl EllipseSpec {
    fn covers(&self, row: usize, col: usize) -> bool {
        // pixel centers sit at half-integer coordinates
        let dr = row as f64 + 0.5 - self.center.0;
        let dc = col as f64 + 0.5 - self.center.1;
        let (sin, cos) = self.rotation.sin_cos();
        let x = dr * cos + dc * sin;
        let y = -dr * sin + dc * cos;
        let (a, b) = self.semi_axes;
        (x / a) * (x / a) + (y / b) * (y / b) <= 1.0
    }

    fn validate(&self, dims: (usize, usize), n: usize) -> Result<()> {
        let (a, b) = self.semi_axes;
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::BadParam {
                what: format!("ellipse semi-axes must be positive, got ({a}, {b})"),
            });
        }
        if !(self.amplitude >= 0.0) || !self.amplitude.is_finite() {
            return Err(Error::BadParam {
                what: format!("ellipse amplitude must be >= 0, got {}", self.amplitude),
            });
        }
        if self.onset < 1 || self.onset > n {
            return Err(Error::BadParam {
                what: format!("ellipse onset {} outside 1..={n}", self.onset),
            });
        }
        let r = a.max(b);
        let (cr, cc) = self.center;
        if cr - r < 0.0 || cc - r < 0.0 || cr + r > dims.0 as f64 || cc + r > dims.1 as f64 {
            return Err(Error::OutOfBounds {
                what: "ellipse",
                detail: format!(
                    "center ({cr}, {cc}) radius {r} exceeds {}x{} image",
                    dims.0, dims.1
                ),
            });
        }
        Ok(())
    }
}

/// A noiseless scene: the image stack, the pixels newly changed at each
/// step, and their union.
#[derive(Debug, Clone)]
pub struct SceneSequence {
    pub images: ImageStack,
    /// Pixels that differ from the first image at any later time.
    pub truth_mask: Array2<bool>,
    /// (m, mask) pairs for m = 2..=n: pixels where image m differs from m-1.
    pub per_step_masks: Vec<(usize, Array2<bool>)>,
}

impl SceneSequence {
    pub fn dims(&self) -> (usize, usize) {
        self.images.dims()
    }

    pub fn n(&self) -> usize {
        self.images.n()
    }
}

/// Rasterize the cumulative ellipse scene.
///
/// `base` ellipses must have onset 1 (present from the start, never part of
/// the ground truth unless re-covered); `changes` must have onset >= 2.
pub fn gen_ellipse_scene(
    dims: (usize, usize),
    base: &[EllipseSpec],
    changes: &[EllipseSpec],
    n: usize,
) -> Result<SceneSequence> {
    if n < 2 {
        return Err(Error::BadParam {
            what: format!("scene needs n >= 2 images, got {n}"),
        });
    }
    if dims.0 == 0 || dims.1 == 0 {
        return Err(Error::BadParam {
            what: "scene dimensions must be nonzero".into(),
        });
    }
    for e in base {
        e.validate(dims, n)?;
        if e.onset != 1 {
            return Err(Error::BadParam {
                what: format!("base ellipse has onset {}, expected 1", e.onset),
            });
        }
    }
    for e in changes {
        e.validate(dims, n)?;
        if e.onset < 2 {
            return Err(Error::BadParam {
                what: format!("change ellipse has onset {}, expected >= 2", e.onset),
            });
        }
    }
    let all: Vec<&EllipseSpec> = base.iter().chain(changes).collect();
    let mut images = Vec::with_capacity(n);
    for m in 1..=n {
        let img = Array2::from_shape_fn(dims, |(i, j)| {
            all.iter()
                .filter(|e| e.onset <= m && e.covers(i, j))
                .map(|e| e.amplitude)
                .sum()
        });
        images.push(img);
    }
    let mut per_step_masks = Vec::with_capacity(n - 1);
    let mut truth_mask = Array2::from_elem(dims, false);
    for m in 2..=n {
        let mask = Array2::from_shape_fn(dims, |idx| images[m - 1][idx] != images[m - 2][idx]);
        truth_mask.zip_mut_with(&mask, |t, &s| *t = *t || s);
        per_step_masks.push((m, mask));
    }
    Ok(SceneSequence {
        images: ImageStack::new(images, Channel::Generic, Domain::Raw)?,
        truth_mask,
        per_step_masks,
    })
}

/// Scene geometry in the style of the reference synthetic study: three
/// elongated base ellipses, then a wave of large ellipses, a wave of small
/// ones, and a wave of dots. Geometry scales with `dims` from a 256x256
/// reference layout.
pub fn reference_scene(dims: (usize, usize), n: usize) -> Result<SceneSequence> {
    let (base, changes) = reference_specs(dims, n)?;
    gen_ellipse_scene(dims, &base, &changes, n)
}

/// The ellipse lists behind [`reference_scene`].
pub fn reference_specs(
    dims: (usize, usize),
    n: usize,
) -> Result<(Vec<EllipseSpec>, Vec<EllipseSpec>)> {
    if n < 2 {
        return Err(Error::BadParam {
            what: format!("scene needs n >= 2 images, got {n}"),
        });
    }
    let sr = dims.0 as f64 / 256.0;
    let sc = dims.1 as f64 / 256.0;
    let s = sr.min(sc);
    let el = |cr: f64, cc: f64, a: f64, b: f64, rot: f64, onset: usize| EllipseSpec {
        center: (cr * sr, cc * sc),
        semi_axes: ((a * s).max(0.75), (b * s).max(0.75)),
        rotation: rot,
        amplitude: 2.0,
        onset,
    };
    let base = vec![
        el(64.0, 60.0, 40.0, 11.0, 0.55, 1),
        el(128.0, 176.0, 46.0, 13.0, -0.75, 1),
        el(204.0, 76.0, 34.0, 10.0, 1.2, 1),
    ];
    let mut changes = vec![
        // wave 1: large ellipses
        el(72.0, 178.0, 27.0, 21.0, 0.3, 2),
        el(190.0, 190.0, 29.0, 19.0, -0.2, 2),
        // wave 2: small ellipses
        el(40.0, 120.0, 10.0, 7.0, 0.0, 3),
        el(150.0, 52.0, 9.0, 6.0, 0.8, 3),
        el(226.0, 150.0, 8.0, 8.0, 0.0, 3),
        // wave 3: dots
        el(26.0, 30.0, 1.6, 1.6, 0.0, 4),
        el(96.0, 120.0, 1.6, 1.2, 0.4, 4),
        el(130.0, 26.0, 1.2, 1.2, 0.0, 4),
        el(210.0, 226.0, 1.6, 1.6, 0.0, 4),
        el(58.0, 220.0, 1.2, 1.6, 0.0, 4),
    ];
    // drop waves that would land past the end of a short sequence
    changes.retain(|e| e.onset <= n);
    Ok((base, changes))
}

/// Noise applied to a clean stack.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseModel {
    /// Multiplicative speckle: pixel -> (pixel + offset) * G with
    /// G ~ Gamma(shape = looks, scale = 1/looks), i.i.d. per pixel.
    /// The offset keeps the background nonconstant under noise.
    Gamma { looks: f64, offset: f64 },
    /// pixel -> pixel + N(0, sigma^2).
    Gaussian { sigma: f64 },
}

impl NoiseModel {
    pub fn gamma(looks: f64) -> NoiseModel {
        NoiseModel::Gamma { looks, offset: 1.0 }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            NoiseModel::Gamma { looks, offset } => {
                if !(looks >= 1.0) || !looks.is_finite() {
                    return Err(Error::BadParam {
                        what: format!("gamma looks must be >= 1, got {looks}"),
                    });
                }
                if !(offset >= 0.0) || !offset.is_finite() {
                    return Err(Error::BadParam {
                        what: format!("gamma offset must be >= 0, got {offset}"),
                    });
                }
            }
            NoiseModel::Gaussian { sigma } => {
                if !(sigma >= 0.0) || !sigma.is_finite() {
                    return Err(Error::BadParam {
                        what: format!("gaussian sigma must be >= 0, got {sigma}"),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Noisy replicate of a stack; deterministic in (seed, image index): image
/// m draws from its own generator stream, so parallel generation and any
/// later appends see the identical noise field.
pub fn add_speckle(stack: &ImageStack, model: NoiseModel, seed: u64) -> Result<ImageStack> {
    model.validate()?;
    let mut images = Vec::with_capacity(stack.n());
    for (m, img) in stack.images().iter().enumerate() {
        images.push(noisy_image(img, model, seed, m)?);
    }
    ImageStack::new(images, stack.channel, stack.domain)
}

/// Noise one image as [`add_speckle`] would at stack position `index`.
pub fn noisy_image(
    img: &Array2<f64>,
    model: NoiseModel,
    seed: u64,
    index: usize,
) -> Result<Array2<f64>> {
    model.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let mut out = img.clone();
    match model {
        NoiseModel::Gamma { looks, offset } => {
            let gamma = Gamma::new(looks, 1.0 / looks).expect("validated");
            for v in out.iter_mut() {
                if *v < 0.0 {
                    return Err(Error::BadParam {
                        what: format!("multiplicative noise needs pixels >= 0, got {v}"),
                    });
                }
                *v = (*v + offset) * gamma.sample(&mut rng);
            }
        }
        NoiseModel::Gaussian { sigma } => {
            let normal = Normal::new(0.0, 1.0).expect("validated");
            for v in out.iter_mut() {
                *v += sigma * normal.sample(&mut rng);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_scene_is_zero() {
        let scene = gen_ellipse_scene((16, 16), &[], &[], 3).unwrap();
        assert_eq!(scene.n(), 3);
        for img in scene.images.images() {
            assert!(img.iter().all(|&v| v == 0.0));
        }
        assert!(!scene.truth_mask.iter().any(|&b| b));
        for (_, m) in &scene.per_step_masks {
            assert!(!m.iter().any(|&b| b));
        }
    }

    #[test]
    fn reference_scene_structure() {
        let scene = reference_scene((256, 256), 4).unwrap();
        assert_eq!(scene.per_step_masks.len(), 3);
        for (m, mask) in &scene.per_step_masks {
            let count = mask.iter().filter(|&&b| b).count();
            assert!(count > 0, "no change at step {m}");
        }
        // truth is the union of the step masks
        let mut union = Array2::from_elem(scene.dims(), false);
        for (_, mask) in &scene.per_step_masks {
            union.zip_mut_with(mask, |u, &s| *u = *u || s);
        }
        assert_eq!(scene.truth_mask, union);
        // base ellipses alone never enter the truth
        let first = &scene.images.images()[0];
        let last = &scene.images.images()[3];
        for ((i, j), &t) in scene.truth_mask.indexed_iter() {
            assert_eq!(t, first[(i, j)] != last[(i, j)]);
        }
    }

    #[test]
    fn ellipse_area_close_to_analytic() {
        let e = EllipseSpec {
            center: (32.0, 32.0),
            semi_axes: (10.0, 5.0),
            rotation: 0.0,
            amplitude: 1.0,
            onset: 2,
        };
        let scene = gen_ellipse_scene((64, 64), &[], &[e], 2).unwrap();
        let count = scene.truth_mask.iter().filter(|&&b| b).count() as f64;
        let area = std::f64::consts::PI * 10.0 * 5.0;
        assert!(
            (count - area).abs() / area < 0.05,
            "count {count} vs area {area}"
        );
    }

    #[test]
    fn cumulative_monotone() {
        let scene = reference_scene((128, 128), 4).unwrap();
        let imgs = scene.images.images();
        for m in 0..3 {
            for (a, b) in imgs[m].iter().zip(imgs[m + 1].iter()) {
                assert!(b >= a);
            }
        }
    }

    #[test]
    fn out_of_bounds_rejected() {
        let e = EllipseSpec {
            center: (5.0, 5.0),
            semi_axes: (10.0, 5.0),
            rotation: 0.0,
            amplitude: 1.0,
            onset: 2,
        };
        assert!(matches!(
            gen_ellipse_scene((64, 64), &[], &[e], 2),
            Err(Error::OutOfBounds { .. })
        ));
    }

    #[test]
    fn zero_sigma_is_identity() {
        let scene = reference_scene((32, 32), 2).unwrap();
        let noisy = add_speckle(&scene.images, NoiseModel::Gaussian { sigma: 0.0 }, 7).unwrap();
        for (a, b) in scene.images.images().iter().zip(noisy.images()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn same_seed_bit_identical() {
        let scene = reference_scene((32, 32), 3).unwrap();
        let a = add_speckle(&scene.images, NoiseModel::gamma(4.0), 99).unwrap();
        let b = add_speckle(&scene.images, NoiseModel::gamma(4.0), 99).unwrap();
        for (x, y) in a.images().iter().zip(b.images()) {
            assert_eq!(x, y);
        }
        let c = add_speckle(&scene.images, NoiseModel::gamma(4.0), 100).unwrap();
        assert_ne!(a.images()[0], c.images()[0]);
    }

    #[test]
    fn gamma_moments() {
        // offset 0 on a constant-1 image exposes the raw noise field
        let img = Array2::from_elem((256, 256), 1.0);
        let stack = ImageStack::new(vec![img], Channel::Generic, Domain::Raw).unwrap();
        let noisy = add_speckle(
            &stack,
            NoiseModel::Gamma {
                looks: 4.0,
                offset: 0.0,
            },
            1234,
        )
        .unwrap();
        let field = &noisy.images()[0];
        let n = field.len() as f64;
        let mean = field.iter().sum::<f64>() / n;
        let var = field.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        assert!((0.99..=1.01).contains(&mean), "mean {mean}");
        assert!((var - 0.25).abs() < 0.025, "var {var}");
    }

    #[test]
    fn per_image_streams_are_independent_of_order() {
        let scene = reference_scene((16, 16), 3).unwrap();
        let full = add_speckle(&scene.images, NoiseModel::gamma(4.0), 5).unwrap();
        // noising image 2 alone reproduces its slice of the full run
        let lone = noisy_image(&scene.images.images()[2], NoiseModel::gamma(4.0), 5, 2).unwrap();
        assert_eq!(full.images()[2], lone);
    }
}
