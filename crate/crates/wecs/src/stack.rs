//! Time-ordered image stacks and the raw-to-log pipeline steps.

use chrono::{DateTime, FixedOffset};
use ndarray::Array2;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    VV,
    VH,
    Combined,
    Generic,
}

impl Channel {
    pub fn name(self) -> &'static str {
        match self {
            Channel::VV => "vv",
            Channel::VH => "vh",
            Channel::Combined => "combined",
            Channel::Generic => "generic",
        }
    }
}

/// Whether pixel values are raw intensities or natural logs thereof.
/// Carried explicitly so the analysis can refuse accidental double logs
/// or raw-domain screening.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Raw,
    Log,
}

#[derive(Debug, Clone)]
pub struct ImageStack {
    images: Vec<Array2<f64>>,
    pub channel: Channel,
    pub domain: Domain,
    timestamps: Option<Vec<DateTime<FixedOffset>>>,
}

impl ImageStack {
    pub fn new(images: Vec<Array2<f64>>, channel: Channel, domain: Domain) -> Result<ImageStack> {
        if images.is_empty() {
            return Err(Error::TooFewImages { need: 1, got: 0 });
        }
        let dims = images[0].dim();
        for (i, m) in images.iter().enumerate() {
            if m.dim() != dims {
                return Err(Error::DimsMismatch {
                    what: "stack image",
                    expected_rows: dims.0,
                    expected_cols: dims.1,
                    got_rows: m.nrows(),
                    got_cols: m.ncols(),
                });
            }
            let _ = i;
        }
        Ok(ImageStack {
            images,
            channel,
            domain,
            timestamps: None,
        })
    }

    /// Attach per-image acquisition times; must be strictly increasing.
    pub fn with_timestamps(mut self, ts: Vec<DateTime<FixedOffset>>) -> Result<ImageStack> {
        if ts.len() != self.images.len() {
            return Err(Error::LengthMismatch {
                what: "timestamps",
                expected: self.images.len(),
                got: ts.len(),
            });
        }
        for w in ts.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Manifest {
                    detail: format!("timestamps not strictly increasing: {} then {}", w[0], w[1]),
                });
            }
        }
        self.timestamps = Some(ts);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.images.len()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.images[0].dim()
    }

    pub fn images(&self) -> &[Array2<f64>] {
        &self.images
    }

    pub fn into_images(self) -> Vec<Array2<f64>> {
        self.images
    }

    pub fn timestamps(&self) -> Option<&[DateTime<FixedOffset>]> {
        self.timestamps.as_deref()
    }
}

/// Pixel-wise natural log with a positive floor, moving the stack into the
/// log domain. Zeros are common in SAR intensities; the floor keeps them
/// finite instead of mapping to -inf.
pub fn log_transform(raw: &ImageStack, floor: f64) -> Result<ImageStack> {
    if raw.domain != Domain::Raw {
        return Err(Error::NotRawDomain);
    }
    if !(floor > 0.0) || !floor.is_finite() {
        return Err(Error::BadParam {
            what: format!("log floor must be a positive finite number, got {floor}"),
        });
    }
    let mut images = Vec::with_capacity(raw.n());
    for m in raw.images() {
        for ((r, c), &v) in m.indexed_iter() {
            if v < 0.0 {
                return Err(Error::NegativePixel {
                    row: r,
                    col: c,
                    value: v,
                });
            }
        }
        images.push(m.mapv(|v| v.max(floor).ln()));
    }
    let mut out = ImageStack::new(images, raw.channel, Domain::Log)?;
    out.timestamps = raw.timestamps.clone();
    Ok(out)
}

pub const DEFAULT_LOG_FLOOR: f64 = 1e-10;

/// Pixel-wise Euclidean norm of two co-registered raw channels. Applied
/// before the log transform; the combined stack goes through
/// [`log_transform`] like any single channel.
pub fn combine_channels_euclid(a: &ImageStack, b: &ImageStack) -> Result<ImageStack> {
    if a.domain != Domain::Raw || b.domain != Domain::Raw {
        return Err(Error::NotRawDomain);
    }
    if a.n() != b.n() {
        return Err(Error::LengthMismatch {
            what: "channel stacks",
            expected: a.n(),
            got: b.n(),
        });
    }
    if a.dims() != b.dims() {
        return Err(Error::DimsMismatch {
            what: "channel stacks",
            expected_rows: a.dims().0,
            expected_cols: a.dims().1,
            got_rows: b.dims().0,
            got_cols: b.dims().1,
        });
    }
    let images = a
        .images()
        .iter()
        .zip(b.images())
        .map(|(x, y)| {
            let mut out = x.clone();
            out.zip_mut_with(y, |p, &q| *p = p.hypot(q));
            out
        })
        .collect();
    let mut out = ImageStack::new(images, Channel::Combined, Domain::Raw)?;
    out.timestamps = a.timestamps.clone();
    Ok(out)
}
