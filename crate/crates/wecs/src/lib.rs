//! Unsupervised change detection on multi-temporal image stacks.
//!
//! The pipeline: log-transform the images, keep only the level-J wavelet
//! approximation coefficients, observe how each coefficient's squared
//! deviation (from the temporal mean, or from the previous time point)
//! tracks the stack-wide change energy, and screen coefficients by the
//! absolute Pearson correlation of the two. High-correlation sites are
//! where changes happen; threshold sweeps over the correlation map give
//! ROC curves against ground truth.
//!
//! Modules follow the data flow: [`dwt`] produces coefficient grids,
//! [`stack`]/[`coeff`]/[`change`] build the temporal cubes and change
//! signals, [`screening`] computes the correlation maps and selection
//! masks, [`synth`] generates reference scenes, [`eval`] scores detectors,
//! [`io`] carries the file formats, and [`pipeline`] wires it all into the
//! runs behind the `wecs` binary.

pub mod change;
pub mod coeff;
pub mod dwt;
pub mod error;
pub mod eval;
pub mod io;
pub mod pipeline;
pub mod screening;
pub mod stack;
pub mod synth;
pub mod util;

pub use error::{Error, Result};
