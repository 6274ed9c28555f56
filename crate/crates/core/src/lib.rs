//! Mask-guided hierarchical image vectorization.
//!
//! A target raster is approximated by a stack of cubic Bézier paths whose
//! control points, colors and stroke widths are fitted by gradient descent
//! through a differentiable rasterizer. Losses can be restricted to object
//! and part masks, and an adaptive control step periodically prunes,
//! splits and clones paths based on where the loss gradient is large.

pub mod control;
pub mod error;
pub mod geometry;
pub mod init;
pub mod io;
pub mod loss;
pub mod masks;
pub mod optimize;
pub mod raster;

pub use error::{Error, Result};
pub use geometry::{Color, GroupLabel, Point, StyleClass, VectorPath};
pub use masks::{BinaryMask, ImportanceMap, MaskSet};
pub use optimize::{run_vectorize, LossMode, RunConfig};
pub use raster::{render, RasterImage, Scene};
