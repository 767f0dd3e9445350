//! Differentiable thin-lens defocus rendering.
//!
//! * [`lens`]: circle of confusion, soft disk kernels, normalized splat
//!   renderer and its adjoint.
//! * [`focus`]: saliency-weighted focus distance, Huber supervision and
//!   lens parameter resolution.
//! * [`metrics`]: signal energy, blur monotonicity, content consistency and
//!   the circular-convolution energy check.
//! * [`exif`]: EXIF parsing and depth-of-field dataset filters.
//! * [`io`]: PNG, PFM, raw depth and label stack formats.

pub mod error;
pub mod exif;
pub mod focus;
pub mod io;
pub mod lens;
pub mod metrics;
pub mod raster;
pub mod synthetic;

pub use error::{Error, Result};
pub use lens::{LensModel, LensParams, ThinLens};
pub use raster::{CocMap, CocStats, DepthMap, Plane, RasterImage};
