//! Thin-lens defocus model.
//!
//! The pipeline is: depth + lens parameters -> per-pixel circle of confusion
//! ([`compute_coc_map`]) -> one soft-boundary disk kernel per pixel
//! ([`build_soft_disk_kernel`]) -> normalized scatter of every source pixel
//! through its own kernel ([`render_defocus`]). [`render_adjoint`] pulls an
//! output cotangent back to the image samples and the four scalar lens
//! parameters.

mod adjoint;
mod coc;
mod kernel;
mod render;

pub use adjoint::{render_adjoint, LensGradients};
pub use coc::{coc_length, compute_coc_map, SINGULARITY_EPS};
pub use kernel::{build_soft_disk_kernel, SoftDiskKernel};
pub use render::render_defocus;

use crate::error::{Error, Result};
use crate::raster::{DepthMap, RasterImage};

/// The eight f-stops used to score blur monotonicity.
pub const SWEEP_APERTURES: [f64; 8] = [1.8, 2.8, 4.0, 5.6, 8.0, 11.0, 16.0, 22.0];

/// Sensor width assumed when converting CoC lengths to pixels (full frame).
pub const SENSOR_WIDTH_MM: f64 = 36.0;

/// Default CoC ceiling at a 1024 px wide image; scaled with width.
pub const COC_MAX_AT_1024: f64 = 64.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LensParams {
    /// Focal length in millimetres.
    pub focal_length: f64,
    pub f_number: f64,
    /// Depth of the sharp plane, in depth-map units.
    pub focus_distance: f64,
    /// Multiplier on the focus distance inside the CoC denominator.
    pub focus_scale: f64,
    /// Converts a CoC length into pixels.
    pub pixels_per_unit: f64,
    /// CoC diameters are clamped to this many pixels.
    pub coc_max_px: f64,
}

impl LensParams {
    /// Parameters with the width-derived defaults for the sensor bridge and clamp.
    pub fn for_width(
        width: usize,
        focal_length: f64,
        f_number: f64,
        focus_distance: f64,
    ) -> Self {
        Self {
            focal_length,
            f_number,
            focus_distance,
            focus_scale: 1.0,
            pixels_per_unit: default_pixels_per_unit(width),
            coc_max_px: default_coc_max(width),
        }
    }

    pub fn with_f_number(self, f_number: f64) -> Self {
        Self { f_number, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("must be finite and > 0, got {v}")))
            }
        };
        positive("focal_length", self.focal_length)?;
        positive("f_number", self.f_number)?;
        positive("focus_scale", self.focus_scale)?;
        positive("pixels_per_unit", self.pixels_per_unit)?;
        if !self.focus_distance.is_finite() {
            return Err(Error::invalid("focus_distance", "must be finite"));
        }
        if !(self.coc_max_px.is_finite() && self.coc_max_px >= 0.0) {
            return Err(Error::invalid(
                "coc_max_px",
                format!("must be finite and >= 0, got {}", self.coc_max_px),
            ));
        }
        let gap = (self.focus_scale * self.focus_distance - self.focal_length).abs();
        if gap < SINGULARITY_EPS {
            return Err(Error::SingularLens { gap });
        }
        Ok(())
    }
}

pub fn default_pixels_per_unit(width: usize) -> f64 {
    width as f64 / SENSOR_WIDTH_MM
}

pub fn default_coc_max(width: usize) -> f64 {
    COC_MAX_AT_1024 * width as f64 / 1024.0
}

/// A lens that turns an all-in-focus image plus depth into a defocused image.
///
/// Implementations can be swapped at inference time; the service holds one
/// behind `Arc<dyn LensModel>`.
pub trait LensModel: Send + Sync {
    fn name(&self) -> &'static str;

    fn render(&self, image: &RasterImage, depth: &DepthMap, lens: &LensParams)
        -> Result<RasterImage>;

    /// One render per f-number with every other parameter held fixed.
    fn sweep(
        &self,
        image: &RasterImage,
        depth: &DepthMap,
        base: &LensParams,
        f_numbers: &[f64],
    ) -> Result<Vec<RasterImage>> {
        check_ascending(f_numbers)?;
        f_numbers
            .iter()
            .map(|&n| self.render(image, depth, &base.with_f_number(n)))
            .collect()
    }
}

/// Differentiable thin lens with soft disk kernels and normalized splatting.
#[derive(Debug, Clone, Copy, Default)]
pub struct ThinLens;

impl LensModel for ThinLens {
    fn name(&self) -> &'static str {
        "thin_lens"
    }

    fn render(
        &self,
        image: &RasterImage,
        depth: &DepthMap,
        lens: &LensParams,
    ) -> Result<RasterImage> {
        render_defocus(image, depth, lens)
    }
}

/// Ignores the lens and returns the input; the all-in-focus reference.
#[derive(Debug, Clone, Copy, Default)]
pub struct Pinhole;

impl LensModel for Pinhole {
    fn name(&self) -> &'static str {
        "pinhole"
    }

    fn render(
        &self,
        image: &RasterImage,
        depth: &DepthMap,
        lens: &LensParams,
    ) -> Result<RasterImage> {
        lens.validate()?;
        crate::raster::check_dims(image.dims(), depth.dims())?;
        Ok(image.clone())
    }
}

pub fn sweep_apertures(
    image: &RasterImage,
    depth: &DepthMap,
    base: &LensParams,
    f_numbers: &[f64],
) -> Result<Vec<RasterImage>> {
    ThinLens.sweep(image, depth, base, f_numbers)
}

pub(crate) fn check_ascending(f_numbers: &[f64]) -> Result<()> {
    if f_numbers.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::AperturesNotAscending);
    }
    Ok(())
}
