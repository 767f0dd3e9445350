//! Raster containers shared by every stage of the pipeline.
//!
//! All samples are `f64` in row-major order. Colour images interleave their
//! channels per pixel; scalar fields (depth, saliency, circle of confusion)
//! wrap a single-channel [`Plane`].

use crate::error::{Error, Result};

/// Linear-light image with 1 or 3 interleaved channels.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidRaster(format!(
                "image must be at least 1x1, got {width}x{height}"
            )));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidRaster(format!(
                "images have 1 or 3 channels, got {channels}"
            )));
        }
        if data.len() != width * height * channels {
            return Err(Error::InvalidRaster(format!(
                "expected {} samples, got {}",
                width * height * channels,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidRaster(format!("non-finite sample at index {i}")));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f64) -> Result<Self> {
        Self::new(width, height, channels, vec![value; width * height * channels])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    data.push(f(x, y, c));
                }
            }
        }
        Self::new(width, height, channels, data)
    }

    pub(crate) fn from_parts_unchecked(
        width: usize,
        height: usize,
        channels: usize,
        data: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(data.len(), width * height * channels);
        Self {
            width,
            height,
            channels,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, x: usize, y: usize, c: usize) -> f64 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    /// Returns a copy with one sample replaced. Used by finite-difference checks.
    pub fn with_sample(&self, index: usize, value: f64) -> Result<Self> {
        let mut data = self.data.clone();
        data[index] = value;
        Self::new(self.width, self.height, self.channels, data)
    }

    /// Largest absolute per-sample difference; `None` when shapes differ.
    pub fn max_abs_diff(&self, other: &RasterImage) -> Option<f64> {
        if self.dims() != other.dims() || self.channels != other.channels {
            return None;
        }
        Some(
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        )
    }
}

/// Single-channel float field.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Plane {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidRaster(format!(
                "plane must be at least 1x1, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::InvalidRaster(format!(
                "expected {} samples, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

/// Per-pixel scene depth; every sample is finite and strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap(Plane);

impl DepthMap {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        Self::from_plane(Plane::new(width, height, data)?)
    }

    pub fn from_plane(plane: Plane) -> Result<Self> {
        for (i, &d) in plane.data.iter().enumerate() {
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::InvalidDepth {
                    x: i % plane.width,
                    y: i / plane.width,
                    value: d,
                });
            }
        }
        Ok(Self(plane))
    }

    pub fn uniform(width: usize, height: usize, depth: f64) -> Result<Self> {
        Self::new(width, height, vec![depth; width * height])
    }

    pub fn plane(&self) -> &Plane {
        &self.0
    }

    pub fn width(&self) -> usize {
        self.0.width
    }

    pub fn height(&self) -> usize {
        self.0.height
    }

    pub fn dims(&self) -> (usize, usize) {
        self.0.dims()
    }

    pub fn data(&self) -> &[f64] {
        &self.0.data
    }

    pub fn range(&self) -> (f64, f64) {
        self.0.min_max()
    }

    /// Equal-width histogram over `[min, max]`. A flat map puts everything in the first bin.
    pub fn histogram(&self, bins: usize) -> Vec<u64> {
        let bins = bins.max(1);
        let (lo, hi) = self.range();
        let mut counts = vec![0u64; bins];
        let span = hi - lo;
        for &d in self.data() {
            let idx = if span > 0.0 {
                (((d - lo) / span) * bins as f64).floor() as usize
            } else {
                0
            };
            counts[idx.min(bins - 1)] += 1;
        }
        counts
    }
}

/// Per-pixel circle-of-confusion diameters in pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct CocMap(Plane);

impl CocMap {
    pub(crate) fn from_plane(plane: Plane) -> Self {
        Self(plane)
    }

    pub fn plane(&self) -> &Plane {
        &self.0
    }

    pub fn dims(&self) -> (usize, usize) {
        self.0.dims()
    }

    pub fn data(&self) -> &[f64] {
        &self.0.data
    }

    pub fn stats(&self) -> CocStats {
        let (min, max) = self.0.min_max();
        let mean = self.0.data.iter().sum::<f64>() / self.0.data.len() as f64;
        CocStats { min, mean, max }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CocStats {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

pub(crate) fn check_dims(expected: (usize, usize), found: (usize, usize)) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes() {
        assert!(RasterImage::new(0, 1, 1, vec![]).is_err());
        assert!(RasterImage::new(2, 2, 2, vec![0.0; 8]).is_err());
        assert!(RasterImage::new(2, 2, 1, vec![0.0; 3]).is_err());
        assert!(RasterImage::new(1, 1, 1, vec![f64::NAN]).is_err());
    }

    #[test]
    fn depth_must_be_positive() {
        let err = DepthMap::new(2, 1, vec![1.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::InvalidDepth { x: 1, y: 0, .. }));
        assert!(DepthMap::new(1, 1, vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn histogram_counts_everything() {
        let d = DepthMap::new(4, 1, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(d.histogram(2), vec![2, 2]);
        let flat = DepthMap::uniform(3, 3, 5.0).unwrap();
        assert_eq!(flat.histogram(4), vec![9, 0, 0, 0]);
    }
}
