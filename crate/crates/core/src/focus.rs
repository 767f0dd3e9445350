//! Focus distance selection and lens parameter resolution.

use crate::error::{Error, Result};
use crate::exif::ExifRecord;
use crate::lens::{default_coc_max, default_pixels_per_unit, LensParams};
use crate::raster::{check_dims, DepthMap, Plane, RasterImage};

/// Default Huber transition point, in depth units.
pub const DEFAULT_HUBER_DELTA: f64 = 0.1;

pub const DEFAULT_FOCAL_LENGTH_MM: f64 = 50.0;
pub const DEFAULT_F_NUMBER: f64 = 8.0;
pub const DEFAULT_FOCUS_SCALE: f64 = 1.0;

const MIN_SALIENCY_MASS: f64 = 1e-12;

/// Non-negative per-pixel importance weights with positive total mass.
#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyMap(Plane);

impl SaliencyMap {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        Self::from_plane(Plane::new(width, height, data)?)
    }

    pub fn from_plane(plane: Plane) -> Result<Self> {
        if let Some(v) = plane.data().iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidRaster(format!(
                "saliency must be finite and >= 0, found {v}"
            )));
        }
        if !plane.data().iter().any(|&v| v > 0.0) {
            return Err(Error::ZeroSaliencyMass);
        }
        Ok(Self(plane))
    }

    pub fn plane(&self) -> &Plane {
        &self.0
    }

    pub fn dims(&self) -> (usize, usize) {
        self.0.dims()
    }

    pub fn data(&self) -> &[f64] {
        self.0.data()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FocusSource {
    SaliencyWeighted,
    UserOverride,
    Stub,
}

impl FocusSource {
    pub fn as_str(self) -> &'static str {
        match self {
            FocusSource::SaliencyWeighted => "saliency_weighted",
            FocusSource::UserOverride => "user_override",
            FocusSource::Stub => "stub",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocusEstimate {
    pub focus_distance: f64,
    pub source: FocusSource,
}

/// Saliency-weighted mean depth, `sum(d * s) / sum(s)`.
pub fn focus_from_saliency(depth: &DepthMap, saliency: &SaliencyMap) -> Result<FocusEstimate> {
    check_dims(depth.dims(), saliency.dims())?;
    let mass: f64 = saliency.data().iter().sum();
    if mass < MIN_SALIENCY_MASS {
        return Err(Error::ZeroSaliencyMass);
    }
    let weighted: f64 = depth
        .data()
        .iter()
        .zip(saliency.data())
        .map(|(d, s)| d * s)
        .sum();
    // A convex combination can still round just past the extremes.
    let (lo, hi) = depth.range();
    Ok(FocusEstimate {
        focus_distance: (weighted / mass).clamp(lo, hi),
        source: FocusSource::SaliencyWeighted,
    })
}

/// Non-learned stand-in for a saliency network.
///
/// Gaussian center prior with `sigma = 0.25 * min(H, W)`, multiplied by
/// `min_depth / depth` so nearer pixels weigh more. Strictly positive.
pub fn stub_saliency(image: &RasterImage, depth: &DepthMap) -> Result<SaliencyMap> {
    check_dims(image.dims(), depth.dims())?;
    let (w, h) = depth.dims();
    let sigma = 0.25 * w.min(h) as f64;
    let (cx, cy) = ((w as f64 - 1.0) / 2.0, (h as f64 - 1.0) / 2.0);
    let (nearest, _) = depth.range();
    let plane = Plane::from_fn(w, h, |x, y| {
        let r2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
        let prior = (-r2 / (2.0 * sigma * sigma)).exp();
        (prior * nearest / depth.plane().get(x, y)).max(f64::MIN_POSITIVE)
    })?;
    SaliencyMap::from_plane(plane)
}

pub fn huber_loss(predicted: f64, reference: f64, delta: f64) -> f64 {
    debug_assert!(delta > 0.0);
    let e = (predicted - reference).abs();
    if e <= delta {
        0.5 * e * e
    } else {
        delta * (e - 0.5 * delta)
    }
}

/// d huber / d predicted.
pub fn huber_grad(predicted: f64, reference: f64, delta: f64) -> f64 {
    (predicted - reference).clamp(-delta, delta)
}

/// Explicit per-field settings that win over EXIF and defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LensOverrides {
    pub focal_length: Option<f64>,
    pub f_number: Option<f64>,
    pub focus_distance: Option<f64>,
    pub focus_scale: Option<f64>,
    pub pixels_per_unit: Option<f64>,
    pub coc_max_px: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedLens {
    pub params: LensParams,
    pub focus_source: FocusSource,
}

/// Merges overrides, EXIF and defaults, in that order of precedence.
///
/// With `allow_defaults == false` the f-number and focal length must come
/// from an override or EXIF. The focus distance comes from an override or
/// `default_focus`; there is no constant fallback for it.
pub fn resolve_lens_params(
    exif: Option<&ExifRecord>,
    overrides: &LensOverrides,
    image_width: usize,
    default_focus: Option<FocusEstimate>,
    allow_defaults: bool,
) -> Result<ResolvedLens> {
    let pick = |over: Option<f64>, from_exif: Option<f64>, fallback: f64, name| {
        over.or(from_exif)
            .or(allow_defaults.then_some(fallback))
            .ok_or(Error::MissingParameter(name))
    };
    let f_number = pick(
        overrides.f_number,
        exif.and_then(|e| e.f_number),
        DEFAULT_F_NUMBER,
        "f_number",
    )?;
    let focal_length = pick(
        overrides.focal_length,
        exif.and_then(|e| e.focal_length_mm),
        DEFAULT_FOCAL_LENGTH_MM,
        "focal_length",
    )?;
    let focus = match overrides.focus_distance {
        Some(fd) => FocusEstimate {
            focus_distance: fd,
            source: FocusSource::UserOverride,
        },
        None => default_focus.ok_or(Error::MissingParameter("focus_distance"))?,
    };
    let params = LensParams {
        focal_length,
        f_number,
        focus_distance: focus.focus_distance,
        focus_scale: overrides.focus_scale.unwrap_or(DEFAULT_FOCUS_SCALE),
        pixels_per_unit: overrides
            .pixels_per_unit
            .unwrap_or_else(|| default_pixels_per_unit(image_width)),
        coc_max_px: overrides
            .coc_max_px
            .unwrap_or_else(|| default_coc_max(image_width)),
    };
    params.validate()?;
    Ok(ResolvedLens {
        params,
        focus_source: focus.source,
    })
}
