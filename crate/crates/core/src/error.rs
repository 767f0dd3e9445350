use thiserror::Error;

use crate::exif::ExifError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("lens is singular: |f_s * f_d - f| = {gap:e} is below 1e-9")]
    SingularLens { gap: f64 },

    #[error("depth must be finite and > 0, found {value} at pixel ({x}, {y})")]
    InvalidDepth { x: usize, y: usize, value: f64 },

    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("saliency map has no positive mass")]
    ZeroSaliencyMass,

    #[error("missing parameter `{0}`")]
    MissingParameter(&'static str),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("need at least 2 images, got {0}")]
    TooFewImages(usize),

    #[error("f-numbers must be strictly increasing")]
    AperturesNotAscending,

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("invalid raster: {0}")]
    InvalidRaster(String),

    #[error("malformed {format} data: {reason}")]
    Format {
        format: &'static str,
        reason: String,
    },

    #[error(transparent)]
    Exif(#[from] ExifError),

    #[error(transparent)]
    Image(#[from] image::ImageError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable snake_case identifier used by the CLI and the HTTP service.
    pub fn code(&self) -> &'static str {
        match self {
            Error::SingularLens { .. } => "singular_lens",
            Error::InvalidDepth { .. } => "invalid_depth",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::ZeroSaliencyMass => "zero_saliency_mass",
            Error::MissingParameter(_) => "missing_parameter",
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::TooFewImages(_) => "too_few_images",
            Error::AperturesNotAscending => "apertures_not_ascending",
            Error::InvalidKernel(_) => "invalid_kernel",
            Error::InvalidRaster(_) => "invalid_raster",
            Error::Format { .. } => "malformed_input",
            Error::Exif(e) => e.code(),
            Error::Image(_) => "image_decode",
            Error::Io(_) => "io",
        }
    }

    pub(crate) fn format(format: &'static str, reason: impl Into<String>) -> Self {
        Error::Format {
            format,
            reason: reason.into(),
        }
    }

    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
