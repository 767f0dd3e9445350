//! Minimal EXIF reader and the depth-of-field dataset filters built on it.

mod classify;
mod parse;
mod partition;

pub use classify::{classify_dof_bucket, BlurLabel, Denylist, DofBucket, RejectReason};
pub use parse::{parse_exif, tags};
pub use partition::{partition_corpus, write_partition, PartitionConfig, PartitionEntry, PartitionReport};

use thiserror::Error;

/// Camera metadata needed by the dataset filters. Absent tags stay `None`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExifRecord {
    pub f_number: Option<f64>,
    pub focal_length_mm: Option<f64>,
    pub exposure_time_s: Option<f64>,
    pub make: Option<String>,
    pub model: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExifError {
    #[error("not a JPEG or TIFF stream")]
    NotAnImage,
    #[error("offset {offset} (+{len}) runs past the end of {available} bytes")]
    TruncatedExif {
        offset: usize,
        len: usize,
        available: usize,
    },
    #[error("IFD at {offset} declares {entries} entries but only {available} bytes remain")]
    MalformedIfd {
        offset: usize,
        entries: usize,
        available: usize,
    },
    #[error("RATIONAL value for tag {tag:#06x} has a zero denominator")]
    ZeroDenominator { tag: u16 },
}

impl ExifError {
    pub fn code(&self) -> &'static str {
        match self {
            ExifError::NotAnImage => "not_an_image",
            ExifError::TruncatedExif { .. } => "truncated_exif",
            ExifError::MalformedIfd { .. } => "malformed_ifd",
            ExifError::ZeroDenominator { .. } => "zero_denominator",
        }
    }
}
