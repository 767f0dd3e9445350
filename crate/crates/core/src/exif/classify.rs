use std::fmt;
use std::str::FromStr;

use super::ExifRecord;

const SHALLOW_MAX_EXCLUSIVE: f64 = 10.0;
const DEEP_MAX_INCLUSIVE: f64 = 50.0;
const DEEP_MAX_EXPOSURE_S: f64 = 0.1;

/// Verdict of an external blur classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlurLabel {
    None,
    Desirable,
    Undesirable,
}

impl FromStr for BlurLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" | "no_blur" => Ok(BlurLabel::None),
            "desirable" => Ok(BlurLabel::Desirable),
            "undesirable" => Ok(BlurLabel::Undesirable),
            other => Err(format!("unknown blur label `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RejectReason {
    NoAperture,
    ApertureOutOfRange,
    Smartphone,
    LongExposure,
    BlurLabel,
    ParseError,
}

impl RejectReason {
    pub const ALL: [RejectReason; 6] = [
        RejectReason::NoAperture,
        RejectReason::ApertureOutOfRange,
        RejectReason::Smartphone,
        RejectReason::LongExposure,
        RejectReason::BlurLabel,
        RejectReason::ParseError,
    ];

    pub fn code(self) -> &'static str {
        match self {
            RejectReason::NoAperture => "no_aperture",
            RejectReason::ApertureOutOfRange => "aperture_out_of_range",
            RejectReason::Smartphone => "smartphone",
            RejectReason::LongExposure => "long_exposure",
            RejectReason::BlurLabel => "blur_label",
            RejectReason::ParseError => "parse_error",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofBucket {
    DeepDoF,
    ShallowDoF,
    Rejected(RejectReason),
}

/// Case-insensitive substring match against the camera make.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Denylist(Vec<String>);

impl Denylist {
    pub fn new<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self(
            names
                .into_iter()
                .map(|s| s.as_ref().trim().to_lowercase())
                .filter(|s| !s.is_empty())
                .collect(),
        )
    }

    /// One name per line; blank lines and `#` comments ignored.
    pub fn parse(text: &str) -> Self {
        Self::new(text.lines().filter(|l| !l.trim_start().starts_with('#')))
    }

    pub fn matches(&self, make: &str) -> bool {
        let make = make.to_lowercase();
        self.0.iter().any(|name| make.contains(name.as_str()))
    }
}

impl Default for Denylist {
    fn default() -> Self {
        Self::new(["Apple", "samsung", "Google", "Xiaomi"])
    }
}

/// Assigns a record to the shallow or deep set, or names the first rule it fails.
///
/// Shallow: `N < 10`, make not denylisted, blur label absent or desirable.
/// Deep: `10 <= N <= 50`, exposure absent or at most 0.1 s, blur label absent or none.
pub fn classify_dof_bucket(
    rec: &ExifRecord,
    denylist: &Denylist,
    blur_label: Option<BlurLabel>,
) -> DofBucket {
    let Some(n) = rec.f_number else {
        return DofBucket::Rejected(RejectReason::NoAperture);
    };
    if n < SHALLOW_MAX_EXCLUSIVE {
        if rec.make.as_deref().is_some_and(|m| denylist.matches(m)) {
            return DofBucket::Rejected(RejectReason::Smartphone);
        }
        if !matches!(blur_label, None | Some(BlurLabel::Desirable)) {
            return DofBucket::Rejected(RejectReason::BlurLabel);
        }
        DofBucket::ShallowDoF
    } else if n <= DEEP_MAX_INCLUSIVE {
        if rec.exposure_time_s.is_some_and(|t| t > DEEP_MAX_EXPOSURE_S) {
            return DofBucket::Rejected(RejectReason::LongExposure);
        }
        if !matches!(blur_label, None | Some(BlurLabel::None)) {
            return DofBucket::Rejected(RejectReason::BlurLabel);
        }
        DofBucket::DeepDoF
    } else {
        DofBucket::Rejected(RejectReason::ApertureOutOfRange)
    }
}
