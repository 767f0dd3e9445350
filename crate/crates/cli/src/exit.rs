//! Process exit codes. Each core error code gets its own status so scripts
//! can branch without parsing stderr.

/// Usage errors reported by the argument parser.
pub const USAGE: i32 = 2;
/// Anything not raised by the pipeline itself.
pub const OTHER: i32 = 1;

const TABLE: [(&str, i32); 18] = [
    ("missing_parameter", 10),
    ("invalid_parameter", 11),
    ("singular_lens", 12),
    ("invalid_depth", 13),
    ("dimension_mismatch", 14),
    ("zero_saliency_mass", 15),
    ("too_few_images", 16),
    ("apertures_not_ascending", 17),
    ("invalid_kernel", 18),
    ("invalid_raster", 19),
    ("malformed_input", 20),
    ("image_decode", 21),
    ("io", 22),
    ("not_an_image", 23),
    ("truncated_exif", 24),
    ("malformed_ifd", 25),
    ("zero_denominator", 26),
    ("internal", OTHER),
];

pub fn for_code(code: &str) -> i32 {
    TABLE.iter().find(|(c, _)| *c == code).map_or(OTHER, |(_, n)| *n)
}

/// Error code and exit status for a failure anywhere in a command.
pub fn classify(err: &anyhow::Error) -> (&'static str, i32) {
    match err.chain().find_map(|e| e.downcast_ref::<defocus_core::Error>()) {
        Some(e) => (e.code(), for_code(e.code())),
        None => ("internal", OTHER),
    }
}
