use super::LensParams;
use crate::error::Result;
use crate::raster::{CocMap, DepthMap, Plane};

/// Smallest allowed `|f_s * f_d - f|` before the lens counts as singular.
pub const SINGULARITY_EPS: f64 = 1e-9;

/// Unclamped CoC diameter in lens length units.
///
/// `|d - f_d| / d * f^2 / (N * |f_s * f_d - f|)`. The absolute value on the
/// denominator keeps diameters non-negative when the focus plane sits inside
/// the focal length.
pub fn coc_length(depth: f64, lens: &LensParams) -> f64 {
    let denom = (lens.focus_scale * lens.focus_distance - lens.focal_length).abs();
    (depth - lens.focus_distance).abs() / depth * lens.focal_length * lens.focal_length
        / (lens.f_number * denom)
}

pub fn compute_coc_map(depth: &DepthMap, lens: &LensParams) -> Result<CocMap> {
    lens.validate()?;
    let data = depth
        .data()
        .iter()
        .map(|&d| clamp_px(coc_length(d, lens), lens))
        .collect();
    Ok(CocMap::from_plane(Plane::new(
        depth.width(),
        depth.height(),
        data,
    )?))
}

fn clamp_px(length: f64, lens: &LensParams) -> f64 {
    (length * lens.pixels_per_unit).min(lens.coc_max_px)
}

/// CoC in pixels plus its partial derivatives with respect to
/// `[focus_distance, focus_scale, f_number, focal_length]`.
///
/// Subgradient conventions: the `|d - f_d|` term contributes 0 at `d == f_d`;
/// at the clamp the unclamped branch is used when `coc == coc_max`.
pub(crate) fn coc_with_jacobian(depth: f64, lens: &LensParams) -> (f64, [f64; 4]) {
    let LensParams {
        focal_length: f,
        f_number: n,
        focus_distance: fd,
        focus_scale: fs,
        pixels_per_unit: ppu,
        coc_max_px,
    } = *lens;

    let offset = depth - fd;
    let near_far = sign(offset);
    let u = fs * fd - f;
    let pole = sign(u);
    let abs_u = u.abs();

    let a = offset.abs() / depth;
    let b = f * f / (n * abs_u);
    let length = a * b;
    let px = length * ppu;

    if px > coc_max_px {
        return (coc_max_px, [0.0; 4]);
    }

    let da_dfd = -near_far / depth;
    let db_du = -pole * b / abs_u;
    let d_fd = da_dfd * b + a * db_du * fs;
    let d_fs = a * db_du * fd;
    let d_n = -length / n;
    let d_f = a * b * (2.0 / f + pole / abs_u);

    (px, [d_fd * ppu, d_fs * ppu, d_n * ppu, d_f * ppu])
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}
