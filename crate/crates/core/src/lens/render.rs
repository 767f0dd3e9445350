use rayon::prelude::*;

use super::coc::compute_coc_map;
use super::kernel::{ramp, support_radius, DistanceTable};
use super::LensParams;
use crate::error::Result;
use crate::raster::{check_dims, DepthMap, RasterImage};

/// Source rows handled by one accumulation band. Fixed so the summation
/// order, and therefore the output bits, never depend on the thread count.
const MIN_BAND_ROWS: usize = 32;

/// Spatially varying defocus by normalized splatting.
///
/// Every source pixel spreads its value through its own soft disk; the
/// output at each pixel is the accumulated value divided by the accumulated
/// weight. Splats falling outside the frame are dropped.
pub fn render_defocus(
    image: &RasterImage,
    depth: &DepthMap,
    lens: &LensParams,
) -> Result<RasterImage> {
    check_dims(image.dims(), depth.dims())?;
    let coc = compute_coc_map(depth, lens)?;
    Ok(splat(image, coc.data()).image)
}

/// Per-source kernel data reused by the forward and adjoint passes.
pub(crate) struct Sources {
    pub(crate) coc: Vec<f64>,
    pub(crate) radius: Vec<usize>,
    /// Sum of raw taps and its derivative with respect to the CoC.
    pub(crate) norm: Vec<(f64, f64)>,
    pub(crate) table: DistanceTable,
}

impl Sources {
    pub(crate) fn new(coc: &[f64]) -> Self {
        let radius: Vec<usize> = coc.iter().map(|&c| support_radius(c)).collect();
        let max_radius = radius.iter().copied().max().unwrap_or(0);
        let table = DistanceTable::new(max_radius);
        let norm = coc.par_iter().map(|&c| table.tap_sum(c)).collect();
        Self {
            coc: coc.to_vec(),
            radius,
            norm,
            table,
        }
    }

    pub(crate) fn max_radius(&self) -> usize {
        self.radius.iter().copied().max().unwrap_or(0)
    }
}

pub(crate) struct Splat {
    pub(crate) image: RasterImage,
    /// Accumulated kernel weight per output pixel.
    pub(crate) weight: Vec<f64>,
    pub(crate) sources: Sources,
}

pub(crate) fn splat(image: &RasterImage, coc: &[f64]) -> Splat {
    let (w, h) = image.dims();
    let ch = image.channels();
    let sources = Sources::new(coc);
    let max_r = sources.max_radius();
    let band_rows = MIN_BAND_ROWS.max(2 * max_r);
    let bands: Vec<usize> = (0..h).step_by(band_rows).collect();

    let partials: Vec<(usize, Vec<f64>, Vec<f64>)> = bands
        .par_iter()
        .map(|&y0| {
            let y1 = (y0 + band_rows).min(h);
            let top = y0.saturating_sub(max_r);
            let bottom = (y1 + max_r).min(h);
            let rows = bottom - top;
            let mut num = vec![0.0; rows * w * ch];
            let mut den = vec![0.0; rows * w];
            let src = image.data();
            for y in y0..y1 {
                for x in 0..w {
                    let q = y * w + x;
                    let c = sources.coc[q];
                    let r = sources.radius[q] as isize;
                    let inv_norm = 1.0 / sources.norm[q].0;
                    let value = &src[q * ch..(q + 1) * ch];
                    for dy in -r..=r {
                        let ty = y as isize + dy;
                        if ty < 0 || ty >= h as isize {
                            continue;
                        }
                        let row = (ty as usize - top) * w;
                        for dx in -r..=r {
                            let tx = x as isize + dx;
                            if tx < 0 || tx >= w as isize {
                                continue;
                            }
                            let raw = ramp(c, sources.table.rho(dx, dy));
                            if raw == 0.0 {
                                continue;
                            }
                            let wt = raw * inv_norm;
                            let p = row + tx as usize;
                            den[p] += wt;
                            for k in 0..ch {
                                num[p * ch + k] += wt * value[k];
                            }
                        }
                    }
                }
            }
            (top, num, den)
        })
        .collect();

    let mut num = vec![0.0; w * h * ch];
    let mut den = vec![0.0; w * h];
    for (top, band_num, band_den) in partials {
        let off = top * w;
        for (acc, v) in den[off..off + band_den.len()].iter_mut().zip(&band_den) {
            *acc += v;
        }
        let off = off * ch;
        for (acc, v) in num[off..off + band_num.len()].iter_mut().zip(&band_num) {
            *acc += v;
        }
    }

    for (p, &d) in den.iter().enumerate() {
        for v in &mut num[p * ch..(p + 1) * ch] {
            *v /= d;
        }
    }

    Splat {
        image: RasterImage::from_parts_unchecked(w, h, ch, num),
        weight: den,
        sources,
    }
}
