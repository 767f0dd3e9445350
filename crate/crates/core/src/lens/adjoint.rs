use rayon::prelude::*;

use super::coc::coc_with_jacobian;
use super::kernel::{ramp, ramp_slope};
use super::render::splat;
use super::LensParams;
use crate::error::{Error, Result};
use crate::raster::{check_dims, DepthMap, RasterImage};

/// Pullback of an output cotangent through [`render_defocus`](super::render_defocus).
#[derive(Debug, Clone, PartialEq)]
pub struct LensGradients {
    pub d_image: RasterImage,
    pub d_focus_distance: f64,
    pub d_focus_scale: f64,
    pub d_f_number: f64,
    pub d_focal_length: f64,
}

/// Exact vector-Jacobian product of the normalized splat render.
///
/// With `D_p = sum_q W_q(p-q)` and output `y_p = sum_q x_q W_q(p-q) / D_p`:
///
/// * `dL/dx_q = sum_p u_p W_q(p-q) / D_p`
/// * `dL/dc_q = sum_p W'_q(p-q) <u_p, x_q - y_p> / D_p`
///
/// where `W'` is the derivative of the normalized tap with respect to the
/// source CoC. The CoC derivative is then chained into the lens parameters.
/// Kinks use the conventions of the CoC and ramp helpers.
pub fn render_adjoint(
    image: &RasterImage,
    depth: &DepthMap,
    lens: &LensParams,
    upstream: &RasterImage,
) -> Result<LensGradients> {
    check_dims(image.dims(), depth.dims())?;
    check_dims(image.dims(), upstream.dims())?;
    if upstream.channels() != image.channels() {
        return Err(Error::InvalidRaster(format!(
            "cotangent has {} channels, image has {}",
            upstream.channels(),
            image.channels()
        )));
    }
    lens.validate()?;

    let (w, h) = image.dims();
    let ch = image.channels();
    let (coc, jac): (Vec<f64>, Vec<[f64; 4]>) = depth
        .data()
        .iter()
        .map(|&d| coc_with_jacobian(d, lens))
        .unzip();

    let fwd = splat(image, &coc);
    let out = fwd.image.data();
    let src = image.data();
    let sources = &fwd.sources;

    // u_p / D_p
    let scaled: Vec<f64> = upstream
        .data()
        .iter()
        .enumerate()
        .map(|(i, u)| u / fwd.weight[i / ch])
        .collect();

    let rows: Vec<(Vec<f64>, [f64; 4])> = (0..h)
        .into_par_iter()
        .map(|y| {
            let mut d_row = vec![0.0; w * ch];
            let mut d_lens = [0.0; 4];
            for x in 0..w {
                let q = y * w + x;
                let c = sources.coc[q];
                let r = sources.radius[q] as isize;
                let (norm, norm_slope) = sources.norm[q];
                let value = &src[q * ch..(q + 1) * ch];
                let mut d_coc = 0.0;
                for dy in -r..=r {
                    let ty = y as isize + dy;
                    if ty < 0 || ty >= h as isize {
                        continue;
                    }
                    for dx in -r..=r {
                        let tx = x as isize + dx;
                        if tx < 0 || tx >= w as isize {
                            continue;
                        }
                        let rho = sources.table.rho(dx, dy);
                        let raw = ramp(c, rho);
                        let slope = ramp_slope(c, rho);
                        if raw == 0.0 && slope == 0.0 {
                            continue;
                        }
                        let wt = raw / norm;
                        let d_wt = slope / norm - raw * norm_slope / (norm * norm);
                        let p = ty as usize * w + tx as usize;
                        let mut inner = 0.0;
                        for k in 0..ch {
                            let g = scaled[p * ch + k];
                            d_row[x * ch + k] += g * wt;
                            inner += g * (value[k] - out[p * ch + k]);
                        }
                        d_coc += d_wt * inner;
                    }
                }
                for (acc, j) in d_lens.iter_mut().zip(&jac[q]) {
                    *acc += d_coc * j;
                }
            }
            (d_row, d_lens)
        })
        .collect();

    let mut d_image = Vec::with_capacity(w * h * ch);
    let mut d_lens = [0.0; 4];
    for (row, part) in rows {
        d_image.extend(row);
        for (acc, v) in d_lens.iter_mut().zip(part) {
            *acc += v;
        }
    }

    Ok(LensGradients {
        d_image: RasterImage::new(w, h, ch, d_image)?,
        d_focus_distance: d_lens[0],
        d_focus_scale: d_lens[1],
        d_f_number: d_lens[2],
        d_focal_length: d_lens[3],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lens::render_defocus;

    fn lens() -> LensParams {
        LensParams {
            focal_length: 50.0,
            f_number: 2.0,
            focus_distance: 1800.0,
            focus_scale: 1.1,
            pixels_per_unit: 12.0,
            coc_max_px: 12.0,
        }
    }

    fn scene() -> (RasterImage, DepthMap) {
        let img = RasterImage::from_fn(9, 8, 3, |x, y, c| {
            (((x * 13 + y * 7 + c * 5) % 11) as f64 / 10.0).powf(1.3)
        })
        .unwrap();
        let depth =
            DepthMap::new(9, 8, (0..72).map(|i| 900.0 + 37.3 * i as f64).collect()).unwrap();
        (img, depth)
    }

    #[test]
    fn zero_upstream_gives_zero() {
        let (img, depth) = scene();
        let zero = RasterImage::filled(9, 8, 3, 0.0).unwrap();
        let g = render_adjoint(&img, &depth, &lens(), &zero).unwrap();
        assert!(g.d_image.data().iter().all(|&v| v == 0.0));
        assert_eq!(
            [g.d_focus_distance, g.d_focus_scale, g.d_f_number, g.d_focal_length],
            [0.0; 4]
        );
    }

    #[test]
    fn identity_when_sharp() {
        let (img, depth) = scene();
        let sharp = LensParams {
            coc_max_px: 0.0,
            ..lens()
        };
        let u = RasterImage::from_fn(9, 8, 3, |x, y, c| x as f64 - 0.5 * y as f64 + c as f64)
            .unwrap();
        let g = render_adjoint(&img, &depth, &sharp, &u).unwrap();
        assert_eq!(g.d_image, u);
    }

    #[test]
    fn image_gradient_is_linear_map_transpose() {
        // <u, R(x + e_i)> - <u, R(x)> equals d_image[i] exactly because R is linear in x.
        let (img, depth) = scene();
        let u = RasterImage::from_fn(9, 8, 3, |x, y, c| ((x + y + c) % 3) as f64 - 1.0).unwrap();
        let g = render_adjoint(&img, &depth, &lens(), &u).unwrap();
        let dot = |a: &RasterImage| -> f64 {
            a.data().iter().zip(u.data()).map(|(p, q)| p * q).sum()
        };
        let base = dot(&render_defocus(&img, &depth, &lens()).unwrap());
        for i in [0, 17, 100, 215] {
            let bumped = img.with_sample(i, img.data()[i] + 1.0).unwrap();
            let diff = dot(&render_defocus(&bumped, &depth, &lens()).unwrap()) - base;
            assert!((diff - g.d_image.data()[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_cotangent_shape() {
        let (img, depth) = scene();
        let u = RasterImage::filled(9, 8, 1, 1.0).unwrap();
        assert!(render_adjoint(&img, &depth, &lens(), &u).is_err());
    }
}
