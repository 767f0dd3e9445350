//! Independent oracles shared by the integration and acceptance suites.
//!
//! Nothing here calls into the renderer's internals: CoC, kernel profile and
//! splatting are re-derived from their definitions.
#![allow(dead_code)]

use defocus_core::lens::{render_defocus, LensParams};
use defocus_core::{DepthMap, RasterImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// CoC in pixels straight from the thin-lens formula, clamped.
pub fn oracle_coc_px(d: f64, lens: &LensParams) -> f64 {
    let len = (d - lens.focus_distance).abs() / d * lens.focal_length.powi(2)
        / (lens.f_number * (lens.focus_scale * lens.focus_distance - lens.focal_length).abs());
    (len * lens.pixels_per_unit).min(lens.coc_max_px)
}

/// Normalized soft-disk tap at integer offset.
pub fn oracle_tap(coc: f64, dx: i64, dy: i64) -> f64 {
    let profile = |rho: f64| (coc / 2.0 - rho + 0.5).clamp(0.0, 1.0);
    let reach = (coc / 2.0 + 2.0) as i64;
    let mut total = 0.0;
    for j in -reach..=reach {
        for i in -reach..=reach {
            total += profile(((i * i + j * j) as f64).sqrt());
        }
    }
    profile(((dx * dx + dy * dy) as f64).sqrt()) / total
}

/// O(H^2 W^2) normalized splat over every source/target pair.
pub fn naive_render(image: &RasterImage, depth: &DepthMap, lens: &LensParams) -> Vec<f64> {
    let (w, h) = image.dims();
    let ch = image.channels();
    let coc: Vec<f64> = depth.data().iter().map(|&d| oracle_coc_px(d, lens)).collect();
    let mut out = vec![0.0; w * h * ch];
    for py in 0..h {
        for px in 0..w {
            let mut den = 0.0;
            let mut num = vec![0.0; ch];
            for qy in 0..h {
                for qx in 0..w {
                    let t = oracle_tap(
                        coc[qy * w + qx],
                        px as i64 - qx as i64,
                        py as i64 - qy as i64,
                    );
                    den += t;
                    for c in 0..ch {
                        num[c] += t * image.get(qx, qy, c);
                    }
                }
            }
            for c in 0..ch {
                out[(py * w + px) * ch + c] = num[c] / den;
            }
        }
    }
    out
}

pub fn random_image(rng: &mut ChaCha8Rng, w: usize, h: usize, ch: usize) -> RasterImage {
    RasterImage::from_fn(w, h, ch, |_, _, _| rng.random_range(0.0..1.0)).unwrap()
}

/// Random lens and depth with every pixel kept away from the non-smooth loci:
/// `|d - f_d| > 10 * step` and CoC more than `10 * step` from 0 and from the clamp.
pub fn smooth_scene(seed: u64, w: usize, h: usize, step: f64) -> (RasterImage, DepthMap, LensParams) {
    let mut rng = rng(seed);
    let image = random_image(&mut rng, w, h, 3);
    let lens = LensParams {
        focal_length: rng.random_range(35.0..85.0),
        f_number: rng.random_range(1.8..4.0),
        focus_distance: rng.random_range(1500.0..2500.0),
        focus_scale: rng.random_range(0.8..1.2),
        pixels_per_unit: rng.random_range(8.0..16.0),
        coc_max_px: 10.0,
    };
    let margin = 10.0 * step;
    let data = (0..w * h)
        .map(|_| loop {
            let d: f64 = rng.random_range(600.0..8000.0);
            let c = oracle_coc_px(d, &lens);
            if (d - lens.focus_distance).abs() > margin
                && c > margin
                && c < lens.coc_max_px - margin
                && clear_of_ramp_kinks(d, &lens, step)
            {
                break d;
            }
        })
        .collect();
    (image, DepthMap::new(w, h, data).unwrap(), lens)
}

/// The soft-disk profile bends where `coc/2 + 0.5 - rho` hits 0 or 1, i.e. at
/// `coc = 2 rho - 1` and `coc = 2 rho + 1` for lattice distances `rho`. A central
/// difference straddling one of those measures a mix of two slopes, so keep
/// each CoC at least twice its finite-difference excursion away from them.
pub fn clear_of_ramp_kinks(d: f64, lens: &LensParams, step: f64) -> bool {
    let c = oracle_coc_px(d, lens);
    let excursion = LENS_PARAMS
        .iter()
        .map(|(_, field)| {
            let mut hi = *lens;
            *field(&mut hi) += step;
            let mut lo = *lens;
            *field(&mut lo) -= step;
            (oracle_coc_px(d, &hi) - oracle_coc_px(d, &lo)).abs() / 2.0
        })
        .fold(0.0, f64::max);
    let reach = (c / 2.0 + 2.0) as i64;
    for j in 0..=reach {
        for i in j..=reach {
            let rho = ((i * i + j * j) as f64).sqrt();
            for kink in [2.0 * rho - 1.0, 2.0 * rho + 1.0] {
                if (c - kink).abs() <= 2.0 * excursion {
                    return false;
                }
            }
        }
    }
    true
}

pub fn dot_loss(image: &RasterImage, depth: &DepthMap, lens: &LensParams, upstream: &RasterImage) -> f64 {
    render_defocus(image, depth, lens)
        .unwrap()
        .data()
        .iter()
        .zip(upstream.data())
        .map(|(a, b)| a * b)
        .sum()
}

pub fn central_difference(f: impl Fn(f64) -> f64, x: f64, step: f64) -> f64 {
    (f(x + step) - f(x - step)) / (2.0 * step)
}

pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

/// Parameter accessors in the order f_d, f_s, N, f.
pub const LENS_PARAMS: [(&str, fn(&mut LensParams) -> &mut f64); 4] = [
    ("focus_distance", |l| &mut l.focus_distance),
    ("focus_scale", |l| &mut l.focus_scale),
    ("f_number", |l| &mut l.f_number),
    ("focal_length", |l| &mut l.focal_length),
];

/// O(N^2) DFT energy with unnormalized forward transform, divided by N.
pub fn naive_dft_energy(values: &[f64], w: usize, h: usize) -> f64 {
    let mut total = 0.0;
    for ky in 0..h {
        for kx in 0..w {
            let (mut re, mut im) = (0.0, 0.0);
            for y in 0..h {
                for x in 0..w {
                    let phase = -std::f64::consts::TAU
                        * (kx as f64 * x as f64 / w as f64 + ky as f64 * y as f64 / h as f64);
                    re += values[y * w + x] * phase.cos();
                    im += values[y * w + x] * phase.sin();
                }
            }
            total += re * re + im * im;
        }
    }
    total / (w * h) as f64
}
