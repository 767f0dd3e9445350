//! Seeded synthetic scenes: textured RGB over a depth field with foreground
//! discs. Used by the acceptance suite and to produce golden CLI inputs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lens::{coc_length, LensParams};
use crate::raster::{DepthMap, RasterImage};

#[derive(Debug, Clone)]
pub struct SyntheticScene {
    pub image: RasterImage,
    pub depth: DepthMap,
    /// Lens at f/1.8 whose largest CoC lands at `0.8 * coc_max_px`.
    pub lens: LensParams,
}

/// Builds scene `seed` at the given size. Same seed, same bits.
pub fn textured_scene(seed: u64, width: usize, height: usize) -> SyntheticScene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let gratings: Vec<(f64, f64, f64, [f64; 3])> = (0..4)
        .map(|_| {
            let angle = rng.random_range(0.0..std::f64::consts::PI);
            let freq = rng.random_range(0.15..0.9);
            let phase = rng.random_range(0.0..std::f64::consts::TAU);
            let tint = [
                rng.random_range(0.3..1.0),
                rng.random_range(0.3..1.0),
                rng.random_range(0.3..1.0),
            ];
            (angle, freq, phase, tint)
        })
        .collect();
    let noise: Vec<f64> = (0..width * height * 3).map(|_| rng.random_range(-0.1..0.1)).collect();

    let image = RasterImage::from_fn(width, height, 3, |x, y, c| {
        let mut v = 0.5;
        for (angle, freq, phase, tint) in &gratings {
            let t = (x as f64 * angle.cos() + y as f64 * angle.sin()) * freq + phase;
            v += 0.1 * tint[c] * t.sin();
        }
        (v + noise[(y * width + x) * 3 + c]).clamp(0.0, 1.0)
    })
    .expect("valid synthetic image");

    let near = rng.random_range(800.0..1500.0);
    let far = near + rng.random_range(2000.0..6000.0);
    let (gx, gy) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let discs: Vec<(f64, f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.random_range(0.0..width as f64),
                rng.random_range(0.0..height as f64),
                rng.random_range(0.1..0.3) * width.min(height) as f64,
                rng.random_range(near * 0.6..near),
            )
        })
        .collect();
    let depth_values: Vec<f64> = (0..height)
        .flat_map(|y| (0..width).map(move |x| (x, y)))
        .map(|(x, y)| {
            let u = x as f64 / width.max(2).saturating_sub(1) as f64;
            let v = y as f64 / height.max(2).saturating_sub(1) as f64;
            let ramp = 0.5 + 0.5 * (gx * (u - 0.5) + gy * (v - 0.5));
            let mut d = near + (far - near) * ramp.clamp(0.0, 1.0);
            for &(cx, cy, r, dd) in &discs {
                if (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2) < r * r {
                    d = d.min(dd);
                }
            }
            d
        })
        .collect();
    let depth = DepthMap::new(width, height, depth_values).expect("positive synthetic depth");

    let coc_max_px = (width.min(height) as f64 / 2.0).max(4.0);
    let (lo, hi) = depth.range();
    let mut lens = LensParams {
        focal_length: 50.0,
        f_number: 1.8,
        focus_distance: lo + rng.random_range(0.2..0.5) * (hi - lo),
        focus_scale: 1.0,
        pixels_per_unit: 1.0,
        coc_max_px,
    };
    let widest = depth
        .data()
        .iter()
        .map(|&d| coc_length(d, &lens))
        .fold(0.0, f64::max);
    lens.pixels_per_unit = 0.8 * coc_max_px / widest;

    SyntheticScene { image, depth, lens }
}
