//! Energy behaviour of blurring under circular convolution.
//!
//! For a non-negative kernel with unit sum every DFT coefficient satisfies
//! `|H_k| <= 1`, so `E(f (*) h) = sum |F_k H_k|^2 <= sum |F_k|^2 = E(f)`,
//! strictly whenever some `k` has `|F_k| > 0` and `|H_k| < 1`. This module
//! owns its own wrap-around convolver so the check does not depend on the
//! zero-boundary renderer.

use super::fft::fft2_transposed;
use crate::error::{Error, Result};
use crate::raster::RasterImage;

const UNIT_SUM_TOL: f64 = 1e-9;
/// Relative slack used when deciding whether a spectral term is nonzero or
/// below one; keeps rounding noise from predicting strictness.
const SPECTRAL_TOL: f64 = 1e-9;

/// Non-negative, unit-sum convolution kernel anchored at `(width/2, height/2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvKernel {
    width: usize,
    height: usize,
    taps: Vec<f64>,
}

impl ConvKernel {
    pub fn new(width: usize, height: usize, taps: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || taps.len() != width * height {
            return Err(Error::InvalidKernel(format!(
                "{width}x{height} kernel needs {} taps, got {}",
                width * height,
                taps.len()
            )));
        }
        if let Some(t) = taps.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(Error::InvalidKernel(format!("negative or non-finite tap {t}")));
        }
        let sum: f64 = taps.iter().sum();
        if (sum - 1.0).abs() > UNIT_SUM_TOL {
            return Err(Error::InvalidKernel(format!("taps sum to {sum}, expected 1")));
        }
        Ok(Self {
            width,
            height,
            taps,
        })
    }

    pub fn delta() -> Self {
        Self {
            width: 1,
            height: 1,
            taps: vec![1.0],
        }
    }

    pub fn box_filter(side: usize) -> Result<Self> {
        let n = side * side;
        Self::new(side, side, vec![1.0 / n as f64; n])
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoremCheck {
    pub energy_before: f64,
    pub energy_after: f64,
    /// Some frequency has `|F_k| > 0` and `|H_k| < 1`.
    pub strict_expected: bool,
}

impl TheoremCheck {
    pub fn holds(&self) -> bool {
        self.energy_after <= self.energy_before
            && (!self.strict_expected || self.energy_after < self.energy_before)
    }
}

fn check_fits(image: &RasterImage, kernel: &ConvKernel) -> Result<()> {
    if kernel.width > image.width() || kernel.height > image.height() {
        return Err(Error::InvalidKernel(format!(
            "{}x{} kernel is larger than the {}x{} image",
            kernel.width,
            kernel.height,
            image.width(),
            image.height()
        )));
    }
    Ok(())
}

/// Wrap-around convolution `g = f (*) h`, channel by channel.
pub fn circular_convolve(image: &RasterImage, kernel: &ConvKernel) -> Result<RasterImage> {
    check_fits(image, kernel)?;
    let (w, h) = image.dims();
    let ch = image.channels();
    let (ax, ay) = (kernel.width / 2, kernel.height / 2);
    let src = image.data();
    let mut out = vec![0.0; src.len()];
    for y in 0..h {
        for x in 0..w {
            for ky in 0..kernel.height {
                for kx in 0..kernel.width {
                    let t = kernel.taps[ky * kernel.width + kx];
                    if t == 0.0 {
                        continue;
                    }
                    // g[n] = sum_m h[m] f[n - m], with m measured from the anchor
                    let sy = (y + h + ay - ky) % h;
                    let sx = (x + w + ax - kx) % w;
                    for c in 0..ch {
                        out[(y * w + x) * ch + c] += t * src[(sy * w + sx) * ch + c];
                    }
                }
            }
        }
    }
    RasterImage::new(w, h, ch, out)
}

/// Sum of squares in ascending order. Depends only on the multiset of
/// samples, so a shifted image reports bit-identical energy.
fn permutation_invariant_energy(image: &RasterImage) -> f64 {
    let mut squares: Vec<f64> = image.data().iter().map(|v| v * v).collect();
    squares.sort_by(f64::total_cmp);
    squares.iter().sum()
}

pub fn circular_energy_oracle(image: &RasterImage, kernel: &ConvKernel) -> Result<TheoremCheck> {
    let blurred = circular_convolve(image, kernel)?;
    let energy = permutation_invariant_energy;

    let (w, h) = image.dims();
    let ch = image.channels();
    let mut padded = vec![0.0; w * h];
    for ky in 0..kernel.height {
        for kx in 0..kernel.width {
            padded[ky * w + kx] = kernel.taps[ky * kernel.width + kx];
        }
    }
    let kernel_spectrum = fft2_transposed(&padded, w, h);

    let mut strict_expected = false;
    for c in 0..ch {
        let plane: Vec<f64> = image.data().iter().skip(c).step_by(ch).copied().collect();
        let spectrum = fft2_transposed(&plane, w, h);
        let peak = spectrum.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if spectrum.iter().zip(&kernel_spectrum).any(|(f, k)| {
            f.norm() > SPECTRAL_TOL * peak.max(f64::MIN_POSITIVE) && k.norm() < 1.0 - SPECTRAL_TOL
        }) {
            strict_expected = true;
            break;
        }
    }

    Ok(TheoremCheck {
        energy_before: energy(image),
        energy_after: energy(&blurred),
        strict_expected,
    })
}
