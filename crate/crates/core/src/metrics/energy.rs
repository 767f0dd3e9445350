use super::fft::fft2_transposed;
use crate::error::{Error, Result};
use crate::raster::RasterImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyDomain {
    Spatial,
    Spectral,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyValue {
    pub energy: f64,
    pub domain: EnergyDomain,
}

/// Sum of squared samples over all pixels and channels.
///
/// The spectral route sums `|FFT2(x)_k|^2 / (H * W)` per channel with an
/// unnormalized forward DFT; by Parseval both routes agree.
pub fn signal_energy(image: &RasterImage, domain: EnergyDomain) -> EnergyValue {
    let energy = match domain {
        EnergyDomain::Spatial => image.data().iter().map(|v| v * v).sum(),
        EnergyDomain::Spectral => spectral_energy(image),
    };
    EnergyValue { energy, domain }
}

fn spectral_energy(image: &RasterImage) -> f64 {
    let (w, h) = image.dims();
    let ch = image.channels();
    (0..ch)
        .map(|c| {
            let plane: Vec<f64> = image.data().iter().skip(c).step_by(ch).copied().collect();
            let spectrum = fft2_transposed(&plane, w, h);
            spectrum.iter().map(|z| z.norm_sqr()).sum::<f64>() / (w * h) as f64
        })
        .sum()
}

/// Percentage of adjacent pairs whose energy strictly increases.
pub fn monotonicity_from_energies(energies: &[f64]) -> Result<f64> {
    if energies.len() < 2 {
        return Err(Error::TooFewImages(energies.len()));
    }
    let pairs = energies.len() - 1;
    let rising = energies.windows(2).filter(|w| w[0] < w[1]).count();
    Ok(100.0 * rising as f64 / pairs as f64)
}

/// Blur monotonicity of images ordered by ascending f-number.
pub fn blur_monotonicity(images: &[RasterImage]) -> Result<f64> {
    if images.len() < 2 {
        return Err(Error::TooFewImages(images.len()));
    }
    let dims = images[0].dims();
    for img in &images[1..] {
        if img.dims() != dims {
            return Err(Error::DimensionMismatch {
                expected: dims,
                found: img.dims(),
            });
        }
    }
    let energies: Vec<f64> = images
        .iter()
        .map(|img| signal_energy(img, EnergyDomain::Spatial).energy)
        .collect();
    monotonicity_from_energies(&energies)
}
