/// Normalized disk kernel with a one-pixel linear soft edge.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftDiskKernel {
    radius: usize,
    weights: Vec<f64>,
}

impl SoftDiskKernel {
    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    /// Row-major `(2r+1)^2` taps.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn tap(&self, dx: isize, dy: isize) -> f64 {
        let r = self.radius as isize;
        if dx.abs() > r || dy.abs() > r {
            return 0.0;
        }
        self.weights[((dy + r) as usize) * self.side() + (dx + r) as usize]
    }
}

/// Builds the unit-sum soft disk for a CoC diameter in pixels.
///
/// Raw tap at distance `rho` is `clamp(coc/2 - rho + 0.5, 0, 1)`; the center
/// tap is therefore at least 0.5 and the sum never vanishes.
///
/// Panics if `coc_px` is negative or not finite.
pub fn build_soft_disk_kernel(coc_px: f64) -> SoftDiskKernel {
    assert!(
        coc_px.is_finite() && coc_px >= 0.0,
        "coc_px must be finite and >= 0, got {coc_px}"
    );
    let radius = support_radius(coc_px);
    let r = radius as isize;
    let mut weights = Vec::with_capacity((2 * radius + 1).pow(2));
    for dy in -r..=r {
        for dx in -r..=r {
            let rho = ((dx * dx + dy * dy) as f64).sqrt();
            weights.push(ramp(coc_px, rho));
        }
    }
    let sum: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= sum);
    SoftDiskKernel { radius, weights }
}

pub(crate) fn support_radius(coc_px: f64) -> usize {
    (coc_px / 2.0 + 0.5).ceil() as usize
}

#[inline]
pub(crate) fn ramp(coc_px: f64, rho: f64) -> f64 {
    (coc_px / 2.0 - rho + 0.5).clamp(0.0, 1.0)
}

/// d ramp / d coc, taking the ramp branch at both kinks.
#[inline]
pub(crate) fn ramp_slope(coc_px: f64, rho: f64) -> f64 {
    let v = coc_px / 2.0 - rho + 0.5;
    if (0.0..=1.0).contains(&v) {
        0.5
    } else {
        0.0
    }
}

/// Precomputed offset distances for every tap within `max_radius`.
pub(crate) struct DistanceTable {
    max_radius: usize,
    side: usize,
    rho: Vec<f64>,
}

impl DistanceTable {
    pub(crate) fn new(max_radius: usize) -> Self {
        let side = 2 * max_radius + 1;
        let r = max_radius as isize;
        let mut rho = Vec::with_capacity(side * side);
        for dy in -r..=r {
            for dx in -r..=r {
                rho.push(((dx * dx + dy * dy) as f64).sqrt());
            }
        }
        Self {
            max_radius,
            side,
            rho,
        }
    }

    #[inline]
    pub(crate) fn rho(&self, dx: isize, dy: isize) -> f64 {
        let r = self.max_radius as isize;
        self.rho[((dy + r) as usize) * self.side + (dx + r) as usize]
    }

    /// Sum of raw taps and its derivative with respect to the CoC.
    pub(crate) fn tap_sum(&self, coc_px: f64) -> (f64, f64) {
        let r = support_radius(coc_px) as isize;
        debug_assert!(r as usize <= self.max_radius);
        let mut sum = 0.0;
        let mut slope = 0.0;
        for dy in -r..=r {
            for dx in -r..=r {
                let rho = self.rho(dx, dy);
                sum += ramp(coc_px, rho);
                slope += ramp_slope(coc_px, rho);
            }
        }
        (sum, slope)
    }
}
