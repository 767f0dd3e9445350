use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

/// Unnormalized forward 2D DFT of a row-major `width x height` grid.
/// The result is returned transposed (`height`-major columns), which is
/// irrelevant for anything that only looks at magnitudes.
pub(crate) fn fft2_transposed(values: &[f64], width: usize, height: usize) -> Vec<Complex<f64>> {
    debug_assert_eq!(values.len(), width * height);
    let mut planner = FftPlanner::new();
    let mut rows: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    planner.plan_fft_forward(width).process(&mut rows);
    let mut cols = vec![Complex::new(0.0, 0.0); width * height];
    for y in 0..height {
        for x in 0..width {
            cols[x * height + y] = rows[y * width + x];
        }
    }
    planner.plan_fft_forward(height).process(&mut cols);
    cols
}
