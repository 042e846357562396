use ndarray::Array2;
use num_complex::Complex64;

use super::DetectionError;
use crate::fft;

/// Radial transfer `exp(-(ln(f/f0))^2 / (2 (ln sigma)^2))`, zero at DC.
pub fn log_gabor_gain(f: f64, f0: f64, sigma_ratio: f64) -> f64 {
    if f <= 0.0 {
        return 0.0;
    }
    let num = (f / f0).ln();
    let den = sigma_ratio.ln();
    (-(num * num) / (2.0 * den * den)).exp()
}

/// Signed frequency of DFT index `k` of `n`, in cycles per sample.
fn freq(k: usize, n: usize) -> f64 {
    let k = if k < n.div_ceil(2) { k as f64 } else { k as f64 - n as f64 };
    k / n as f64
}

/// Band-pass filters a real map with a radial log-Gabor transfer in the 2D
/// frequency domain and returns the real part.
pub fn log_gabor_filter(map: &Array2<f64>, f0_cycles: f64, sigma_ratio: f64) -> Result<Array2<f64>, DetectionError> {
    if !(f0_cycles > 0.0 && f0_cycles < 0.5) {
        return Err(DetectionError::param("f0_cycles", format!("{f0_cycles} not in (0, 0.5)")));
    }
    if !(sigma_ratio > 0.0 && sigma_ratio < 1.0) {
        return Err(DetectionError::param("sigma_ratio", format!("{sigma_ratio} not in (0, 1)")));
    }
    let (rows, cols) = map.dim();
    if rows == 0 || cols == 0 {
        return Ok(map.clone());
    }

    let mut bins: Vec<Complex64> = map.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft2(&mut bins, rows, cols, false);
    for r in 0..rows {
        let fy = freq(r, rows);
        for c in 0..cols {
            let fx = freq(c, cols);
            bins[r * cols + c] *= log_gabor_gain(fx.hypot(fy), f0_cycles, sigma_ratio);
        }
    }
    fft2(&mut bins, rows, cols, true);
    let norm = (rows * cols) as f64;
    Ok(Array2::from_shape_fn((rows, cols), |(r, c)| bins[r * cols + c].re / norm))
}

/// Unnormalized 2D transform of a row-major `rows x cols` buffer.
fn fft2(buf: &mut [Complex64], rows: usize, cols: usize, inverse: bool) {
    let plan = |n| if inverse { fft::inverse(n) } else { fft::forward(n) };
    fft::transform_lanes(&plan(cols), buf);
    let mut t: Vec<Complex64> = (0..rows * cols).map(|i| buf[(i % rows) * cols + i / rows]).collect();
    fft::transform_lanes(&plan(rows), &mut t);
    for (i, v) in t.into_iter().enumerate() {
        buf[(i % rows) * cols + i / rows] = v;
    }
}
