use nalgebra::DVector;
use ndarray::Array2;
use num_complex::Complex64;

use super::array::check_angle;
use super::{steering_vector, AoaError, AngleSpectrum, CovarianceMatrix, VirtualArray};
use crate::fft;

/// Diagonal loading (relative to `trace / MN`) used for Capon covariances.
pub const DEFAULT_CAPON_LOADING: f64 = 1e-3;

const MAX_CONDITION: f64 = 1e12;

fn check_dims(r: &CovarianceMatrix, array: &VirtualArray) -> Result<(), AoaError> {
    if r.dim() != array.len() {
        return Err(AoaError::Shape(format!(
            "covariance is {0}x{0} for {1} elements",
            r.dim(),
            array.len()
        )));
    }
    Ok(())
}

fn steering_grid(array: &VirtualArray, grid: &[f64]) -> Result<Vec<DVector<Complex64>>, AoaError> {
    grid.iter().map(|&t| steering_vector(t, array)).collect()
}

/// Zero-padded FFT across the elements of one snapshot. Bin `w` in
/// `[-pi, pi)` maps to `asin(w / (2 pi d))`; bins outside the visible
/// region are dropped.
pub fn aoa_fft(snapshot: &[Complex64], array: &VirtualArray, n_bins: usize) -> Result<AngleSpectrum, AoaError> {
    let snapshots = Array2::from_shape_vec((1, snapshot.len()), snapshot.to_vec())
        .expect("one row");
    aoa_fft_mean(&snapshots, array, n_bins)
}

/// [`aoa_fft`] power averaged over the rows of `snapshots`.
pub fn aoa_fft_mean(
    snapshots: &Array2<Complex64>,
    array: &VirtualArray,
    n_bins: usize,
) -> Result<AngleSpectrum, AoaError> {
    let d = array.uniform_spacing()?;
    let (n, m) = snapshots.dim();
    if m != array.len() || n == 0 {
        return Err(AoaError::Shape(format!("{n}x{m} snapshots for {} elements", array.len())));
    }
    if n_bins < m {
        return Err(AoaError::Geometry(format!("{n_bins} bins for {m} elements")));
    }
    let mut buf = vec![Complex64::new(0.0, 0.0); n * n_bins];
    for (row, lane) in snapshots.rows().into_iter().zip(buf.chunks_mut(n_bins)) {
        for (dst, src) in lane.iter_mut().zip(row.iter()) {
            *dst = *src;
        }
    }
    fft::transform_lanes(&fft::forward(n_bins), &mut buf);

    let mut angles = Vec::new();
    let mut power = Vec::new();
    let half = (n_bins / 2) as i64;
    for i in 0..n_bins as i64 {
        let k = i - half;
        let s = k as f64 / (n_bins as f64 * d);
        if s.abs() >= 1.0 {
            continue;
        }
        let bin = k.rem_euclid(n_bins as i64) as usize;
        let p = buf.chunks(n_bins).map(|lane| lane[bin].norm_sqr()).sum::<f64>() / n as f64;
        angles.push(s.asin().to_degrees());
        power.push(p);
    }
    AngleSpectrum::new(angles, power)
}

/// `P = a^H R a / a^H a`.
pub fn bartlett(r: &CovarianceMatrix, array: &VirtualArray, grid: &[f64]) -> Result<AngleSpectrum, AoaError> {
    check_dims(r, array)?;
    let power = steering_grid(array, grid)?
        .iter()
        .map(|a| ((a.adjoint() * r.matrix() * a)[(0, 0)].re / a.norm_squared()).max(0.0))
        .collect();
    AngleSpectrum::new(grid.to_vec(), power)
}

/// `P = 1 / (a^H R^-1 a)`, with `R^-1` taken from the eigendecomposition.
/// Any loading must already be in `r` (see [`super::covariance`]).
pub fn capon(r: &CovarianceMatrix, array: &VirtualArray, grid: &[f64]) -> Result<AngleSpectrum, AoaError> {
    check_dims(r, array)?;
    grid.iter().try_for_each(|&t| check_angle(t))?;
    let e = r.eigen();
    let (hi, lo) = (e.values[0], *e.values.last().expect("non-empty"));
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(AoaError::Singular { condition });
    }
    let power = steering_grid(array, grid)?
        .iter()
        .map(|a| {
            let proj = e.vectors.adjoint() * a;
            let q: f64 = proj.iter().zip(&e.values).map(|(p, l)| p.norm_sqr() / l).sum();
            1.0 / q
        })
        .collect();
    AngleSpectrum::new(grid.to_vec(), power)
}

/// `P = 1 / (a^H E_n E_n^H a)` with `E_n` the eigenvectors of the
/// `MN - n_sources` smallest eigenvalues.
pub fn music(
    r: &CovarianceMatrix,
    array: &VirtualArray,
    n_sources: usize,
    grid: &[f64],
) -> Result<AngleSpectrum, AoaError> {
    check_dims(r, array)?;
    let m = r.dim();
    if n_sources == 0 || n_sources >= m {
        return Err(AoaError::Rank {
            n_sources,
            elements: m,
        });
    }
    let e = r.eigen();
    let noise = e.vectors.columns(n_sources, m - n_sources).adjoint();
    let power = steering_grid(array, grid)?
        .iter()
        .map(|a| 1.0 / (&noise * a).norm_squared().max(1e-300))
        .collect();
    AngleSpectrum::new(grid.to_vec(), power)
}

/// Eigenvalues above ten times the median, clamped to `[1, MN - 1]`.
pub fn default_num_sources(r: &CovarianceMatrix) -> usize {
    let values = r.eigen().values;
    let m = values.len();
    let mut sorted = values.clone();
    sorted.sort_by(f64::total_cmp);
    let median = if m % 2 == 1 {
        sorted[m / 2]
    } else {
        0.5 * (sorted[m / 2 - 1] + sorted[m / 2])
    };
    let count = values.iter().filter(|&&l| l > 10.0 * median).count();
    count.clamp(1, m.saturating_sub(1).max(1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aoa::{covariance, default_grid, resolved_peaks};
    use nalgebra::DMatrix;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    /// Snapshots of uncorrelated unit-power sources plus white noise.
    fn scene(seed: u64, angles: &[f64], snr_db: f64, n: usize, arr: &VirtualArray) -> Array2<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut gauss = |sigma: f64| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im) * (sigma / 2f64.sqrt())
        };
        let steer: Vec<_> = angles.iter().map(|&t| steering_vector(t, arr).unwrap()).collect();
        let noise_sigma = 10f64.powf(-snr_db / 20.0);
        let mut x = Array2::zeros((n, arr.len()));
        for k in 0..n {
            let s: Vec<Complex64> = angles.iter().map(|_| gauss(1.0)).collect();
            for i in 0..arr.len() {
                let signal: Complex64 = steer.iter().zip(&s).map(|(a, s)| a[i] * s).sum();
                x[[k, i]] = signal + gauss(noise_sigma);
            }
        }
        x
    }

    fn identity(m: usize) -> CovarianceMatrix {
        CovarianceMatrix::from_matrix(DMatrix::identity(m, m), 1).unwrap()
    }

    #[test]
    fn fft_broadside_and_thirty() {
        let arr = VirtualArray::uniform(8, 0.5);
        let ones = vec![Complex64::new(1.0, 0.0); 8];
        assert_eq!(aoa_fft(&ones, &arr, 64).unwrap().argmax().0, 0.0);
        let a: Vec<_> = steering_vector(30.0, &arr).unwrap().iter().copied().collect();
        let s = aoa_fft(&a, &arr, 64).unwrap();
        // sin(30) * 64 * 0.5 = 16: exactly on grid.
        assert!((s.argmax().0 - 30.0).abs() < 1e-9);
        assert_eq!(s.len(), 63);
    }

    #[test]
    fn fft_global_phase_invariant() {
        let arr = VirtualArray::uniform(8, 0.5);
        let a: Vec<_> = steering_vector(-17.0, &arr).unwrap().iter().copied().collect();
        let rot: Vec<_> = a.iter().map(|v| v * Complex64::from_polar(2.0, 1.1)).collect();
        let (p, q) = (aoa_fft(&a, &arr, 64).unwrap(), aoa_fft(&rot, &arr, 64).unwrap());
        for (x, y) in p.power().iter().zip(q.power()) {
            assert!((4.0 * x - y).abs() < 1e-9 * y.max(1.0));
        }
    }

    #[test]
    fn fft_rejects_non_uniform_and_short_fft() {
        let arr = VirtualArray::new(vec![0.0, 0.5, 1.5]).unwrap();
        let x = vec![Complex64::new(1.0, 0.0); 3];
        assert!(matches!(aoa_fft(&x, &arr, 8), Err(AoaError::Geometry(_))));
        let arr = VirtualArray::uniform(8, 0.5);
        assert!(matches!(aoa_fft(&[Complex64::new(1.0, 0.0); 8], &arr, 4), Err(AoaError::Geometry(_))));
    }

    #[test]
    fn identity_covariance() {
        let arr = VirtualArray::uniform(8, 0.5);
        let grid = default_grid();
        let r = identity(8);
        let b = bartlett(&r, &arr, &grid).unwrap();
        assert!(b.power().iter().all(|p| (p - 1.0).abs() < 1e-12));
        let c = capon(&r, &arr, &grid).unwrap();
        assert!(c.power().iter().all(|p| (p - 1.0 / 8.0).abs() < 1e-12));
        assert_eq!(
            music(&r, &arr, 8, &grid),
            Err(AoaError::Rank { n_sources: 8, elements: 8 })
        );
        assert!(music(&r, &arr, 0, &grid).is_err());
    }

    #[test]
    fn capon_rejects_singular() {
        let arr = VirtualArray::uniform(8, 0.5);
        let x = scene(1, &[10.0], 300.0, 4, &arr);
        let r = covariance(&x, 0.0).unwrap();
        assert!(matches!(capon(&r, &arr, &default_grid()), Err(AoaError::Singular { .. })));
        let loaded = covariance(&x, DEFAULT_CAPON_LOADING).unwrap();
        assert!(capon(&loaded, &arr, &default_grid()).is_ok());
    }

    #[test]
    fn single_source_all_methods_within_one_degree() {
        let arr = VirtualArray::uniform(8, 0.5);
        let grid = default_grid();
        for seed in 0..50 {
            let x = scene(seed, &[20.0], 20.0, 128, &arr);
            let r = covariance(&x, 0.0).unwrap();
            let rl = covariance(&x, DEFAULT_CAPON_LOADING).unwrap();
            for s in [
                bartlett(&r, &arr, &grid).unwrap(),
                capon(&rl, &arr, &grid).unwrap(),
                music(&r, &arr, 1, &grid).unwrap(),
            ] {
                assert!((s.argmax().0 - 20.0).abs() <= 1.0, "seed {seed}: {}", s.argmax().0);
            }
        }
    }

    #[test]
    fn two_close_sources_resolved_by_subspace_methods() {
        let arr = VirtualArray::uniform(8, 0.5);
        let grid = default_grid();
        let x = scene(5, &[-7.0, 7.0], 20.0, 256, &arr);
        let r = covariance(&x, DEFAULT_CAPON_LOADING).unwrap();
        assert_eq!(default_num_sources(&r), 2);
        for s in [music(&r, &arr, 2, &grid).unwrap(), capon(&r, &arr, &grid).unwrap()] {
            let peaks = resolved_peaks(&s, 4, 10.0, 3.0);
            assert_eq!(peaks.len(), 2, "{peaks:?}");
            assert!((peaks[0].0 - peaks[1].0).abs() >= 10.0);
        }
        let fft = aoa_fft_mean(&x, &arr, 64).unwrap();
        assert_eq!(resolved_peaks(&fft, 4, 10.0, 3.0).len(), 1);
    }

    #[test]
    fn music_noise_subspace_orthogonal_to_sources() {
        let arr = VirtualArray::uniform(8, 0.5);
        let angles = [-30.0, 14.5];
        let x = scene(2, &angles, f64::INFINITY, 16, &arr);
        let r = covariance(&x, 0.0).unwrap();
        let e = r.eigen();
        let noise = e.vectors.columns(2, 6).adjoint();
        for t in angles {
            assert!((&noise * steering_vector(t, &arr).unwrap()).norm() < 1e-6);
        }
        let s = music(&r, &arr, 2, &default_grid()).unwrap();
        let peaks = crate::aoa::peak_angles(&s, 2);
        let mut got: Vec<f64> = peaks.iter().map(|p| p.0).collect();
        got.sort_by(f64::total_cmp);
        assert_eq!(got, angles);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn scaling_r_scales_spectra(seed in any::<u64>(), c in 0.01f64..100.0) {
            let arr = VirtualArray::uniform(6, 0.5);
            let grid: Vec<f64> = (-80..=80).map(|i| i as f64).collect();
            let r = covariance(&scene(seed, &[12.0, -40.0], 10.0, 64, &arr), 0.0).unwrap();
            let rc = r.scaled(c);
            let pairs = [
                (bartlett(&r, &arr, &grid).unwrap(), bartlett(&rc, &arr, &grid).unwrap(), c),
                (capon(&r, &arr, &grid).unwrap(), capon(&rc, &arr, &grid).unwrap(), c),
                (music(&r, &arr, 2, &grid).unwrap(), music(&rc, &arr, 2, &grid).unwrap(), 1.0),
            ];
            for (a, b, k) in pairs {
                for (x, y) in a.power().iter().zip(b.power()) {
                    prop_assert!((x * k - y).abs() <= 1e-8 * y.abs().max(1e-300));
                }
                prop_assert_eq!(a.argmax().0, b.argmax().0);
            }
        }
    }
}
