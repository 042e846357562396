use ndarray::{Array2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::DetectionError;

/// Cell-averaging CFAR parameters for one axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CfarParams {
    pub guard_cells: usize,
    /// Training cells per side.
    pub train_cells: usize,
    pub pfa: f64,
    /// Wrap the window around the axis ends (Doppler axis only).
    #[serde(default)]
    pub circular: bool,
}

impl CfarParams {
    pub fn new(guard_cells: usize, train_cells: usize, pfa: f64) -> Self {
        Self {
            guard_cells,
            train_cells,
            pfa,
            circular: false,
        }
    }

    pub fn validate(&self, axis_len: usize) -> Result<(), DetectionError> {
        if self.train_cells == 0 {
            return Err(DetectionError::param("train_cells", "must be >= 1"));
        }
        if !(self.pfa > 0.0 && self.pfa < 1.0) {
            return Err(DetectionError::param("pfa", format!("{} not in (0, 1)", self.pfa)));
        }
        if 2 * (self.guard_cells + self.train_cells) >= axis_len {
            return Err(DetectionError::Window {
                guard: self.guard_cells,
                train: self.train_cells,
                axis_len,
            });
        }
        Ok(())
    }
}

/// Which axes a 2D map is tested along.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CfarMode {
    RangeAxis,
    DopplerAxis,
    /// Both axes must pass.
    #[serde(rename = "cross_2d")]
    Cross2d,
}

/// `N_t * (pfa^(-1/N_t) - 1)`: the CA threshold factor for `n_train` cells
/// of exponential noise.
pub fn alpha(n_train: usize, pfa: f64) -> f64 {
    let n = n_train as f64;
    n * (pfa.powf(-1.0 / n) - 1.0)
}

/// `(noise estimate, training cell count)` per cell.
fn noise_estimates(profile: &[f64], p: &CfarParams) -> Vec<(f64, usize)> {
    let n = profile.len();
    let (g, t) = (p.guard_cells, p.train_cells);
    if p.circular {
        // Prefix sums over three copies cover every wrapped window.
        let mut prefix = vec![0.0; 3 * n + 1];
        for i in 0..3 * n {
            prefix[i + 1] = prefix[i] + profile[i % n];
        }
        let sum = |lo: usize, hi: usize| prefix[hi] - prefix[lo];
        return (0..n)
            .map(|i| {
                let c = i + n;
                let total = sum(c - g - t, c - g) + sum(c + g + 1, c + g + 1 + t);
                (total / (2 * t) as f64, 2 * t)
            })
            .collect();
    }
    let mut prefix = vec![0.0; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + profile[i];
    }
    (0..n)
        .map(|i| {
            let left_hi = i.saturating_sub(g);
            let left_lo = i.saturating_sub(g + t);
            let right_lo = (i + g + 1).min(n);
            let right_hi = (i + g + 1 + t).min(n);
            let count = (left_hi - left_lo) + (right_hi - right_lo);
            let total = prefix[left_hi] - prefix[left_lo] + prefix[right_hi] - prefix[right_lo];
            (total / count as f64, count)
        })
        .collect()
}

fn thresholds(profile: &[f64], p: &CfarParams) -> Vec<(f64, f64)> {
    noise_estimates(profile, p)
        .into_iter()
        .map(|(noise, count)| (alpha(count, p.pfa) * noise, noise))
        .collect()
}

/// Returns `(mask, thresholds)`: cell `i` is flagged when it exceeds
/// `alpha * mean(training cells)`. Near the ends the window shrinks to the
/// training cells that exist and `alpha` is recomputed for that count,
/// unless `circular` is set.
pub fn ca_cfar_1d(profile: &[f64], params: &CfarParams) -> Result<(Vec<bool>, Vec<f64>), DetectionError> {
    params.validate(profile.len())?;
    let th: Vec<f64> = thresholds(profile, params).into_iter().map(|(t, _)| t).collect();
    let mask = profile.iter().zip(&th).map(|(x, t)| x > t).collect();
    Ok((mask, th))
}

/// A detected cell of a `(doppler, range)` map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Detection {
    pub range_bin: usize,
    /// Centered: row `i` of an `n`-row map is bin `i - n/2`.
    pub doppler_bin: i64,
    pub power: f64,
    pub threshold: f64,
    /// Power over the noise estimate behind `threshold`.
    pub snr_db: f64,
}

impl Detection {
    /// Row of this detection in a map with `n_doppler` rows.
    pub fn doppler_index(&self, n_doppler: usize) -> usize {
        (self.doppler_bin + (n_doppler / 2) as i64) as usize
    }
}

/// Per-cell `(threshold, noise)` along one axis of the map.
fn axis_thresholds(map: &Array2<f64>, axis: Axis, p: &CfarParams) -> Array2<(f64, f64)> {
    let mut out = Array2::from_elem(map.dim(), (0.0, 0.0));
    let lanes: Vec<Vec<(f64, f64)>> = map
        .lanes(axis)
        .into_iter()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|lane| thresholds(&lane.to_vec(), p))
        .collect();
    for (mut dst, src) in out.lanes_mut(axis).into_iter().zip(lanes) {
        for (d, s) in dst.iter_mut().zip(src) {
            *d = s;
        }
    }
    out
}

/// CFAR over a `(doppler, range)` map with the axes selected by `mode`.
/// For [`CfarMode::Cross2d`] a cell must pass both axes and the larger
/// threshold is reported. Detections come out in row-major order.
pub fn cfar_map(
    map: &Array2<f64>,
    mode: CfarMode,
    range_params: &CfarParams,
    doppler_params: &CfarParams,
) -> Result<Vec<Detection>, DetectionError> {
    let (rows, cols) = map.dim();
    let use_range = mode != CfarMode::DopplerAxis;
    let use_doppler = mode != CfarMode::RangeAxis;
    if use_range {
        if range_params.circular {
            return Err(DetectionError::param("circular", "the range axis is not circular"));
        }
        range_params.validate(cols)?;
    }
    if use_doppler {
        doppler_params.validate(rows)?;
    }
    let range_th = use_range.then(|| axis_thresholds(map, Axis(1), range_params));
    let doppler_th = use_doppler.then(|| axis_thresholds(map, Axis(0), doppler_params));

    let mut out = Vec::new();
    for ((d, r), &power) in map.indexed_iter() {
        let mut best: Option<(f64, f64)> = None;
        let mut pass = true;
        for th in [&range_th, &doppler_th].into_iter().flatten() {
            let (t, noise) = th[[d, r]];
            pass &= power > t;
            if best.is_none_or(|(bt, _)| t > bt) {
                best = Some((t, noise));
            }
        }
        let (threshold, noise) = best.expect("at least one axis");
        if pass {
            out.push(Detection {
                range_bin: r,
                doppler_bin: d as i64 - (rows / 2) as i64,
                power,
                threshold,
                snr_db: 10.0 * (power / noise).log10(),
            });
        }
    }
    Ok(out)
}

/// Cross-axis CFAR: range AND Doppler.
pub fn cfar_2d(
    map: &Array2<f64>,
    range_params: &CfarParams,
    doppler_params: &CfarParams,
) -> Result<Vec<Detection>, DetectionError> {
    cfar_map(map, CfarMode::Cross2d, range_params, doppler_params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn mode_names() {
        for (mode, name) in [
            (CfarMode::RangeAxis, "\"range_axis\""),
            (CfarMode::DopplerAxis, "\"doppler_axis\""),
            (CfarMode::Cross2d, "\"cross_2d\""),
        ] {
            assert_eq!(serde_json::to_string(&mode).unwrap(), name);
            assert_eq!(serde_json::from_str::<CfarMode>(name).unwrap(), mode);
        }
    }

    /// Direct evaluation of the window for one cell.
    fn naive_threshold(profile: &[f64], i: usize, p: &CfarParams) -> f64 {
        let n = profile.len() as i64;
        let (g, t) = (p.guard_cells as i64, p.train_cells as i64);
        let mut cells = Vec::new();
        for off in (g + 1)..=(g + t) {
            for j in [i as i64 - off, i as i64 + off] {
                if p.circular {
                    cells.push(profile[j.rem_euclid(n) as usize]);
                } else if (0..n).contains(&j) {
                    cells.push(profile[j as usize]);
                }
            }
        }
        alpha(cells.len(), p.pfa) * cells.iter().sum::<f64>() / cells.len() as f64
    }

    fn exponential(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect()
    }

    #[test]
    fn alpha_closed_form() {
        assert_abs_diff_eq!(alpha(24, 1e-3), 24.0 * (10f64.powf(3.0 / 24.0) - 1.0), epsilon = 1e-12);
        assert_abs_diff_eq!(alpha(24, 1e-3), 8.0045, epsilon = 5e-5);
    }

    #[test]
    fn flat_profile_has_no_detections() {
        let (mask, th) = ca_cfar_1d(&[3.0; 64], &CfarParams::new(2, 12, 1e-3)).unwrap();
        assert!(mask.iter().all(|m| !m));
        assert!(th.iter().all(|&t| t > 3.0));
    }

    #[test]
    fn single_spike_flagged() {
        let mut p = vec![1.0; 100];
        p[40] = 100.0;
        let (mask, _) = ca_cfar_1d(&p, &CfarParams::new(2, 12, 1e-3)).unwrap();
        let hits: Vec<usize> = (0..100).filter(|&i| mask[i]).collect();
        assert_eq!(hits, vec![40]);
    }

    #[test]
    fn window_must_fit() {
        let err = ca_cfar_1d(&[1.0; 28], &CfarParams::new(2, 12, 1e-3)).unwrap_err();
        assert!(matches!(err, DetectionError::Window { axis_len: 28, .. }));
        assert!(ca_cfar_1d(&[1.0; 29], &CfarParams::new(2, 12, 1e-3)).is_ok());
        assert!(ca_cfar_1d(&[1.0; 40], &CfarParams::new(2, 0, 1e-3)).is_err());
        assert!(ca_cfar_1d(&[1.0; 40], &CfarParams::new(2, 4, 1.0)).is_err());
    }

    #[test]
    fn empirical_false_alarm_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for pfa in [1e-2, 1e-3] {
            for circular in [false, true] {
                let p = CfarParams { circular, ..CfarParams::new(2, 12, pfa) };
                let (mut hits, mut cells) = (0usize, 0usize);
                while cells < 1_000_000 {
                    let profile = exponential(&mut rng, 4096);
                    hits += ca_cfar_1d(&profile, &p).unwrap().0.iter().filter(|m| **m).count();
                    cells += profile.len();
                }
                let rate = hits as f64 / cells as f64;
                assert!(rate >= 0.5 * pfa && rate <= 2.0 * pfa, "pfa {pfa} circular {circular}: {rate}");
            }
        }
    }

    #[test]
    fn zero_map_no_detections() {
        let map = Array2::zeros((32, 64));
        assert!(cfar_2d(&map, &CfarParams::new(2, 8, 1e-3), &CfarParams::new(1, 4, 1e-3)).unwrap().is_empty());
    }

    #[test]
    fn cross_mode_records_larger_threshold() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut map = Array2::from_shape_fn((32, 64), |_| -(1.0 - rng.random::<f64>()).ln());
        map[[10, 30]] = 1e4;
        let rp = CfarParams::new(2, 8, 1e-3);
        let dp = CfarParams::new(1, 6, 1e-2);
        let dets = cfar_2d(&map, &rp, &dp).unwrap();
        let d = dets.iter().find(|d| d.range_bin == 30 && d.doppler_bin == 10 - 16).expect("spike");
        assert_eq!(d.doppler_index(32), 10);
        let row: Vec<f64> = map.row(10).to_vec();
        let col: Vec<f64> = map.column(30).to_vec();
        let tr = naive_threshold(&row, 30, &rp);
        let td = naive_threshold(&col, 10, &dp);
        assert_abs_diff_eq!(d.threshold, tr.max(td), epsilon = 1e-9 * tr.max(td));
        assert!(d.snr_db > 0.0 && d.power > d.threshold);
        for d in &dets {
            let tr = naive_threshold(&map.row(d.doppler_index(32)).to_vec(), d.range_bin, &rp);
            let td = naive_threshold(&map.column(d.range_bin).to_vec(), d.doppler_index(32), &dp);
            assert!(d.power > tr && d.power > td);
        }
    }

    #[test]
    fn range_axis_cannot_be_circular() {
        let map = Array2::ones((32, 64));
        let rp = CfarParams { circular: true, ..CfarParams::new(2, 8, 1e-3) };
        assert!(cfar_map(&map, CfarMode::RangeAxis, &rp, &CfarParams::new(1, 4, 1e-3)).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn matches_naive_window(seed in any::<u64>(), n in 12usize..80, g in 0usize..3, t in 1usize..5, circular: bool) {
            let p = CfarParams { circular, ..CfarParams::new(g, t, 1e-2) };
            prop_assume!(2 * (g + t) < n);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let profile = exponential(&mut rng, n);
            let (mask, th) = ca_cfar_1d(&profile, &p).unwrap();
            for i in 0..n {
                let want = naive_threshold(&profile, i, &p);
                prop_assert!((th[i] - want).abs() <= 1e-9 * want);
                prop_assert_eq!(mask[i], profile[i] > th[i]);
            }
        }

        #[test]
        fn mask_scale_invariant(seed in any::<u64>(), exp in -3i32..4) {
            let scale = 10f64.powi(exp);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut profile = exponential(&mut rng, 256);
            profile[100] = 60.0;
            let p = CfarParams::new(2, 12, 1e-2);
            let scaled: Vec<f64> = profile.iter().map(|x| x * scale).collect();
            prop_assert_eq!(ca_cfar_1d(&profile, &p).unwrap().0, ca_cfar_1d(&scaled, &p).unwrap().0);
        }
    }
}
