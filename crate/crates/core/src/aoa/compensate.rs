use std::f64::consts::PI;

use num_complex::Complex64;

use crate::range_doppler::RangeDopplerCube;

/// Removes the phase a target's motion adds between TDM firings: virtual
/// element of TX `t` at centered Doppler bin `b` is multiplied by
/// `exp(-j 2 pi b t / (N_c M))`.
///
/// Cubes with one transmitter, or that were not TX-deinterleaved, are
/// returned unchanged.
pub fn doppler_compensate(rd: &RangeDopplerCube) -> RangeDopplerCube {
    let cfg = rd.config();
    let m = cfg.num_tx;
    if m == 1 || !rd.deinterleaved() {
        return rd.clone();
    }
    let n_c = rd.num_doppler();
    let num_rx = cfg.num_rx;
    let mut data = rd.data().clone();
    for (i, mut plane) in data.outer_iter_mut().enumerate() {
        let b = rd.centered_bin(i) as f64;
        for (v, mut row) in plane.outer_iter_mut().enumerate() {
            let t = (v / num_rx) as f64;
            let rot = Complex64::from_polar(1.0, -2.0 * PI * b * t / (n_c * m) as f64);
            row.mapv_inplace(|x| x * rot);
        }
    }
    rd.with_data(data)
}
