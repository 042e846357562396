use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::Detection;

/// Neighbourhood used to join detected cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Connectivity {
    Four,
    Eight,
}

impl TryFrom<u8> for Connectivity {
    type Error = String;

    fn try_from(n: u8) -> Result<Self, String> {
        match n {
            4 => Ok(Self::Four),
            8 => Ok(Self::Eight),
            _ => Err(format!("connectivity must be 4 or 8, got {n}")),
        }
    }
}

impl From<Connectivity> for u8 {
    fn from(c: Connectivity) -> u8 {
        match c {
            Connectivity::Four => 4,
            Connectivity::Eight => 8,
        }
    }
}

impl Connectivity {
    fn offsets(self) -> &'static [(i64, i64)] {
        const FOUR: [(i64, i64); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];
        const EIGHT: [(i64, i64); 8] = [
            (-1, -1),
            (-1, 0),
            (-1, 1),
            (0, -1),
            (0, 1),
            (1, -1),
            (1, 0),
            (1, 1),
        ];
        match self {
            Self::Four => &FOUR,
            Self::Eight => &EIGHT,
        }
    }
}

/// Reduces each connected component of detected cells to its strongest cell
/// (earliest in input order on ties). Output is in order of each component's
/// first cell in the input.
pub fn group_peaks(detections: &[Detection], connectivity: Connectivity) -> Vec<Detection> {
    let index: HashMap<(i64, i64), usize> = detections
        .iter()
        .enumerate()
        .map(|(i, d)| ((d.doppler_bin, d.range_bin as i64), i))
        .collect();
    let mut seen = vec![false; detections.len()];
    let mut out = Vec::new();
    for start in 0..detections.len() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![start];
        let mut best = start;
        while let Some(i) = stack.pop() {
            let d = &detections[i];
            if d.power > detections[best].power || (d.power == detections[best].power && i < best) {
                best = i;
            }
            for (dd, dr) in connectivity.offsets() {
                let key = (d.doppler_bin + dd, d.range_bin as i64 + dr);
                if let Some(&j) = index.get(&key) {
                    if !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        out.push(detections[best]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn det(doppler_bin: i64, range_bin: usize, power: f64) -> Detection {
        Detection {
            range_bin,
            doppler_bin,
            power,
            threshold: 1.0,
            snr_db: 10.0 * power.log10(),
        }
    }

    #[test]
    fn empty_in_empty_out() {
        assert!(group_peaks(&[], Connectivity::Eight).is_empty());
    }

    #[test]
    fn adjacent_cells_collapse_to_strongest() {
        let dets = [det(0, 10, 5.0), det(1, 11, 9.0), det(2, 12, 7.0)];
        assert_eq!(group_peaks(&dets, Connectivity::Eight), vec![dets[1]]);
        // Diagonal chain is three components under 4-connectivity.
        assert_eq!(group_peaks(&dets, Connectivity::Four).len(), 3);
    }

    #[test]
    fn gap_separates_components() {
        let dets = [det(0, 10, 5.0), det(0, 12, 6.0)];
        for c in [Connectivity::Four, Connectivity::Eight] {
            assert_eq!(group_peaks(&dets, c).len(), 2);
        }
    }

    #[test]
    fn connectivity_serde_is_numeric() {
        assert_eq!(serde_json::to_string(&Connectivity::Four).unwrap(), "4");
        assert_eq!(serde_json::from_str::<Connectivity>("8").unwrap(), Connectivity::Eight);
        assert!(serde_json::from_str::<Connectivity>("6").is_err());
    }

    proptest! {
        #[test]
        fn output_subset_of_input(cells in proptest::collection::btree_set((-8i64..8, 0usize..16), 0..60)) {
            let dets: Vec<Detection> = cells
                .iter()
                .enumerate()
                .map(|(i, &(d, r))| det(d, r, 1.0 + i as f64))
                .collect();
            for c in [Connectivity::Four, Connectivity::Eight] {
                let out = group_peaks(&dets, c);
                prop_assert!(out.len() <= dets.len());
                prop_assert!(out.iter().all(|o| dets.contains(o)));
            }
            prop_assert!(group_peaks(&dets, Connectivity::Eight).len() <= group_peaks(&dets, Connectivity::Four).len());
        }
    }
}
