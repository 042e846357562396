use mmwave_core::capture::{
    decode_capture, encode_capture, impair, reassemble, serialize_cube, ReplayOptions, DEFAULT_PAYLOAD_BYTES,
};
use mmwave_core::sim::{packetize, synthesize_capture, NoiseSpec, PointTarget, SceneFrame};
use mmwave_core::{DataCube, RadarConfig, ValidatedConfig};

fn frames(n: usize) -> (ValidatedConfig, Vec<DataCube>) {
    let cfg = RadarConfig {
        chirps_per_frame_per_tx: 16,
        samples_per_chirp: 32,
        ..RadarConfig::reference()
    }
    .validate()
    .unwrap();
    let scene = [SceneFrame {
        frame: 0,
        targets: vec![PointTarget::new(3.0, -1.0, 5.0, 500.0)],
    }];
    let cubes = synthesize_capture(&cfg, &scene, &NoiseSpec::for_snr(500.0, 20.0, 1), n).unwrap();
    (cfg, cubes.iter().map(DataCube::quantized).collect())
}

#[test]
fn capture_file_round_trips_quantized_cubes() {
    let (cfg, cubes) = frames(3);
    let bytes = encode_capture(&cfg, &cubes).unwrap();
    let (back_cfg, back) = decode_capture(&bytes).unwrap();
    assert_eq!(back_cfg, cfg);
    assert_eq!(back.len(), 3);
    for (a, b) in cubes.iter().zip(&back) {
        assert_eq!(a.samples(), b.samples());
        assert_eq!(a.frame_index(), b.frame_index());
    }
}

#[test]
fn truncated_capture_is_rejected() {
    let (cfg, cubes) = frames(1);
    let bytes = encode_capture(&cfg, &cubes).unwrap();
    assert!(decode_capture(&bytes[..bytes.len() - 3]).is_err());
    assert!(decode_capture(b"NOPE").is_err());
}

#[test]
fn impaired_stream_keeps_length_and_accounts_for_every_drop() {
    let (_, cubes) = frames(4);
    let stream: Vec<u8> = cubes.iter().flat_map(serialize_cube).collect();
    let packets = packetize(&cubes, DEFAULT_PAYLOAD_BYTES);
    for seed in 0..5 {
        let opts = ReplayOptions {
            loss: 0.05,
            reorder: 16,
            seed,
            ..ReplayOptions::default()
        };
        let total = packets.len();
        let (sent, stats) = impair(packets.clone(), &opts);
        assert_eq!(sent.len() + stats.dropped_seqs.len(), total);
        let (bytes, report) = reassemble(sent, 64).unwrap();
        assert_eq!(bytes.len(), stream.len());
        assert_eq!(report.packets_dropped as usize, stats.dropped_seqs.len());
        assert_eq!(report.bytes_zero_filled, stats.bytes_dropped);
        // Every byte outside a dropped packet survives.
        let lost: Vec<usize> = stats.dropped_seqs.iter().map(|&s| s as usize).collect();
        for (i, chunk) in stream.chunks(DEFAULT_PAYLOAD_BYTES).enumerate() {
            let got = &bytes[i * DEFAULT_PAYLOAD_BYTES..i * DEFAULT_PAYLOAD_BYTES + chunk.len()];
            if lost.contains(&i) {
                assert!(got.iter().all(|&b| b == 0));
            } else {
                assert_eq!(got, chunk);
            }
        }
    }
}
