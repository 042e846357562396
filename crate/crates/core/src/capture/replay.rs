use std::net::{SocketAddr, UdpSocket};
use std::path::Path;
use std::thread;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{read_capture_file, CaptureError, CapturePacket, DEFAULT_PAYLOAD_BYTES};
use crate::sim::packetize;

#[derive(Debug, Clone)]
pub struct ReplayOptions {
    pub payload_bytes: usize,
    /// Independent per-packet drop probability.
    pub loss: f64,
    /// Maximum displacement of any packet from its original position.
    pub reorder: usize,
    pub seed: u64,
    /// Send rate cap; `None` sends as fast as the socket allows.
    pub packets_per_second: Option<f64>,
}

impl Default for ReplayOptions {
    fn default() -> Self {
        Self {
            payload_bytes: DEFAULT_PAYLOAD_BYTES,
            loss: 0.0,
            reorder: 0,
            seed: 0,
            packets_per_second: Some(200_000.0),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReplayStats {
    pub sent: usize,
    pub dropped_seqs: Vec<u32>,
    pub bytes_dropped: u64,
}

/// Permutes packets so that none moves more than `max_displacement`
/// positions: sorting by `index + U[0, max_displacement]` can only swap
/// elements whose indices differ by at most that much.
pub fn displace<T>(items: Vec<T>, max_displacement: usize, seed: u64) -> Vec<T> {
    if max_displacement == 0 {
        return items;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keyed: Vec<(f64, usize, T)> = items
        .into_iter()
        .enumerate()
        .map(|(i, item)| (i as f64 + rng.random::<f64>() * max_displacement as f64, i, item))
        .collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    keyed.into_iter().map(|(_, _, item)| item).collect()
}

/// Applies loss then bounded reordering; returns what would be sent.
pub fn impair(packets: Vec<CapturePacket>, opts: &ReplayOptions) -> (Vec<CapturePacket>, ReplayStats) {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut stats = ReplayStats::default();
    let mut kept = Vec::with_capacity(packets.len());
    for p in packets {
        if opts.loss > 0.0 && rng.random::<f64>() < opts.loss {
            stats.dropped_seqs.push(p.seq);
            stats.bytes_dropped += p.payload.len() as u64;
        } else {
            kept.push(p);
        }
    }
    let sent = displace(kept, opts.reorder, opts.seed ^ 0x5eed_0f_da7a);
    stats.sent = sent.len();
    (sent, stats)
}

pub fn replay_packets(
    packets: Vec<CapturePacket>,
    dest: SocketAddr,
    opts: &ReplayOptions,
) -> Result<ReplayStats, CaptureError> {
    let bind: SocketAddr = if dest.is_ipv4() {
        "0.0.0.0:0".parse().unwrap()
    } else {
        "[::]:0".parse().unwrap()
    };
    let socket = UdpSocket::bind(bind).map_err(|source| CaptureError::Bind {
        addr: bind.to_string(),
        source,
    })?;
    let (to_send, stats) = impair(packets, opts);
    let start = Instant::now();
    for (i, packet) in to_send.iter().enumerate() {
        if let Some(pps) = opts.packets_per_second {
            let due = Duration::from_secs_f64(i as f64 / pps);
            let elapsed = start.elapsed();
            if due > elapsed {
                thread::sleep(due - elapsed);
            }
        }
        socket.send_to(&packet.encode(), dest)?;
    }
    Ok(stats)
}

/// Packetizes a capture file and sends it to `dest`.
pub fn replay_capture(
    path: impl AsRef<Path>,
    dest: SocketAddr,
    opts: &ReplayOptions,
) -> Result<ReplayStats, CaptureError> {
    let (_, cubes) = read_capture_file(path)?;
    replay_packets(packetize(&cubes, opts.payload_bytes), dest, opts)
}
