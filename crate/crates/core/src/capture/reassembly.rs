use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use super::{CaptureError, CapturePacket};

/// Loss and reorder accounting for a reassembled stream.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct DropReport {
    pub packets_received: u64,
    pub packets_dropped: u64,
    pub bytes_zero_filled: u64,
    pub reordered_count: u64,
}

impl DropReport {
    pub fn merge(&mut self, other: &DropReport) {
        self.packets_received += other.packets_received;
        self.packets_dropped += other.packets_dropped;
        self.bytes_zero_filled += other.bytes_zero_filled;
        self.reordered_count += other.reordered_count;
    }
}

/// A piece of the in-order output stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Segment {
    Data {
        seq: u64,
        payload: Vec<u8>,
        reordered: bool,
    },
    /// A lost packet, to be replaced by `len` zero bytes.
    Lost { seq: u64, len: usize },
}

impl Segment {
    pub fn len(&self) -> usize {
        match self {
            Segment::Data { payload, .. } => payload.len(),
            Segment::Lost { len, .. } => *len,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Incremental sequence-number reassembler.
///
/// Packet `n` is declared lost once the stream position (arrivals plus
/// packets already declared lost) exceeds `n + window`, so any permutation
/// that displaces each packet by at most `window` is recovered exactly. The
/// lost extent is taken from the `byte_offset` of the next packet held.
#[derive(Debug)]
pub struct Reassembler {
    window: u64,
    next_seq: u64,
    expected_offset: u64,
    pending: BTreeMap<u64, (CapturePacket, bool)>,
    recent: VecDeque<(u64, Vec<u8>)>,
    arrivals: u64,
    highest_seen: Option<u64>,
    report: DropReport,
    nominal_payload: usize,
}

impl Reassembler {
    pub fn new(window: usize) -> Self {
        assert!(window >= 1, "reassembly window must be >= 1");
        Self {
            window: window as u64,
            next_seq: 0,
            expected_offset: 0,
            pending: BTreeMap::new(),
            recent: VecDeque::new(),
            arrivals: 0,
            highest_seen: None,
            report: DropReport::default(),
            nominal_payload: 0,
        }
    }

    pub fn report(&self) -> DropReport {
        self.report
    }

    /// Largest payload seen so far.
    pub fn nominal_payload(&self) -> usize {
        self.nominal_payload
    }

    pub fn next_seq(&self) -> u64 {
        self.next_seq
    }

    /// Bytes emitted (data or zero fill) so far.
    pub fn emitted_bytes(&self) -> u64 {
        self.expected_offset
    }

    pub fn pending_len(&self) -> usize {
        self.pending.len()
    }

    pub fn push(&mut self, packet: CapturePacket) -> Result<Vec<Segment>, CaptureError> {
        let seq = packet.seq as u64;
        if seq < self.next_seq {
            // Late or duplicate: only a conflicting duplicate is an error.
            if let Some((_, payload)) = self.recent.iter().find(|(s, _)| *s == seq) {
                if *payload != packet.payload {
                    return Err(CaptureError::Transport(format!(
                        "duplicate seq {seq} with conflicting payload"
                    )));
                }
            }
            return Ok(Vec::new());
        }
        if let Some((held, _)) = self.pending.get(&seq) {
            if held.payload != packet.payload || held.byte_offset != packet.byte_offset {
                return Err(CaptureError::Transport(format!(
                    "duplicate seq {seq} with conflicting payload"
                )));
            }
            return Ok(Vec::new());
        }
        if packet.byte_offset < self.expected_offset {
            return Err(CaptureError::Transport(format!(
                "seq {seq} byte_offset {} precedes stream position {}",
                packet.byte_offset, self.expected_offset
            )));
        }

        let reordered = self.highest_seen.is_some_and(|h| seq < h);
        if reordered {
            self.report.reordered_count += 1;
        }
        self.highest_seen = Some(self.highest_seen.map_or(seq, |h| h.max(seq)));
        self.nominal_payload = self.nominal_payload.max(packet.payload.len());
        self.arrivals += 1;
        self.report.packets_received += 1;
        self.pending.insert(seq, (packet, reordered));

        let mut out = Vec::new();
        self.drain(false, &mut out)?;
        Ok(out)
    }

    /// Emits everything still held, zero-filling the gaps between held
    /// packets. Losses after the last held packet cannot be seen here.
    pub fn flush(&mut self) -> Result<Vec<Segment>, CaptureError> {
        let mut out = Vec::new();
        self.drain(true, &mut out)?;
        Ok(out)
    }

    fn drain(&mut self, force: bool, out: &mut Vec<Segment>) -> Result<(), CaptureError> {
        loop {
            if let Some((packet, reordered)) = self.pending.remove(&self.next_seq) {
                self.emit(packet, reordered, out)?;
                continue;
            }
            let Some((&lowest, (held, _))) = self.pending.first_key_value() else {
                return Ok(());
            };
            let position = self.arrivals - 1 + self.report.packets_dropped;
            if !force && position <= self.next_seq + self.window {
                return Ok(());
            }
            let missing = lowest - self.next_seq;
            let extent = held.byte_offset - self.expected_offset;
            for i in 0..missing {
                let start = i * extent / missing;
                let end = (i + 1) * extent / missing;
                out.push(Segment::Lost {
                    seq: self.next_seq + i,
                    len: (end - start) as usize,
                });
            }
            self.report.packets_dropped += missing;
            self.report.bytes_zero_filled += extent;
            self.expected_offset = held.byte_offset;
            self.next_seq = lowest;
        }
    }

    fn emit(
        &mut self,
        packet: CapturePacket,
        reordered: bool,
        out: &mut Vec<Segment>,
    ) -> Result<(), CaptureError> {
        if packet.byte_offset != self.expected_offset {
            return Err(CaptureError::Transport(format!(
                "seq {} has byte_offset {} but stream is at {}",
                packet.seq, packet.byte_offset, self.expected_offset
            )));
        }
        let seq = packet.seq as u64;
        self.expected_offset += packet.payload.len() as u64;
        self.next_seq = seq + 1;
        self.recent.push_back((seq, packet.payload.clone()));
        while self.recent.len() as u64 > self.window {
            self.recent.pop_front();
        }
        out.push(Segment::Data {
            seq,
            payload: packet.payload,
            reordered,
        });
        Ok(())
    }
}

/// Reassembles a finite packet stream into its byte stream.
pub fn reassemble<I>(packets: I, window: usize) -> Result<(Vec<u8>, DropReport), CaptureError>
where
    I: IntoIterator<Item = CapturePacket>,
{
    let mut reassembler = Reassembler::new(window);
    let mut bytes = Vec::new();
    let append = |segments: Vec<Segment>, bytes: &mut Vec<u8>| {
        for segment in segments {
            match segment {
                Segment::Data { payload, .. } => bytes.extend_from_slice(&payload),
                Segment::Lost { len, .. } => bytes.resize(bytes.len() + len, 0),
            }
        }
    };
    for packet in packets {
        let segments = reassembler.push(packet)?;
        append(segments, &mut bytes);
    }
    let segments = reassembler.flush()?;
    append(segments, &mut bytes);
    Ok((bytes, reassembler.report()))
}
