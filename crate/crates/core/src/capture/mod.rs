//! Raw capture ingestion: UDP packets, capture files and the int16 I/Q
//! frame layout.
//!
//! Wire format of one datagram (little-endian):
//!
//! ```text
//! [u32 seq][u48 byte_offset][payload <= 1456 bytes]
//! ```
//!
//! Frames are concatenated into one byte stream; a frame is
//! `chirps x rx x samples` of `(i16 I, i16 Q)`, chirps outermost.

mod file;
mod layout;
mod listen;
mod packet;
mod reassembly;
mod replay;

use thiserror::Error;

pub use file::{decode_capture, encode_capture, read_capture_file, write_capture_file, CAPTURE_MAGIC, CAPTURE_VERSION};
pub use layout::{deinterleave, serialize_cube};
pub use listen::{listen, ListenOptions, ListenedFrame, Listener};
pub use packet::{CapturePacket, DEFAULT_PAYLOAD_BYTES, HEADER_BYTES, MAX_BYTE_OFFSET};
pub use reassembly::{reassemble, DropReport, Reassembler, Segment};
pub use replay::{displace, impair, replay_capture, replay_packets, ReplayOptions, ReplayStats};

#[derive(Debug, Error)]
pub enum CaptureError {
    #[error("size mismatch: expected {expected} bytes, got {actual}")]
    Size { expected: usize, actual: usize },
    #[error("format error ({field}): {detail}")]
    Format { field: &'static str, detail: String },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("cannot bind {addr}: {source}")]
    Bind {
        addr: String,
        #[source]
        source: std::io::Error,
    },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CaptureError {
    pub(crate) fn format(field: &'static str, detail: impl Into<String>) -> Self {
        Self::Format {
            field,
            detail: detail.into(),
        }
    }
}
