use super::CaptureError;

/// Datagram header: u32 seq + u48 byte offset.
pub const HEADER_BYTES: usize = 10;

/// Payload size that keeps a datagram inside a 1500-byte MTU.
pub const DEFAULT_PAYLOAD_BYTES: usize = 1456;

pub const MAX_BYTE_OFFSET: u64 = (1 << 48) - 1;

/// One sequenced slice of the capture byte stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CapturePacket {
    pub seq: u32,
    /// Payload bytes sent before this packet.
    pub byte_offset: u64,
    pub payload: Vec<u8>,
}

impl CapturePacket {
    pub fn encode(&self) -> Vec<u8> {
        debug_assert!(self.byte_offset <= MAX_BYTE_OFFSET);
        let mut out = Vec::with_capacity(HEADER_BYTES + self.payload.len());
        out.extend_from_slice(&self.seq.to_le_bytes());
        out.extend_from_slice(&self.byte_offset.to_le_bytes()[..6]);
        out.extend_from_slice(&self.payload);
        out
    }

    pub fn decode(datagram: &[u8]) -> Result<Self, CaptureError> {
        if datagram.len() < HEADER_BYTES {
            return Err(CaptureError::Transport(format!(
                "datagram of {} bytes is shorter than the {HEADER_BYTES}-byte header",
                datagram.len()
            )));
        }
        let seq = u32::from_le_bytes(datagram[0..4].try_into().unwrap());
        let mut offset = [0u8; 8];
        offset[..6].copy_from_slice(&datagram[4..10]);
        Ok(Self {
            seq,
            byte_offset: u64::from_le_bytes(offset),
            payload: datagram[HEADER_BYTES..].to_vec(),
        })
    }
}
