use std::fs;
use std::path::Path;

use super::{deinterleave, serialize_cube, CaptureError};
use crate::config::{RadarConfig, ValidatedConfig};
use crate::cube::DataCube;

pub const CAPTURE_MAGIC: &[u8; 4] = b"ORAD";
pub const CAPTURE_VERSION: u16 = 1;

/// `"ORAD" | u16 version | u32 len | config JSON | u32 frames | frames...`
pub fn encode_capture(cfg: &ValidatedConfig, cubes: &[DataCube]) -> Result<Vec<u8>, CaptureError> {
    let blob = cfg.to_canonical_json().into_bytes();
    let mut out = Vec::with_capacity(14 + blob.len() + cubes.len() * cfg.frame_bytes());
    out.extend_from_slice(CAPTURE_MAGIC);
    out.extend_from_slice(&CAPTURE_VERSION.to_le_bytes());
    out.extend_from_slice(&(blob.len() as u32).to_le_bytes());
    out.extend_from_slice(&blob);
    out.extend_from_slice(&(cubes.len() as u32).to_le_bytes());
    for cube in cubes {
        if cube.config() != cfg {
            return Err(CaptureError::format(
                "config",
                format!("frame {} was built for a different config", cube.frame_index()),
            ));
        }
        out.extend_from_slice(&serialize_cube(cube));
    }
    Ok(out)
}

fn take<'a>(bytes: &'a [u8], at: &mut usize, n: usize, what: &'static str) -> Result<&'a [u8], CaptureError> {
    let end = *at + n;
    if bytes.len() < end {
        return Err(CaptureError::format(
            "length",
            format!("truncated {what}: expected at least {end} bytes, got {}", bytes.len()),
        ));
    }
    let slice = &bytes[*at..end];
    *at = end;
    Ok(slice)
}

pub fn decode_capture(bytes: &[u8]) -> Result<(ValidatedConfig, Vec<DataCube>), CaptureError> {
    let mut at = 0;
    if take(bytes, &mut at, 4, "magic")? != CAPTURE_MAGIC {
        return Err(CaptureError::format(
            "magic",
            format!("expected \"ORAD\", got {:?}", String::from_utf8_lossy(&bytes[..4])),
        ));
    }
    let version = u16::from_le_bytes(take(bytes, &mut at, 2, "version")?.try_into().unwrap());
    if version != CAPTURE_VERSION {
        return Err(CaptureError::format(
            "version",
            format!("unsupported version {version}"),
        ));
    }
    let blob_len = u32::from_le_bytes(take(bytes, &mut at, 4, "config length")?.try_into().unwrap());
    let blob = take(bytes, &mut at, blob_len as usize, "config blob")?;
    let raw: RadarConfig = serde_json::from_slice(blob)
        .map_err(|e| CaptureError::format("config", e.to_string()))?;
    let cfg = raw
        .validate()
        .map_err(|e| CaptureError::format("config", e.to_string()))?;
    let frames = u32::from_le_bytes(take(bytes, &mut at, 4, "frame count")?.try_into().unwrap());

    let frame_bytes = cfg.frame_bytes();
    let expected = at + frames as usize * frame_bytes;
    if bytes.len() != expected {
        return Err(CaptureError::format(
            "length",
            format!("expected {expected} bytes for {frames} frames, got {}", bytes.len()),
        ));
    }
    let cubes = bytes[at..]
        .chunks_exact(frame_bytes)
        .enumerate()
        .map(|(i, chunk)| deinterleave(chunk, &cfg, i as u64))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((cfg, cubes))
}

pub fn write_capture_file(
    path: impl AsRef<Path>,
    cfg: &ValidatedConfig,
    cubes: &[DataCube],
) -> Result<(), CaptureError> {
    fs::write(path, encode_capture(cfg, cubes)?)?;
    Ok(())
}

pub fn read_capture_file(path: impl AsRef<Path>) -> Result<(ValidatedConfig, Vec<DataCube>), CaptureError> {
    decode_capture(&fs::read(path)?)
}
