//! Dataset containers: IDX (big-endian) image stacks and the QSRT raw-tensor
//! sidecar.

use std::path::Path;

use qsr_core::dataio::RawImages;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const IDX_IMAGES: u32 = 0x0000_0803;
pub const IDX_LABELS: u32 = 0x0000_0801;
pub const QSRT_MAGIC: &[u8; 4] = b"QSRT";

fn be_u32(bytes: &[u8], offset: usize) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or(Error::Format { offset, detail: "truncated header".into() })
}

/// Parses an IDX image file (magic 0x00000803, dims count × rows × cols).
pub fn parse_idx(bytes: &[u8]) -> Result<RawImages> {
    let magic = be_u32(bytes, 0)?;
    if magic != IDX_IMAGES {
        let detail = if magic == IDX_LABELS {
            "label file (magic 0x00000801) where images were expected".to_string()
        } else {
            format!("bad magic 0x{magic:08x}, expected 0x{IDX_IMAGES:08x}")
        };
        return Err(Error::Format { offset: 0, detail });
    }
    let count = be_u32(bytes, 4)? as usize;
    let rows = be_u32(bytes, 8)? as usize;
    let cols = be_u32(bytes, 12)? as usize;
    let need = count
        .checked_mul(rows)
        .and_then(|v| v.checked_mul(cols))
        .ok_or(Error::Format { offset: 4, detail: "dimensions overflow".into() })?;
    let body = &bytes[16..];
    if body.len() != need {
        return Err(Error::Format {
            offset: 16 + body.len().min(need),
            detail: format!("expected {need} pixel bytes, found {}", body.len()),
        });
    }
    Ok(RawImages::new(count, rows, cols, 1, body.to_vec())?)
}

/// Parses an IDX label file (magic 0x00000801).
pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    let magic = be_u32(bytes, 0)?;
    if magic != IDX_LABELS {
        return Err(Error::Format { offset: 0, detail: format!("bad magic 0x{magic:08x}, expected 0x{IDX_LABELS:08x}") });
    }
    let count = be_u32(bytes, 4)? as usize;
    let body = &bytes[8..];
    if body.len() != count {
        return Err(Error::Format { offset: 8 + body.len().min(count), detail: format!("expected {count} labels, found {}", body.len()) });
    }
    Ok(body.to_vec())
}

pub fn encode_idx(images: &RawImages) -> Result<Vec<u8>> {
    if images.channels != 1 {
        return Err(Error::Usage(format!("IDX holds single-channel images, got {} channels", images.channels)));
    }
    let mut out = Vec::with_capacity(16 + images.data.len());
    for v in [IDX_IMAGES, images.count as u32, images.rows as u32, images.cols as u32] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out.extend_from_slice(&images.data);
    Ok(out)
}

pub fn load_idx(path: &Path) -> Result<RawImages> {
    parse_idx(&crate::read(path)?)
}

pub fn write_idx(path: &Path, images: &RawImages) -> Result<()> {
    crate::write_atomic(path, &encode_idx(images)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QsrtHeader {
    count: usize,
    rows: usize,
    cols: usize,
    channels: usize,
    dtype: String,
}

/// Parses a QSRT file: `"QSRT"`, u64 LE header length, JSON header, then
/// `count·rows·cols·channels` bytes in HWC order per image.
pub fn parse_qsrt(bytes: &[u8]) -> Result<RawImages> {
    if bytes.get(..4) != Some(QSRT_MAGIC.as_slice()) {
        return Err(Error::Format { offset: 0, detail: "missing QSRT magic".into() });
    }
    let len = bytes
        .get(4..12)
        .map(|b| u64::from_le_bytes(b.try_into().unwrap()) as usize)
        .ok_or(Error::Format { offset: 4, detail: "truncated header length".into() })?;
    let json = bytes
        .get(12..12usize.saturating_add(len))
        .ok_or(Error::Format { offset: 12, detail: "truncated JSON header".into() })?;
    let h: QsrtHeader = serde_json::from_slice(json).map_err(|e| Error::Format { offset: 12, detail: e.to_string() })?;
    if h.dtype != "u8" {
        return Err(Error::Format { offset: 12, detail: format!("unsupported dtype {}", h.dtype) });
    }
    let body = &bytes[12 + len..];
    let need = h.count * h.rows * h.cols * h.channels;
    if body.len() != need {
        return Err(Error::Format {
            offset: 12 + len + body.len().min(need),
            detail: format!("expected {need} pixel bytes, found {}", body.len()),
        });
    }
    Ok(RawImages::new(h.count, h.rows, h.cols, h.channels, body.to_vec())?)
}

pub fn encode_qsrt(images: &RawImages) -> Vec<u8> {
    let h = QsrtHeader {
        count: images.count,
        rows: images.rows,
        cols: images.cols,
        channels: images.channels,
        dtype: "u8".into(),
    };
    let json = serde_json::to_vec(&h).expect("header serializes");
    let mut out = Vec::with_capacity(12 + json.len() + images.data.len());
    out.extend_from_slice(QSRT_MAGIC);
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    out.extend_from_slice(&images.data);
    out
}

/// Loads either container, dispatching on the leading magic bytes.
pub fn load_images(path: &Path) -> Result<RawImages> {
    let bytes = crate::read(path)?;
    if bytes.starts_with(QSRT_MAGIC) {
        parse_qsrt(&bytes)
    } else {
        parse_idx(&bytes)
    }
}
