//! 8-bit PNG input and output.

use std::io::Cursor;
use std::path::Path;

use qsr_core::Tensor;

use crate::{Error, Result};

/// Clamps to `[0, 1]`, scales to 255, and rounds half to even.
pub fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round_ties_even() as u8
}

pub fn encode_png(image: &Tensor) -> Result<Vec<u8>> {
    let shape = image.shape();
    let (h, w, c) = match *shape {
        [h, w, c] => (h, w, c),
        _ => return Err(Error::Usage(format!("image tensor must be [H, W, C], got {shape:?}"))),
    };
    let color = match c {
        1 => png::ColorType::Grayscale,
        3 => png::ColorType::Rgb,
        _ => return Err(Error::Usage(format!("PNG output needs 1 or 3 channels, got {c}"))),
    };
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, w as u32, h as u32);
        enc.set_color(color);
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc.write_header().map_err(|e| Error::Image(e.to_string()))?;
        let bytes: Vec<u8> = image.data().iter().map(|&v| quantize(v)).collect();
        writer.write_image_data(&bytes).map_err(|e| Error::Image(e.to_string()))?;
    }
    Ok(out)
}

/// Decodes an 8-bit grayscale or RGB PNG into `[H, W, C]` values in `[0, 1]`.
pub fn decode_png(bytes: &[u8]) -> Result<Tensor> {
    let decoder = png::Decoder::new(Cursor::new(bytes));
    let mut reader = decoder.read_info().map_err(|e| Error::Image(e.to_string()))?;
    let size = reader.output_buffer_size().ok_or_else(|| Error::Image("image too large".into()))?;
    let mut buf = vec![0; size];
    let info = reader.next_frame(&mut buf).map_err(|e| Error::Image(e.to_string()))?;
    if info.bit_depth != png::BitDepth::Eight {
        return Err(Error::Image(format!("unsupported bit depth {:?}", info.bit_depth)));
    }
    let c = match info.color_type {
        png::ColorType::Grayscale => 1,
        png::ColorType::Rgb => 3,
        other => return Err(Error::Image(format!("unsupported color type {other:?}"))),
    };
    let (h, w) = (info.height as usize, info.width as usize);
    let data = buf[..info.buffer_size()].iter().map(|&b| f64::from(b) / 255.0).collect();
    Ok(Tensor::from_vec(&[h, w, c], data)?)
}

pub fn write_png(path: &Path, image: &Tensor) -> Result<()> {
    crate::write_atomic(path, &encode_png(image)?)
}

pub fn read_png(path: &Path) -> Result<Tensor> {
    decode_png(&crate::read(path)?)
}
