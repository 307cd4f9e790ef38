use alloc::vec;

use crate::error::{ensure, Result};
use crate::tensor::Tensor;

/// `[H, W, C·s²] → [sH, sW, C]`; input channel `c·s² + i·s + j` lands at
/// offset `(i, j)` of the output block.
pub fn pixel_shuffle(x: &Tensor, s: usize) -> Result<Tensor> {
    let (h, w, cs) = x.dims3()?;
    ensure!(s >= 1 && cs % (s * s) == 0, Validation, "{} channels are not divisible by {}²", cs, s);
    let c = cs / (s * s);
    let (oh, ow) = (h * s, w * s);
    let mut out = vec![0.0; x.len()];
    let src = x.data();
    for r in 0..h {
        for col in 0..w {
            for ch in 0..c {
                for i in 0..s {
                    for j in 0..s {
                        out[((r * s + i) * ow + col * s + j) * c + ch] = src[(r * w + col) * cs + (ch * s + i) * s + j];
                    }
                }
            }
        }
    }
    Tensor::from_vec(&[oh, ow, c], out)
}

/// Inverse of [`pixel_shuffle`].
pub fn pixel_unshuffle(x: &Tensor, s: usize) -> Result<Tensor> {
    let (oh, ow, c) = x.dims3()?;
    ensure!(s >= 1 && oh % s == 0 && ow % s == 0, Validation, "{}×{} map is not divisible by {}", oh, ow, s);
    let (h, w) = (oh / s, ow / s);
    let cs = c * s * s;
    let mut out = vec![0.0; x.len()];
    let src = x.data();
    for r in 0..h {
        for col in 0..w {
            for ch in 0..c {
                for i in 0..s {
                    for j in 0..s {
                        out[(r * w + col) * cs + (ch * s + i) * s + j] = src[((r * s + i) * ow + col * s + j) * c + ch];
                    }
                }
            }
        }
    }
    Tensor::from_vec(&[h, w, cs], out)
}
