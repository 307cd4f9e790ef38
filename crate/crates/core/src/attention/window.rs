use alloc::vec::Vec;

use crate::error::{ensure, Result};
use crate::tensor::Tensor;

/// Splits `[H, W, D]` into `[N_w, M², D]`, windows and tokens in row-major
/// order.
pub fn window_partition(x: &Tensor, m: usize) -> Result<Tensor> {
    let (h, w, d) = x.dims3()?;
    ensure!(m >= 1 && h % m == 0 && w % m == 0, Validation, "{}×{} map is not divisible by window {}", h, w, m);
    let (nh, nw) = (h / m, w / m);
    let mut out = Vec::with_capacity(x.len());
    for wr in 0..nh {
        for wc in 0..nw {
            for r in 0..m {
                let row = (wr * m + r) * w + wc * m;
                out.extend_from_slice(&x.data()[row * d..(row + m) * d]);
            }
        }
    }
    Tensor::from_vec(&[nh * nw, m * m, d], out)
}

/// Inverse of [`window_partition`].
pub fn window_merge(windows: &Tensor, m: usize, h: usize, w: usize) -> Result<Tensor> {
    let shape = windows.shape();
    ensure!(shape.len() == 3, Validation, "windows must be rank 3, got {:?}", shape);
    ensure!(m >= 1 && h.is_multiple_of(m) && w.is_multiple_of(m), Validation, "{}×{} map is not divisible by window {}", h, w, m);
    let (nh, nw) = (h / m, w / m);
    ensure!(
        shape[0] == nh * nw && shape[1] == m * m,
        Validation,
        "window tensor {:?} does not tile a {}×{} map with window {}",
        shape,
        h,
        w,
        m
    );
    let d = shape[2];
    let mut out = Tensor::zeros(&[h, w, d]);
    let src = windows.data();
    let dst = out.data_mut();
    let mut k = 0;
    for wr in 0..nh {
        for wc in 0..nw {
            for r in 0..m {
                let row = (wr * m + r) * w + wc * m;
                dst[row * d..(row + m) * d].copy_from_slice(&src[k..k + m * d]);
                k += m * d;
            }
        }
    }
    Ok(out)
}

/// `out[h][w] = x[(h - dy) mod H][(w - dx) mod W]` (positive shifts move
/// content down/right).
pub fn roll(x: &Tensor, dy: isize, dx: isize) -> Result<Tensor> {
    let (h, w, d) = x.dims3()?;
    let mut out = Tensor::zeros(&[h, w, d]);
    let (hi, wi) = (h as isize, w as isize);
    for r in 0..h {
        let sr = (r as isize - dy).rem_euclid(hi) as usize;
        for c in 0..w {
            let sc = (c as isize - dx).rem_euclid(wi) as usize;
            let s = (sr * w + sc) * d;
            let t = (r * w + c) * d;
            out.data_mut()[t..t + d].copy_from_slice(&x.data()[s..s + d]);
        }
    }
    Ok(out)
}

fn check_shift(x: &Tensor, shift: usize) -> Result<()> {
    let (h, w, _) = x.dims3()?;
    ensure!(shift < h.min(w), Validation, "shift {} must be below min(H, W) = {}", shift, h.min(w));
    Ok(())
}

/// Rolls the map by `(-shift, -shift)`, toward the top-left.
pub fn cyclic_shift(x: &Tensor, shift: usize) -> Result<Tensor> {
    check_shift(x, shift)?;
    roll(x, -(shift as isize), -(shift as isize))
}

/// Undoes [`cyclic_shift`].
pub fn inverse_shift(x: &Tensor, shift: usize) -> Result<Tensor> {
    check_shift(x, shift)?;
    roll(x, shift as isize, shift as isize)
}
