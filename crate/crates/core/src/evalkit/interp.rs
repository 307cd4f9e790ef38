use crate::error::{ensure, Result};
use crate::math::floor;
use crate::tensor::Tensor;

use super::metrics::reflect;

/// Catmull-Rom coefficient.
pub const BICUBIC_A: f64 = -0.5;

fn check(lr: &Tensor, s: usize) -> Result<(usize, usize, usize)> {
    ensure!(s >= 1, Validation, "scale factor must be positive");
    lr.dims3()
}

fn source_coord(dst: usize, s: usize) -> f64 {
    (dst as f64 + 0.5) / s as f64 - 0.5
}

pub fn upscale_nearest(lr: &Tensor, s: usize) -> Result<Tensor> {
    let (h, w, c) = check(lr, s)?;
    let mut out = Tensor::zeros(&[h * s, w * s, c]);
    for r in 0..h * s {
        for col in 0..w * s {
            for ch in 0..c {
                out[[r, col, ch]] = lr[[r / s, col / s, ch]];
            }
        }
    }
    Ok(out)
}

/// Half-pixel-centre sampling with coordinates clamped to the image.
pub fn upscale_bilinear(lr: &Tensor, s: usize) -> Result<Tensor> {
    let (h, w, c) = check(lr, s)?;
    let taps = |dst: usize, n: usize| -> (usize, usize, f64) {
        let x = source_coord(dst, s).max(0.0);
        let i0 = (floor(x) as usize).min(n - 1);
        let i1 = (i0 + 1).min(n - 1);
        (i0, i1, x - i0 as f64)
    };
    let mut out = Tensor::zeros(&[h * s, w * s, c]);
    for r in 0..h * s {
        let (y0, y1, fy) = taps(r, h);
        for col in 0..w * s {
            let (x0, x1, fx) = taps(col, w);
            for ch in 0..c {
                let top = lr[[y0, x0, ch]] * (1.0 - fx) + lr[[y0, x1, ch]] * fx;
                let bottom = lr[[y1, x0, ch]] * (1.0 - fx) + lr[[y1, x1, ch]] * fx;
                out[[r, col, ch]] = top * (1.0 - fy) + bottom * fy;
            }
        }
    }
    Ok(out)
}

/// Keys cubic convolution kernel with parameter [`BICUBIC_A`].
pub fn cubic_weight(t: f64) -> f64 {
    let a = BICUBIC_A;
    let t = t.abs();
    if t <= 1.0 {
        ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0
    } else if t < 2.0 {
        ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a
    } else {
        0.0
    }
}

/// Separable cubic convolution, half-pixel centres, symmetric borders.
pub fn upscale_bicubic(lr: &Tensor, s: usize) -> Result<Tensor> {
    let (h, w, c) = check(lr, s)?;
    let taps = |dst: usize, n: usize| -> [(usize, f64); 4] {
        let x = source_coord(dst, s);
        let base = floor(x);
        let t = x - base;
        let mut out = [(0, 0.0); 4];
        for (k, slot) in out.iter_mut().enumerate() {
            let offset = k as isize - 1;
            *slot = (reflect(base as isize + offset, n), cubic_weight(t - offset as f64));
        }
        out
    };
    let mut out = Tensor::zeros(&[h * s, w * s, c]);
    for r in 0..h * s {
        let ty = taps(r, h);
        for col in 0..w * s {
            let tx = taps(col, w);
            for ch in 0..c {
                let mut acc = 0.0;
                for &(yi, wy) in &ty {
                    for &(xi, wx) in &tx {
                        acc += wy * wx * lr[[yi, xi, ch]];
                    }
                }
                out[[r, col, ch]] = acc;
            }
        }
    }
    Ok(out)
}
