use alloc::vec;
use alloc::vec::Vec;

use crate::error::{ensure, Result};
use crate::math::{exp, log10};
use crate::tensor::Tensor;

pub const SSIM_WINDOW: usize = 7;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

/// `10·log₁₀(peak²/MSE)`; identical inputs give `+∞`.
pub fn psnr(a: &Tensor, b: &Tensor, peak: f64) -> Result<f64> {
    ensure!(a.shape() == b.shape(), Validation, "shapes {:?} and {:?} differ", a.shape(), b.shape());
    ensure!(!a.is_empty(), Validation, "PSNR of an empty image");
    let mse = a.data().iter().zip(b.data()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * log10(peak * peak / mse))
}

fn gaussian_window() -> Vec<f64> {
    let r = (SSIM_WINDOW / 2) as f64;
    let w: Vec<f64> = (0..SSIM_WINDOW)
        .map(|i| {
            let d = i as f64 - r;
            exp(-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA))
        })
        .collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

/// Half-sample symmetric index: `… c b a | a b c …`.
pub(crate) fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let period = 2 * n;
    let m = i.rem_euclid(period);
    (if m < n { m } else { period - 1 - m }) as usize
}

/// Separable Gaussian blur of a single-channel `h × w` plane.
fn blur(plane: &[f64], h: usize, w: usize, kernel: &[f64]) -> Vec<f64> {
    let r = (kernel.len() / 2) as isize;
    let mut tmp = vec![0.0; h * w];
    for y in 0..h {
        for x in 0..w {
            tmp[y * w + x] = kernel
                .iter()
                .enumerate()
                .map(|(k, kv)| kv * plane[y * w + reflect(x as isize + k as isize - r, w)])
                .sum();
        }
    }
    let mut out = vec![0.0; h * w];
    for y in 0..h {
        for x in 0..w {
            out[y * w + x] = kernel
                .iter()
                .enumerate()
                .map(|(k, kv)| kv * tmp[reflect(y as isize + k as isize - r, h) * w + x])
                .sum();
        }
    }
    out
}

/// Mean local SSIM with a 7×7 Gaussian window (σ = 1.5), dynamic range 1,
/// symmetric border padding; channels are scored separately and averaged.
pub fn ssim(a: &Tensor, b: &Tensor) -> Result<f64> {
    ensure!(a.shape() == b.shape(), Validation, "shapes {:?} and {:?} differ", a.shape(), b.shape());
    let (h, w, c) = a.dims3()?;
    ensure!(
        h >= SSIM_WINDOW && w >= SSIM_WINDOW,
        Validation,
        "{}×{} image is smaller than the {}×{} SSIM window",
        h,
        w,
        SSIM_WINDOW,
        SSIM_WINDOW
    );
    let kernel = gaussian_window();
    let c1 = SSIM_K1 * SSIM_K1;
    let c2 = SSIM_K2 * SSIM_K2;
    let mut total = 0.0;
    for ch in 0..c {
        let pa: Vec<f64> = a.data().iter().skip(ch).step_by(c).copied().collect();
        let pb: Vec<f64> = b.data().iter().skip(ch).step_by(c).copied().collect();
        let prod = |f: fn(f64, f64) -> f64| -> Vec<f64> { pa.iter().zip(&pb).map(|(&x, &y)| f(x, y)).collect() };
        let mu_a = blur(&pa, h, w, &kernel);
        let mu_b = blur(&pb, h, w, &kernel);
        let aa = blur(&prod(|x, _| x * x), h, w, &kernel);
        let bb = blur(&prod(|_, y| y * y), h, w, &kernel);
        let ab = blur(&prod(|x, y| x * y), h, w, &kernel);
        let mut sum = 0.0;
        for i in 0..h * w {
            let (ma, mb) = (mu_a[i], mu_b[i]);
            let va = aa[i] - ma * ma;
            let vb = bb[i] - mb * mb;
            let cov = ab[i] - ma * mb;
            sum += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
        }
        total += sum / (h * w) as f64;
    }
    Ok(total / c as f64)
}
