use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::math::sqrt;
use crate::params::{join, Parameters};
use crate::rng::{self, SeededRng};
use crate::tensor::Tensor;

/// 3×3 convolution, stride 1, zero padding 1, channels-last.
///
/// `weight` is laid out `[out][ky][kx][in]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conv2d {
    pub in_ch: usize,
    pub out_ch: usize,
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Conv2d {
    pub fn zeros(in_ch: usize, out_ch: usize) -> Self {
        Self { in_ch, out_ch, weight: vec![0.0; out_ch * 9 * in_ch], bias: vec![0.0; out_ch] }
    }

    /// Weights and biases uniform in `±1/√(9·in_ch)`.
    pub fn init(in_ch: usize, out_ch: usize, rng: &mut SeededRng) -> Self {
        let bound = 1.0 / sqrt((9 * in_ch) as f64);
        let mut c = Self::zeros(in_ch, out_ch);
        for w in c.weight.iter_mut().chain(c.bias.iter_mut()) {
            *w = rng::uniform(rng, -bound, bound);
        }
        c
    }

    /// The kernel that copies its input.
    pub fn identity(ch: usize) -> Self {
        let mut c = Self::zeros(ch, ch);
        for i in 0..ch {
            c.weight[((i * 3 + 1) * 3 + 1) * ch + i] = 1.0;
        }
        c
    }

    fn w(&self, o: usize, ky: usize, kx: usize) -> &[f64] {
        let start = ((o * 3 + ky) * 3 + kx) * self.in_ch;
        &self.weight[start..start + self.in_ch]
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        let (h, w, c) = x.dims3()?;
        ensure!(c == self.in_ch, Validation, "convolution expects {} channels, got {}", self.in_ch, c);
        let mut out = Tensor::zeros(&[h, w, self.out_ch]);
        let src = x.data();
        let dst = out.data_mut();
        for r in 0..h {
            for col in 0..w {
                let o_base = (r * w + col) * self.out_ch;
                dst[o_base..o_base + self.out_ch].copy_from_slice(&self.bias);
                for ky in 0..3 {
                    let Some(sr) = (r + ky).checked_sub(1).filter(|&v| v < h) else { continue };
                    for kx in 0..3 {
                        let Some(sc) = (col + kx).checked_sub(1).filter(|&v| v < w) else { continue };
                        let px = &src[(sr * w + sc) * c..(sr * w + sc + 1) * c];
                        for o in 0..self.out_ch {
                            dst[o_base + o] += self.w(o, ky, kx).iter().zip(px).map(|(a, b)| a * b).sum::<f64>();
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Accumulates into `grad`; returns `∂L/∂x`.
    pub fn backward(&self, x: &Tensor, dy: &Tensor, grad: &mut Conv2d) -> Result<Tensor> {
        let (h, w, c) = x.dims3()?;
        ensure!(
            dy.shape() == [h, w, self.out_ch],
            Validation,
            "convolution gradient shape {:?} does not match output",
            dy.shape()
        );
        let mut dx = Tensor::zeros(&[h, w, c]);
        let src = x.data();
        let g = dy.data();
        for r in 0..h {
            for col in 0..w {
                let go = &g[(r * w + col) * self.out_ch..(r * w + col + 1) * self.out_ch];
                for (b, v) in grad.bias.iter_mut().zip(go) {
                    *b += v;
                }
                for ky in 0..3 {
                    let Some(sr) = (r + ky).checked_sub(1).filter(|&v| v < h) else { continue };
                    for kx in 0..3 {
                        let Some(sc) = (col + kx).checked_sub(1).filter(|&v| v < w) else { continue };
                        let p = (sr * w + sc) * c;
                        for (o, &gv) in go.iter().enumerate() {
                            if gv == 0.0 {
                                continue;
                            }
                            let start = ((o * 3 + ky) * 3 + kx) * c;
                            for i in 0..c {
                                grad.weight[start + i] += gv * src[p + i];
                                dx.data_mut()[p + i] += gv * self.weight[start + i];
                            }
                        }
                    }
                }
            }
        }
        Ok(dx)
    }
}

impl Parameters for Conv2d {
    fn for_each(&self, prefix: &str, f: &mut dyn FnMut(&str, &[f64])) {
        f(&join(prefix, "weight"), &self.weight);
        f(&join(prefix, "bias"), &self.bias);
    }

    fn for_each_mut(&mut self, prefix: &str, f: &mut dyn FnMut(&str, &mut [f64])) {
        f(&join(prefix, "weight"), &mut self.weight);
        f(&join(prefix, "bias"), &mut self.bias);
    }
}

/// Functional form of [`Conv2d::forward`].
pub fn conv2d_3x3(x: &Tensor, conv: &Conv2d) -> Result<Tensor> {
    conv.forward(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_kernel_copies() {
        let mut r = rng::seeded(1);
        let x = Tensor::from_vec(&[3, 5, 2], (0..30).map(|_| rng::uniform(&mut r, -1.0, 1.0)).collect()).unwrap();
        assert_eq!(Conv2d::identity(2).forward(&x).unwrap(), x);
    }

    #[test]
    fn ones_kernel_sums_neighbourhood() {
        let mut c = Conv2d::zeros(1, 1);
        c.weight.fill(1.0);
        let y = c.forward(&Tensor::full(&[4, 4, 1], 0.5)).unwrap();
        assert_eq!(y[[1, 1, 0]], 4.5);
        assert_eq!(y[[0, 0, 0]], 2.0);
    }

    #[test]
    fn channel_mismatch_is_rejected() {
        assert!(Conv2d::zeros(2, 1).forward(&Tensor::zeros(&[2, 2, 3])).is_err());
    }
}
