use alloc::vec;
use alloc::vec::Vec;

use super::window::window_partition;
use crate::error::{ensure, Result};
use crate::tensor::Tensor;

/// Additive logit for token pairs from different pre-shift regions.
pub const MASK_VALUE: f64 = -1e9;

#[derive(Debug, Clone, PartialEq)]
pub struct AttentionMaskSpec {
    pub shift: usize,
    /// Region label of every position of the shifted map, `[H, W]` row-major.
    pub region_ids: Vec<usize>,
    /// `[N_w, M², M²]` with entries `0` or [`MASK_VALUE`].
    pub mask: Tensor,
}

fn band(pos: usize, extent: usize, m: usize, shift: usize) -> usize {
    if pos < extent - m {
        0
    } else if pos < extent - shift {
        1
    } else {
        2
    }
}

/// Shifted-window mask: the shifted map is cut into nine regions by
/// boundaries at `-M` and `-shift` on each axis, and tokens inside one window
/// may only attend to tokens carrying the same region label.
pub fn compute_attention_mask(h: usize, w: usize, m: usize, shift: usize) -> Result<AttentionMaskSpec> {
    ensure!(m >= 1 && h.is_multiple_of(m) && w.is_multiple_of(m), Validation, "{}×{} map is not divisible by window {}", h, w, m);
    ensure!(shift < m, Validation, "shift {} must be smaller than window {}", shift, m);
    let n_windows = (h / m) * (w / m);
    let tokens = m * m;
    if shift == 0 {
        return Ok(AttentionMaskSpec {
            shift,
            region_ids: vec![0; h * w],
            mask: Tensor::zeros(&[n_windows, tokens, tokens]),
        });
    }
    let mut region_ids = Vec::with_capacity(h * w);
    for r in 0..h {
        for c in 0..w {
            region_ids.push(band(r, h, m, shift) * 3 + band(c, w, m, shift));
        }
    }
    let ids = Tensor::from_vec(&[h, w, 1], region_ids.iter().map(|&v| v as f64).collect())?;
    let windows = window_partition(&ids, m)?;
    let mut mask = Vec::with_capacity(n_windows * tokens * tokens);
    for win in windows.data().chunks_exact(tokens) {
        for a in win {
            for b in win {
                mask.push(if a == b { 0.0 } else { MASK_VALUE });
            }
        }
    }
    Ok(AttentionMaskSpec { shift, region_ids, mask: Tensor::from_vec(&[n_windows, tokens, tokens], mask)? })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_shift_no_mask() {
        let spec = compute_attention_mask(4, 4, 2, 0).unwrap();
        assert!(spec.mask.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn masks_are_symmetric() {
        for (h, w, m, s) in [(4, 4, 2, 1), (6, 8, 2, 1), (8, 8, 4, 2), (12, 6, 3, 1)] {
            let spec = compute_attention_mask(h, w, m, s).unwrap();
            let t = m * m;
            for win in spec.mask.data().chunks_exact(t * t) {
                for i in 0..t {
                    for j in 0..t {
                        assert_eq!(win[i * t + j], win[j * t + i]);
                    }
                }
            }
        }
    }
}
