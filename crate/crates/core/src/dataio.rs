//! In-memory datasets: raw 8-bit image stacks, LR/HR pairs built by 2×2 box
//! downsampling, and seeded batch orders. File formats live in the companion
//! crate.

use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::rng;
use crate::tensor::Tensor;

/// A stack of 8-bit images, `[count, rows, cols, channels]` row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub channels: usize,
    pub data: Vec<u8>,
}

impl RawImages {
    pub fn new(count: usize, rows: usize, cols: usize, channels: usize, data: Vec<u8>) -> Result<Self> {
        ensure!(
            data.len() == count * rows * cols * channels,
            Validation,
            "{} bytes do not hold {} images of {}×{}×{}",
            data.len(),
            count,
            rows,
            cols,
            channels
        );
        Ok(Self { count, rows, cols, channels, data })
    }

    pub fn image(&self, i: usize) -> &[u8] {
        let n = self.rows * self.cols * self.channels;
        &self.data[i * n..(i + 1) * n]
    }

    /// Images `[start, end)`.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        ensure!(start <= end && end <= self.count, Validation, "range {}..{} outside {} images", start, end, self.count);
        let n = self.rows * self.cols * self.channels;
        Self::new(end - start, self.rows, self.cols, self.channels, self.data[start * n..end * n].to_vec())
    }

    /// Image `i` scaled to `[0, 1]`.
    pub fn normalized(&self, i: usize) -> Tensor {
        let data = self.image(i).iter().map(|&b| f64::from(b) / 255.0).collect();
        Tensor::from_vec(&[self.rows, self.cols, self.channels], data).expect("shape matches stored image")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImagePair {
    pub lr: Tensor,
    pub hr: Tensor,
    pub source_index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetHandle {
    pub name: String,
    pub items: Vec<ImagePair>,
    pub split: Split,
    pub channels: usize,
}

impl DatasetHandle {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// 2×2 block mean.
pub fn downsample2(hr: &Tensor) -> Result<Tensor> {
    let (h, w, c) = hr.dims3()?;
    ensure!(h % 2 == 0 && w % 2 == 0, Validation, "cannot halve a {}×{} image", h, w);
    let mut out = Tensor::zeros(&[h / 2, w / 2, c]);
    for r in 0..h / 2 {
        for col in 0..w / 2 {
            for ch in 0..c {
                let s = hr[[2 * r, 2 * col, ch]] + hr[[2 * r, 2 * col + 1, ch]] + hr[[2 * r + 1, 2 * col, ch]]
                    + hr[[2 * r + 1, 2 * col + 1, ch]];
                out[[r, col, ch]] = s / 4.0;
            }
        }
    }
    Ok(out)
}

/// `hr = pixel / 255`, `lr = downsample2(hr)`, in source order.
pub fn make_pairs(name: &str, split: Split, images: &RawImages) -> Result<DatasetHandle> {
    let mut items = Vec::with_capacity(images.count);
    for i in 0..images.count {
        let hr = images.normalized(i);
        let lr = downsample2(&hr)?;
        items.push(ImagePair { lr, hr, source_index: i });
    }
    Ok(DatasetHandle { name: name.into(), items, split, channels: images.channels })
}

/// Index batches for one epoch: a permutation seeded by `seed ⊕ epoch`,
/// chunked, with the last partial batch kept.
pub fn batches(len: usize, batch_size: usize, seed: u64, epoch: u64) -> Result<Vec<Vec<usize>>> {
    ensure!(batch_size >= 1, Validation, "batch size must be positive");
    let mut r = rng::derived(seed, epoch);
    let order = rng::permutation(&mut r, len);
    Ok(order.chunks(batch_size).map(<[usize]>::to_vec).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn box_block() {
        let hr = Tensor::from_vec(&[2, 2, 1], vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        assert_eq!(downsample2(&hr).unwrap().data(), &[0.5]);
        assert!(downsample2(&Tensor::zeros(&[3, 2, 1])).is_err());
    }

    #[test]
    fn saturated_image_normalizes_to_one() {
        let raw = RawImages::new(2, 4, 4, 1, [vec![255; 16], vec![0; 16]].concat()).unwrap();
        let d = make_pairs("t", Split::Test, &raw).unwrap();
        assert!(d.items[0].hr.data().iter().all(|&v| v == 1.0));
        assert!(d.items[1].lr.data().iter().all(|&v| v == 0.0));
        assert_eq!(d.items[1].lr.shape(), &[2, 2, 1]);
    }

    #[test]
    fn oversized_batch_is_one_permuted_batch() {
        let b = batches(5, 10, 1, 0).unwrap();
        assert_eq!(b.len(), 1);
        let mut s = b[0].clone();
        s.sort_unstable();
        assert_eq!(s, [0, 1, 2, 3, 4]);
    }
}
