//! Deterministic flat view over nested parameter structs.
//!
//! Every trainable struct lists its arrays in a fixed order; the optimizer,
//! checkpoints, and gradient checks all operate on the flattened vector. The
//! same struct type doubles as its own gradient accumulator.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamSlot {
    pub name: String,
    pub offset: usize,
    pub len: usize,
}

pub trait Parameters: Clone {
    fn for_each(&self, prefix: &str, f: &mut dyn FnMut(&str, &[f64]));

    fn for_each_mut(&mut self, prefix: &str, f: &mut dyn FnMut(&str, &mut [f64]));

    fn param_count(&self) -> usize {
        let mut n = 0;
        self.for_each("", &mut |_, a| n += a.len());
        n
    }

    fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        self.for_each("", &mut |_, a| out.extend_from_slice(a));
        out
    }

    fn load_flat(&mut self, flat: &[f64]) -> Result<()> {
        let count = self.param_count();
        ensure!(flat.len() == count, Validation, "flat vector has {} values, parameters need {}", flat.len(), count);
        let mut offset = 0;
        self.for_each_mut("", &mut |_, a| {
            a.copy_from_slice(&flat[offset..offset + a.len()]);
            offset += a.len();
        });
        Ok(())
    }

    fn layout(&self) -> Vec<ParamSlot> {
        let mut slots = Vec::new();
        let mut offset = 0;
        self.for_each("", &mut |name, a| {
            slots.push(ParamSlot { name: name.to_string(), offset, len: a.len() });
            offset += a.len();
        });
        slots
    }

    /// Copy with every trainable value set to zero (a fresh gradient buffer).
    fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        z.for_each_mut("", &mut |_, a| a.fill(0.0));
        z
    }

    /// `self += scale · other`, elementwise over the flat view.
    fn add_scaled(&mut self, other: &Self, scale: f64) {
        let flat = other.flatten();
        let mut offset = 0;
        self.for_each_mut("", &mut |_, a| {
            let len = a.len();
            for (v, g) in a.iter_mut().zip(&flat[offset..offset + len]) {
                *v += scale * g;
            }
            offset += len;
        });
    }
}

/// Joins a prefix and a field name with `.`.
pub fn join(prefix: &str, name: &str) -> String {
    if prefix.is_empty() {
        name.to_string()
    } else {
        format!("{prefix}.{name}")
    }
}

/// Maps a flat index back to `(parameter name, index within it)`.
pub fn locate(layout: &[ParamSlot], flat_index: usize) -> Option<(&str, usize)> {
    layout
        .iter()
        .find(|s| flat_index >= s.offset && flat_index < s.offset + s.len)
        .map(|s| (s.name.as_str(), flat_index - s.offset))
}
