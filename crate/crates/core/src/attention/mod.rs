//! Shifted quantum window attention.
//!
//! Feature maps are split into `M × M` windows, optionally after a cyclic
//! roll toward the top-left, so every window is processed by the same batch
//! of circuits. Tokens that were not adjacent before the roll are masked out.
//! Query/key/value/output projections are variational circuits; scores use
//! scaled cosine similarity plus a log-spaced relative position bias produced
//! by a quantum MLP.

mod bias;
mod mask;
mod sqwin;
mod window;

pub use bias::{displacement_index, log_features, log_relative_bias, BiasCache};
pub use mask::{compute_attention_mask, AttentionMaskSpec, MASK_VALUE};
pub use sqwin::{sqwin_forward, Scoring, SqwinCache, SqwinParams, KAPPA_MAX};
pub use window::{cyclic_shift, inverse_shift, roll, window_merge, window_partition};
