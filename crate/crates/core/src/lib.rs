//! Hybrid quantum-classical single-image super-resolution.
//!
//! The network follows a shifted-window transformer layout in which every
//! attention projection and every MLP is a small variational quantum circuit.
//! Circuits are simulated exactly (statevector, or density matrix when a noise
//! channel is attached), and gradients through them use the parameter-shift
//! rule.
//!
//! The crate is `no_std` + `alloc` when built without the default `std`
//! feature. With `std`, circuit batches can be spread across worker threads
//! and training reports wall-clock timings.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod attention;
pub mod dataio;
pub mod error;
pub mod evalkit;
pub mod math;
pub mod model;
pub mod params;
pub mod qnn;
pub mod qsim;
pub mod rng;
pub mod tensor;
pub mod train;

pub use error::{Error, Result};
pub use tensor::Tensor;
