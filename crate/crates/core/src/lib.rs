//! Perturbative energy density of the massless Sine-Gordon model along timelike
//! worldlines, and the state-independent lower bound `K = K0 + KV + KH`.

pub mod cli;
pub mod error;
pub mod geometry;
pub mod propagators;
pub mod qei;
pub mod quad;
pub mod rng;
pub mod series;
pub mod smearing;
pub mod special;
pub mod states;

pub use error::{Error, Result};
