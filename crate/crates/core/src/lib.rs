//! Proximal operator of the piece-wise exponential penalty, companion
//! l0-surrogate proximal maps, an ISTA solver, and a compressed-sensing
//! benchmark harness.

pub mod bench;
pub mod error;
pub mod ista;
pub mod lambert_w;
pub mod pie_prox;
pub mod prox_zoo;
pub mod sensing;

pub use error::{Error, Result};
pub use pie_prox::{PieParams, PieProx, ProxSet, ThresholdResult};
pub use prox_zoo::{PenaltyKind, PenaltySpec, ScalarProx};
