//! Continuous-variable teleportation of coherent states: fidelity model,
//! averaged fidelities, brute-force oracles and protocol optimization.

pub mod average;
pub mod convention;
pub mod error;
pub mod model;
pub mod optimize;
pub mod oracle;
pub mod quadrature;
pub mod special;
pub mod sweep;

pub use error::{Error, Result};
pub use model::*;
