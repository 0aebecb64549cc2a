//! Layered MIMO media-based modulation.
//!
//! Each of `N` transmit units selects one of `2^R_n` channel states; the
//! receiver sees the sum of the selected constituent vectors. This crate
//! builds such constellations, detects them (exhaustively or with the greedy
//! layered search), protects them with Reed-Solomon codes, and measures
//! symbol and frame error rates against closed-form predictions.

pub mod analysis;
pub mod cli;
pub mod detect;
pub mod engine;
mod error;
pub mod fec;
pub mod model;
pub mod rng;
pub mod train;
mod vector;

pub use error::{Error, Result};
pub use vector::ComplexVector;
