//! Polar codes decoded as LDPC-like sparse graphs.
//!
//! The crate builds the encoding factor graph of a polar code, prunes it
//! to a sparse Tanner graph, and decodes over that graph with flooding
//! message passing (sum-product, min-sum, scaled min-sum, and min-sum with
//! trained variable-node weights). The weights are trained by unrolling
//! the decoder into a feed-forward network and back-propagating a
//! cross-entropy loss. A Monte Carlo harness measures bit error rates over
//! BPSK/AWGN, and [`complexity`] counts per-iteration operations.

pub mod channel;
pub mod complexity;
pub mod decoder;
pub mod error;
pub mod gf2;
pub mod polar;
pub mod rng;
pub mod sim;
pub mod tanner;
pub mod training;

pub use error::{Error, Result};
