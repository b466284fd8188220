//! Four-dimensional cross-QAM modulation toolkit.
//!
//! Two consecutive `(3·4^m)`-ary cross-QAM symbols form one 4D vector that
//! carries `k = 3 + 4m` bits through a Gray labeling. The crate also builds
//! the baseline 4D constellations used for comparison (a trimmed D4 lattice
//! ball and a dicyclic two-ring constellation), and provides the simulation
//! pieces needed to compare them: constellation and DFT-spread-OFDM PAPR,
//! AWGN detection with soft LLRs, and a regular (3,6) LDPC code.

pub mod constellation;
pub mod detection;
mod error;
pub mod graymap;
pub mod harness;
pub mod ldpc;
pub mod ofdm;

pub use error::{Error, Result};
