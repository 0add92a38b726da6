//! Link-level simulation of anti-jamming spread OFDM.
//!
//! A frame of `K` subcarriers is split into blocks of `N` subcarriers. Each
//! block carries `p` bits as `S = p / log2(M)` symbols spread by a partial
//! DFT matrix, so a jammer that hits a few subcarriers only removes part of
//! every symbol's energy. Blocks are interleaved across the band, passed
//! through a Rayleigh channel with partial-band or random jamming, and
//! decoded by jamming-aware maximum-likelihood detectors.

pub mod adaptive;
pub mod analysis;
pub mod baselines;
pub mod channel;
pub mod constellation;
pub mod detect;
pub mod error;
pub mod frame;
pub mod harness;
pub mod link;
pub mod spreading;

pub use constellation::{Constellation, ConstellationKind};
pub use error::{Error, Result};
pub use spreading::{Codebook, SpreadingMatrix};
