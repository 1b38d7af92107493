//! Randomized frequency-hopping spectrum sharing.
//!
//! Users hop over random subsets of `u` sub-bands every slot. The
//! interference at each receiver is then a Gaussian mixture, and each user's
//! rate grows as `(vbar_i / 2) prod_{k != i}(1 - vbar_k / u) log2(SNR)`.
//! This crate models that network and provides:
//!
//! - [`model`]: scenarios, hopping laws, exact interference spectra
//! - [`mixture`]: Gaussian-mixture densities and entropies
//! - [`bounds`]: upper/lower rate bounds and Monte-Carlo mutual information
//! - [`gains`]: sum multiplexing gain, hopping-parameter design, hop sampling
//! - [`measures`]: FH/FD/AFH performance under a random user count
//! - [`sim`]: seeded slot simulator used as an independent check
//! - [`cli`]: the `fhshare` command-line front end

pub mod bounds;
pub mod cli;
pub mod config;
pub mod error;
pub mod gains;
pub mod measures;
pub mod mixture;
pub mod model;
pub mod optimize;
pub mod quadrature;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
pub use model::{HoppingProfile, InterferenceSpectrum, NetworkScenario};
