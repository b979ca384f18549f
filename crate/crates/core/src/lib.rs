//! Covertness analysis and covert-rate optimization for a pinching-antenna
//! downlink observed by cooperating wardens.
//!
//! A covert waveguide carries the signal to Bob while a parallel waveguide
//! radiates uniformly random jamming. Wardens run energy detectors and fuse
//! their decisions by strict majority. The crate evaluates channels, local
//! and fused error probabilities, Bob's average covert rate, and optimizes
//! powers, coupling laws and antenna positions under a covertness
//! constraint. Monte Carlo and enumeration oracles live in [`mc_oracle`].

pub mod error;
pub mod fusion;
pub mod geometry;
pub mod local_detect;
pub mod mc_oracle;
pub mod optimizer;
pub mod par;
pub mod piecewise_dep;
pub mod projection;
pub mod radiation;
pub mod rate;
pub mod scenario;

pub use error::{Error, Result};
pub use par::Exec;
