//! Subspace codes over finite fields, random linear network coding and a
//! Monte Carlo harness for myopic network adversaries.
//!
//! ```
//! use myopic_core::adversary::{capacity, classify_regime, AdversaryPower, Regime};
//! use myopic_core::network::Topology;
//!
//! let net = Topology::butterfly();
//! let power = AdversaryPower::new(0, 0, 1);
//! assert_eq!(net.min_cut(), 2);
//! assert_eq!(classify_regime(net.min_cut(), &power), Regime::Strong);
//! assert_eq!(capacity(5, &power), 4);
//! ```

pub mod adversary;
pub mod codebook;
pub mod error;
pub mod gf;
pub mod harness;
pub mod matrix;
pub mod network;
pub mod secrecy;
pub mod subspace;

pub use error::{Error, Result};
