//! Real-time network coding for two-way relay and three-source multicast
//! or unicast sessions over wireless networks with bounded random delays.
//!
//! The crate is organised bottom-up:
//!
//! * [`field`]: GF(2^C) arithmetic.
//! * [`graph`]: wireless graphs, relay splitting, cuts and path packing.
//! * [`codec`]: the line, star and line-star coding schemes, headers and
//!   wire format.
//! * [`decompose`]: splitting a network into rings, line-stars and lines.
//! * [`sim`]: slot-level simulation with bounded random delays.
//! * [`experiment`]: random-graph sweeps and the CLI entry points.

pub mod error;
pub mod field;
pub mod graph;
pub mod codec;
pub mod decompose;
pub mod sim;
pub mod experiment;

pub use error::{Error, Result};
pub use field::{choose_triplets, CoeffTriplets, FieldElement, GaloisField};
pub use graph::{NodeId, WirelessGraph};
