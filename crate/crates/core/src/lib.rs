//! Self-organized hidden metric embedding and greedy routing on small-world
//! networks.
//!
//! Vertices exchange velocity vectors with their neighbors and accumulate
//! them into positions; the resulting coordinates support greedy routing
//! without any global knowledge of the network. The crate provides the
//! graph generators, the embedding dynamics, a spectral closed form that
//! checks them, greedy routing, and the sweep harness with its CSV outputs.

pub mod cli;
pub mod embedding;
pub mod error;
pub mod experiments;
pub mod generators;
pub mod graph;
pub mod io;
pub mod routing;
pub mod seeds;
pub mod spectral;

pub use embedding::{embed, Coordinates, Embedding, EmbeddingConfig, EmbeddingState};
pub use error::{Error, Result};
pub use graph::{Graph, PathLengthDistribution};
pub use routing::{greedy_route, RouteResult};
pub use seeds::RngStream;
