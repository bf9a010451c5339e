//! Random walks, coalescing walks and pull voting on dynamic graphs whose
//! transition matrices share a stationary distribution.

pub mod chain;
pub mod edge_markovian;
pub mod error;
pub mod graph;
pub mod io;
pub mod lemmas;
pub mod sim;
pub mod voting;

pub use error::{Error, Result};
