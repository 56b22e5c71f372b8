//! Deterministic list coloring by recursive hash partitioning, with a
//! round-accounting simulator for congested-clique and MPC models.

pub mod cli;
pub mod derand;
pub mod graph;
pub mod hash;
pub mod io;
pub mod lowspace;
pub mod palette;
pub mod partition;
pub mod reduce;
pub mod sim;
pub mod stats;
