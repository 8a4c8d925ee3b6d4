//! Analysis toolkit for robust heteroclinic networks on coordinate axes.
//!
//! The crate is organised around a pipeline:
//!
//! * [`model`] — network data types, the JSON file schema and well-formedness
//!   validation,
//! * [`classify`] — axial-network axioms, Δ-clique detection and the
//!   structural decomposition of the connection graph,
//! * [`stability`] — contraction exponents, cycle/walk criteria and the
//!   Lotka-Volterra auxiliary criterion,
//! * [`realize`] — synthesis of an equivariant cubic vector field matching a
//!   prescribed eigenvalue table, with numeric certification of connections,
//! * [`simulate`] — adaptive integration, distance diagnostics and the
//!   empirical stability experiment,
//! * [`report`] — the consolidated report produced by the CLI.

pub mod classify;
pub mod graph;
pub mod model;
pub mod realize;
pub mod report;
pub mod simulate;
pub mod stability;
pub mod symbolic;

pub use model::{Connection, Equilibrium, Mode, Network};
