//! Ballistic optimal transport on discretely supported measures.
//!
//! The crate evaluates fixed-end, ballistic and dual costs generated by a
//! convex Lagrangian, solves the resulting Kantorovich problems exactly,
//! and turns the Hopf-Lax interpolation identities, the potential duality
//! and the Hamiltonian-flow construction of optimal maps into numerical
//! certificates.

pub mod costs;
pub mod error;
pub mod eulerian;
pub mod field;
pub mod grid;
pub mod hamiltonian;
pub mod interpolation;
pub mod lagrangian;
pub mod measure;
pub mod ot;

pub use error::{Error, Result};
pub use grid::{Convexity, GridFunction, SENTINEL};
pub use measure::DiscreteMeasure;
