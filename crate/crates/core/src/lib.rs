//! Boundary analysis of linear subvarieties of strata of abelian
//! differentials.
//!
//! Everything is exact: periods and coefficients live in the Gaussian
//! rationals [`Gq`], and every linear-algebra step is done by hand over
//! them.

pub mod aim;
pub mod cli;
pub mod deformation;
pub mod equations;
pub mod error;
pub mod gaussian;
pub mod homology;
pub mod lattice;
pub mod level_graph;
pub mod linalg;
pub mod plumbing;

pub use equations::EquationSystem;
pub use error::{Error, Violation};
pub use gaussian::Gq;
pub use homology::{AdaptedBasis, Cycle};
pub use level_graph::EnhancedLevelGraph;
