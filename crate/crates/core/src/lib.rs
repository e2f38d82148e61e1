//! Numerical laboratory for height pairings on degenerating Riemann surfaces.
//!
//! The crate models an Iₙ degeneration by a warped cylinder chain, computes
//! its Laplace spectrum, preferred potentials and height pairings, and checks
//! them against the intersection-matrix prediction of the dual graph. Two
//! independent engines cover parabolic torus dynamics and node integrals.

pub mod acceptance;
pub mod cli;
pub mod dual_graph;
pub mod dynamics;
pub mod error;
pub mod fit;
pub mod geometry;
pub mod linalg;
pub mod node_integral;
pub mod pairing;
pub mod potential;
pub mod quadrature;
pub mod spectral;

pub use error::{Error, Result};
