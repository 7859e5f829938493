//! Desk-scale models of twisted graph correspondences and their groupoid
//! convolution algebras.
//!
//! Everything here is finite and exact: graphs are finite discrete topological
//! graphs, circle-valued data is carried as rational numbers of turns when the
//! inputs are roots of unity, and the structural identities (cocycle laws,
//! twist axioms, Toeplitz/covariance relations, gradings, factor-map
//! functoriality, and the boundary-groupoid isomorphism) are verified by
//! direct computation against independent oracles rather than assumed.

#![forbid(unsafe_code)]

pub mod algebra;
pub mod boundary;
pub mod corpus;
pub mod correspondence;
pub mod error;
pub mod factor;
pub mod graph;
pub mod instance;
pub mod groupoid;
pub mod phase;
pub mod report;
pub mod twist;

pub use error::{Error, Result};
