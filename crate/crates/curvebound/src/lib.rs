//! Curvature, isoperimetry, volume growth, and verified spectral bounds on
//! finite graphs.
//!
//! The pipeline: exact Ollivier curvature via rational optimal transport,
//! Cheeger constants by exhaustive enumeration or family closed forms,
//! shell profiles around separating cut sets, growth/decay envelopes, and
//! finally eigenvalue bounds checked against exactly or numerically
//! computed Laplacian spectra.

pub mod curvature;
pub mod error;
pub mod graph;
pub mod isoperimetry;
pub mod linalg;
pub mod rational;
pub mod report;
pub mod shells;
pub mod spectral;
pub mod transport;

pub use error::{Error, Result};
pub use graph::{generate, load_graph, FamilySpec, Graph};
pub use rational::Rational;
