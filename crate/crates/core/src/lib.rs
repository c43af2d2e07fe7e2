//! Spectral laboratory for arrays of circles.
//!
//! * [`graph`]: immutable graphs, vertex functions, graph documents.
//! * [`arrays`]: builders for arrays, generalized arrays and optimal arrays.
//! * [`spectral`]: the degree-normalized quadratic form and its first positive eigenvalue.
//! * [`bounds`]: eigenvalue bounds, witness certificates, the collapse map.
//! * [`walks`]: random walks on the free group of rank two.
//! * [`experiments`]: batch verbs behind the `lab` command line tool.

pub mod arrays;
pub mod bounds;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod numeric;
pub mod report;
pub mod spectral;
pub mod walks;

pub use error::{BoundsError, DescError, ExperimentError, GraphError, ParseError, SpectralError, WalkError};
pub use graph::{Graph, VertexFunction};
