//! Upper bounds for contiguity distance between simplicial maps, with
//! simplicial complexity and LS-category as special cases, together with the
//! piecewise-linear motion planners the bounds certify.
//!
//! The pipeline: build complexes ([`complex`]), run the randomized
//! [`covering`] search which uses [`search`] for contiguity chains, check the
//! result with the independent verifier in [`contiguity`], and evaluate
//! planners with [`planner`]. JSON file formats live in [`io`].

pub mod complex;
pub mod contiguity;
pub mod covering;
pub mod error;
pub mod io;
pub mod map;
pub mod planner;
pub mod search;

pub use complex::{Complex, ProductVertexCodec, Simplex, SkeletonDistances, VertexId};
pub use contiguity::{ContiguityChain, CoverCertificate, CoverPart, Verdict, Violation};
pub use covering::{CoverParams, CoverRun, GrowState, RunReport};
pub use error::{Error, Result};
pub use map::SimplicialMap;
pub use search::{SearchParams, Variant};
