use thiserror::Error;

use crate::complex::VertexId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("complex has no facets")]
    EmptyComplex,

    #[error("simplex must have at least one vertex")]
    EmptySimplex,

    #[error("vertex {0} lies in no facet; labels must be dense 0..n")]
    IsolatedLabel(VertexId),

    #[error("complex is disconnected; connectedness of the codomain is required")]
    Disconnected,

    #[error("vertex {vertex} is out of range (complex has {count} vertex labels)")]
    VertexOutOfRange { vertex: VertexId, count: usize },

    #[error("{0} is not a facet of the ambient complex")]
    NotAFacet(String),

    #[error("facet subset is empty")]
    EmptyFacetSubset,

    #[error("maps do not share domain and codomain: {0}")]
    Mismatched(String),

    #[error("map is not simplicial: {0}")]
    NotSimplicial(String),

    #[error("invalid contiguity chain: {0}")]
    InvalidChain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("subcomplex is not contained in the map's domain")]
    NotASubcomplex,

    #[error("complex has no barycenter table; it was not produced by barycentric subdivision")]
    MissingBarycenters,

    #[error("subdivision would produce {facets} facets, above the limit of {limit}")]
    ResourceLimit { facets: u128, limit: u128 },

    #[error("invalid barycentric point: {0}")]
    InvalidPoint(String),

    #[error("product point {carrier} is not covered by part {part}; parts covering it: {covering:?}")]
    NotCovered { carrier: String, part: usize, covering: Vec<usize> },

    #[error("simplex {0} lies in no part of the cover")]
    Uncovered(String),

    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
