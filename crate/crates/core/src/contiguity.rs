//! Simpliciality and 1-contiguity predicates, the map distance, and
//! certificate verification.
//!
//! Everything here is recomputed from facet lists with plain subset scans.
//! The search and covering code use their own incremental bitset checks, so a
//! certificate accepted here has been checked along an independent route.
//!
//! 1-contiguity is tested on facets only: if `f(σ) ∪ g(σ)` is a simplex for a
//! facet `σ`, the same holds for every face of `σ`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::complex::{Complex, SkeletonDistances, Simplex, VertexId};
use crate::error::{Error, Result};
use crate::map::SimplicialMap;

fn image_union(f: &SimplicialMap, g: Option<&SimplicialMap>, facet: &Simplex) -> Simplex {
    let mut labels: Vec<VertexId> = Vec::with_capacity(facet.len() * 2);
    for &v in facet.vertices() {
        labels.push(f.image(v).expect("facet vertex lies in the domain"));
        if let Some(g) = g {
            labels.push(g.image(v).expect("facet vertex lies in the domain"));
        }
    }
    Simplex::new(labels).expect("facets are nonempty")
}

/// First domain facet whose image is not a simplex of the codomain.
fn first_non_simplicial_facet(f: &SimplicialMap) -> Option<&Simplex> {
    f.domain()
        .facets()
        .iter()
        .find(|s| !f.codomain().is_simplex(&image_union(f, None, s)))
}

/// First facet `σ` with `f(σ) ∪ g(σ)` not a simplex.
fn first_non_contiguous_facet<'a>(f: &'a SimplicialMap, g: &SimplicialMap) -> Option<&'a Simplex> {
    f.domain()
        .facets()
        .iter()
        .find(|s| !f.codomain().is_simplex(&image_union(f, Some(g), s)))
}

pub fn is_simplicial(f: &SimplicialMap) -> bool {
    first_non_simplicial_facet(f).is_none()
}

/// Whether `f` and `g` are 1-contiguous. Non-simplicial inputs yield `false`
/// rather than an error.
pub fn contiguous(f: &SimplicialMap, g: &SimplicialMap) -> Result<bool> {
    if !f.same_shape(g) {
        return Err(Error::Mismatched("contiguity needs a shared domain and codomain".into()));
    }
    Ok(is_simplicial(f) && is_simplicial(g) && first_non_contiguous_facet(f, g).is_none())
}

/// `Σ_v d_K(f(v), g(v))` over the domain vertices.
pub fn map_distance(f: &SimplicialMap, g: &SimplicialMap, dist: &SkeletonDistances) -> Result<u64> {
    if !f.same_shape(g) {
        return Err(Error::Mismatched("map distance needs a shared domain and codomain".into()));
    }
    f.images()
        .iter()
        .zip(g.images())
        .map(|(&a, &b)| {
            dist.get(a, b)
                .map(u64::from)
                .ok_or_else(|| Error::Mismatched("distance table is for another complex".into()))
        })
        .sum()
}

/// A sequence of maps `φ₀, …, φ_c` sharing domain and codomain. The
/// contiguity of consecutive terms is established by [`verify_chain`] or by
/// construction in the search.
#[derive(Clone, Debug, PartialEq)]
pub struct ContiguityChain {
    maps: Vec<SimplicialMap>,
}

impl ContiguityChain {
    pub fn new(maps: Vec<SimplicialMap>) -> Result<Self> {
        let first = maps
            .first()
            .ok_or_else(|| Error::InvalidChain("a chain needs at least one map".into()))?;
        if let Some(i) = maps.iter().position(|m| !m.same_shape(first)) {
            return Err(Error::InvalidChain(format!(
                "map {i} does not share domain and codomain with map 0"
            )));
        }
        Ok(ContiguityChain { maps })
    }

    pub(crate) fn from_images(
        domain: Arc<Complex>,
        codomain: Arc<Complex>,
        images: Vec<Vec<VertexId>>,
    ) -> Self {
        let maps = images
            .into_iter()
            .map(|im| SimplicialMap::from_parts_unchecked(domain.clone(), codomain.clone(), im))
            .collect();
        ContiguityChain { maps }
    }

    pub fn maps(&self) -> &[SimplicialMap] {
        &self.maps
    }

    /// The chain length `c`, one less than the number of maps.
    pub fn length(&self) -> usize {
        self.maps.len() - 1
    }

    pub fn first(&self) -> &SimplicialMap {
        &self.maps[0]
    }

    pub fn last(&self) -> &SimplicialMap {
        &self.maps[self.maps.len() - 1]
    }

    pub fn domain(&self) -> &Arc<Complex> {
        self.maps[0].domain()
    }

    pub fn codomain(&self) -> &Arc<Complex> {
        self.maps[0].codomain()
    }

    pub(crate) fn image_rows(&self) -> Vec<Vec<VertexId>> {
        self.maps.iter().map(|m| m.images().to_vec()).collect()
    }

    /// Restricts every map to a subcomplex of the domain.
    pub fn restrict(&self, sub: &Arc<Complex>) -> Result<ContiguityChain> {
        let maps = self.maps.iter().map(|m| m.restrict(sub)).collect::<Result<Vec<_>>>()?;
        Ok(ContiguityChain { maps })
    }
}

/// Which end of a chain failed to match.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Endpoint {
    Start,
    End,
}

/// A single verification failure, reported at the first offending position in
/// canonical facet order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    ShapeMismatch { map: usize },
    NotSimplicial { map: usize, facet: Simplex },
    NotContiguous { step: usize, facet: Simplex },
    EndpointMismatch { which: Endpoint, vertex: VertexId, expected: VertexId, found: VertexId },
    EmptyPart { part: usize },
    ForeignFacet { part: usize, facet: Simplex },
    DuplicateFacet { facet: Simplex, first: usize, second: usize },
    MissingFacet { facet: Simplex },
    PartDomain { part: usize },
    SourceMaps(String),
    InPart { part: usize, violation: Box<Violation> },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ShapeMismatch { map } => {
                write!(f, "map {map} has a different domain or codomain")
            }
            Violation::NotSimplicial { map, facet } => {
                write!(f, "map {map} sends facet {facet} to a non-simplex")
            }
            Violation::NotContiguous { step, facet } => write!(
                f,
                "maps {step} and {} are not contiguous on facet {facet}",
                step + 1
            ),
            Violation::EndpointMismatch { which, vertex, expected, found } => write!(
                f,
                "{} map sends vertex {vertex} to {found}, expected {expected}",
                match which {
                    Endpoint::Start => "first",
                    Endpoint::End => "last",
                }
            ),
            Violation::EmptyPart { part } => write!(f, "part {part} has no facets"),
            Violation::ForeignFacet { part, facet } => {
                write!(f, "part {part} lists {facet}, which is not a facet of the domain")
            }
            Violation::DuplicateFacet { facet, first, second } => {
                write!(f, "facet {facet} appears in parts {first} and {second}")
            }
            Violation::MissingFacet { facet } => write!(f, "facet {facet} is in no part"),
            Violation::PartDomain { part } => write!(
                f,
                "chain of part {part} is not defined on the subcomplex generated by its facets"
            ),
            Violation::SourceMaps(msg) => write!(f, "source maps: {msg}"),
            Violation::InPart { part, violation } => write!(f, "part {part}: {violation}"),
        }
    }
}

/// Outcome of a verification: empty means the certificate is valid.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Verdict {
    pub violations: Vec<Violation>,
}

impl Verdict {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

fn first_endpoint_mismatch(
    which: Endpoint,
    found: &SimplicialMap,
    expected: &SimplicialMap,
) -> Option<Violation> {
    found
        .domain()
        .vertices()
        .iter()
        .zip(found.images().iter().zip(expected.images()))
        .find(|(_, (a, b))| a != b)
        .map(|(&vertex, (&found, &expected))| Violation::EndpointMismatch {
            which,
            vertex,
            expected,
            found,
        })
}

/// Checks that every map is simplicial, consecutive maps are 1-contiguous and
/// the chain runs from `start` to `end`. Stops at the first failure.
pub fn verify_chain(chain: &ContiguityChain, start: &SimplicialMap, end: &SimplicialMap) -> Verdict {
    let mut verdict = Verdict::default();
    let maps = chain.maps();
    for (i, m) in maps.iter().enumerate() {
        if !m.same_shape(start) {
            verdict.violations.push(Violation::ShapeMismatch { map: i });
            return verdict;
        }
    }
    if !end.same_shape(start) {
        verdict.violations.push(Violation::ShapeMismatch { map: maps.len() });
        return verdict;
    }
    for (i, m) in maps.iter().enumerate() {
        if let Some(facet) = first_non_simplicial_facet(m) {
            verdict.violations.push(Violation::NotSimplicial { map: i, facet: facet.clone() });
            return verdict;
        }
        if i > 0 {
            if let Some(facet) = first_non_contiguous_facet(&maps[i - 1], m) {
                verdict
                    .violations
                    .push(Violation::NotContiguous { step: i - 1, facet: facet.clone() });
                return verdict;
            }
        }
    }
    if let Some(v) = first_endpoint_mismatch(Endpoint::Start, &maps[0], start) {
        verdict.violations.push(v);
        return verdict;
    }
    if let Some(v) = first_endpoint_mismatch(Endpoint::End, &maps[maps.len() - 1], end) {
        verdict.violations.push(v);
    }
    verdict
}

/// One part of a cover: a set of facets of the domain and a chain on the
/// subcomplex they generate.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverPart {
    pub facets: Vec<Simplex>,
    pub chain: ContiguityChain,
}

/// A partition of the facets of `start.domain()` whose parts carry contiguity
/// chains between the restrictions of `start` and `end`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverCertificate {
    pub start: SimplicialMap,
    pub end: SimplicialMap,
    pub parts: Vec<CoverPart>,
}

impl CoverCertificate {
    pub fn domain(&self) -> &Arc<Complex> {
        self.start.domain()
    }

    /// Number of parts minus one.
    pub fn bound(&self) -> usize {
        self.parts.len().saturating_sub(1)
    }

    pub fn part_sizes(&self) -> Vec<usize> {
        self.parts.iter().map(|p| p.facets.len()).collect()
    }
}

/// Subcomplex spanned by `facets`, recomputed without the cached tables of
/// [`Complex`].
fn spanned_vertices(facets: &[Simplex]) -> Vec<VertexId> {
    let mut v: Vec<VertexId> = facets.iter().flat_map(|f| f.vertices().iter().copied()).collect();
    v.sort_unstable();
    v.dedup();
    v
}

fn restricted_images(map: &SimplicialMap, vertices: &[VertexId]) -> Vec<VertexId> {
    vertices.iter().map(|&v| map.image(v).expect("subcomplex vertex")).collect()
}

/// Checks that the parts partition the facets of the domain exactly and that
/// every part's chain is a valid chain between the restricted source maps.
pub fn verify_cover(cert: &CoverCertificate) -> Verdict {
    let mut verdict = Verdict::default();
    if !cert.start.same_shape(&cert.end) {
        verdict
            .violations
            .push(Violation::SourceMaps("start and end maps have different shapes".into()));
        return verdict;
    }
    let domain = cert.domain();
    let mut owner: BTreeMap<&Simplex, usize> = BTreeMap::new();
    for (p, part) in cert.parts.iter().enumerate() {
        if part.facets.is_empty() {
            verdict.violations.push(Violation::EmptyPart { part: p });
        }
        for facet in &part.facets {
            if !domain.facets().contains(facet) {
                verdict.violations.push(Violation::ForeignFacet { part: p, facet: facet.clone() });
            } else if let Some(&first) = owner.get(facet) {
                verdict.violations.push(Violation::DuplicateFacet {
                    facet: facet.clone(),
                    first,
                    second: p,
                });
            } else {
                owner.insert(facet, p);
            }
        }
    }
    for facet in domain.facets() {
        if !owner.contains_key(facet) {
            verdict.violations.push(Violation::MissingFacet { facet: facet.clone() });
        }
    }

    for (p, part) in cert.parts.iter().enumerate() {
        if part.facets.is_empty() {
            continue;
        }
        let chain_domain = part.chain.domain();
        let vertices = spanned_vertices(&part.facets);
        let mut facets = part.facets.clone();
        facets.sort();
        facets.dedup();
        if chain_domain.vertices() != vertices.as_slice()
            || chain_domain.facets() != facets.as_slice()
            || part.chain.codomain() != cert.start.codomain()
        {
            verdict.violations.push(Violation::PartDomain { part: p });
            continue;
        }
        let start = SimplicialMap::new(
            chain_domain.clone(),
            cert.start.codomain().clone(),
            restricted_images(&cert.start, &vertices),
        );
        let end = SimplicialMap::new(
            chain_domain.clone(),
            cert.end.codomain().clone(),
            restricted_images(&cert.end, &vertices),
        );
        let (Ok(start), Ok(end)) = (start, end) else {
            verdict.violations.push(Violation::PartDomain { part: p });
            continue;
        };
        let v = verify_chain(&part.chain, &start, &end);
        verdict.violations.extend(
            v.violations
                .into_iter()
                .map(|violation| Violation::InPart { part: p, violation: Box::new(violation) }),
        );
    }
    verdict
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle() -> Arc<Complex> {
        Arc::new(Complex::from_facet_lists([vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap())
    }

    fn map(k: &Arc<Complex>, images: &[u32]) -> SimplicialMap {
        SimplicialMap::new(k.clone(), k.clone(), images.to_vec()).unwrap()
    }

    #[test]
    fn simpliciality() {
        let k = circle();
        assert!(is_simplicial(&SimplicialMap::identity(k.clone())));
        let tri = Arc::new(Complex::from_facet_lists([vec![0, 1, 2]]).unwrap());
        let f = SimplicialMap::new(tri, k, vec![0, 1, 2]).unwrap();
        assert!(!is_simplicial(&f));
    }

    #[test]
    fn contiguity_basics() {
        let k = circle();
        let id = SimplicialMap::identity(k.clone());
        assert!(contiguous(&id, &id).unwrap());
        let c0 = map(&k, &[0, 0, 0]);
        let c1 = map(&k, &[1, 1, 1]);
        assert!(contiguous(&c0, &c1).unwrap());
        assert!(contiguous(&c1, &c0).unwrap());
        assert!(!contiguous(&id, &c0).unwrap());
        let other = Arc::new(Complex::from_facet_lists([vec![0, 1]]).unwrap());
        let f = SimplicialMap::identity(other);
        assert!(contiguous(&id, &f).is_err());
    }

    #[test]
    fn distances() {
        let k = circle();
        let d = SkeletonDistances::new(&k).unwrap();
        let id = SimplicialMap::identity(k.clone());
        let c0 = map(&k, &[0, 0, 0]);
        assert_eq!(map_distance(&id, &id, &d).unwrap(), 0);
        assert_eq!(map_distance(&id, &c0, &d).unwrap(), 2);
    }

    #[test]
    fn chain_diagnostics_locate_failure() {
        let k = circle();
        let id = SimplicialMap::identity(k.clone());
        let c0 = map(&k, &[0, 0, 0]);
        let chain = ContiguityChain::new(vec![id.clone(), c0.clone()]).unwrap();
        let v = verify_chain(&chain, &id, &c0);
        assert_eq!(
            v.violations,
            vec![Violation::NotContiguous { step: 0, facet: Simplex::new([1, 2]).unwrap() }]
        );
        let chain = ContiguityChain::new(vec![c0.clone()]).unwrap();
        assert!(verify_chain(&chain, &c0, &c0).is_ok());
        let v = verify_chain(&chain, &c0, &map(&k, &[0, 0, 1]));
        assert!(matches!(
            v.violations[0],
            Violation::EndpointMismatch { which: Endpoint::End, vertex: 2, .. }
        ));
    }
}
