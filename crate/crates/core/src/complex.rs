//! Finite abstract simplicial complexes stored as a vertex list plus the list of
//! their facets.
//!
//! Besides the canonical `(vertices, facets)` pair, a [`Complex`] caches a few
//! derived tables (label lookup, facet stars, per-vertex facet bitsets) so that
//! the randomized search can test simpliciality without re-scanning facets.
//! Full face enumeration is only done on demand.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::map::SimplicialMap;

/// Vertex label. Labels carry the linear order used by ordered products.
pub type VertexId = u32;

const ABSENT: u32 = u32::MAX;

/// A simplex: a nonempty, strictly increasing list of vertex labels.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Simplex(Vec<VertexId>);

impl Simplex {
    /// Sorts and deduplicates `vertices`.
    pub fn new(vertices: impl IntoIterator<Item = VertexId>) -> Result<Self> {
        let mut v: Vec<VertexId> = vertices.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        if v.is_empty() {
            return Err(Error::EmptySimplex);
        }
        Ok(Simplex(v))
    }

    pub fn vertex(v: VertexId) -> Self {
        Simplex(vec![v])
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn min_vertex(&self) -> VertexId {
        self.0[0]
    }

    pub fn max_vertex(&self) -> VertexId {
        self.0[self.0.len() - 1]
    }

    /// Whether every vertex of `self` is a vertex of `other`.
    pub fn is_face_of(&self, other: &Simplex) -> bool {
        if self.0.len() > other.0.len() {
            return false;
        }
        let mut it = other.0.iter();
        'outer: for v in &self.0 {
            for w in it.by_ref() {
                match w.cmp(v) {
                    std::cmp::Ordering::Less => continue,
                    std::cmp::Ordering::Equal => continue 'outer,
                    std::cmp::Ordering::Greater => return false,
                }
            }
            return false;
        }
        true
    }

    /// All nonempty faces, the simplex itself included.
    pub fn faces(&self) -> impl Iterator<Item = Simplex> + '_ {
        let n = self.0.len();
        (1u64..(1u64 << n)).map(move |mask| {
            Simplex(
                (0..n)
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| self.0[i])
                    .collect(),
            )
        })
    }
}

impl fmt::Display for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

impl TryFrom<Vec<VertexId>> for Simplex {
    type Error = Error;

    fn try_from(v: Vec<VertexId>) -> Result<Self> {
        Simplex::new(v)
    }
}

impl From<Simplex> for Vec<VertexId> {
    fn from(s: Simplex) -> Self {
        s.0
    }
}

/// A finite abstract simplicial complex given by its facets.
///
/// Invariants: facets are pairwise non-nested, duplicate free and sorted
/// lexicographically; the vertex list is exactly the union of the facets.
/// Complexes built with [`Complex::from_facet_lists`] have dense labels
/// `0..n`; generated subcomplexes keep the labels of their parent and may be
/// sparse.
#[derive(Clone, Debug)]
pub struct Complex {
    vertices: Vec<VertexId>,
    facets: Vec<Simplex>,
    position: Vec<u32>,
    local_facets: Vec<Vec<u32>>,
    star: Vec<Vec<u32>>,
    words: usize,
    incidence: Vec<u64>,
}

impl PartialEq for Complex {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.facets == other.facets
    }
}

impl Eq for Complex {}

impl Complex {
    /// Builds a complex from raw facet lists, pruning faces that are not
    /// maximal. Labels must be dense: every label below the maximum has to
    /// occur in some list.
    pub fn from_facet_lists<I, L>(lists: I) -> Result<Self>
    where
        I: IntoIterator<Item = L>,
        L: IntoIterator<Item = VertexId>,
    {
        let simplices = lists
            .into_iter()
            .map(Simplex::new)
            .collect::<Result<Vec<_>>>()?;
        let complex = Complex::from_simplices(simplices)?;
        if let Some(missing) = (0..complex.vertex_count() as VertexId)
            .find(|&v| complex.position(v).is_none())
        {
            return Err(Error::IsolatedLabel(missing));
        }
        Ok(complex)
    }

    /// Builds a complex generated by `simplices`; labels may be sparse.
    pub fn from_simplices(simplices: impl IntoIterator<Item = Simplex>) -> Result<Self> {
        let mut all: Vec<Simplex> = simplices.into_iter().collect();
        if all.is_empty() {
            return Err(Error::EmptyComplex);
        }
        all.sort_unstable_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        all.dedup();
        let mut kept: Vec<Simplex> = Vec::with_capacity(all.len());
        for s in all {
            if !kept.iter().any(|k| s.is_face_of(k)) {
                kept.push(s);
            }
        }
        kept.sort_unstable();
        Ok(Complex::from_canonical_facets(kept))
    }

    /// `facets` must already be canonical (maximal, deduplicated, sorted).
    pub(crate) fn from_canonical_facets(facets: Vec<Simplex>) -> Self {
        let vertices: Vec<VertexId> = facets
            .iter()
            .flat_map(|f| f.vertices().iter().copied())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let range = vertices.last().map_or(0, |&v| v as usize + 1);
        let mut position = vec![ABSENT; range];
        for (i, &v) in vertices.iter().enumerate() {
            position[v as usize] = i as u32;
        }
        let local_facets: Vec<Vec<u32>> = facets
            .iter()
            .map(|f| f.vertices().iter().map(|&v| position[v as usize]).collect())
            .collect();
        let mut star = vec![Vec::new(); vertices.len()];
        let words = facets.len().div_ceil(64).max(1);
        let mut incidence = vec![0u64; words * vertices.len()];
        for (fi, lf) in local_facets.iter().enumerate() {
            for &p in lf {
                star[p as usize].push(fi as u32);
                incidence[p as usize * words + fi / 64] |= 1u64 << (fi % 64);
            }
        }
        Complex {
            vertices,
            facets,
            position,
            local_facets,
            star,
            words,
            incidence,
        }
    }

    /// One more than the largest vertex label.
    pub fn vertex_count(&self) -> usize {
        self.position.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Sorted vertex labels.
    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Simplex] {
        &self.facets
    }

    pub fn num_facets(&self) -> usize {
        self.facets.len()
    }

    pub fn is_dense(&self) -> bool {
        self.vertices.len() == self.position.len()
    }

    pub fn dim(&self) -> usize {
        self.facets.iter().map(Simplex::dim).max().unwrap_or(0)
    }

    /// Index of `label` in [`Complex::vertices`].
    pub fn position(&self, label: VertexId) -> Option<usize> {
        match self.position.get(label as usize) {
            Some(&p) if p != ABSENT => Some(p as usize),
            _ => None,
        }
    }

    pub fn facet_index(&self, facet: &Simplex) -> Option<usize> {
        self.facets.binary_search(facet).ok()
    }

    /// Facets expressed as positions into [`Complex::vertices`].
    pub(crate) fn local_facets(&self) -> &[Vec<u32>] {
        &self.local_facets
    }

    /// Indices of the facets containing the vertex at `position`.
    pub(crate) fn star(&self, position: usize) -> &[u32] {
        &self.star[position]
    }

    /// Whether `s` lies in some facet; a straight scan of the facet list.
    pub fn is_simplex(&self, s: &Simplex) -> bool {
        self.facets.iter().any(|f| s.is_face_of(f))
    }

    /// Whether the (unsorted, possibly repeating) labels span a simplex.
    /// Intersects per-vertex facet bitsets; used on the search hot path.
    pub(crate) fn spans_simplex(&self, labels: &[VertexId]) -> bool {
        let w = self.words;
        let mut acc = [u64::MAX; 4];
        if w <= acc.len() {
            for &v in labels {
                let Some(p) = self.position(v) else {
                    return false;
                };
                let row = &self.incidence[p * w..(p + 1) * w];
                for (a, r) in acc.iter_mut().zip(row) {
                    *a &= r;
                }
            }
            return acc[..w].iter().any(|&x| x != 0);
        }
        let mut acc = vec![u64::MAX; w];
        for &v in labels {
            let Some(p) = self.position(v) else {
                return false;
            };
            for (a, r) in acc.iter_mut().zip(&self.incidence[p * w..(p + 1) * w]) {
                *a &= r;
            }
        }
        acc.iter().any(|&x| x != 0)
    }

    /// Every simplex of the complex (all faces of all facets).
    pub fn faces(&self) -> BTreeSet<Simplex> {
        self.facets.iter().flat_map(|f| f.faces()).collect()
    }

    /// Number of simplices in each dimension.
    pub fn f_vector(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.dim() + 1];
        for s in self.faces() {
            counts[s.dim()] += 1;
        }
        counts
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.f_vector()
            .iter()
            .enumerate()
            .map(|(d, &c)| if d % 2 == 0 { c as i64 } else { -(c as i64) })
            .sum()
    }

    /// Neighbours of each vertex position in the 1-skeleton.
    pub(crate) fn adjacency(&self) -> Vec<Vec<u32>> {
        let mut adj: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); self.vertices.len()];
        for lf in &self.local_facets {
            for &a in lf {
                for &b in lf {
                    if a != b {
                        adj[a as usize].insert(b);
                    }
                }
            }
        }
        adj.into_iter().map(|s| s.into_iter().collect()).collect()
    }

    pub fn is_connected(&self) -> bool {
        let adj = self.adjacency();
        let mut seen = vec![false; adj.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    count += 1;
                    queue.push_back(v as usize);
                }
            }
        }
        count == adj.len()
    }

    /// Subcomplex generated by the facets at `indices` (sorted, in range).
    pub(crate) fn generated_by(&self, indices: &[usize]) -> Complex {
        Complex::from_canonical_facets(indices.iter().map(|&i| self.facets[i].clone()).collect())
    }

    /// Subcomplex whose facets are exactly `facets`, each of which must be a
    /// facet of `self`. Vertex labels are preserved.
    pub fn generated_subcomplex(&self, facets: &[Simplex]) -> Result<Complex> {
        if facets.is_empty() {
            return Err(Error::EmptyFacetSubset);
        }
        let mut indices = facets
            .iter()
            .map(|f| self.facet_index(f).ok_or_else(|| Error::NotAFacet(f.to_string())))
            .collect::<Result<Vec<_>>>()?;
        indices.sort_unstable();
        indices.dedup();
        Ok(self.generated_by(&indices))
    }

    /// Whether `other` is a subcomplex of `self`.
    pub fn contains_complex(&self, other: &Complex) -> bool {
        other.facets.iter().all(|f| self.is_simplex(f))
    }
}

/// Left-major encoding `(i, j) ↦ right·i + j` of ordered-product vertices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ProductVertexCodec {
    pub left: usize,
    pub right: usize,
}

impl ProductVertexCodec {
    pub fn new(left: usize, right: usize) -> Self {
        ProductVertexCodec { left, right }
    }

    pub fn encode(&self, i: VertexId, j: VertexId) -> VertexId {
        debug_assert!((i as usize) < self.left && (j as usize) < self.right);
        (self.right as u64 * i as u64 + j as u64) as VertexId
    }

    pub fn decode(&self, v: VertexId) -> (VertexId, VertexId) {
        let r = self.right as VertexId;
        (v / r, v % r)
    }

    pub fn vertex_count(&self) -> usize {
        self.left * self.right
    }
}

/// Ordered simplicial product: simplices are chains in the componentwise
/// order whose projections are simplices of the factors. The facets are the
/// monotone lattice paths through `σ × τ` for every pair of facets.
pub fn ordered_product(k: &Complex, l: &Complex) -> (Complex, ProductVertexCodec) {
    let codec = ProductVertexCodec::new(k.vertex_count(), l.vertex_count());
    let mut facets = BTreeSet::new();
    for s in k.facets() {
        for t in l.facets() {
            let mut path = Vec::with_capacity(s.len() + t.len() - 1);
            staircase_paths(s.vertices(), t.vertices(), 0, 0, &codec, &mut path, &mut facets);
        }
    }
    let facets = facets.into_iter().map(Simplex).collect();
    (Complex::from_canonical_facets(facets), codec)
}

fn staircase_paths(
    s: &[VertexId],
    t: &[VertexId],
    a: usize,
    b: usize,
    codec: &ProductVertexCodec,
    path: &mut Vec<VertexId>,
    out: &mut BTreeSet<Vec<VertexId>>,
) {
    path.push(codec.encode(s[a], t[b]));
    if a + 1 == s.len() && b + 1 == t.len() {
        let mut facet = path.clone();
        facet.sort_unstable();
        out.insert(facet);
    } else {
        if a + 1 < s.len() {
            staircase_paths(s, t, a + 1, b, codec, path, out);
        }
        if b + 1 < t.len() {
            staircase_paths(s, t, a, b + 1, codec, path, out);
        }
    }
    path.pop();
}

/// Projections `π₁(n·i + j) = i` and `π₂(n·i + j) = j` of an ordered product.
pub fn projections(
    product: &Arc<Complex>,
    codec: ProductVertexCodec,
    left: &Arc<Complex>,
    right: &Arc<Complex>,
) -> Result<(SimplicialMap, SimplicialMap)> {
    let pi1 = SimplicialMap::from_fn(product.clone(), left.clone(), |v| codec.decode(v).0)?;
    let pi2 = SimplicialMap::from_fn(product.clone(), right.clone(), |v| codec.decode(v).1)?;
    Ok((pi1, pi2))
}

/// Axial inclusions `ι₁(v) = (v, v₀)` and `ι₂(v) = (v₀, v)` of `K` into the
/// ordered square `product = K × K`.
pub fn axial_inclusions(
    k: &Arc<Complex>,
    product: &Arc<Complex>,
    codec: ProductVertexCodec,
    base: VertexId,
) -> Result<(SimplicialMap, SimplicialMap)> {
    if k.position(base).is_none() {
        return Err(Error::VertexOutOfRange { vertex: base, count: k.vertex_count() });
    }
    let i1 = SimplicialMap::from_fn(k.clone(), product.clone(), |v| codec.encode(v, base))?;
    let i2 = SimplicialMap::from_fn(k.clone(), product.clone(), |v| codec.encode(base, v))?;
    Ok((i1, i2))
}

/// Which vertex of a simplex its barycenter is sent to by an approximation
/// of the identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum VertexRule {
    #[default]
    Min,
    Max,
}

/// Barycentric subdivision together with its barycenter table: vertex `k` of
/// `complex` is the barycenter of `barycenters[k]`, a simplex of `base`.
#[derive(Clone, Debug)]
pub struct Subdivision {
    pub base: Arc<Complex>,
    pub complex: Arc<Complex>,
    pub barycenters: Vec<Simplex>,
}

/// Vertices are the simplices of `K` ordered by (dimension, lexicographic), so
/// a dense `K` keeps its vertex labels; facets are the maximal flags.
pub fn barycentric_subdivision(k: &Arc<Complex>) -> Subdivision {
    let mut simplices: Vec<Simplex> = k.faces().into_iter().collect();
    simplices.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    let label: HashMap<&Simplex, VertexId> = simplices
        .iter()
        .enumerate()
        .map(|(i, s)| (s, i as VertexId))
        .collect();
    let mut facets = BTreeSet::new();
    for f in k.facets() {
        let mut perm: Vec<VertexId> = f.vertices().to_vec();
        for_each_permutation(&mut perm, 0, &mut |order| {
            let mut flag = Vec::with_capacity(order.len());
            let mut prefix: Vec<VertexId> = Vec::with_capacity(order.len());
            for &v in order {
                let at = prefix.binary_search(&v).unwrap_or_else(|e| e);
                prefix.insert(at, v);
                flag.push(label[&Simplex(prefix.clone())]);
            }
            flag.sort_unstable();
            facets.insert(flag);
        });
    }
    let complex = Complex::from_canonical_facets(facets.into_iter().map(Simplex).collect());
    Subdivision {
        base: k.clone(),
        complex: Arc::new(complex),
        barycenters: simplices,
    }
}

fn for_each_permutation(items: &mut [VertexId], k: usize, f: &mut impl FnMut(&[VertexId])) {
    if k == items.len() {
        f(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        for_each_permutation(items, k + 1, f);
        items.swap(k, i);
    }
}

/// Facet count of `Sd(K)` without building it: a facet of dimension `d`
/// contributes `(d + 1)!` maximal flags.
pub fn subdivision_facet_count(k: &Complex) -> u128 {
    k.facets()
        .iter()
        .map(|f| (1..=f.len() as u128).product::<u128>())
        .sum()
}

impl Subdivision {
    /// Approximation of the identity sending each barycenter to the
    /// minimum-label vertex of its simplex.
    pub fn approximation_of_identity(&self) -> SimplicialMap {
        self.approximation_with(VertexRule::Min)
    }

    pub fn approximation_with(&self, rule: VertexRule) -> SimplicialMap {
        let images = self
            .complex
            .vertices()
            .iter()
            .map(|&v| {
                let s = &self.barycenters[v as usize];
                match rule {
                    VertexRule::Min => s.min_vertex(),
                    VertexRule::Max => s.max_vertex(),
                }
            })
            .collect();
        SimplicialMap::new(self.complex.clone(), self.base.clone(), images)
            .expect("barycenter images lie in the base complex")
    }

    /// Rebuilds a subdivision from a complex and a stored barycenter table,
    /// checking that the table really describes `Sd(base)`.
    pub fn from_table(
        base: Arc<Complex>,
        complex: Arc<Complex>,
        barycenters: Option<Vec<Simplex>>,
    ) -> Result<Self> {
        let barycenters = barycenters.ok_or(Error::MissingBarycenters)?;
        let expected = barycentric_subdivision(&base);
        if expected.barycenters != barycenters || *expected.complex != *complex {
            return Err(Error::Format(
                "barycenter table does not match the subdivision of the base complex".into(),
            ));
        }
        Ok(expected)
    }
}

/// Graph distances on the 1-skeleton, indexed by vertex position.
#[derive(Clone, Debug)]
pub struct SkeletonDistances {
    labels: Vec<VertexId>,
    position: Vec<u32>,
    table: Vec<u32>,
}

impl SkeletonDistances {
    /// Breadth-first search from every vertex. Fails on a disconnected
    /// complex.
    pub fn new(k: &Complex) -> Result<Self> {
        let adj = k.adjacency();
        let n = adj.len();
        let mut table = vec![u32::MAX; n * n];
        for src in 0..n {
            let row = &mut table[src * n..(src + 1) * n];
            row[src] = 0;
            let mut queue = VecDeque::from([src]);
            while let Some(u) = queue.pop_front() {
                for &v in &adj[u] {
                    if row[v as usize] == u32::MAX {
                        row[v as usize] = row[u] + 1;
                        queue.push_back(v as usize);
                    }
                }
            }
            if row.contains(&u32::MAX) {
                return Err(Error::Disconnected);
            }
        }
        Ok(SkeletonDistances {
            labels: k.vertices().to_vec(),
            position: k.position.clone(),
            table,
        })
    }

    pub fn labels(&self) -> &[VertexId] {
        &self.labels
    }

    /// Distance between two vertex labels; `None` if either is absent.
    pub fn get(&self, u: VertexId, v: VertexId) -> Option<u32> {
        let pu = *self.position.get(u as usize).filter(|&&p| p != ABSENT)?;
        let pv = *self.position.get(v as usize).filter(|&&p| p != ABSENT)?;
        Some(self.table[pu as usize * self.labels.len() + pv as usize])
    }

    /// Distance by positions, unchecked.
    pub(crate) fn at(&self, pu: usize, pv: usize) -> u32 {
        self.table[pu * self.labels.len() + pv]
    }

    pub(crate) fn pos(&self, v: VertexId) -> usize {
        self.position[v as usize] as usize
    }

    /// Table as rows of label-indexed distances, in vertex order.
    pub fn rows(&self) -> BTreeMap<VertexId, Vec<u32>> {
        let n = self.labels.len();
        self.labels
            .iter()
            .enumerate()
            .map(|(i, &l)| (l, self.table[i * n..(i + 1) * n].to_vec()))
            .collect()
    }
}

/// Convenience wrapper for [`SkeletonDistances::new`].
pub fn all_pairs_skeleton_distances(k: &Complex) -> Result<SkeletonDistances> {
    SkeletonDistances::new(k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle() -> Complex {
        Complex::from_facet_lists([vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap()
    }

    #[test]
    fn boundary_of_triangle() {
        let k = circle();
        assert_eq!(k.num_vertices(), 3);
        assert_eq!(k.num_facets(), 3);
        assert_eq!(k.facets()[0].vertices(), &[0, 1]);
        assert_eq!(k.facets()[1].vertices(), &[0, 2]);
        assert_eq!(k.euler_characteristic(), 0);
    }

    #[test]
    fn non_maximal_faces_are_pruned() {
        let k = Complex::from_facet_lists([vec![0, 1, 2], vec![0, 1]]).unwrap();
        assert_eq!(k.facets(), &[Simplex::new([0, 1, 2]).unwrap()]);
    }

    #[test]
    fn single_point() {
        let k = Complex::from_facet_lists([vec![0]]).unwrap();
        assert_eq!(k.num_vertices(), 1);
        assert_eq!(k.dim(), 0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            Complex::from_facet_lists(Vec::<Vec<u32>>::new()),
            Err(Error::EmptyComplex)
        ));
        assert!(matches!(
            Complex::from_facet_lists([vec![0, 2]]),
            Err(Error::IsolatedLabel(1))
        ));
        assert!(matches!(Complex::from_facet_lists([Vec::<u32>::new()]), Err(Error::EmptySimplex)));
    }

    #[test]
    fn rebuild_is_idempotent() {
        let k = Complex::from_facet_lists([vec![3, 1, 2], vec![0, 1], vec![1, 2], vec![0, 4]]).unwrap();
        let again =
            Complex::from_facet_lists(k.facets().iter().map(|f| f.vertices().to_vec())).unwrap();
        assert_eq!(k, again);
    }

    #[test]
    fn simplex_membership() {
        let k = circle();
        assert!(k.is_simplex(&Simplex::new([0, 1]).unwrap()));
        assert!(!k.is_simplex(&Simplex::new([0, 1, 2]).unwrap()));
        assert!(!k.is_simplex(&Simplex::new([7]).unwrap()));
        assert!(k.spans_simplex(&[1, 0, 1]));
        assert!(!k.spans_simplex(&[0, 1, 2]));
        assert!(!k.spans_simplex(&[9]));
    }

    #[test]
    fn square_of_interval() {
        let e = Complex::from_facet_lists([vec![0, 1]]).unwrap();
        let (p, codec) = ordered_product(&e, &e);
        assert_eq!(codec.right, 2);
        assert_eq!(p.num_vertices(), 4);
        let facets: Vec<&[u32]> = p.facets().iter().map(|f| f.vertices()).collect();
        // (0,0),(0,1),(1,1) = 0,1,3 and (0,0),(1,0),(1,1) = 0,2,3
        assert_eq!(facets, vec![&[0, 1, 3][..], &[0, 2, 3][..]]);
    }

    #[test]
    fn torus_grid_has_eighteen_triangles() {
        let k = circle();
        let (p, _) = ordered_product(&k, &k);
        assert_eq!(p.num_vertices(), 9);
        assert_eq!(p.num_facets(), 18);
        assert!(p.is_simplex(&Simplex::new([0, 4]).unwrap()));
        assert_eq!(p.euler_characteristic(), 0);
    }

    #[test]
    fn point_times_complex_is_the_complex() {
        let pt = Complex::from_facet_lists([vec![0]]).unwrap();
        let k = circle();
        let (p, _) = ordered_product(&pt, &k);
        assert_eq!(p, k);
        let (q, codec) = ordered_product(&k, &pt);
        assert_eq!(codec.right, 1);
        assert_eq!(q, k);
    }

    #[test]
    fn subdivisions() {
        let k = Arc::new(circle());
        let sd = barycentric_subdivision(&k);
        assert_eq!(sd.complex.num_vertices(), 6);
        assert_eq!(sd.complex.num_facets(), 6);
        let sd2 = barycentric_subdivision(&sd.complex);
        assert_eq!(sd2.complex.num_vertices(), 12);
        assert_eq!(sd2.complex.num_facets(), 12);

        let tri = Arc::new(Complex::from_facet_lists([vec![0, 1, 2]]).unwrap());
        let sd = barycentric_subdivision(&tri);
        assert_eq!(sd.complex.num_vertices(), 7);
        assert_eq!(sd.complex.num_facets(), 6);
        assert_eq!(subdivision_facet_count(&tri), 6);
    }

    #[test]
    fn approximation_of_identity_min_rule() {
        let k = Arc::new(circle());
        let sd = barycentric_subdivision(&k);
        let iota = sd.approximation_of_identity();
        let bary_12 = sd
            .barycenters
            .iter()
            .position(|s| s.vertices() == [1, 2])
            .unwrap() as VertexId;
        assert_eq!(iota.image(bary_12), Some(1));
        for v in 0..3 {
            assert_eq!(iota.image(v), Some(v));
        }

        let e = Arc::new(Complex::from_facet_lists([vec![0, 1]]).unwrap());
        let sd = barycentric_subdivision(&e);
        let iota = sd.approximation_of_identity();
        assert_eq!(iota.images(), &[0, 1, 0]);
    }

    #[test]
    fn skeleton_distances() {
        let k = circle();
        let d = SkeletonDistances::new(&k).unwrap();
        for u in 0..3 {
            for v in 0..3 {
                assert_eq!(d.get(u, v), Some(u32::from(u != v)));
            }
        }
        let hex = barycentric_subdivision(&Arc::new(k)).complex;
        let d = SkeletonDistances::new(&hex).unwrap();
        // vertex 0 is antipodal to the barycenter of {1, 2} (label 5)
        assert_eq!(d.get(0, 5), Some(3));

        let two_points = Complex::from_facet_lists([vec![0], vec![1]]).unwrap();
        assert!(matches!(SkeletonDistances::new(&two_points), Err(Error::Disconnected)));
    }

    #[test]
    fn generated_subcomplex_keeps_labels() {
        let k = circle();
        let all = k.generated_subcomplex(k.facets()).unwrap();
        assert_eq!(all, k);
        let edge = k.generated_subcomplex(&[Simplex::new([1, 2]).unwrap()]).unwrap();
        assert_eq!(edge.vertices(), &[1, 2]);
        assert_eq!(edge.vertex_count(), 3);
        assert!(!edge.is_dense());
        assert!(matches!(k.generated_subcomplex(&[]), Err(Error::EmptyFacetSubset)));
        assert!(matches!(
            k.generated_subcomplex(&[Simplex::new([1]).unwrap()]),
            Err(Error::NotAFacet(_))
        ));
    }

    #[test]
    fn projections_and_inclusions() {
        let k = Arc::new(circle());
        let (p, codec) = ordered_product(&k, &k);
        let p = Arc::new(p);
        let (pi1, pi2) = projections(&p, codec, &k, &k).unwrap();
        assert_eq!(pi1.images(), &[0, 0, 0, 1, 1, 1, 2, 2, 2]);
        assert_eq!(pi2.images(), &[0, 1, 2, 0, 1, 2, 0, 1, 2]);
        let (i1, i2) = axial_inclusions(&k, &p, codec, 0).unwrap();
        assert_eq!(i1.images(), &[0, 3, 6]);
        assert_eq!(i2.images(), &[0, 1, 2]);
        assert!(axial_inclusions(&k, &p, codec, 3).is_err());
    }
}
