use std::fmt;
use std::sync::Arc;

use crate::complex::{Complex, Simplex, VertexId};
use crate::error::{Error, Result};

/// A vertex map between two complexes.
///
/// `images[k]` is the image of the `k`-th domain vertex (in the order of
/// [`Complex::vertices`]). Simpliciality is not enforced on construction: raw
/// vertex maps are allowed and [`crate::contiguity::is_simplicial`] decides.
#[derive(Clone, Debug)]
pub struct SimplicialMap {
    domain: Arc<Complex>,
    codomain: Arc<Complex>,
    images: Vec<VertexId>,
}

impl PartialEq for SimplicialMap {
    fn eq(&self, other: &Self) -> bool {
        self.images == other.images
            && (Arc::ptr_eq(&self.domain, &other.domain) || self.domain == other.domain)
            && (Arc::ptr_eq(&self.codomain, &other.codomain) || self.codomain == other.codomain)
    }
}

impl Eq for SimplicialMap {}

impl SimplicialMap {
    pub fn new(domain: Arc<Complex>, codomain: Arc<Complex>, images: Vec<VertexId>) -> Result<Self> {
        if images.len() != domain.num_vertices() {
            return Err(Error::Format(format!(
                "map has {} images but the domain has {} vertices",
                images.len(),
                domain.num_vertices()
            )));
        }
        if let Some(&bad) = images.iter().find(|&&w| codomain.position(w).is_none()) {
            return Err(Error::VertexOutOfRange { vertex: bad, count: codomain.vertex_count() });
        }
        Ok(SimplicialMap { domain, codomain, images })
    }

    /// Used by the search, whose images are valid by construction.
    pub(crate) fn from_parts_unchecked(
        domain: Arc<Complex>,
        codomain: Arc<Complex>,
        images: Vec<VertexId>,
    ) -> Self {
        debug_assert_eq!(images.len(), domain.num_vertices());
        SimplicialMap { domain, codomain, images }
    }

    pub fn from_fn(
        domain: Arc<Complex>,
        codomain: Arc<Complex>,
        f: impl Fn(VertexId) -> VertexId,
    ) -> Result<Self> {
        let images = domain.vertices().iter().map(|&v| f(v)).collect();
        SimplicialMap::new(domain, codomain, images)
    }

    pub fn identity(k: Arc<Complex>) -> Self {
        let images = k.vertices().to_vec();
        SimplicialMap { domain: k.clone(), codomain: k, images }
    }

    pub fn constant(domain: Arc<Complex>, codomain: Arc<Complex>, target: VertexId) -> Result<Self> {
        SimplicialMap::from_fn(domain, codomain, |_| target)
    }

    pub fn domain(&self) -> &Arc<Complex> {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<Complex> {
        &self.codomain
    }

    pub fn images(&self) -> &[VertexId] {
        &self.images
    }

    /// Image of a domain label.
    pub fn image(&self, v: VertexId) -> Option<VertexId> {
        self.domain.position(v).map(|p| self.images[p])
    }

    /// Image of a simplex of the domain, as a simplex of labels.
    pub fn image_of(&self, s: &Simplex) -> Option<Simplex> {
        let imgs = s
            .vertices()
            .iter()
            .map(|&v| self.image(v))
            .collect::<Option<Vec<_>>>()?;
        Simplex::new(imgs).ok()
    }

    pub fn same_shape(&self, other: &SimplicialMap) -> bool {
        (Arc::ptr_eq(&self.domain, &other.domain) || self.domain == other.domain)
            && (Arc::ptr_eq(&self.codomain, &other.codomain) || self.codomain == other.codomain)
    }

    /// Restriction to a subcomplex of the domain.
    pub fn restrict(&self, sub: &Arc<Complex>) -> Result<SimplicialMap> {
        let images = sub
            .vertices()
            .iter()
            .map(|&v| self.image(v).ok_or(Error::NotASubcomplex))
            .collect::<Result<Vec<_>>>()?;
        if !self.domain.contains_complex(sub) {
            return Err(Error::NotASubcomplex);
        }
        Ok(SimplicialMap { domain: sub.clone(), codomain: self.codomain.clone(), images })
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &SimplicialMap) -> Result<SimplicialMap> {
        if !(Arc::ptr_eq(inner.codomain(), &self.domain) || **inner.codomain() == *self.domain) {
            return Err(Error::Mismatched("inner codomain differs from outer domain".into()));
        }
        let images = inner
            .images
            .iter()
            .map(|&w| self.image(w).expect("codomain equals domain"))
            .collect();
        Ok(SimplicialMap {
            domain: inner.domain.clone(),
            codomain: self.codomain.clone(),
            images,
        })
    }
}

impl fmt::Display for SimplicialMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, (v, w)) in self.domain.vertices().iter().zip(&self.images).enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}→{w}")?;
        }
        write!(f, "]")
    }
}
