//! JSON file formats and table export.
//!
//! Complexes are written as `{"vertex_count": n, "facets": [...]}`, with an
//! explicit `"vertices"` list when the labels are not `0..n`. Instead of
//! facets a file may name a construction (`"product_of": [a, b]` or
//! `"subdivision_of": a`); references are either inline objects or paths
//! relative to the referring file.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::complex::{
    barycentric_subdivision, ordered_product, Complex, ProductVertexCodec, Simplex, Subdivision, VertexId,
};
use crate::contiguity::{ContiguityChain, CoverCertificate, CoverPart};
use crate::error::{Error, Result};
use crate::map::SimplicialMap;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ComplexFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertex_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub facets: Option<Vec<Vec<VertexId>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<VertexId>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub product_of: Option<Vec<ComplexRef>>,
    /// Vertex count of the right factor: vertex `n·i + j` is `(i, j)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub codec: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subdivision_of: Option<Box<ComplexRef>>,
    /// `barycenters[k]` is the simplex whose barycenter is vertex `k`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub barycenters: Option<Vec<Vec<VertexId>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexRef {
    Path(String),
    Inline(Box<ComplexFile>),
}

/// A complex read from disk with whatever structure its file recorded.
#[derive(Clone, Debug)]
pub struct LoadedComplex {
    pub complex: Arc<Complex>,
    pub codec: Option<ProductVertexCodec>,
    pub subdivision: Option<Subdivision>,
}

impl LoadedComplex {
    pub fn plain(complex: Arc<Complex>) -> Self {
        LoadedComplex { complex, codec: None, subdivision: None }
    }
}

fn simplices(lists: &[Vec<VertexId>]) -> Result<Vec<Simplex>> {
    lists.iter().map(|l| Simplex::new(l.iter().copied())).collect()
}

impl ComplexFile {
    pub fn from_complex(k: &Complex) -> Self {
        ComplexFile {
            vertex_count: Some(k.vertex_count()),
            facets: Some(k.facets().iter().map(|f| f.vertices().to_vec()).collect()),
            vertices: (!k.is_dense()).then(|| k.vertices().to_vec()),
            ..ComplexFile::default()
        }
    }

    pub fn from_product(k: &Complex, codec: ProductVertexCodec, factors: [ComplexRef; 2]) -> Self {
        ComplexFile {
            product_of: Some(factors.to_vec()),
            codec: Some(codec.right),
            ..ComplexFile::from_complex(k)
        }
    }

    pub fn from_subdivision(sd: &Subdivision, base: ComplexRef) -> Self {
        ComplexFile {
            subdivision_of: Some(Box::new(base)),
            barycenters: Some(sd.barycenters.iter().map(|s| s.vertices().to_vec()).collect()),
            ..ComplexFile::from_complex(&sd.complex)
        }
    }

    /// Builds the complex; `dir` anchors relative references.
    pub fn resolve(&self, dir: &Path) -> Result<LoadedComplex> {
        let mut factors = None;
        let mut subdivision = None;
        let complex = if let Some(lists) = &self.facets {
            let facets = simplices(lists)?;
            if self.vertices.is_some() {
                Complex::from_simplices(facets)?
            } else {
                Complex::from_facet_lists(facets.iter().map(|f| f.vertices().to_vec()))?
            }
        } else if let Some(refs) = &self.product_of {
            let [a, b] = refs.as_slice() else {
                return Err(Error::Format("product_of needs exactly two factors".into()));
            };
            let (a, b) = (a.resolve(dir)?, b.resolve(dir)?);
            let (product, codec) = ordered_product(&a.complex, &b.complex);
            factors = Some(codec);
            product
        } else if let Some(base) = &self.subdivision_of {
            let base = base.resolve(dir)?;
            let sd = barycentric_subdivision(&base.complex);
            let complex = (*sd.complex).clone();
            subdivision = Some(sd);
            complex
        } else {
            return Err(Error::Format("a complex needs facets, product_of or subdivision_of".into()));
        };

        if let Some(n) = self.vertex_count {
            if n != complex.vertex_count() {
                return Err(Error::Format(format!(
                    "vertex_count is {n} but the facets use labels up to {}",
                    complex.vertex_count() as i64 - 1
                )));
            }
        }
        if let Some(vs) = &self.vertices {
            if vs.as_slice() != complex.vertices() {
                return Err(Error::Format("vertices list does not match the facets".into()));
            }
        }
        let codec = match (self.codec, factors) {
            (Some(n), Some(c)) if n != c.right => {
                return Err(Error::Format(format!("codec {n} disagrees with the factors ({})", c.right)))
            }
            (_, Some(c)) => Some(c),
            (Some(0), None) => return Err(Error::Format("codec must be positive".into())),
            (Some(n), None) => Some(ProductVertexCodec::new(complex.vertex_count().div_ceil(n), n)),
            (None, None) => None,
        };

        let complex = Arc::new(complex);
        if subdivision.is_none() {
            if let (Some(table), Some(base)) = (&self.barycenters, &self.subdivision_of) {
                let base = base.resolve(dir)?;
                subdivision = Some(Subdivision::from_table(base.complex, complex.clone(), Some(simplices(table)?))?);
            }
        }
        Ok(LoadedComplex { complex, codec, subdivision })
    }
}

impl ComplexRef {
    pub fn inline(file: ComplexFile) -> Self {
        ComplexRef::Inline(Box::new(file))
    }

    pub fn resolve(&self, dir: &Path) -> Result<LoadedComplex> {
        match self {
            ComplexRef::Inline(file) => file.resolve(dir),
            ComplexRef::Path(p) => load_complex(&dir.join(p)),
        }
    }
}

/// A map given by name or as explicit images (aligned with the sorted domain
/// vertices).
///
/// Names: `pi1`, `pi2` (domain must be a product), `iota1[:v]`, `iota2[:v]`
/// (codomain must be a product, base vertex `v` defaults to 0), `identity`
/// and `constant:v`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MapSpec {
    Named(String),
    Images(Vec<VertexId>),
}

impl MapSpec {
    pub fn images_of(map: &SimplicialMap) -> Self {
        MapSpec::Images(map.images().to_vec())
    }

    pub fn resolve(&self, domain: &LoadedComplex, codomain: &LoadedComplex) -> Result<SimplicialMap> {
        let (d, c) = (domain.complex.clone(), codomain.complex.clone());
        let name = match self {
            MapSpec::Images(images) => return SimplicialMap::new(d, c, images.clone()),
            MapSpec::Named(name) => name.as_str(),
        };
        let (head, arg) = match name.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (name, None),
        };
        let vertex = |default: Option<VertexId>| -> Result<VertexId> {
            match arg {
                Some(a) => a.trim().parse().map_err(|_| Error::Format(format!("bad vertex in map name {name:?}"))),
                None => default.ok_or_else(|| Error::Format(format!("map name {name:?} needs a vertex"))),
            }
        };
        let needs = |loaded: &LoadedComplex, side: &str| {
            loaded
                .codec
                .ok_or_else(|| Error::Format(format!("map {name:?} needs a product {side} (product_of or codec)")))
        };
        match head {
            "pi1" | "pi2" => {
                let codec = needs(domain, "domain")?;
                let first = head == "pi1";
                SimplicialMap::from_fn(d, c, |v| {
                    let (i, j) = codec.decode(v);
                    if first {
                        i
                    } else {
                        j
                    }
                })
            }
            "iota1" | "iota2" => {
                let codec = needs(codomain, "codomain")?;
                let base = vertex(Some(0))?;
                let first = head == "iota1";
                SimplicialMap::from_fn(d, c, |v| if first { codec.encode(v, base) } else { codec.encode(base, v) })
            }
            "identity" => SimplicialMap::from_fn(d, c, |v| v),
            "constant" => {
                let target = vertex(None)?;
                SimplicialMap::constant(d, c, target)
            }
            _ => Err(Error::Format(format!("unknown map name {name:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainFile {
    pub domain: ComplexRef,
    pub codomain: ComplexRef,
    pub maps: Vec<Vec<VertexId>>,
}

impl ChainFile {
    pub fn from_chain(chain: &ContiguityChain, domain: ComplexRef, codomain: ComplexRef) -> Self {
        ChainFile {
            domain,
            codomain,
            maps: chain.maps().iter().map(|m| m.images().to_vec()).collect(),
        }
    }

    pub fn resolve(&self, dir: &Path) -> Result<(ContiguityChain, LoadedComplex)> {
        let domain = self.domain.resolve(dir)?;
        let codomain = self.codomain.resolve(dir)?;
        let maps = self
            .maps
            .iter()
            .map(|row| SimplicialMap::new(domain.complex.clone(), codomain.complex.clone(), row.clone()))
            .collect::<Result<Vec<_>>>()?;
        Ok((ContiguityChain::new(maps)?, domain))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartFile {
    pub facets: Vec<Vec<VertexId>>,
    /// Chain rows, aligned with the sorted vertices of the part.
    pub maps: Vec<Vec<VertexId>>,
}

/// A pair of maps and, optionally, a cover of their domain by contiguity
/// subcomplexes. With no parts it is the input of a distance estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverFile {
    pub domain: ComplexRef,
    pub codomain: ComplexRef,
    pub start: MapSpec,
    pub end: MapSpec,
    #[serde(default)]
    pub parts: Vec<PartFile>,
}

/// The resolved content of a [`CoverFile`].
#[derive(Clone, Debug)]
pub struct LoadedCover {
    pub domain: LoadedComplex,
    pub codomain: LoadedComplex,
    pub start: SimplicialMap,
    pub end: SimplicialMap,
    pub parts: Vec<CoverPart>,
}

impl LoadedCover {
    pub fn certificate(self) -> CoverCertificate {
        CoverCertificate { start: self.start, end: self.end, parts: self.parts }
    }
}

impl CoverFile {
    pub fn from_certificate(
        cert: &CoverCertificate,
        domain: ComplexRef,
        codomain: ComplexRef,
        start: MapSpec,
        end: MapSpec,
    ) -> Self {
        let parts = cert
            .parts
            .iter()
            .map(|p| PartFile {
                facets: p.facets.iter().map(|f| f.vertices().to_vec()).collect(),
                maps: p.chain.maps().iter().map(|m| m.images().to_vec()).collect(),
            })
            .collect();
        CoverFile { domain, codomain, start, end, parts }
    }

    /// Parts are built as given; whether their facets belong to the domain
    /// is left to verification.
    pub fn resolve(&self, dir: &Path) -> Result<LoadedCover> {
        let domain = self.domain.resolve(dir)?;
        let codomain = self.codomain.resolve(dir)?;
        let start = self.start.resolve(&domain, &codomain)?;
        let end = self.end.resolve(&domain, &codomain)?;
        let parts = self
            .parts
            .iter()
            .enumerate()
            .map(|(i, part)| {
                let facets = simplices(&part.facets)?;
                if facets.is_empty() {
                    return Err(Error::Format(format!("part {i} has no facets")));
                }
                let sub = Arc::new(Complex::from_simplices(facets.iter().cloned())?);
                let maps = part
                    .maps
                    .iter()
                    .map(|row| SimplicialMap::new(sub.clone(), codomain.complex.clone(), row.clone()))
                    .collect::<Result<Vec<_>>>()
                    .map_err(|e| Error::Format(format!("part {i}: {e}")))?;
                let chain = ContiguityChain::new(maps).map_err(|e| Error::Format(format!("part {i}: {e}")))?;
                Ok(CoverPart { facets, chain })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LoadedCover { domain, codomain, start, end, parts })
    }
}

fn parent(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

/// Pretty-printed, newline-terminated.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

pub fn load_complex(path: &Path) -> Result<LoadedComplex> {
    read_json::<ComplexFile>(path)?.resolve(&parent(path))
}

pub fn load_chain(path: &Path) -> Result<(ContiguityChain, LoadedComplex)> {
    read_json::<ChainFile>(path)?.resolve(&parent(path))
}

pub fn load_cover(path: &Path) -> Result<LoadedCover> {
    read_json::<CoverFile>(path)?.resolve(&parent(path))
}

/// Tab-separated table of a chain: one row per map, one column per domain
/// vertex, headed `(i, j)` when the domain is a product.
pub fn chain_table(chain: &ContiguityChain, codec: Option<ProductVertexCodec>) -> String {
    let mut out = String::from("map");
    for &v in chain.domain().vertices() {
        match codec {
            Some(c) => {
                let (i, j) = c.decode(v);
                write!(out, "\t({i}, {j})").unwrap();
            }
            None => write!(out, "\t{v}").unwrap(),
        }
    }
    out.push('\n');
    for (k, map) in chain.maps().iter().enumerate() {
        write!(out, "phi_{k}").unwrap();
        for w in map.images() {
            write!(out, "\t{w}").unwrap();
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle_file() -> ComplexFile {
        ComplexFile { vertex_count: Some(3), facets: Some(vec![vec![0, 1], vec![1, 2], vec![0, 2]]), ..Default::default() }
    }

    #[test]
    fn complex_round_trip() {
        let k = circle_file().resolve(Path::new(".")).unwrap().complex;
        let json = serde_json::to_string(&ComplexFile::from_complex(&k)).unwrap();
        assert_eq!(json, r#"{"vertex_count":3,"facets":[[0,1],[0,2],[1,2]]}"#);
        let sparse = Complex::from_simplices([Simplex::new([0, 2]).unwrap()]).unwrap();
        let file = ComplexFile::from_complex(&sparse);
        assert_eq!(file.vertices, Some(vec![0, 2]));
        assert_eq!(*file.resolve(Path::new(".")).unwrap().complex, sparse);
    }

    #[test]
    fn inline_product_and_named_maps() {
        let circle = ComplexRef::inline(circle_file());
        let product = ComplexFile { product_of: Some(vec![circle.clone(), circle.clone()]), ..Default::default() };
        let loaded = product.resolve(Path::new(".")).unwrap();
        assert_eq!(loaded.complex.num_facets(), 18);
        let base = circle.resolve(Path::new(".")).unwrap();
        let pi2 = MapSpec::Named("pi2".into()).resolve(&loaded, &base).unwrap();
        assert_eq!(pi2.images(), &[0, 1, 2, 0, 1, 2, 0, 1, 2]);
        let i1 = MapSpec::Named("iota1:2".into()).resolve(&base, &loaded).unwrap();
        assert_eq!(i1.images(), &[2, 5, 8]);
        assert!(MapSpec::Named("pi1".into()).resolve(&base, &base).is_err());
        assert!(MapSpec::Named("constant".into()).resolve(&base, &base).is_err());
        let c = MapSpec::Named("constant:1".into()).resolve(&base, &base).unwrap();
        assert_eq!(c.images(), &[1, 1, 1]);
    }

    #[test]
    fn inconsistent_counts_are_rejected() {
        let mut f = circle_file();
        f.vertex_count = Some(4);
        assert!(f.resolve(Path::new(".")).is_err());
        let gap = ComplexFile { facets: Some(vec![vec![0, 2]]), ..Default::default() };
        assert!(matches!(gap.resolve(Path::new(".")), Err(Error::IsolatedLabel(1))));
    }

    #[test]
    fn table_layout() {
        let k = Arc::new(Complex::from_facet_lists([vec![0, 1]]).unwrap());
        let id = SimplicialMap::identity(k.clone());
        let c = SimplicialMap::constant(k.clone(), k, 0).unwrap();
        let chain = ContiguityChain::new(vec![id, c]).unwrap();
        assert_eq!(chain_table(&chain, None), "map\t0\t1\nphi_0\t0\t1\nphi_1\t0\t0\n");
        let header = chain_table(&chain, Some(ProductVertexCodec::new(1, 2)));
        assert!(header.starts_with("map\t(0, 0)\t(0, 1)\n"));
    }
}
