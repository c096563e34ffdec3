//! Randomized local search for contiguity chains and greedy chain reduction.
//!
//! The walk moves through simplicial maps `J → K` one vertex at a time. A move
//! is kept when it is contiguous to the current map and either lowers the
//! distance to the goal or wins a coin flip with probability `r`. Random draws
//! happen in a fixed order (vertex, value, coin) so a seed reproduces a run.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::complex::{Complex, SkeletonDistances, VertexId};
use crate::contiguity::{self, ContiguityChain};
use crate::error::{Error, Result};
use crate::map::SimplicialMap;

/// The deterministic generator used throughout the crate.
pub type SearchRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SearchRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform index below `n`, drawn as a `u32` so that streams agree across
/// pointer widths.
pub(crate) fn pick<R: Rng + ?Sized>(rng: &mut R, n: usize) -> usize {
    debug_assert!(n > 0 && n <= u32::MAX as usize);
    rng.gen_range(0..n as u32) as usize
}

/// How a proposal is generated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Change a random vertex to a uniformly random other codomain vertex.
    Basic,
    /// Pick uniformly among the single-vertex changes contiguous to the
    /// current map; an empty list burns the iteration.
    #[default]
    Neighborhood,
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "basic" => Ok(Variant::Basic),
            "neighborhood" | "neighbourhood" => Ok(Variant::Neighborhood),
            other => Err(Error::InvalidParameter(format!("unknown search variant {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchParams {
    /// Iteration budget `M` of one local search.
    #[serde(rename = "M")]
    pub max_iterations: usize,
    /// Probability `r` of accepting a non-improving move.
    #[serde(rename = "r")]
    pub acceptance: f64,
    pub variant: Variant,
    pub seed: u64,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams { max_iterations: 1000, acceptance: 0.1, variant: Variant::Neighborhood, seed: 0 }
    }
}

impl SearchParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("M must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.acceptance) {
            return Err(Error::InvalidParameter(format!(
                "r must lie in [0, 1], got {}",
                self.acceptance
            )));
        }
        Ok(())
    }
}

/// One iteration of a walk, for tracing.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepRecord {
    pub iteration: usize,
    /// Domain vertex whose image was changed.
    pub vertex: VertexId,
    /// Proposed new image; `None` when no proposal was available.
    pub proposal: Option<VertexId>,
    pub accepted: bool,
    /// Distance to the goal after this iteration.
    pub distance: u64,
}

/// Search machinery over fixed domain and codomain, working on raw image
/// vectors aligned with `domain.vertices()`.
pub(crate) struct Walker<'a> {
    pub domain: &'a Complex,
    pub codomain: &'a Complex,
    pub dist: &'a SkeletonDistances,
}

/// Bitset contiguity test on raw image vectors.
pub(crate) fn fast_contiguous(
    domain: &Complex,
    codomain: &Complex,
    f: &[VertexId],
    g: &[VertexId],
) -> bool {
    let mut buf = Vec::with_capacity(8);
    domain.local_facets().iter().all(|facet| {
        buf.clear();
        for &p in facet {
            buf.push(f[p as usize]);
            buf.push(g[p as usize]);
        }
        codomain.spans_simplex(&buf)
    })
}

/// Greedy far-jump compression: from the current term, jump to the last
/// term contiguous to it.
pub(crate) fn reduce_rows(
    domain: &Complex,
    codomain: &Complex,
    chain: &[Vec<VertexId>],
) -> Vec<Vec<VertexId>> {
    let c = chain.len() - 1;
    let mut out = vec![chain[0].clone()];
    let mut j = 0;
    while j != c {
        let mut i = c;
        while i > j + 1 && !fast_contiguous(domain, codomain, &chain[j], &chain[i]) {
            i -= 1;
        }
        out.push(chain[i].clone());
        j = i;
    }
    out
}

impl Walker<'_> {
    pub fn contiguous(&self, f: &[VertexId], g: &[VertexId]) -> bool {
        fast_contiguous(self.domain, self.codomain, f, g)
    }

    pub fn is_simplicial(&self, f: &[VertexId]) -> bool {
        self.contiguous(f, f)
    }

    /// Whether changing `cur` at position `w` to `value` stays contiguous to
    /// `cur`. Only facets through `w` can fail, and `cur` is simplicial.
    fn move_ok(&self, cur: &[VertexId], w: usize, value: VertexId, buf: &mut Vec<VertexId>) -> bool {
        self.domain.star(w).iter().all(|&fi| {
            buf.clear();
            buf.extend(self.domain.local_facets()[fi as usize].iter().map(|&p| cur[p as usize]));
            buf.push(value);
            self.codomain.spans_simplex(buf)
        })
    }

    pub fn candidates(&self, cur: &[VertexId], w: usize) -> Vec<VertexId> {
        let mut buf = Vec::with_capacity(8);
        self.codomain
            .vertices()
            .iter()
            .copied()
            .filter(|&c| c != cur[w] && self.move_ok(cur, w, c, &mut buf))
            .collect()
    }

    fn d(&self, a: VertexId, b: VertexId) -> u64 {
        u64::from(self.dist.at(self.dist.pos(a), self.dist.pos(b)))
    }

    pub fn distance(&self, f: &[VertexId], g: &[VertexId]) -> u64 {
        f.iter().zip(g).map(|(&a, &b)| self.d(a, b)).sum()
    }

    /// Runs the random walk; `from` and `to` must be simplicial.
    pub fn walk<R: Rng + ?Sized>(
        &self,
        from: &[VertexId],
        to: &[VertexId],
        params: &SearchParams,
        rng: &mut R,
        observer: &mut dyn FnMut(&StepRecord),
    ) -> Option<Vec<Vec<VertexId>>> {
        if self.contiguous(from, to) {
            return Some(vec![from.to_vec(), to.to_vec()]);
        }
        let targets = self.codomain.vertices();
        let n = from.len();
        let mut cur = from.to_vec();
        let mut chain = vec![cur.clone()];
        let mut distance = self.distance(&cur, to);
        let mut mismatched = cur.iter().zip(to).filter(|(a, b)| a != b).count();
        let mut buf = Vec::with_capacity(8);

        for iteration in 1..=params.max_iterations {
            let w = pick(rng, n);
            let proposal = match params.variant {
                Variant::Basic => {
                    if targets.len() < 2 {
                        None
                    } else {
                        let here = self.codomain.position(cur[w]).expect("image in codomain");
                        let mut idx = pick(rng, targets.len() - 1);
                        if idx >= here {
                            idx += 1;
                        }
                        Some(targets[idx])
                    }
                }
                Variant::Neighborhood => {
                    let list = self.candidates(&cur, w);
                    (!list.is_empty()).then(|| list[pick(rng, list.len())])
                }
            };
            let Some(value) = proposal else {
                observer(&StepRecord {
                    iteration,
                    vertex: self.domain.vertices()[w],
                    proposal: None,
                    accepted: false,
                    distance,
                });
                continue;
            };
            let p: f64 = rng.gen();
            let new_distance = distance - self.d(cur[w], to[w]) + self.d(value, to[w]);
            let contiguous = match params.variant {
                Variant::Basic => self.move_ok(&cur, w, value, &mut buf),
                Variant::Neighborhood => true,
            };
            let accepted = contiguous && (p < params.acceptance || new_distance < distance);
            if accepted {
                if cur[w] == to[w] {
                    mismatched += 1;
                } else if value == to[w] {
                    mismatched -= 1;
                }
                cur[w] = value;
                distance = new_distance;
                chain.push(cur.clone());
            }
            observer(&StepRecord {
                iteration,
                vertex: self.domain.vertices()[w],
                proposal: Some(value),
                accepted,
                distance,
            });
            if accepted && mismatched == 0 {
                return Some(chain);
            }
        }
        None
    }
}

fn check_pair(from: &SimplicialMap, to: &SimplicialMap) -> Result<()> {
    if !from.same_shape(to) {
        return Err(Error::Mismatched("search endpoints differ in domain or codomain".into()));
    }
    Ok(())
}

fn trace_observer() -> impl FnMut(&StepRecord) {
    let enabled = log::log_enabled!(target: "contig::search", log::Level::Trace);
    move |rec: &StepRecord| {
        if enabled {
            if let Ok(line) = serde_json::to_string(rec) {
                log::trace!(target: "contig::search", "{line}");
            }
        }
    }
}

/// Looks for a contiguity chain from `from` to `to`. Returns `Ok(None)` when
/// the walk does not reach `to` within `M` iterations; partial progress is
/// discarded. The chain is returned unreduced.
pub fn local_search<R: Rng + ?Sized>(
    from: &SimplicialMap,
    to: &SimplicialMap,
    params: &SearchParams,
    rng: &mut R,
) -> Result<Option<ContiguityChain>> {
    local_search_observed(from, to, params, rng, &mut trace_observer())
}

/// [`local_search`] with a callback invoked after every iteration.
pub fn local_search_observed<R: Rng + ?Sized>(
    from: &SimplicialMap,
    to: &SimplicialMap,
    params: &SearchParams,
    rng: &mut R,
    observer: &mut dyn FnMut(&StepRecord),
) -> Result<Option<ContiguityChain>> {
    params.validate()?;
    check_pair(from, to)?;
    let dist = SkeletonDistances::new(from.codomain())?;
    let walker = Walker { domain: from.domain(), codomain: from.codomain(), dist: &dist };
    for (name, m) in [("start", from), ("goal", to)] {
        if !walker.is_simplicial(m.images()) {
            return Err(Error::NotSimplicial(format!("{name} map {m}")));
        }
    }
    Ok(walker
        .walk(from.images(), to.images(), params, rng, observer)
        .map(|rows| ContiguityChain::from_images(from.domain().clone(), from.codomain().clone(), rows)))
}

/// All maps that agree with `phi` off the domain vertex `w` and are
/// contiguous to `phi`. May be empty.
pub fn candidate_moves(phi: &SimplicialMap, w: VertexId) -> Result<Vec<SimplicialMap>> {
    let pos = phi
        .domain()
        .position(w)
        .ok_or(Error::VertexOutOfRange { vertex: w, count: phi.domain().vertex_count() })?;
    let dist = SkeletonDistances::new(phi.codomain())?;
    let walker = Walker { domain: phi.domain(), codomain: phi.codomain(), dist: &dist };
    if !walker.is_simplicial(phi.images()) {
        return Err(Error::NotSimplicial(phi.to_string()));
    }
    Ok(walker
        .candidates(phi.images(), pos)
        .into_iter()
        .map(|c| {
            let mut images = phi.images().to_vec();
            images[pos] = c;
            SimplicialMap::from_parts_unchecked(phi.domain().clone(), phi.codomain().clone(), images)
        })
        .collect())
}

/// Shortens a valid chain by greedy far jumps. The result has the same
/// endpoints and is never longer.
pub fn reduce(chain: &ContiguityChain) -> Result<ContiguityChain> {
    let verdict = contiguity::verify_chain(chain, chain.first(), chain.last());
    if !verdict.is_ok() {
        return Err(Error::InvalidChain(verdict.to_string()));
    }
    Ok(reduce_unchecked(chain))
}

pub(crate) fn reduce_unchecked(chain: &ContiguityChain) -> ContiguityChain {
    let rows = reduce_rows(chain.domain(), chain.codomain(), &chain.image_rows());
    ContiguityChain::from_images(chain.domain().clone(), chain.codomain().clone(), rows)
}

/// Applies [`reduce`] until the length stops changing. Returns the final
/// chain and the number of rounds that shortened it.
pub fn reduce_to_fixpoint(chain: &ContiguityChain) -> Result<(ContiguityChain, usize)> {
    let mut current = reduce(chain)?;
    let mut rounds = usize::from(current.length() < chain.length());
    loop {
        let next = reduce_unchecked(&current);
        if next.length() >= current.length() {
            return Ok((current, rounds));
        }
        current = next;
        rounds += 1;
    }
}
