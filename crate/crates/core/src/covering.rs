//! Coverings of a domain complex by contiguity subcomplexes.
//!
//! A cover is handled as a partition of the facets of the domain `L`; each
//! part generates a subcomplex on which the two maps are joined by a reduced
//! contiguity chain. Facet sets are kept as sorted indices into
//! `L.facets()`.
//!
//! Mapping of the optimization loop onto [`Engine::optimize`]:
//!
//! 1. sort parts by decreasing size (stable, ties by facet indices);
//! 2. grow a random contiguity subcomplex inside `P_j ∪ … ∪ P_p` and keep
//!    it if it is at least as large as `P_j`;
//! 3. extend it with facets of `P_{j-1} ∪ … ∪ P_p` (just `P_j ∪ … ∪ P_p`
//!    when `j = 0`) and, when `j > 0`, keep the larger of the result and
//!    `P_{j-1}`;
//! 4. rebuild as `P_0, …, P_{j-2}, Q, P_{j-1} − Q, …, P_p − Q`, dropping
//!    empty parts;
//! 5. revert if the number of parts grew, then advance `j`, wrapping to 0.
//!
//! Ties between equally large sets keep the newly grown one.

use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::complex::{Complex, SkeletonDistances, VertexId};
use crate::contiguity::{self, ContiguityChain, CoverCertificate, CoverPart};
use crate::error::{Error, Result};
use crate::map::SimplicialMap;
use crate::search::{self, pick, SearchParams, StepRecord, Walker};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverParams {
    #[serde(flatten)]
    pub search: SearchParams,
    /// Maximum number of optimization rounds `N`.
    #[serde(rename = "N")]
    pub max_rounds: usize,
    /// Stop optimizing once the cover has at most `t` parts.
    #[serde(rename = "t")]
    pub target_parts: usize,
    /// Wall-clock budget for a whole run, in milliseconds.
    #[serde(default)]
    pub time_budget_ms: Option<u64>,
    /// Seed each enlargement search with the previous chain.
    #[serde(default)]
    pub warm_start: bool,
}

impl Default for CoverParams {
    fn default() -> Self {
        CoverParams {
            search: SearchParams::default(),
            max_rounds: 500,
            target_parts: 1,
            time_budget_ms: None,
            warm_start: false,
        }
    }
}

impl CoverParams {
    pub fn validate(&self) -> Result<()> {
        self.search.validate()?;
        if self.target_parts == 0 {
            return Err(Error::InvalidParameter("t must be at least 1".into()));
        }
        Ok(())
    }

    fn deadline(&self, started: Instant) -> Option<Instant> {
        self.time_budget_ms.map(|ms| started + Duration::from_millis(ms))
    }
}

/// A contiguity subcomplex under construction: facet indices into the
/// ambient domain and a reduced chain on the subcomplex they generate.
#[derive(Clone, Debug, PartialEq)]
pub struct GrowState {
    facets: Vec<usize>,
    chain: ContiguityChain,
}

impl GrowState {
    /// Sorted facet indices into the domain of the source maps.
    pub fn facets(&self) -> &[usize] {
        &self.facets
    }

    pub fn len(&self) -> usize {
        self.facets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facets.is_empty()
    }

    pub fn chain(&self) -> &ContiguityChain {
        &self.chain
    }

    pub fn subcomplex(&self) -> &Arc<Complex> {
        self.chain.domain()
    }

    fn into_part(self) -> CoverPart {
        CoverPart { facets: self.chain.domain().facets().to_vec(), chain: self.chain }
    }
}

/// Summary of one optimized covering run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub seed: u64,
    pub params: CoverParams,
    /// Optimization rounds actually performed.
    pub iterations_used: usize,
    /// Part sizes after the initial covering and after every round.
    pub part_sizes_history: Vec<Vec<usize>>,
    pub elapsed_ms: u64,
    /// Whether the time budget ran out; remaining facets were then covered
    /// by single-facet parts.
    pub budget_exhausted: bool,
}

#[derive(Clone, Debug)]
pub struct CoverRun {
    pub certificate: CoverCertificate,
    pub report: RunReport,
}

struct Engine<'a, R: ?Sized> {
    domain: &'a Arc<Complex>,
    codomain: &'a Arc<Complex>,
    start: &'a [VertexId],
    end: &'a [VertexId],
    dist: SkeletonDistances,
    search: &'a SearchParams,
    warm_start: bool,
    deadline: Option<Instant>,
    exhausted: bool,
    rng: &'a mut R,
}

fn no_trace(_: &StepRecord) {}

fn sorted_union<'a>(parts: impl IntoIterator<Item = &'a GrowState>) -> Vec<usize> {
    let mut all: Vec<usize> = parts.into_iter().flat_map(|p| p.facets.iter().copied()).collect();
    all.sort_unstable();
    all
}

fn difference(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().copied().filter(|x| b.binary_search(x).is_err()).collect()
}

impl<'a, R: Rng + ?Sized> Engine<'a, R> {
    fn new(
        psi: &'a SimplicialMap,
        psi_prime: &'a SimplicialMap,
        params: &'a CoverParams,
        deadline: Option<Instant>,
        rng: &'a mut R,
    ) -> Result<Self> {
        params.validate()?;
        if !psi.same_shape(psi_prime) {
            return Err(Error::Mismatched("covering needs maps with a shared domain and codomain".into()));
        }
        let dist = SkeletonDistances::new(psi.codomain())?;
        let engine = Engine {
            domain: psi.domain(),
            codomain: psi.codomain(),
            start: psi.images(),
            end: psi_prime.images(),
            dist,
            search: &params.search,
            warm_start: params.warm_start,
            deadline,
            exhausted: false,
            rng,
        };
        let walker = engine.walker(psi.domain());
        for (name, m) in [("start", psi), ("end", psi_prime)] {
            if !walker.is_simplicial(m.images()) {
                return Err(Error::NotSimplicial(format!("{name} map {m}")));
            }
        }
        Ok(engine)
    }

    fn walker<'b>(&'b self, domain: &'b Complex) -> Walker<'b> {
        Walker { domain, codomain: self.codomain, dist: &self.dist }
    }

    fn expired(&mut self) -> bool {
        if self.deadline.is_some_and(|d| Instant::now() >= d) {
            self.exhausted = true;
        }
        self.exhausted
    }

    fn subcomplex(&self, facets: &[usize]) -> Arc<Complex> {
        Arc::new(self.domain.generated_by(facets))
    }

    fn restrict(&self, sub: &Complex, images: &[VertexId]) -> Vec<VertexId> {
        sub.vertices()
            .iter()
            .map(|&v| images[self.domain.position(v).expect("subcomplex vertex")])
            .collect()
    }

    fn finish(&self, facets: Vec<usize>, sub: Arc<Complex>, rows: Vec<Vec<VertexId>>) -> GrowState {
        let reduced = search::reduce_rows(&sub, self.codomain, &rows);
        GrowState { facets, chain: ContiguityChain::from_images(sub, self.codomain.clone(), reduced) }
    }

    /// The subcomplex generated by one facet, with an explicit chain: the
    /// start map, constant maps along a shortest edge path between the images
    /// of the first vertex, then the end map.
    fn seed(&self, facet: usize) -> GrowState {
        let facets = vec![facet];
        let sub = self.subcomplex(&facets);
        let from = self.restrict(&sub, self.start);
        let to = self.restrict(&sub, self.end);
        let walker = self.walker(&sub);
        let mut rows = vec![from.clone()];
        if !walker.contiguous(&from, &to) {
            let goal = to[0];
            let mut here = from[0];
            rows.push(vec![here; from.len()]);
            while here != goal {
                let remaining = self.dist.get(here, goal).expect("codomain vertex");
                here = *self
                    .codomain
                    .vertices()
                    .iter()
                    .find(|&&u| {
                        self.dist.get(here, u) == Some(1) && self.dist.get(u, goal) == Some(remaining - 1)
                    })
                    .expect("connected codomain has a geodesic step");
                rows.push(vec![here; from.len()]);
            }
        }
        rows.push(to);
        self.finish(facets, sub, rows)
    }

    /// Extends the old chain by the start map on new vertices and searches
    /// only for the remaining stretch.
    fn warm(
        &mut self,
        state: &GrowState,
        sub: &Complex,
        from: &[VertexId],
        to: &[VertexId],
    ) -> Option<Vec<Vec<VertexId>>> {
        let mut rows: Vec<Vec<VertexId>> = state
            .chain
            .maps()
            .iter()
            .map(|m| {
                sub.vertices()
                    .iter()
                    .zip(from)
                    .map(|(&v, &fallback)| m.image(v).unwrap_or(fallback))
                    .collect()
            })
            .collect();
        let walker = Walker { domain: sub, codomain: self.codomain, dist: &self.dist };
        let last = rows.last().expect("chains are nonempty").clone();
        if !walker.is_simplicial(&last) || rows.windows(2).any(|w| !walker.contiguous(&w[0], &w[1])) {
            return None;
        }
        let tail = walker.walk(&last, to, self.search, &mut *self.rng, &mut no_trace)?;
        rows.extend(tail.into_iter().skip(1));
        Some(rows)
    }

    fn try_extend(&mut self, state: &GrowState, facet: usize) -> Option<GrowState> {
        let mut facets = state.facets.clone();
        let at = facets.binary_search(&facet).unwrap_err();
        facets.insert(at, facet);
        let sub = self.subcomplex(&facets);
        let from = self.restrict(&sub, self.start);
        let to = self.restrict(&sub, self.end);
        if self.warm_start {
            if let Some(rows) = self.warm(state, &sub, &from, &to) {
                return Some(self.finish(facets, sub, rows));
            }
        }
        let walker = Walker { domain: &sub, codomain: self.codomain, dist: &self.dist };
        let rows = walker.walk(&from, &to, self.search, &mut *self.rng, &mut no_trace)?;
        Some(self.finish(facets, sub, rows))
    }

    /// Tries the facets of `ambient` outside `state` in random order and
    /// returns the first successful enlargement.
    fn add_facet(&mut self, state: &GrowState, ambient: &[usize]) -> Option<GrowState> {
        let mut open = difference(ambient, &state.facets);
        while !open.is_empty() {
            if self.expired() {
                return None;
            }
            let facet = open.remove(pick(self.rng, open.len()));
            if let Some(next) = self.try_extend(state, facet) {
                return Some(next);
            }
        }
        None
    }

    fn grow(&mut self, mut state: GrowState, ambient: &[usize]) -> GrowState {
        for _ in 0..ambient.len() {
            match self.add_facet(&state, ambient) {
                Some(next) => state = next,
                None => break,
            }
        }
        state
    }

    fn rcc(&mut self, ambient: &[usize]) -> GrowState {
        let first = ambient[pick(self.rng, ambient.len())];
        let seed = self.seed(first);
        self.grow(seed, ambient)
    }

    fn covering(&mut self) -> Vec<GrowState> {
        let mut uncovered: Vec<usize> = (0..self.domain.num_facets()).collect();
        let mut parts = Vec::new();
        while !uncovered.is_empty() {
            let grown = self.rcc(&uncovered);
            let fresh: Vec<usize> =
                grown.facets.iter().copied().filter(|f| uncovered.binary_search(f).is_ok()).collect();
            uncovered = difference(&uncovered, &fresh);
            let part = if fresh.len() == grown.facets.len() {
                grown
            } else {
                self.shrink(&grown, fresh)
            };
            parts.push(part);
        }
        parts
    }

    /// Restriction of `part` to the subcomplex generated by `keep`.
    fn shrink(&self, part: &GrowState, keep: Vec<usize>) -> GrowState {
        let sub = self.subcomplex(&keep);
        let rows = part
            .chain
            .restrict(&sub)
            .expect("generated by a subset of the facets")
            .image_rows();
        self.finish(keep, sub, rows)
    }

    fn subtract(&self, part: &GrowState, removed: &[usize]) -> Option<GrowState> {
        let keep = difference(&part.facets, removed);
        if keep.is_empty() {
            None
        } else if keep.len() == part.facets.len() {
            Some(part.clone())
        } else {
            Some(self.shrink(part, keep))
        }
    }

    fn optimize(
        &mut self,
        mut parts: Vec<GrowState>,
        max_rounds: usize,
        target: usize,
        history: &mut Vec<Vec<usize>>,
    ) -> (Vec<GrowState>, usize) {
        let mut i = 0;
        let mut j = 0;
        while i < max_rounds && parts.len() > target && !self.expired() {
            i += 1;
            let previous = parts.clone();
            parts.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.facets.cmp(&b.facets)));

            let inner = sorted_union(&parts[j..]);
            let grown = self.rcc(&inner);
            let p = if grown.len() >= parts[j].len() { grown } else { parts[j].clone() };

            let lo = j.saturating_sub(1);
            let outer = sorted_union(&parts[lo..]);
            let mut q = self.grow(p, &outer);
            if j > 0 && q.len() < parts[j - 1].len() {
                q = parts[j - 1].clone();
            }

            let mut next: Vec<GrowState> = parts[..lo].to_vec();
            let rest: Vec<GrowState> =
                parts[lo..].iter().filter_map(|part| self.subtract(part, &q.facets)).collect();
            next.push(q);
            next.extend(rest);
            debug_assert_eq!(
                sorted_union(&next),
                (0..self.domain.num_facets()).collect::<Vec<_>>(),
                "rebuilt partition must stay exact"
            );

            parts = if previous.len() < next.len() { previous } else { next };
            j += 1;
            if j > parts.len() - 1 {
                j = 0;
            }
            history.push(parts.iter().map(GrowState::len).collect());
        }
        (parts, i)
    }

    fn certificate(&self, psi: &SimplicialMap, psi_prime: &SimplicialMap, parts: Vec<GrowState>) -> CoverCertificate {
        CoverCertificate {
            start: psi.clone(),
            end: psi_prime.clone(),
            parts: parts.into_iter().map(GrowState::into_part).collect(),
        }
    }
}

/// Grows a contiguity subcomplex consisting of the single facet at `index`.
/// Its chain is built explicitly, no search is involved.
pub fn single_facet_state(
    index: usize,
    psi: &SimplicialMap,
    psi_prime: &SimplicialMap,
    params: &CoverParams,
) -> Result<GrowState> {
    if index >= psi.domain().num_facets() {
        return Err(Error::InvalidParameter(format!("facet index {index} out of range")));
    }
    let mut rng = search::seeded_rng(0);
    let engine = Engine::new(psi, psi_prime, params, None, &mut rng)?;
    Ok(engine.seed(index))
}

fn check_state(state: &GrowState, psi: &SimplicialMap, psi_prime: &SimplicialMap) -> Result<()> {
    let expected = psi.domain().generated_by(&state.facets);
    if state.facets.iter().any(|&f| f >= psi.domain().num_facets()) || **state.chain.domain() != expected {
        return Err(Error::InvalidCertificate("state facets do not match its chain domain".into()));
    }
    let sub = state.chain.domain();
    let verdict = contiguity::verify_chain(&state.chain, &psi.restrict(sub)?, &psi_prime.restrict(sub)?);
    if !verdict.is_ok() {
        return Err(Error::InvalidCertificate(verdict.to_string()));
    }
    Ok(())
}

/// Adds the first facet (in random order) whose addition still admits a
/// chain found by local search. Returns a copy of `state` if none does.
pub fn add_facet<R: Rng + ?Sized>(
    state: &GrowState,
    psi: &SimplicialMap,
    psi_prime: &SimplicialMap,
    params: &CoverParams,
    rng: &mut R,
) -> Result<GrowState> {
    let mut engine = Engine::new(psi, psi_prime, params, None, rng)?;
    let all: Vec<usize> = (0..psi.domain().num_facets()).collect();
    Ok(engine.add_facet(state, &all).unwrap_or_else(|| state.clone()))
}

/// Random contiguity subcomplex: a random facet grown by repeated
/// [`add_facet`] until no facet can be added.
pub fn rcc<R: Rng + ?Sized>(
    psi: &SimplicialMap,
    psi_prime: &SimplicialMap,
    params: &CoverParams,
    rng: &mut R,
) -> Result<GrowState> {
    let started = Instant::now();
    let mut engine = Engine::new(psi, psi_prime, params, params.deadline(started), rng)?;
    let all: Vec<usize> = (0..psi.domain().num_facets()).collect();
    Ok(engine.rcc(&all))
}

/// Same iteration as [`rcc`], starting from a given contiguity subcomplex.
pub fn add_facets<R: Rng + ?Sized>(
    start: GrowState,
    psi: &SimplicialMap,
    psi_prime: &SimplicialMap,
    params: &CoverParams,
    rng: &mut R,
) -> Result<GrowState> {
    check_state(&start, psi, psi_prime)?;
    let started = Instant::now();
    let mut engine = Engine::new(psi, psi_prime, params, params.deadline(started), rng)?;
    let all: Vec<usize> = (0..psi.domain().num_facets()).collect();
    Ok(engine.grow(start, &all))
}

/// Partitions the facets by repeatedly running [`rcc`] on the still uncovered
/// facets.
pub fn covering<R: Rng + ?Sized>(
    psi: &SimplicialMap,
    psi_prime: &SimplicialMap,
    params: &CoverParams,
    rng: &mut R,
) -> Result<CoverCertificate> {
    let started = Instant::now();
    let mut engine = Engine::new(psi, psi_prime, params, params.deadline(started), rng)?;
    let parts = engine.covering();
    Ok(engine.certificate(psi, psi_prime, parts))
}

/// [`covering`] followed by up to `N` rounds of part merging, stopping early
/// once the cover has at most `t` parts.
pub fn optimized_covering<R: Rng + ?Sized>(
    psi: &SimplicialMap,
    psi_prime: &SimplicialMap,
    params: &CoverParams,
    rng: &mut R,
) -> Result<CoverRun> {
    let started = Instant::now();
    let mut engine = Engine::new(psi, psi_prime, params, params.deadline(started), rng)?;
    let initial = engine.covering();
    let mut history = vec![initial.iter().map(GrowState::len).collect()];
    let (parts, iterations_used) =
        engine.optimize(initial, params.max_rounds, params.target_parts, &mut history);
    let budget_exhausted = engine.exhausted;
    let certificate = engine.certificate(psi, psi_prime, parts);
    Ok(CoverRun {
        certificate,
        report: RunReport {
            seed: params.search.seed,
            params: params.clone(),
            iterations_used,
            part_sizes_history: history,
            elapsed_ms: started.elapsed().as_millis() as u64,
            budget_exhausted,
        },
    })
}
