//! Estimators built on the covering search, and evaluation of the
//! piecewise-linear motion planners a verified cover of `K × K` encodes.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::Serialize;

use crate::complex::{
    axial_inclusions, barycentric_subdivision, ordered_product, projections, subdivision_facet_count,
    Complex, ProductVertexCodec, Simplex, Subdivision, VertexId,
};
use crate::contiguity::{verify_cover, CoverCertificate};
use crate::covering::{optimized_covering, CoverParams, RunReport};
use crate::error::{Error, Result};
use crate::map::SimplicialMap;

/// Default cap on the facet count of a subdivision tower level.
pub const DEFAULT_MAX_FACETS: u128 = 200_000;

/// Result of one estimation run: the upper bound `parts − 1` and the cover
/// certifying it.
#[derive(Clone, Debug)]
pub struct DistanceReport {
    pub bound: usize,
    pub certificate: CoverCertificate,
    pub report: RunReport,
}

impl DistanceReport {
    pub fn parts(&self) -> usize {
        self.certificate.parts.len()
    }
}

/// A complex together with its ordered square.
#[derive(Clone, Debug)]
pub struct Square {
    pub base: Arc<Complex>,
    pub product: Arc<Complex>,
    pub codec: ProductVertexCodec,
}

impl Square {
    pub fn new(base: Arc<Complex>) -> Result<Self> {
        if !base.is_connected() {
            return Err(Error::Disconnected);
        }
        let (product, codec) = ordered_product(&base, &base);
        Ok(Square { base, product: Arc::new(product), codec })
    }

    pub fn projections(&self) -> (SimplicialMap, SimplicialMap) {
        projections(&self.product, self.codec, &self.base, &self.base).expect("factors of the square")
    }

    pub fn axial_inclusions(&self, base_vertex: VertexId) -> Result<(SimplicialMap, SimplicialMap)> {
        axial_inclusions(&self.base, &self.product, self.codec, base_vertex)
    }
}

pub fn estimate_distance<R: Rng + ?Sized>(
    phi: &SimplicialMap,
    phi_prime: &SimplicialMap,
    params: &CoverParams,
    rng: &mut R,
) -> Result<DistanceReport> {
    if !phi.codomain().is_connected() {
        return Err(Error::Disconnected);
    }
    let run = optimized_covering(phi, phi_prime, params, rng)?;
    Ok(DistanceReport {
        bound: run.certificate.parts.len() - 1,
        certificate: run.certificate,
        report: run.report,
    })
}

/// Upper bound for the simplicial complexity of `K`: the distance between
/// the two projections of `K × K`.
pub fn estimate_sc<R: Rng + ?Sized>(k: &Arc<Complex>, params: &CoverParams, rng: &mut R) -> Result<DistanceReport> {
    let square = Square::new(k.clone())?;
    let (pi1, pi2) = square.projections();
    estimate_distance(&pi1, &pi2, params, rng)
}

/// Upper bound for the LS-category of `K`: the distance between the axial
/// inclusions `K → K × K` at `base`.
pub fn estimate_cat<R: Rng + ?Sized>(
    k: &Arc<Complex>,
    base: VertexId,
    params: &CoverParams,
    rng: &mut R,
) -> Result<DistanceReport> {
    let square = Square::new(k.clone())?;
    let (i1, i2) = square.axial_inclusions(base)?;
    estimate_distance(&i1, &i2, params, rng)
}

/// Iterated barycentric subdivisions `Sd⁰(L), …, Sd^b(L)` with the
/// approximations of the identity between consecutive levels.
#[derive(Clone, Debug)]
pub struct SubdivisionTower {
    base: Arc<Complex>,
    levels: Vec<Subdivision>,
}

impl SubdivisionTower {
    /// Refuses to build a level with more than `max_facets` facets.
    pub fn build(base: Arc<Complex>, depth: usize, max_facets: u128) -> Result<Self> {
        let mut levels: Vec<Subdivision> = Vec::with_capacity(depth);
        let mut current = base.clone();
        for _ in 0..depth {
            let facets = subdivision_facet_count(&current);
            if facets > max_facets {
                return Err(Error::ResourceLimit { facets, limit: max_facets });
            }
            let sd = barycentric_subdivision(&current);
            current = sd.complex.clone();
            levels.push(sd);
        }
        Ok(SubdivisionTower { base, levels })
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// `Sd^level(L)`.
    pub fn complex(&self, level: usize) -> &Arc<Complex> {
        if level == 0 {
            &self.base
        } else {
            &self.levels[level - 1].complex
        }
    }

    /// The approximation `Sd^level(L) → Sd^{level−1}(L)`, for `level ≥ 1`.
    pub fn approximation(&self, level: usize) -> SimplicialMap {
        self.levels[level - 1].approximation_of_identity()
    }

    pub fn subdivision(&self, level: usize) -> &Subdivision {
        &self.levels[level - 1]
    }

    /// Composite `Sd^b(L) → L` of all approximations; the identity for `b = 0`.
    pub fn composite(&self) -> SimplicialMap {
        let mut map = SimplicialMap::identity(self.base.clone());
        for level in 1..=self.depth() {
            map = map.compose(&self.approximation(level)).expect("consecutive levels");
        }
        map
    }
}

/// Distance estimate between `φ∘ι` and `φ′∘ι`, where `ι` is the composite
/// approximation from the `b`-th barycentric subdivision of the domain.
pub fn estimate_distance_subdivided<R: Rng + ?Sized>(
    phi: &SimplicialMap,
    phi_prime: &SimplicialMap,
    depth: usize,
    max_facets: u128,
    params: &CoverParams,
    rng: &mut R,
) -> Result<DistanceReport> {
    if !phi.same_shape(phi_prime) {
        return Err(Error::Mismatched("maps must share domain and codomain".into()));
    }
    let tower = SubdivisionTower::build(phi.domain().clone(), depth, max_facets)?;
    let iota = tower.composite();
    estimate_distance(&phi.compose(&iota)?, &phi_prime.compose(&iota)?, params, rng)
}

/// A point of a geometric realization in barycentric coordinates: positive
/// exact weights on the vertices of its open carrier simplex, summing to 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BarycentricPoint {
    carrier: Simplex,
    weights: Vec<BigRational>,
}

impl BarycentricPoint {
    /// Pairs may come in any order; repeated vertices are merged.
    pub fn new(pairs: impl IntoIterator<Item = (VertexId, BigRational)>) -> Result<Self> {
        let mut pairs: Vec<(VertexId, BigRational)> = pairs.into_iter().collect();
        pairs.sort_by_key(|p| p.0);
        let mut merged: Vec<(VertexId, BigRational)> = Vec::with_capacity(pairs.len());
        for (v, w) in pairs {
            if !w.is_positive() {
                return Err(Error::InvalidPoint(format!("weight {w} on vertex {v} is not positive")));
            }
            match merged.last_mut() {
                Some((u, acc)) if *u == v => *acc += w,
                _ => merged.push((v, w)),
            }
        }
        if merged.is_empty() {
            return Err(Error::InvalidPoint("no vertices".into()));
        }
        let total: BigRational = merged.iter().map(|p| &p.1).sum();
        if !total.is_one() {
            return Err(Error::InvalidPoint(format!("weights sum to {total}, not 1")));
        }
        let (vertices, weights): (Vec<_>, Vec<_>) = merged.into_iter().unzip();
        Ok(BarycentricPoint { carrier: Simplex::new(vertices)?, weights })
    }

    pub fn vertex(v: VertexId) -> Self {
        BarycentricPoint { carrier: Simplex::vertex(v), weights: vec![BigRational::one()] }
    }

    pub fn carrier(&self) -> &Simplex {
        &self.carrier
    }

    /// Weights aligned with the (sorted) carrier vertices.
    pub fn weights(&self) -> &[BigRational] {
        &self.weights
    }

    pub fn weight_sum(&self) -> BigRational {
        self.weights.iter().sum()
    }

    pub fn weights_f64(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w.to_f64().unwrap_or(f64::NAN)).collect()
    }

    pub fn as_vertex(&self) -> Option<VertexId> {
        (self.carrier.len() == 1).then(|| self.carrier.vertices()[0])
    }

    pub fn check_in(&self, k: &Complex) -> Result<()> {
        if k.is_simplex(&self.carrier) {
            Ok(())
        } else {
            Err(Error::InvalidPoint(format!("{} is not a simplex of the complex", self.carrier)))
        }
    }

    /// Image under the realization of a simplicial map: weights of vertices
    /// with a common image are added.
    pub fn push_forward(&self, map: &SimplicialMap) -> Result<BarycentricPoint> {
        let pairs = self
            .carrier
            .vertices()
            .iter()
            .zip(&self.weights)
            .map(|(&v, w)| {
                map.image(v)
                    .map(|img| (img, w.clone()))
                    .ok_or_else(|| Error::InvalidPoint(format!("vertex {v} is outside the map's domain")))
            })
            .collect::<Result<Vec<_>>>()?;
        BarycentricPoint::new(pairs)
    }
}

impl fmt::Display for BarycentricPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(v) = self.as_vertex() {
            return write!(f, "{v}");
        }
        for (i, (v, w)) in self.carrier.vertices().iter().zip(&self.weights).enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}:{w}")?;
        }
        Ok(())
    }
}

fn parse_weight(s: &str) -> Result<BigRational> {
    let bad = || Error::InvalidPoint(format!("cannot parse weight {s:?}"));
    if let Some((int, frac)) = s.split_once('.') {
        let digits = format!("{int}{frac}");
        let numer: BigInt = digits.parse().map_err(|_| bad())?;
        let denom = num_traits::pow(BigInt::from(10), frac.len());
        Ok(BigRational::new(numer, denom))
    } else {
        s.parse().map_err(|_| bad())
    }
}

/// Parses `v` (a vertex) or `v:w,v:w,…` with weights written as integers,
/// fractions `p/q` or decimals.
impl FromStr for BarycentricPoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if !s.contains(':') {
            let v = s.parse().map_err(|_| Error::InvalidPoint(format!("cannot parse vertex {s:?}")))?;
            return Ok(BarycentricPoint::vertex(v));
        }
        let pairs = s
            .split(',')
            .map(|item| {
                let (v, w) = item
                    .split_once(':')
                    .ok_or_else(|| Error::InvalidPoint(format!("expected vertex:weight, got {item:?}")))?;
                let v = v
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidPoint(format!("cannot parse vertex {v:?}")))?;
                Ok((v, parse_weight(w.trim())?))
            })
            .collect::<Result<Vec<_>>>()?;
        BarycentricPoint::new(pairs)
    }
}

/// The point `(a, b)` of the ordered product `K × L`, in barycentric
/// coordinates of the staircase simplex containing it.
///
/// Write the tail sums of the weights of `a` as `u_k = Σ_{i≥k} s_i` and those
/// of `b` as `v_l`. Walking from `(a_0, b_0)` to `(a_p, b_q)`, steps are taken
/// in decreasing order of these thresholds (the step in `b` first on ties,
/// which picks the lexicographically smallest chain); the weight of each
/// chain vertex is the drop between consecutive thresholds.
pub fn product_point(
    a: &BarycentricPoint,
    b: &BarycentricPoint,
    codec: &ProductVertexCodec,
) -> Result<BarycentricPoint> {
    let tails = |p: &BarycentricPoint| -> Vec<BigRational> {
        let mut acc = BigRational::zero();
        let mut out: Vec<BigRational> = p
            .weights
            .iter()
            .rev()
            .map(|w| {
                acc += w;
                acc.clone()
            })
            .collect();
        out.reverse();
        out
    };
    let (ta, tb) = (tails(a), tails(b));
    let (av, bv) = (a.carrier.vertices(), b.carrier.vertices());
    if av.iter().any(|&v| v as usize >= codec.left) || bv.iter().any(|&v| v as usize >= codec.right) {
        return Err(Error::InvalidPoint("point lies outside the product factors".into()));
    }
    let (mut i, mut j) = (0, 0);
    let mut level = BigRational::one();
    let mut pairs = Vec::with_capacity(av.len() + bv.len());
    loop {
        let next_a = ta.get(i + 1);
        let next_b = tb.get(j + 1);
        let (threshold, step_b) = match (next_a, next_b) {
            (None, None) => break,
            (Some(x), None) => (x.clone(), false),
            (None, Some(y)) => (y.clone(), true),
            (Some(x), Some(y)) => {
                if y >= x {
                    (y.clone(), true)
                } else {
                    (x.clone(), false)
                }
            }
        };
        let w = &level - &threshold;
        if w.is_positive() {
            pairs.push((codec.encode(av[i], bv[j]), w));
        }
        level = threshold;
        if step_b {
            j += 1;
        } else {
            i += 1;
        }
    }
    pairs.push((codec.encode(av[i], bv[j]), level));
    BarycentricPoint::new(pairs)
}

/// A verified cover of `K × K` for the projections: a system of
/// piecewise-linear motion planners on `K`.
#[derive(Clone, Debug)]
pub struct PlannerSystem {
    square: Square,
    certificate: CoverCertificate,
}

/// Waypoints flagged by one local planner; the first is `a`, the last is `b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlannedPath {
    pub part: usize,
    pub product_point: BarycentricPoint,
    pub waypoints: Vec<BarycentricPoint>,
}

#[derive(Serialize)]
struct WaypointJson {
    carrier: Vec<VertexId>,
    weights: Vec<f64>,
    exact: Vec<String>,
}

impl PlannedPath {
    /// Waypoints as `[{carrier, weights, exact}]`, with decimal and exact
    /// rational weights.
    pub fn to_json(&self) -> serde_json::Value {
        let items: Vec<WaypointJson> = self
            .waypoints
            .iter()
            .map(|p| WaypointJson {
                carrier: p.carrier.vertices().to_vec(),
                weights: p.weights_f64(),
                exact: p.weights.iter().map(|w| w.to_string()).collect(),
            })
            .collect();
        serde_json::to_value(items).expect("plain data")
    }
}

impl PlannerSystem {
    /// Checks that the certificate verifies and joins the two projections of
    /// the ordered square of its codomain.
    pub fn new(certificate: CoverCertificate) -> Result<Self> {
        let square = Square::new(certificate.start.codomain().clone())?;
        if **certificate.domain() != *square.product {
            return Err(Error::InvalidCertificate("cover domain is not the ordered square of its codomain".into()));
        }
        let (pi1, pi2) = square.projections();
        if certificate.start.images() != pi1.images() || certificate.end.images() != pi2.images() {
            return Err(Error::InvalidCertificate("cover does not join the two projections".into()));
        }
        let verdict = verify_cover(&certificate);
        if !verdict.is_ok() {
            return Err(Error::InvalidCertificate(verdict.to_string()));
        }
        Ok(PlannerSystem { square, certificate })
    }

    pub fn base(&self) -> &Arc<Complex> {
        &self.square.base
    }

    pub fn square(&self) -> &Square {
        &self.square
    }

    pub fn certificate(&self) -> &CoverCertificate {
        &self.certificate
    }

    fn covering_parts(&self, carrier: &Simplex) -> Vec<usize> {
        self.certificate
            .parts
            .iter()
            .enumerate()
            .filter(|(_, p)| p.chain.domain().is_simplex(carrier))
            .map(|(i, _)| i)
            .collect()
    }
}

/// Lowest-index part whose subcomplex contains `carrier`.
pub fn locate_in_part(sys: &PlannerSystem, carrier: &Simplex) -> Result<usize> {
    sys.covering_parts(carrier)
        .first()
        .copied()
        .ok_or_else(|| Error::Uncovered(carrier.to_string()))
}

fn checked_product_point(sys: &PlannerSystem, a: &BarycentricPoint, b: &BarycentricPoint) -> Result<BarycentricPoint> {
    a.check_in(sys.base())?;
    b.check_in(sys.base())?;
    product_point(a, b, &sys.square.codec)
}

/// Path from `a` to `b` flagged by the planner of the lowest-index part
/// containing the point `(a, b)`.
pub fn plan_path(sys: &PlannerSystem, a: &BarycentricPoint, b: &BarycentricPoint) -> Result<PlannedPath> {
    let point = checked_product_point(sys, a, b)?;
    let part = locate_in_part(sys, point.carrier())?;
    plan_path_in(sys, part, point)
}

/// Like [`plan_path`] with the part chosen by the caller.
pub fn plan_path_with_part(
    sys: &PlannerSystem,
    part: usize,
    a: &BarycentricPoint,
    b: &BarycentricPoint,
) -> Result<PlannedPath> {
    let point = checked_product_point(sys, a, b)?;
    if part >= sys.certificate.parts.len() {
        return Err(Error::InvalidParameter(format!("cover has no part {part}")));
    }
    plan_path_in(sys, part, point)
}

fn plan_path_in(sys: &PlannerSystem, part: usize, point: BarycentricPoint) -> Result<PlannedPath> {
    let chain = &sys.certificate.parts[part].chain;
    if !chain.domain().is_simplex(point.carrier()) {
        return Err(Error::NotCovered {
            carrier: point.carrier().to_string(),
            part,
            covering: sys.covering_parts(point.carrier()),
        });
    }
    let waypoints = chain
        .maps()
        .iter()
        .map(|m| point.push_forward(m))
        .collect::<Result<Vec<_>>>()?;
    Ok(PlannedPath { part, product_point: point, waypoints })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn circle() -> Arc<Complex> {
        Arc::new(Complex::from_facet_lists([vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap())
    }

    #[test]
    fn points_parse_and_validate() {
        let p: BarycentricPoint = "1:1/2, 0:0.5".parse().unwrap();
        assert_eq!(p.carrier().vertices(), &[0, 1]);
        assert_eq!(p.weights(), &[q(1, 2), q(1, 2)]);
        assert_eq!(p.to_string(), "0:1/2,1:1/2");
        assert_eq!("2".parse::<BarycentricPoint>().unwrap(), BarycentricPoint::vertex(2));
        assert!("0:1/2,1:1/3".parse::<BarycentricPoint>().is_err());
        assert!("0:0,1:1".parse::<BarycentricPoint>().is_err());
    }

    #[test]
    fn staircase_point_of_two_edges() {
        let codec = ProductVertexCodec::new(3, 3);
        let a: BarycentricPoint = "0:1/3,1:2/3".parse().unwrap();
        let b: BarycentricPoint = "0:1/2,1:1/2".parse().unwrap();
        // thresholds: a-step at 2/3, b-step at 1/2
        let p = product_point(&a, &b, &codec).unwrap();
        assert_eq!(p.carrier().vertices(), &[0, 3, 4]);
        assert_eq!(p.weights(), &[q(1, 3), q(1, 6), q(1, 2)]);
        let (pi1, pi2) = Square::new(circle()).unwrap().projections();
        assert_eq!(p.push_forward(&pi1).unwrap(), a);
        assert_eq!(p.push_forward(&pi2).unwrap(), b);
    }

    #[test]
    fn ties_take_the_smaller_chain() {
        let codec = ProductVertexCodec::new(2, 2);
        let half: BarycentricPoint = "0:1/2,1:1/2".parse().unwrap();
        let p = product_point(&half, &half, &codec).unwrap();
        assert_eq!(p.carrier().vertices(), &[0, 3]);
        let v = product_point(&BarycentricPoint::vertex(1), &BarycentricPoint::vertex(0), &codec).unwrap();
        assert_eq!(v, BarycentricPoint::vertex(2));
    }

    #[test]
    fn tower_levels_and_composite() {
        let tower = SubdivisionTower::build(circle(), 2, DEFAULT_MAX_FACETS).unwrap();
        assert_eq!(tower.complex(1).num_facets(), 6);
        assert_eq!(tower.complex(2).num_facets(), 12);
        let iota = tower.composite();
        assert_eq!(iota.domain().num_vertices(), 12);
        assert!(crate::contiguity::is_simplicial(&iota));
        assert!(matches!(
            SubdivisionTower::build(circle(), 2, 10),
            Err(Error::ResourceLimit { facets: 12, limit: 10 })
        ));
        let one = SubdivisionTower::build(circle(), 1, DEFAULT_MAX_FACETS).unwrap();
        assert_eq!(one.composite(), one.approximation(1));
    }

    #[test]
    fn cone_square_has_distance_zero() {
        let simplex = Arc::new(Complex::from_facet_lists([vec![0, 1, 2]]).unwrap());
        let params = CoverParams::default();
        let r = estimate_sc(&simplex, &params, &mut crate::search::seeded_rng(1)).unwrap();
        assert_eq!(r.bound, 0);
        let r = estimate_cat(&simplex, 0, &params, &mut crate::search::seeded_rng(1)).unwrap();
        assert_eq!(r.bound, 0);
    }

    #[test]
    fn disconnected_base_is_rejected() {
        let two = Arc::new(Complex::from_facet_lists([vec![0], vec![1]]).unwrap());
        assert!(matches!(Square::new(two), Err(Error::Disconnected)));
    }
}
