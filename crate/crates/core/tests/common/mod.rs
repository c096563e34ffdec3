//! Independent oracles and property checks shared by the property tests and
//! the acceptance harness. The oracles only use plain vectors and never call
//! the library's own predicates.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use contig::complex::{barycentric_subdivision, ordered_product, projections, VertexRule};
use contig::contiguity::{contiguous, map_distance, verify_chain, verify_cover};
use contig::covering::{covering, CoverParams};
use contig::search::{local_search, reduce, reduce_to_fixpoint, seeded_rng};
use contig::{Complex, SearchParams, SimplicialMap, SkeletonDistances, VertexId};

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn circle() -> Arc<Complex> {
    Arc::new(Complex::from_facet_lists([vec![0, 1], vec![0, 2], vec![1, 2]]).unwrap())
}

/// Fixed-seed runner; failures are not persisted to disk.
pub fn runner(seed: u8, cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::from_seed(RngAlgorithm::ChaCha, &[seed; 32]))
}

// ---------------------------------------------------------------- oracles

/// Whether `set` lies in one of `facets`.
pub fn in_some_facet(facets: &[Vec<VertexId>], set: &[VertexId]) -> bool {
    facets.iter().any(|f| set.iter().all(|v| f.contains(v)))
}

/// Contiguity by exhaustive facet scan over explicit lists; `f` and `g` are
/// indexed by domain label.
pub fn brute_contiguous(domain: &[Vec<VertexId>], codomain: &[Vec<VertexId>], f: &[VertexId], g: &[VertexId]) -> bool {
    domain.iter().all(|sigma| {
        let mut image: Vec<VertexId> = sigma.iter().flat_map(|&v| [f[v as usize], g[v as usize]]).collect();
        image.sort_unstable();
        image.dedup();
        in_some_facet(codomain, &image)
    })
}

/// Facets of the ordered product found as maximal chains of pairs in the
/// componentwise order whose projections are simplices.
pub fn brute_product_facets(k: &[Vec<VertexId>], l: &[Vec<VertexId>], right: usize) -> BTreeSet<Vec<VertexId>> {
    let vk: BTreeSet<VertexId> = k.iter().flatten().copied().collect();
    let vl: BTreeSet<VertexId> = l.iter().flatten().copied().collect();
    let pairs: Vec<(VertexId, VertexId)> =
        vk.iter().flat_map(|&i| vl.iter().map(move |&j| (i, j))).collect();
    let mut chains: Vec<Vec<(VertexId, VertexId)>> = Vec::new();

    fn ok(chain: &[(VertexId, VertexId)], k: &[Vec<VertexId>], l: &[Vec<VertexId>]) -> bool {
        let mut a: Vec<VertexId> = chain.iter().map(|p| p.0).collect();
        let mut b: Vec<VertexId> = chain.iter().map(|p| p.1).collect();
        a.dedup();
        b.dedup();
        in_some_facet(k, &a) && in_some_facet(l, &b)
    }

    fn extend(
        chain: &mut Vec<(VertexId, VertexId)>,
        pairs: &[(VertexId, VertexId)],
        k: &[Vec<VertexId>],
        l: &[Vec<VertexId>],
        out: &mut Vec<Vec<(VertexId, VertexId)>>,
    ) {
        let last = *chain.last().unwrap();
        let mut extended = false;
        for &p in pairs {
            if p != last && p.0 >= last.0 && p.1 >= last.1 {
                chain.push(p);
                if ok(chain, k, l) {
                    extended = true;
                    extend(chain, pairs, k, l, out);
                }
                chain.pop();
            }
        }
        if !extended {
            out.push(chain.clone());
        }
    }

    for &p in &pairs {
        let mut chain = vec![p];
        if ok(&chain, k, l) {
            extend(&mut chain, &pairs, k, l, &mut chains);
        }
    }
    let sets: Vec<BTreeSet<VertexId>> = chains
        .iter()
        .map(|c| c.iter().map(|&(i, j)| i * right as VertexId + j).collect())
        .collect();
    sets.iter()
        .filter(|s| !sets.iter().any(|t| t.len() > s.len() && s.is_subset(t)))
        .map(|s| s.iter().copied().collect())
        .collect()
}

/// Euler characteristic from all faces of explicit facet lists.
pub fn brute_euler(facets: &[Vec<VertexId>]) -> i64 {
    let mut faces = BTreeSet::new();
    for f in facets {
        for mask in 1u32..(1 << f.len()) {
            let face: Vec<VertexId> = (0..f.len()).filter(|i| mask >> i & 1 == 1).map(|i| f[i]).collect();
            faces.insert(face);
        }
    }
    faces.iter().map(|s| if s.len() % 2 == 1 { 1 } else { -1 }).sum()
}

pub fn facet_lists(k: &Complex) -> Vec<Vec<VertexId>> {
    k.facets().iter().map(|f| f.vertices().to_vec()).collect()
}

// ------------------------------------------------------------- strategies

/// Connected complexes on `2..=max_vertices` dense labels: a random spanning
/// tree plus random extra edges and triangles.
pub fn connected_complex(max_vertices: usize) -> impl Strategy<Value = Vec<Vec<VertexId>>> {
    (2..=max_vertices).prop_flat_map(|n| {
        let parents = proptest::collection::vec(any::<prop::sample::Index>(), n - 1);
        let extra = proptest::collection::vec((0..n as VertexId, 0..n as VertexId, 0..n as VertexId, any::<bool>()), 0..n + 2);
        (parents, extra).prop_map(move |(parents, extra)| {
            let mut facets: Vec<Vec<VertexId>> = Vec::new();
            for (child, idx) in parents.iter().enumerate() {
                let child = child + 1;
                facets.push(vec![idx.index(child) as VertexId, child as VertexId]);
            }
            for (a, b, c, triangle) in extra {
                let mut s = if triangle { vec![a, b, c] } else { vec![a, b] };
                s.sort_unstable();
                s.dedup();
                facets.push(s);
            }
            facets
        })
    })
}

pub fn build(facets: &[Vec<VertexId>]) -> Arc<Complex> {
    Arc::new(Complex::from_facet_lists(facets.iter().cloned()).unwrap())
}

/// A random simplicial map by rejection sampling, falling back to a constant.
pub fn random_simplicial<R: Rng>(domain: &Arc<Complex>, codomain: &Arc<Complex>, rng: &mut R) -> SimplicialMap {
    let targets = codomain.vertices();
    for _ in 0..200 {
        let images = domain.vertices().iter().map(|_| targets[rng.gen_range(0..targets.len())]).collect();
        let f = SimplicialMap::new(domain.clone(), codomain.clone(), images).unwrap();
        if contig::contiguity::is_simplicial(&f) {
            return f;
        }
    }
    SimplicialMap::constant(domain.clone(), codomain.clone(), targets[rng.gen_range(0..targets.len())]).unwrap()
}

fn random_vertex_map<R: Rng>(domain: &Arc<Complex>, codomain: &Arc<Complex>, rng: &mut R) -> SimplicialMap {
    let targets = codomain.vertices();
    let images = domain.vertices().iter().map(|_| targets[rng.gen_range(0..targets.len())]).collect();
    SimplicialMap::new(domain.clone(), codomain.clone(), images).unwrap()
}

// ------------------------------------------------------------- properties

pub type Outcome = Result<(), String>;

fn finish(result: Result<(), proptest::test_runner::TestError<impl std::fmt::Debug>>) -> Outcome {
    result.map_err(|e| e.to_string())
}

/// `contiguous` agrees with the exhaustive oracle on random vertex maps.
pub fn contiguity_matches_oracle(runner: &mut TestRunner) -> Outcome {
    finish(runner.run(&(connected_complex(5), connected_complex(5), any::<u64>()), |(l, k, seed)| {
        let (dl, dk) = (build(&l), build(&k));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..8 {
            let f = random_vertex_map(&dl, &dk, &mut rng);
            let g = random_vertex_map(&dl, &dk, &mut rng);
            let simplicial = brute_contiguous(&facet_lists(&dl), &facet_lists(&dk), f.images(), f.images())
                && brute_contiguous(&facet_lists(&dl), &facet_lists(&dk), g.images(), g.images());
            let expected = simplicial && brute_contiguous(&facet_lists(&dl), &facet_lists(&dk), f.images(), g.images());
            prop_assert_eq!(contiguous(&f, &g).unwrap(), expected);
        }
        Ok(())
    }))
}

/// Identity of indiscernibles, symmetry and the triangle inequality.
pub fn map_distance_is_a_metric(runner: &mut TestRunner) -> Outcome {
    finish(runner.run(&(connected_complex(5), connected_complex(6), any::<u64>()), |(l, k, seed)| {
        let (dl, dk) = (build(&l), build(&k));
        let dist = SkeletonDistances::new(&dk).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..6 {
            let f = random_vertex_map(&dl, &dk, &mut rng);
            let g = random_vertex_map(&dl, &dk, &mut rng);
            let h = random_vertex_map(&dl, &dk, &mut rng);
            let d = |a: &SimplicialMap, b: &SimplicialMap| map_distance(a, b, &dist).unwrap();
            prop_assert_eq!(d(&f, &f), 0);
            prop_assert_eq!(d(&f, &g) == 0, f == g);
            prop_assert_eq!(d(&f, &g), d(&g, &f));
            prop_assert!(d(&f, &h) <= d(&f, &g) + d(&g, &h));
        }
        Ok(())
    }))
}

/// Ordered product facets equal the maximal chains found by enumeration.
pub fn product_matches_chain_enumeration(runner: &mut TestRunner) -> Outcome {
    finish(runner.run(&(connected_complex(6), connected_complex(6)), |(k, l)| {
        let (ck, cl) = (build(&k), build(&l));
        let (product, codec) = ordered_product(&ck, &cl);
        let expected = brute_product_facets(&facet_lists(&ck), &facet_lists(&cl), codec.right);
        let found: BTreeSet<Vec<VertexId>> = facet_lists(&product).into_iter().collect();
        prop_assert_eq!(found.len(), expected.len());
        prop_assert_eq!(found, expected);
        Ok(())
    }))
}

/// `χ(Sd K) = χ(K)` and `χ(K × L) = χ(K)·χ(L)`.
pub fn euler_characteristic_is_preserved(runner: &mut TestRunner) -> Outcome {
    finish(runner.run(&(connected_complex(6), connected_complex(4)), |(k, l)| {
        let (ck, cl) = (build(&k), build(&l));
        let chi = brute_euler(&facet_lists(&ck));
        let sd = barycentric_subdivision(&ck);
        prop_assert_eq!(brute_euler(&facet_lists(&sd.complex)), chi);
        let (product, _) = ordered_product(&ck, &cl);
        prop_assert_eq!(brute_euler(&facet_lists(&product)), chi * brute_euler(&facet_lists(&cl)));
        Ok(())
    }))
}

/// Both vertex rules give simplicial approximations that are 1-contiguous.
pub fn approximations_are_contiguous(runner: &mut TestRunner) -> Outcome {
    finish(runner.run(&connected_complex(5), |k| {
        let sd = barycentric_subdivision(&build(&k));
        let lo = sd.approximation_with(VertexRule::Min);
        let hi = sd.approximation_with(VertexRule::Max);
        prop_assert!(contiguous(&lo, &lo).unwrap());
        prop_assert!(contiguous(&lo, &hi).unwrap());
        for (&v, &w) in sd.complex.vertices().iter().zip(lo.images()) {
            prop_assert!(sd.barycenters[v as usize].contains(w));
        }
        Ok(())
    }))
}

/// Chains found by the search verify; reduction keeps endpoints, never
/// lengthens, stays valid and reaches a fixpoint.
pub fn search_chains_verify_and_reduce(runner: &mut TestRunner) -> Outcome {
    finish(runner.run(&(connected_complex(4), connected_complex(4), any::<u64>()), |(l, k, seed)| {
        let (dl, dk) = (build(&l), build(&k));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_simplicial(&dl, &dk, &mut rng);
        let g = random_simplicial(&dl, &dk, &mut rng);
        let params = SearchParams { max_iterations: 3000, seed, ..SearchParams::default() };
        if let Some(chain) = local_search(&f, &g, &params, &mut seeded_rng(seed)).unwrap() {
            prop_assert!(verify_chain(&chain, &f, &g).is_ok());
            let reduced = reduce(&chain).unwrap();
            prop_assert!(reduced.length() <= chain.length());
            prop_assert!(verify_chain(&reduced, &f, &g).is_ok());
            let (fixed, rounds) = reduce_to_fixpoint(&chain).unwrap();
            prop_assert!(rounds <= chain.length());
            prop_assert!(fixed.length() <= reduced.length());
            prop_assert!(verify_chain(&fixed, &f, &g).is_ok());
            prop_assert_eq!(reduce(&fixed).unwrap().length(), fixed.length());
        }
        Ok(())
    }))
}

/// Covers of random squares are exact facet partitions and verify.
pub fn covers_are_exact_partitions(runner: &mut TestRunner) -> Outcome {
    finish(runner.run(&(connected_complex(4), any::<u64>()), |(k, seed)| {
        let ck = build(&k);
        let (product, codec) = ordered_product(&ck, &ck);
        let product = Arc::new(product);
        let (pi1, pi2) = projections(&product, codec, &ck, &ck).unwrap();
        let params = CoverParams { search: SearchParams { max_iterations: 300, seed, ..SearchParams::default() }, ..CoverParams::default() };
        let cert = covering(&pi1, &pi2, &params, &mut seeded_rng(seed)).unwrap();
        let mut seen: Vec<&contig::Simplex> = cert.parts.iter().flat_map(|p| &p.facets).collect();
        prop_assert_eq!(seen.len(), product.num_facets());
        seen.sort();
        seen.dedup();
        prop_assert_eq!(seen.len(), product.num_facets());
        let verdict = verify_cover(&cert);
        prop_assert!(verdict.is_ok(), "{}", verdict);
        Ok(())
    }))
}

pub const PROPERTIES: &[(&str, fn(&mut TestRunner) -> Outcome, u32)] = &[
    ("contiguity matches the exhaustive oracle", contiguity_matches_oracle, 64),
    ("map distance is a metric", map_distance_is_a_metric, 64),
    ("ordered product matches chain enumeration", product_matches_chain_enumeration, 48),
    ("Euler characteristic is preserved", euler_characteristic_is_preserved, 48),
    ("approximations of the identity are contiguous", approximations_are_contiguous, 48),
    ("search chains verify and reduce", search_chains_verify_and_reduce, 48),
    ("covers are exact partitions", covers_are_exact_partitions, 24),
];

// ----------------------------------------------------------- circle maps

/// All 27 vertex maps of the circle `{0,1,2}` to itself, in lexicographic
/// order of their image vectors.
pub fn circle_self_maps() -> Vec<[VertexId; 3]> {
    let mut out = Vec::new();
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                out.push([a, b, c]);
            }
        }
    }
    out
}

/// Connected components of the contiguity graph on the 27 circle maps,
/// computed with the exhaustive checker; `component[i]` is the smallest
/// index in the component of map `i`.
pub fn circle_components() -> Vec<usize> {
    let facets = vec![vec![0, 1], vec![0, 2], vec![1, 2]];
    let maps = circle_self_maps();
    let mut component: Vec<usize> = (0..maps.len()).collect();
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..maps.len() {
            for j in 0..maps.len() {
                if brute_contiguous(&facets, &facets, &maps[i], &maps[j]) && component[j] < component[i] {
                    component[i] = component[j];
                    changed = true;
                }
            }
        }
    }
    component
}
