//! Uniform hypergraph densities, strict balance, and the dense families used
//! to make speeds oscillate between factorial and exponential-of-power rates.

mod flow;
mod members;
mod sample;

use std::collections::BTreeSet;

use itertools::Itertools;
use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::structures::Structure;
use flow::Network;

pub use members::{blowup_members, equipartition, in_p, in_q, in_s, s_upper_bound, Blowup, P_BUDGET};
pub use sample::{
    build_sequence, sample_dense_member, sample_member, MemberCertificate, OscSequence, StepCertificate,
    Verification, SAMPLE_BUDGET,
};

/// An r-uniform hypergraph on `0..v`. Edges are sorted and stored in increasing order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Hypergraph {
    r: usize,
    v: usize,
    edges: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct HypergraphJson {
    r: usize,
    v: usize,
    edges: Vec<Vec<usize>>,
}

impl Hypergraph {
    pub fn new(r: usize, v: usize, edges: Vec<Vec<usize>>) -> Result<Self> {
        if r < 2 {
            return Err(Error::InvalidHypergraph(format!("uniformity {r} < 2")));
        }
        let mut set = BTreeSet::new();
        for mut e in edges {
            e.sort_unstable();
            if e.len() != r || e.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidHypergraph(format!("{e:?} is not a set of {r} distinct vertices")));
            }
            if let Some(&x) = e.iter().find(|&&x| x >= v) {
                return Err(Error::InvalidHypergraph(format!("vertex {x} outside [{v}]")));
            }
            if !set.insert(e.clone()) {
                return Err(Error::InvalidHypergraph(format!("repeated edge {e:?}")));
            }
        }
        Ok(Hypergraph { r, v, edges: set.into_iter().collect() })
    }

    pub fn edgeless(r: usize, v: usize) -> Result<Self> {
        Self::new(r, v, Vec::new())
    }

    pub fn complete(r: usize, v: usize) -> Result<Self> {
        Self::new(r, v, (0..v).combinations(r).collect())
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn v(&self) -> usize {
        self.v
    }

    pub fn e(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    pub fn contains_edge(&self, edge: &[usize]) -> bool {
        self.edges.binary_search_by(|e| e.as_slice().cmp(edge)).is_ok()
    }

    /// Subhypergraph induced on `vertices`, relabelled to `0..len` in the given order.
    pub fn induced(&self, vertices: &[usize]) -> Hypergraph {
        let mut index = vec![usize::MAX; self.v];
        for (i, &x) in vertices.iter().enumerate() {
            index[x] = i;
        }
        let edges = self
            .edges
            .iter()
            .filter(|e| e.iter().all(|&x| index[x] != usize::MAX))
            .map(|e| {
                let mut f: Vec<usize> = e.iter().map(|&x| index[x]).collect();
                f.sort_unstable();
                f
            })
            .collect();
        Hypergraph { r: self.r, v: vertices.len(), edges }
    }

    pub fn without_edge(&self, index: usize) -> Hypergraph {
        let mut edges = self.edges.clone();
        edges.remove(index);
        Hypergraph { edges, ..self.clone() }
    }

    /// Vertex-disjoint union, with `other` shifted past `self`.
    pub fn disjoint_union(&self, other: &Hypergraph) -> Result<Hypergraph> {
        if self.r != other.r {
            return Err(Error::InvalidHypergraph(format!("uniformities {} and {} differ", self.r, other.r)));
        }
        let shifted = other.edges.iter().map(|e| e.iter().map(|x| x + self.v).collect());
        Self::new(self.r, self.v + other.v, self.edges.iter().cloned().chain(shifted).collect())
    }

    /// Edge masks, available when `v <= 128`.
    pub(crate) fn masks(&self) -> Option<Vec<u128>> {
        (self.v <= 128).then(|| self.edges.iter().map(|e| e.iter().fold(0u128, |m, &x| m | 1 << x)).collect())
    }

    /// The hypergraph as a structure with one symmetric relation `E` of arity `r`.
    pub fn to_structure(&self) -> Result<Structure> {
        Structure::uniform_hypergraph(self.v, self.r, &self.edges)
    }

    pub fn from_structure(m: &Structure) -> Result<Hypergraph> {
        let lang = m.language();
        if lang.relations().len() != 1 || !lang.constants().is_empty() {
            return Err(Error::InvalidHypergraph("expected a single relation and no constants".into()));
        }
        let r = lang.relations()[0].arity;
        let edges: BTreeSet<Vec<usize>> = m
            .relation(0)
            .iter()
            .map(|t| {
                let mut e = t.clone();
                e.sort_unstable();
                e
            })
            .collect();
        Self::new(r, m.n(), edges.into_iter().collect())
    }

    /// One-based JSON `{r, v, edges}`.
    pub fn to_json(&self) -> String {
        let j = HypergraphJson {
            r: self.r,
            v: self.v,
            edges: self.edges.iter().map(|e| e.iter().map(|x| x + 1).collect()).collect(),
        };
        serde_json::to_string(&j).expect("hypergraph serializes")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let j: HypergraphJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        let edges = j
            .edges
            .into_iter()
            .map(|e| {
                e.into_iter()
                    .map(|x| x.checked_sub(1).ok_or_else(|| Error::InvalidHypergraph("vertices are one-based".into())))
                    .collect()
            })
            .collect::<Result<Vec<Vec<usize>>>>()?;
        Self::new(j.r, j.v, edges)
    }
}

fn ratio(e: usize, v: usize) -> Rational64 {
    Rational64::new(e as i64, v as i64)
}

/// `e(G) / v(G)`.
pub fn density(g: &Hypergraph) -> Result<Rational64> {
    if g.v == 0 {
        return Err(Error::EmptyVertexSet);
    }
    Ok(ratio(g.e(), g.v))
}

/// Whether some nonempty `U` has `q * e(G[U]) > p * |U|`, i.e. density above `p/q`.
/// Returns the vertices on the source side of a minimum cut.
fn denser_than(g: &Hypergraph, lambda: Rational64) -> Option<Vec<usize>> {
    let (p, q) = (*lambda.numer(), *lambda.denom());
    let e = g.e();
    let (s, t) = (0, 1);
    let mut net = Network::new(2 + e + g.v);
    for (i, edge) in g.edges.iter().enumerate() {
        net.add(s, 2 + i, q);
        for &x in edge {
            net.add_unbounded(2 + i, 2 + e + x);
        }
    }
    for x in 0..g.v {
        net.add(2 + e + x, t, p);
    }
    if net.max_flow(s, t) < q * e as i64 {
        let side = net.source_side(s);
        Some((0..g.v).filter(|&x| side[2 + e + x]).collect())
    } else {
        None
    }
}

/// Maximum of `e(G[U]) / |U|` over nonempty `U`, with a witness `U`.
pub fn max_subgraph_density(g: &Hypergraph) -> Result<(Rational64, Vec<usize>)> {
    if g.v == 0 {
        return Err(Error::EmptyVertexSet);
    }
    if g.e() == 0 {
        return Ok((Rational64::zero(), (0..g.v).collect()));
    }
    // the optimum is some e'/v'; candidates below it admit a denser set
    let candidates: Vec<Rational64> =
        (1..=g.v).flat_map(|v| (0..=g.e()).map(move |e| ratio(e, v))).collect::<BTreeSet<_>>().into_iter().collect();
    let (mut lo, mut hi) = (0, candidates.len() - 1);
    let mut witness = denser_than(g, candidates[0]).expect("an edge beats density 0");
    // invariant: candidates[lo] is beaten, candidates[hi] is not (or hi is the last)
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        match denser_than(g, candidates[mid]) {
            Some(u) => {
                lo = mid;
                witness = u;
            }
            None => hi = mid,
        }
    }
    let value = ratio(g.induced(&witness).e(), witness.len());
    debug_assert!(value > candidates[lo]);
    Ok((value, witness))
}

/// Subset scan of [`max_subgraph_density`], for `v <= 20`.
pub fn max_subgraph_density_brute(g: &Hypergraph) -> Result<(Rational64, Vec<usize>)> {
    if g.v == 0 {
        return Err(Error::EmptyVertexSet);
    }
    if g.v > 20 {
        return Err(Error::BudgetExceeded(format!("subset scan over {} vertices", g.v)));
    }
    let masks = g.masks().expect("v <= 20");
    let mut best = (Rational64::zero(), (1u32 << g.v) - 1);
    for s in 1u32..1 << g.v {
        let e = masks.iter().filter(|&&m| m as u32 & s == m as u32).count();
        let d = ratio(e, s.count_ones() as usize);
        if d > best.0 {
            best = (d, s);
        }
    }
    Ok((best.0, (0..g.v).filter(|&x| best.1 >> x & 1 == 1).collect()))
}

const EXHAUSTIVE_BALANCE: usize = 14;

/// Every nonempty proper induced subhypergraph has strictly smaller density.
pub fn is_strictly_balanced(g: &Hypergraph) -> bool {
    if g.v <= 1 {
        return true;
    }
    let (e, v) = (g.e(), g.v);
    if v <= EXHAUSTIVE_BALANCE {
        let masks: Vec<u32> = g.masks().expect("small").into_iter().map(|m| m as u32).collect();
        let full = (1u32 << v) - 1;
        return (1..full).all(|s| {
            let es = masks.iter().filter(|&&m| m & s == m).count();
            es * v < e * s.count_ones() as usize
        });
    }
    // every proper subset lies inside some vertex-deleted subgraph
    let rho = ratio(e, v);
    (0..v).all(|x| {
        let rest: Vec<usize> = (0..v).filter(|&y| y != x).collect();
        max_subgraph_density(&g.induced(&rest)).map(|(d, _)| d < rho).unwrap_or(true)
    })
}

/// `k` when `c = k / (1 + k (r - 1))` for a positive integer `k`.
fn sunflower_petals(r: usize, c: Rational64) -> Option<usize> {
    let one = Rational64::from_integer(1);
    let slack = one - c * (r as i64 - 1);
    if slack <= Rational64::zero() || c <= Rational64::zero() {
        return None;
    }
    let k = c / slack;
    (k.is_integer() && *k.numer() >= 1).then(|| *k.numer() as usize)
}

/// Whether some strictly balanced r-uniform hypergraph has density exactly `c`.
pub fn density_is_feasible(r: usize, c: Rational64) -> bool {
    c >= ratio(1, r - 1) || sunflower_petals(r, c).is_some()
}

/// `k` edges pairwise meeting only in vertex 0.
pub fn sunflower(r: usize, k: usize) -> Result<Hypergraph> {
    let edges = (0..k).map(|i| std::iter::once(0).chain(1 + i * (r - 1)..1 + (i + 1) * (r - 1)).collect()).collect();
    Hypergraph::new(r, 1 + k * (r - 1), edges)
}

/// Edges `{i, ..., i + r - 1}` mod `v`.
pub fn tight_cycle(r: usize, v: usize) -> Result<Hypergraph> {
    if v < r {
        return Err(Error::InvalidHypergraph(format!("tight cycle needs v >= {r}")));
    }
    let edges: BTreeSet<Vec<usize>> = (0..v)
        .map(|i| {
            let mut e: Vec<usize> = (i..i + r).map(|x| x % v).collect();
            e.sort_unstable();
            e
        })
        .collect();
    Hypergraph::new(r, v, edges.into_iter().collect())
}

/// `len` edges in a ring, consecutive edges sharing one vertex.
pub fn loose_cycle(r: usize, len: usize) -> Result<Hypergraph> {
    let v = len * (r - 1);
    let edges = (0..len).map(|i| (0..r).map(|j| (i * (r - 1) + j) % v).collect()).collect();
    Hypergraph::new(r, v, edges)
}

/// Largest vertex count tried by [`find_strictly_balanced`].
pub const SEARCH_MAX_V: usize = 16;
const RANDOM_TRIES: usize = 400;
const EXHAUSTIVE_SUBSETS: u64 = 200_000;

fn seeds(r: usize, c: Rational64) -> Vec<Hypergraph> {
    let mut out = Vec::new();
    if let Some(k) = sunflower_petals(r, c) {
        out.extend(sunflower(r, k));
    }
    for v in r..=SEARCH_MAX_V {
        out.extend(tight_cycle(r, v));
        out.extend(Hypergraph::complete(r, v));
    }
    for len in 2..=SEARCH_MAX_V / (r - 1) {
        out.extend(loose_cycle(r, len));
    }
    out.retain(|h| ratio(h.e(), h.v) == c);
    out.sort_by_key(|h| (h.v, h.e()));
    out
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Edges of `e` r-sets on `0..v`, each new edge through the currently least-used vertices.
fn degree_balanced(r: usize, v: usize, e: usize, rng: &mut ChaCha8Rng) -> Option<Hypergraph> {
    let mut degree = vec![0usize; v];
    let mut chosen = BTreeSet::new();
    while chosen.len() < e {
        let mut order: Vec<usize> = (0..v).collect();
        order.shuffle(rng);
        order.sort_by_key(|&x| degree[x]);
        let edge = (0..v).combinations(r).map(|idx| {
            let mut f: Vec<usize> = idx.iter().map(|&i| order[i]).collect();
            f.sort_unstable();
            f
        });
        let next = edge.take(4096).find(|f| !chosen.contains(f))?;
        next.iter().for_each(|&x| degree[x] += 1);
        chosen.insert(next);
    }
    Hypergraph::new(r, v, chosen.into_iter().collect()).ok()
}

/// A certified strictly balanced r-uniform hypergraph of density exactly `c`.
pub fn find_strictly_balanced(r: usize, c: Rational64) -> Result<Hypergraph> {
    if r < 2 {
        return Err(Error::InvalidHypergraph(format!("uniformity {r} < 2")));
    }
    if c < Rational64::zero() || !density_is_feasible(r, c) {
        return Err(Error::InfeasibleDensity(c.to_string()));
    }
    if let Some(h) = seeds(r, c).into_iter().find(is_strictly_balanced) {
        return Ok(h);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for v in r..=SEARCH_MAX_V {
        let e = c * v as i64;
        if !e.is_integer() {
            continue;
        }
        let e = e.to_integer() as usize;
        let slots = binomial(v as u64, r as u64);
        if e == 0 || e as u64 > slots {
            continue;
        }
        for _ in 0..RANDOM_TRIES {
            if let Some(h) = degree_balanced(r, v, e, &mut rng).filter(is_strictly_balanced) {
                return Ok(h);
            }
        }
        if binomial(slots, e as u64) <= EXHAUSTIVE_SUBSETS {
            let all: Vec<Vec<usize>> = (0..v).combinations(r).collect();
            let found = all.iter().cloned().combinations(e).find_map(|edges| {
                Hypergraph::new(r, v, edges).ok().filter(is_strictly_balanced)
            });
            if let Some(h) = found {
                return Ok(h);
            }
        }
    }
    let (p, q) = (c.numer().to_u64().unwrap_or(0), c.denom().to_u64().unwrap_or(1));
    Err(Error::SearchBudgetExceeded(format!(
        "no strictly balanced {r}-graph of density {p}/{q} with at most {SEARCH_MAX_V} vertices found"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn graph(v: usize, edges: &[(usize, usize)]) -> Hypergraph {
        Hypergraph::new(2, v, edges.iter().map(|&(a, b)| vec![a, b]).collect()).unwrap()
    }

    fn q(p: i64, d: i64) -> Rational64 {
        Rational64::new(p, d)
    }

    fn cycle(v: usize) -> Hypergraph {
        tight_cycle(2, v).unwrap()
    }

    #[test]
    fn validation() {
        assert!(matches!(Hypergraph::new(2, 3, vec![vec![0, 0]]), Err(Error::InvalidHypergraph(_))));
        assert!(matches!(Hypergraph::new(2, 3, vec![vec![0, 3]]), Err(Error::InvalidHypergraph(_))));
        assert!(matches!(Hypergraph::new(3, 3, vec![vec![0, 1]]), Err(Error::InvalidHypergraph(_))));
        assert!(matches!(Hypergraph::new(1, 3, vec![]), Err(Error::InvalidHypergraph(_))));
    }

    #[test]
    fn json_is_one_based() {
        let h = Hypergraph::new(3, 4, vec![vec![0, 1, 2]]).unwrap();
        assert_eq!(h.to_json(), r#"{"r":3,"v":4,"edges":[[1,2,3]]}"#);
        assert_eq!(Hypergraph::from_json_str(&h.to_json()).unwrap(), h);
        assert!(Hypergraph::from_json_str(r#"{"r":2,"v":2,"edges":[[0,1]]}"#).is_err());
    }

    #[test]
    fn structure_roundtrip() {
        let h = tight_cycle(3, 5).unwrap();
        assert_eq!(Hypergraph::from_structure(&h.to_structure().unwrap()).unwrap(), h);
    }

    #[test]
    fn densities() {
        assert_eq!(density(&Hypergraph::complete(2, 4).unwrap()).unwrap(), q(3, 2));
        assert_eq!(density(&Hypergraph::complete(3, 3).unwrap()).unwrap(), q(1, 3));
        assert_eq!(density(&Hypergraph::edgeless(2, 5).unwrap()).unwrap(), q(0, 1));
        assert_eq!(density(&Hypergraph::edgeless(2, 0).unwrap()), Err(Error::EmptyVertexSet));
    }

    #[test]
    fn max_density_examples() {
        let k4_minus = graph(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)]);
        assert_eq!(max_subgraph_density(&k4_minus).unwrap(), (q(5, 4), vec![0, 1, 2, 3]));

        let k4_plus_edge = Hypergraph::complete(2, 4).unwrap().disjoint_union(&graph(2, &[(0, 1)])).unwrap();
        assert_eq!(max_subgraph_density(&k4_plus_edge).unwrap(), (q(3, 2), vec![0, 1, 2, 3]));

        let edge_plus_isolated = Hypergraph::new(3, 4, vec![vec![0, 1, 2]]).unwrap();
        assert_eq!(max_subgraph_density(&edge_plus_isolated).unwrap(), (q(1, 3), vec![0, 1, 2]));

        let empty = Hypergraph::edgeless(2, 3).unwrap();
        assert_eq!(max_subgraph_density(&empty).unwrap(), (q(0, 1), vec![0, 1, 2]));
        assert_eq!(max_subgraph_density(&Hypergraph::edgeless(2, 0).unwrap()), Err(Error::EmptyVertexSet));
    }

    #[test]
    fn flow_matches_brute_force_on_random_hypergraphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..80 {
            let r = rng.gen_range(2..=3);
            let v = rng.gen_range(1..=10);
            let p: f64 = rng.gen();
            let edges = (0..v).combinations(r).filter(|_| rng.gen::<f64>() < p).collect();
            let h = Hypergraph::new(r, v, edges).unwrap();
            let (d, w) = max_subgraph_density(&h).unwrap();
            assert_eq!(d, max_subgraph_density_brute(&h).unwrap().0, "{h:?}");
            assert_eq!(ratio(h.induced(&w).e(), w.len()), d);
        }
    }

    #[test]
    fn balance_examples() {
        assert!(is_strictly_balanced(&cycle(5)));
        assert!(is_strictly_balanced(&Hypergraph::complete(2, 4).unwrap()));
        let two_triangles = cycle(3).disjoint_union(&cycle(3)).unwrap();
        assert!(!is_strictly_balanced(&two_triangles));
        assert!(!is_strictly_balanced(&graph(3, &[(0, 1)])));
    }

    #[test]
    fn large_balance_uses_deletions() {
        // cycles above the exhaustive cutoff
        assert!(is_strictly_balanced(&cycle(17)));
        let split = cycle(8).disjoint_union(&cycle(9)).unwrap();
        assert!(!is_strictly_balanced(&split));
    }

    #[test]
    fn feasibility() {
        assert!(density_is_feasible(3, q(1, 3)));
        assert!(density_is_feasible(3, q(2, 5)));
        assert!(density_is_feasible(3, q(3, 7)));
        assert!(!density_is_feasible(3, q(1, 4)));
        assert!(!density_is_feasible(3, q(0, 1)));
        assert!(density_is_feasible(2, q(1, 1)));
        assert!(density_is_feasible(2, q(3, 4)));
        assert!(!density_is_feasible(2, q(3, 5)));
        assert!(density_is_feasible(2, q(1, 2)));
    }

    #[test]
    fn search_examples() {
        let h = find_strictly_balanced(3, q(1, 3)).unwrap();
        assert_eq!((h.v(), h.e()), (3, 1));
        let h = find_strictly_balanced(3, q(2, 5)).unwrap();
        assert_eq!((h.v(), h.e()), (5, 2));
        let h = find_strictly_balanced(2, q(1, 1)).unwrap();
        assert_eq!((h.v(), h.e()), (3, 3));
        for (r, c) in [(2, q(3, 2)), (3, q(1, 2)), (3, q(1, 1)), (2, q(5, 4)), (3, q(3, 2))] {
            let h = find_strictly_balanced(r, c).unwrap();
            assert_eq!(density(&h).unwrap(), c);
            assert!(is_strictly_balanced(&h));
        }
        assert_eq!(find_strictly_balanced(3, q(1, 4)), Err(Error::InfeasibleDensity("1/4".into())));
    }

    #[test]
    fn families() {
        let s = sunflower(3, 2).unwrap();
        assert_eq!(s.edges(), &[vec![0, 1, 2], vec![0, 3, 4]]);
        assert_eq!(tight_cycle(3, 5).unwrap().e(), 5);
        assert_eq!(loose_cycle(3, 3).unwrap().v(), 6);
        assert!(is_strictly_balanced(&loose_cycle(3, 3).unwrap()));
    }
}
