//! Components of relational structures and the counting constructions built on them.
//!
//! Two elements are adjacent when some tuple of some relation contains both;
//! components are the classes of the transitive closure. An element in no
//! tuple is a component by itself.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_traits::One;

use crate::error::{Error, Result};
use crate::property::{members, PropertySpec};
use crate::structures::Structure;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentReport {
    /// Components, each sorted, ordered by least element.
    pub components: Vec<Vec<usize>>,
    /// Component size -> number of components of that size.
    pub histogram: BTreeMap<usize, usize>,
}

pub fn components_of(m: &Structure) -> ComponentReport {
    let n = m.n();
    let mut adjacent: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for tuples in m.relations() {
        for t in tuples {
            for &a in t {
                adjacent[a].extend(t.iter().copied());
            }
        }
    }
    let mut seen = vec![false; n];
    let mut components = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut part = vec![start];
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for &v in &adjacent[u] {
                if !seen[v] {
                    seen[v] = true;
                    part.push(v);
                    stack.push(v);
                }
            }
        }
        part.sort_unstable();
        components.push(part);
    }
    let mut histogram = BTreeMap::new();
    for c in &components {
        *histogram.entry(c.len()).or_insert(0) += 1;
    }
    ComponentReport { components, histogram }
}

/// Every element sharing a tuple with `a` (including `a` itself when it occurs in a tuple).
pub fn neighborhood(m: &Structure, a: usize) -> Result<BTreeSet<usize>> {
    m.check_element(a)?;
    let mut out = BTreeSet::new();
    for tuples in m.relations() {
        for t in tuples.iter().filter(|t| t.contains(&a)) {
            out.extend(t.iter().copied());
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusEntry {
    pub size: usize,
    /// Largest number of size-`size` components in one member.
    pub max_multiplicity: usize,
    /// Some member has a component larger than `size`.
    pub larger_exists: bool,
}

/// Component sizes across all members with at most `n_max` elements.
///
/// Multiplicities that keep growing with `n_max` are evidence (not proof) of
/// infinitely many components of that size.
pub fn component_census(spec: &PropertySpec, n_max: usize) -> Result<Vec<CensusEntry>> {
    let mut best: BTreeMap<usize, usize> = BTreeMap::new();
    for level in members(spec, n_max)? {
        for m in level {
            for (size, count) in components_of(&m).histogram {
                let slot = best.entry(size).or_insert(0);
                *slot = (*slot).max(count);
            }
        }
    }
    let largest = best.keys().next_back().copied().unwrap_or(0);
    Ok(best
        .into_iter()
        .map(|(size, max_multiplicity)| CensusEntry { size, max_multiplicity, larger_exists: size < largest })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockCount {
    /// Partitions of `[k * floor(n / k)]` into blocks of size `k`.
    pub count: BigUint,
    /// Natural log of `n^{n (1 - 1/k)}`, for display.
    pub reference_ln: f64,
}

fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// `m! / ((k!)^l * l!)` with `l = floor(n / k)` and `m = k * l`.
pub fn partitions_into_blocks(n: usize, k: usize) -> Result<BlockCount> {
    if k == 0 || n < k {
        return Err(Error::Precondition(format!("need n >= k >= 1, got n = {n}, k = {k}")));
    }
    let l = n / k;
    let count = factorial(k * l) / (factorial(k).pow(l as u32) * factorial(l));
    let reference_ln = n as f64 * (1.0 - 1.0 / k as f64) * (n as f64).ln();
    Ok(BlockCount { count, reference_ln })
}

/// Natural log of the Stirling-type bound
/// `sqrt(2 pi) m^{m + 1/2} e^{-m} / ((k!)^l (n/k)^{n/k + 1/2} e^{1 - n/k})`
/// that the block count dominates.
pub fn block_count_stirling_ln(n: usize, k: usize) -> f64 {
    let l = (n / k) as f64;
    let m = k as f64 * l;
    let q = n as f64 / k as f64;
    let ln_k_fact: f64 = (1..=k).map(|i| (i as f64).ln()).sum();
    0.5 * (2.0 * std::f64::consts::PI).ln() + (m + 0.5) * m.ln() - m
        - (l * ln_k_fact + (q + 0.5) * q.ln() + 1.0 - q)
}

/// Calls `f` with every partition of `items` into blocks of size `k`
/// (each block sorted, blocks ordered by least element).
fn for_each_block_partition(items: &[usize], k: usize, f: &mut dyn FnMut(&[Vec<usize>])) {
    fn go(rest: &[usize], k: usize, blocks: &mut Vec<Vec<usize>>, f: &mut dyn FnMut(&[Vec<usize>])) {
        let Some((&first, others)) = rest.split_first() else {
            f(blocks);
            return;
        };
        for mut chosen in itertools::Itertools::combinations(others.iter().copied(), k - 1) {
            chosen.insert(0, first);
            let remaining: Vec<usize> = others.iter().copied().filter(|v| !chosen.contains(v)).collect();
            blocks.push(chosen);
            go(&remaining, k, blocks, f);
            blocks.pop();
        }
    }
    if items.len() % k == 0 {
        go(items, k, &mut Vec::new(), f);
    }
}

/// Limit on the number of members materialized by [`component_lowerbound_members`].
pub const MEMBER_BUDGET: usize = 1_000_000;

/// Members on `[n]` produced by spreading `l` size-`k` components of `m` over `[n]`.
///
/// With `D` the constant elements, `l = floor((n - |D|) / k)` components
/// `A_1..A_l` are placed on the blocks of every partition of the first `n_0`
/// positions into size-`k` blocks, while `D` and a remainder `B` taken from a
/// further component occupy the last positions. Structures from different
/// block partitions differ in their size-`k` components, so all are distinct.
/// When `spec` is given every produced member is checked for membership.
pub fn component_lowerbound_members(
    m: &Structure,
    k: usize,
    n: usize,
    spec: Option<&PropertySpec>,
) -> Result<Vec<Structure>> {
    if k == 0 {
        return Err(Error::Precondition("k must be positive".into()));
    }
    let d: BTreeSet<usize> = m.constant_values().iter().copied().collect();
    if n < d.len() {
        return Err(Error::TooSmall(format!("n = {n} is smaller than the {} constants", d.len())));
    }
    let l = (n - d.len()) / k;
    let b_size = n - d.len() - k * l;
    let candidates: Vec<Vec<usize>> = components_of(m)
        .components
        .into_iter()
        .filter(|c| c.len() == k && c.iter().all(|v| !d.contains(v)))
        .collect();
    if candidates.len() < l + 1 {
        return Err(Error::InsufficientComponents(format!(
            "need {} disjoint components of size {k} avoiding the constants, found {}",
            l + 1,
            candidates.len()
        )));
    }
    let n0 = k * l;
    if n0 > 0 {
        let total = partitions_into_blocks(n0, k)?.count;
        if total > BigUint::from(MEMBER_BUDGET) {
            return Err(Error::BudgetExceeded(format!("{total} members exceed the budget {MEMBER_BUDGET}")));
        }
    }
    // D and B go to the last positions, in increasing order
    let tail: Vec<usize> = d.iter().copied().chain(candidates[l][..b_size].iter().copied()).collect();
    let mut domain: Vec<usize> = candidates[..l].iter().flatten().copied().collect();
    domain.extend(&tail);
    domain.sort_unstable();
    let (sub, order) = m.induced_substructure(&domain)?;
    let mut index = BTreeMap::new();
    for (i, &v) in order.iter().enumerate() {
        index.insert(v, i);
    }
    let positions: Vec<usize> = (0..n0).collect();
    let mut out = BTreeSet::new();
    for_each_block_partition(&positions, k, &mut |blocks| {
        let mut f = vec![usize::MAX; n];
        for (component, block) in candidates[..l].iter().zip(blocks) {
            for (&v, &p) in component.iter().zip(block) {
                f[index[&v]] = p;
            }
        }
        for (i, &v) in tail.iter().enumerate() {
            f[index[&v]] = n0 + i;
        }
        out.insert(sub.relabel_unchecked(&f, n));
    });
    if n0 == 0 {
        let f: Vec<usize> = (0..n).collect();
        out.insert(sub.relabel_unchecked(&f, n));
    }
    if let Some(spec) = spec {
        for g in &out {
            if !spec.contains(g)? {
                return Err(Error::Precondition(format!("constructed structure is not a member:\n{g}")));
            }
        }
    }
    Ok(out.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::property::Predicate;

    fn matching(pairs: usize) -> Structure {
        let e: Vec<_> = (0..pairs).map(|i| (2 * i, 2 * i + 1)).collect();
        Structure::graph(2 * pairs, &e).unwrap()
    }

    fn triangles(count: usize) -> Structure {
        let mut e = vec![];
        for i in 0..count {
            let b = 3 * i;
            e.extend([(b, b + 1), (b + 1, b + 2), (b, b + 2)]);
        }
        Structure::graph(3 * count, &e).unwrap()
    }

    #[test]
    fn component_examples() {
        let r = components_of(&triangles(2));
        assert_eq!(r.components, vec![vec![0, 1, 2], vec![3, 4, 5]]);
        let h = Structure::uniform_hypergraph(4, 3, &[vec![0, 1, 2]]).unwrap();
        assert_eq!(components_of(&h).components, vec![vec![0, 1, 2], vec![3]]);
        let path = Structure::graph(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(components_of(&path).components, vec![vec![0, 1, 2]]);
    }

    #[test]
    fn neighborhoods() {
        assert_eq!(neighborhood(&triangles(1), 0).unwrap(), [0, 1, 2].into());
        assert!(neighborhood(&Structure::graph(2, &[]).unwrap(), 1).unwrap().is_empty());
        assert_eq!(neighborhood(&matching(2), 2).unwrap(), [2, 3].into());
        assert!(neighborhood(&matching(2), 4).is_err());
    }

    #[test]
    fn census() {
        let c = component_census(&PropertySpec::graph_predicate(Predicate::Matching), 8).unwrap();
        assert_eq!(
            c,
            vec![
                CensusEntry { size: 1, max_multiplicity: 8, larger_exists: true },
                CensusEntry { size: 2, max_multiplicity: 4, larger_exists: false },
            ]
        );
        let c = component_census(&PropertySpec::graph_predicate(Predicate::Edgeless), 8).unwrap();
        assert_eq!(c, vec![CensusEntry { size: 1, max_multiplicity: 8, larger_exists: false }]);
        let c = component_census(&PropertySpec::graph_predicate(Predicate::All), 6).unwrap();
        assert_eq!(c.iter().map(|e| e.size).collect::<Vec<_>>(), vec![1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn block_counts() {
        assert_eq!(partitions_into_blocks(6, 2).unwrap().count, BigUint::from(15u32));
        assert_eq!(partitions_into_blocks(6, 3).unwrap().count, BigUint::from(10u32));
        assert_eq!(partitions_into_blocks(4, 4).unwrap().count, BigUint::one());
        // floor(7 / 2) = 3 blocks on [6]
        assert_eq!(partitions_into_blocks(7, 2).unwrap().count, BigUint::from(15u32));
    }

    #[test]
    fn lower_bound_members() {
        let spec = PropertySpec::graph_predicate(Predicate::Matching);
        let got = component_lowerbound_members(&matching(4), 2, 6, Some(&spec)).unwrap();
        assert_eq!(got.len(), 15);
        let spec = PropertySpec::graph_predicate(Predicate::All);
        let got = component_lowerbound_members(&triangles(3), 3, 6, Some(&spec)).unwrap();
        assert_eq!(got.len(), 10);
        let got = component_lowerbound_members(&Structure::graph(7, &[]).unwrap(), 1, 6, None).unwrap();
        assert_eq!(got, vec![Structure::graph(6, &[]).unwrap()]);
        assert!(matches!(
            component_lowerbound_members(&matching(3), 2, 6, None),
            Err(Error::InsufficientComponents(_))
        ));
    }

    #[test]
    fn remainder_and_odd_n() {
        // n = 7: three blocks on [6] plus one element of a fourth edge
        let got = component_lowerbound_members(&matching(4), 2, 7, None).unwrap();
        assert_eq!(got.len(), 15);
        assert!(got.iter().all(|g| g.n() == 7 && g.edges().len() == 3));
    }
}
