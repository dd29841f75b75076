//! Membership in the density classes and the blow-up lower-bound construction.

use itertools::Itertools;
use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{One, Zero};

use super::{density, is_strictly_balanced, max_subgraph_density, Hypergraph};
use crate::error::{Error, Result};

/// Largest number of vertex subsets scanned by [`in_p`].
pub const P_BUDGET: u64 = 5_000_000;
/// Largest number of blow-up members listed explicitly.
pub const BLOWUP_BUDGET: u64 = 1_000_000;

fn at_most(e: usize, v: usize, c: Rational64) -> bool {
    Rational64::from_integer(e as i64) <= c * v as i64
}

/// Every subhypergraph `H` has `e(H) <= c v(H)`.
pub fn in_q(g: &Hypergraph, c: Rational64) -> bool {
    g.v() == 0 || max_subgraph_density(g).map(|(d, _)| d <= c).unwrap_or(true)
}

/// `e(G) <= c v(G)`.
pub fn in_s(g: &Hypergraph, c: Rational64) -> bool {
    at_most(g.e(), g.v(), c)
}

fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    (0..k).fold(BigUint::one(), |acc, i| acc * (n - i) / (i + 1))
}

/// `e(H) <= c v(H)` for every subhypergraph on exactly `nu_i` vertices.
pub fn in_p(g: &Hypergraph, nu: &[usize], c: Rational64) -> Result<bool> {
    let sizes: Vec<usize> = nu.iter().copied().filter(|&s| s >= 1 && s <= g.v()).collect();
    let total: BigUint = sizes.iter().map(|&s| binomial(g.v(), s)).sum();
    let masks = match g.masks() {
        Some(m) if total <= BigUint::from(P_BUDGET) => m,
        _ => return Err(Error::BudgetExceeded(format!("{total} vertex subsets of a {}-vertex hypergraph", g.v()))),
    };
    for s in sizes {
        // the densest subhypergraph on a vertex set is the induced one
        let limit = c * s as i64;
        for subset in (0..g.v()).combinations(s) {
            let m = subset.iter().fold(0u128, |m, &x| m | 1 << x);
            let e = masks.iter().filter(|&&f| f & m == f).count();
            if Rational64::from_integer(e as i64) > limit {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `sum_{j <= ceil(c n)} C(C(n, r), j)`, an upper bound on the number of members of
/// the global-density class on `[n]`.
pub fn s_upper_bound(r: usize, c: Rational64, n: usize) -> BigUint {
    let slots = binomial(n, r);
    let top = (c * n as i64).ceil().to_integer().max(0) as u64;
    let mut term = BigUint::one();
    let mut sum = BigUint::one();
    for j in 1..=top {
        if BigUint::from(j) > slots {
            break;
        }
        term = term * (&slots - BigUint::from(j - 1)) / j;
        sum += &term;
    }
    sum
}

/// Consecutive blocks of `0..n` with sizes differing by at most one, larger blocks first.
pub fn equipartition(n: usize, t: usize) -> Vec<Vec<usize>> {
    let (q, extra) = n.div_rem(&t);
    let mut start = 0;
    (0..t)
        .map(|i| {
            let len = q + usize::from(i < extra);
            let block = (start..start + len).collect();
            start += len;
            block
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Blowup {
    pub parts: Vec<Vec<usize>>,
    pub count: BigUint,
    /// `(floor(n / t)!)^{(r - 1) e(H)}`.
    pub lower_bound: BigUint,
    /// Present unless only the count was requested.
    pub members: Option<Vec<Hypergraph>>,
}

fn falling(n: usize, k: usize) -> BigUint {
    (n - k + 1..=n).fold(BigUint::one(), |acc, x| acc * x)
}

/// Every maximal matching of transversals of `parts`: the smallest part is covered,
/// and each other part receives an injective image of it.
fn matchings(parts: &[&Vec<usize>]) -> Vec<Vec<Vec<usize>>> {
    let anchor = (0..parts.len()).min_by_key(|&i| parts[i].len()).expect("nonempty edge");
    let s = parts[anchor].len();
    let choices: Vec<Vec<Vec<usize>>> = parts
        .iter()
        .enumerate()
        .map(|(i, p)| if i == anchor { vec![p.to_vec()] } else { p.iter().copied().permutations(s).collect() })
        .collect();
    choices
        .into_iter()
        .multi_cartesian_product()
        .map(|images| {
            (0..s)
                .map(|j| {
                    let mut e: Vec<usize> = images.iter().map(|img| img[j]).collect();
                    e.sort_unstable();
                    e
                })
                .collect()
        })
        .collect()
}

/// Members built from a strictly balanced `h` on `[t]`: split `[n]` into an equipartition
/// `W_1, ..., W_t` and, for each edge of `h`, add a maximal matching of transversals of its parts.
pub fn blowup_members(h: &Hypergraph, n: usize, count_only: bool) -> Result<Blowup> {
    let (t, r) = (h.v(), h.r());
    if n < t * r {
        return Err(Error::TooSmall(format!("n = {n} < t r = {}", t * r)));
    }
    if !is_strictly_balanced(h) {
        return Err(Error::Precondition("template hypergraph is not strictly balanced".into()));
    }
    let parts = equipartition(n, t);
    let per_edge: Vec<BigUint> = h
        .edges()
        .iter()
        .map(|e| {
            let s = e.iter().map(|&x| parts[x].len()).min().expect("r >= 2");
            // ordered choices of images for each part, with the anchor part's order fixed
            e.iter().map(|&x| falling(parts[x].len(), s)).fold(BigUint::one(), |a, b| a * b) / falling(s, s)
        })
        .collect();
    let count: BigUint = per_edge.iter().product();
    let floor_fact = falling(n / t, n / t);
    let lower_bound = num_traits::pow(floor_fact, (r - 1) * h.e());
    let members = if count_only {
        None
    } else {
        if count > BigUint::from(BLOWUP_BUDGET) {
            return Err(Error::BudgetExceeded(format!("{count} blow-up members")));
        }
        let rho = density(h)?;
        let options: Vec<Vec<Vec<Vec<usize>>>> =
            h.edges().iter().map(|e| matchings(&e.iter().map(|&x| &parts[x]).collect::<Vec<_>>())).collect();
        let mut out = Vec::new();
        for pick in options.into_iter().multi_cartesian_product() {
            let g = Hypergraph::new(r, n, pick.into_iter().flatten().collect())?;
            if !in_q(&g, rho) || !in_s(&g, rho) {
                return Err(Error::Precondition(format!("blow-up member exceeds density {rho}")));
            }
            out.push(g);
        }
        Some(out)
    };
    Ok(Blowup { parts, count, lower_bound, members })
}

#[cfg(test)]
mod tests {
    use super::super::tight_cycle;
    use super::*;
    use std::collections::BTreeSet;

    fn q(p: i64, d: i64) -> Rational64 {
        Rational64::new(p, d)
    }

    #[test]
    fn class_examples() {
        let c5 = tight_cycle(2, 5).unwrap();
        assert!(in_q(&c5, q(1, 1)) && in_s(&c5, q(1, 1)));
        let k4 = Hypergraph::complete(2, 4).unwrap();
        assert!(!in_s(&k4, q(1, 1)));
        assert!(!in_p(&k4, &[3], q(2, 3)).unwrap());
        assert!(in_p(&tight_cycle(2, 4).unwrap(), &[3], q(2, 3)).unwrap());
        // sizes above v impose nothing
        assert!(in_p(&k4, &[5], q(0, 1)).unwrap());
    }

    #[test]
    fn p_budget() {
        let big = Hypergraph::edgeless(2, 60).unwrap();
        assert!(matches!(in_p(&big, &[30], q(1, 1)), Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn equipartitions() {
        assert_eq!(equipartition(7, 3), vec![vec![0, 1, 2], vec![3, 4], vec![5, 6]]);
    }

    #[test]
    fn single_edge_blowups() {
        let e3 = Hypergraph::complete(3, 3).unwrap();
        let b = blowup_members(&e3, 9, false).unwrap();
        assert_eq!(b.count, BigUint::from(36u8));
        let members = b.members.unwrap();
        assert_eq!(members.iter().collect::<BTreeSet<_>>().len(), 36);
        assert!(b.lower_bound <= b.count);

        let e2 = Hypergraph::complete(2, 2).unwrap();
        assert_eq!(blowup_members(&e2, 8, true).unwrap().count, BigUint::from(24u8));
        assert!(matches!(blowup_members(&e2, 3, true), Err(Error::TooSmall(_))));
    }

    #[test]
    fn uneven_parts() {
        // a single edge with parts of sizes 3 and 2: injections of the smaller part
        let e2 = Hypergraph::complete(2, 2).unwrap();
        let b = blowup_members(&e2, 5, false).unwrap();
        assert_eq!(b.count, BigUint::from(6u8));
        assert_eq!(b.members.unwrap().len(), 6);
    }

    #[test]
    fn triangle_blowup() {
        let k3 = Hypergraph::complete(2, 3).unwrap();
        let b = blowup_members(&k3, 6, false).unwrap();
        // two perfect matchings between each pair of 2-sets
        assert_eq!(b.count, BigUint::from(8u8));
        for g in b.members.unwrap() {
            assert!(in_q(&g, q(1, 1)));
        }
    }

    #[test]
    fn rejects_unbalanced() {
        let h = Hypergraph::new(2, 3, vec![vec![0, 1]]).unwrap();
        assert!(matches!(blowup_members(&h, 6, true), Err(Error::Precondition(_))));
    }

    #[test]
    fn s_bound_counts_sparse_graphs() {
        // c n = 1 on [3]: at most one edge among three
        assert_eq!(s_upper_bound(2, q(1, 3), 3), BigUint::from(4u8));
        // the bound is at least the brute-force count of the class
        let n = 5;
        let brute = (0..1u32 << 10).filter(|s| s.count_ones() as usize <= n / 2).count();
        assert!(s_upper_bound(2, q(1, 2), n) >= BigUint::from(brute));
    }
}
