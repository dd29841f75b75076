//! Split types over finite parameter sets, m-arrays, and mutual algebraicity.
//!
//! For a relation `R` whose positions are split into a free part `x` and a
//! parameter part `y`, the type of an `x`-tuple over a parameter set `A`
//! records which `R(x; a)` hold for `a` in `A^|y|`, together with the equalities
//! among the entries of `x` and between them and elements of `A`.

use std::collections::BTreeMap;

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::property::{bound_violation, members, BoundViolation, PropertySpec, Verdict};
use crate::structures::{for_each_tuple, Structure};

/// A relation with a chosen set of free positions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Split {
    pub relation: usize,
    /// Free positions, increasing; the remaining positions take parameters.
    pub x_positions: Vec<usize>,
}

impl Split {
    pub fn new(m: &Structure, relation: usize, x_positions: &[usize]) -> Result<Self> {
        let arity = m
            .language()
            .relations()
            .get(relation)
            .ok_or_else(|| Error::UnknownRelation(format!("#{}", relation + 1)))?
            .arity;
        let mut xs = x_positions.to_vec();
        xs.sort_unstable();
        xs.dedup();
        if xs.len() != x_positions.len() || xs.iter().any(|&p| p >= arity) {
            return Err(Error::BadSplit(format!("positions {x_positions:?} for arity {arity}")));
        }
        if xs.is_empty() || xs.len() == arity {
            return Err(Error::BadSplit("both sides of the split must be nonempty".into()));
        }
        Ok(Split { relation, x_positions: xs })
    }

    /// Every split of a relation, in order of free-part size then position.
    pub fn all(m: &Structure, relation: usize) -> Vec<Split> {
        let arity = m.language().relations()[relation].arity;
        (1..arity)
            .flat_map(|s| (0..arity).combinations(s))
            .map(|xs| Split { relation, x_positions: xs })
            .collect()
    }

    fn arity(&self, m: &Structure) -> usize {
        m.language().relations()[self.relation].arity
    }

    fn y_positions(&self, m: &Structure) -> Vec<usize> {
        (0..self.arity(m)).filter(|p| !self.x_positions.contains(p)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RSplitType {
    pub split: Split,
    /// The parameter set, increasing.
    pub params: Vec<usize>,
    /// Decisions in basis order: `x_i = x_j` for `i < j`, then `x_i = a` for each
    /// `i` and `a` in `params`, then `R(x; a)` for `a` in `params^|y|` lexicographically.
    pub decisions: Vec<bool>,
    /// The `x`-tuples realizing the type, increasing.
    pub realizations: Vec<Vec<usize>>,
}

fn decisions_of(m: &Structure, split: &Split, ys: &[usize], params: &[usize], x: &[usize]) -> Vec<bool> {
    let arity = split.arity(m);
    let mut d = Vec::new();
    for (i, j) in (0..x.len()).tuple_combinations() {
        d.push(x[i] == x[j]);
    }
    for &xi in x {
        for &a in params {
            d.push(xi == a);
        }
    }
    let mut tuple = vec![0; arity];
    for (slot, &p) in split.x_positions.iter().zip(x) {
        tuple[*slot] = p;
    }
    for_each_tuple(params.len(), ys.len(), |idx| {
        for (slot, &i) in ys.iter().zip(idx) {
            tuple[*slot] = params[i];
        }
        d.push(m.holds(split.relation, &tuple));
    });
    d
}

/// The realized types of `split` over `params`, ordered by decision vector.
///
/// Every `x`-tuple over the domain (entries not necessarily distinct) realizes exactly one.
pub fn type_space(m: &Structure, split: &Split, params: &[usize]) -> Result<Vec<RSplitType>> {
    for &a in params {
        m.check_element(a)?;
    }
    let params: Vec<usize> = params.iter().copied().sorted().dedup().collect();
    let ys = split.y_positions(m);
    let mut by_type: BTreeMap<Vec<bool>, Vec<Vec<usize>>> = BTreeMap::new();
    for_each_tuple(m.n(), split.x_positions.len(), |x| {
        by_type.entry(decisions_of(m, split, &ys, &params, x)).or_default().push(x.to_vec());
    });
    Ok(by_type
        .into_iter()
        .map(|(decisions, realizations)| RSplitType {
            split: split.clone(),
            params: params.clone(),
            decisions,
            realizations,
        })
        .collect())
}

/// The decisions over `sub` (a subset of the type's parameters) of any realization.
pub fn restrict_type(m: &Structure, p: &RSplitType, sub: &[usize]) -> Vec<bool> {
    let sub: Vec<usize> = sub.iter().copied().sorted().dedup().collect();
    let ys = p.split.y_positions(m);
    decisions_of(m, &p.split, &ys, &sub, &p.realizations[0])
}

/// `m` pairwise disjoint realizations, found by branch and bound.
pub fn supports_m_array(p: &RSplitType, m: usize) -> Option<Vec<Vec<usize>>> {
    if m == 0 {
        return Some(vec![]);
    }
    let supports: Vec<Vec<usize>> =
        p.realizations.iter().map(|t| t.iter().copied().sorted().dedup().collect()).collect();
    let universe = supports.iter().flatten().max().map_or(0, |&v| v + 1);
    let mut used = vec![false; universe];
    let mut chosen = Vec::with_capacity(m);

    // greedy seed: smallest supports first
    let order: Vec<usize> = (0..supports.len()).sorted_by_key(|&i| (supports[i].len(), i)).collect();
    for &i in &order {
        if supports[i].iter().all(|&v| !used[v]) {
            supports[i].iter().for_each(|&v| used[v] = true);
            chosen.push(i);
            if chosen.len() == m {
                return Some(chosen.iter().map(|&i| p.realizations[i].clone()).collect());
            }
        }
    }
    used.iter_mut().for_each(|u| *u = false);
    chosen.clear();
    let min_support = supports.iter().map(Vec::len).min().unwrap_or(1).max(1);

    fn search(
        order: &[usize],
        from: usize,
        supports: &[Vec<usize>],
        used: &mut [bool],
        free: usize,
        min_support: usize,
        chosen: &mut Vec<usize>,
        m: usize,
    ) -> bool {
        if chosen.len() == m {
            return true;
        }
        let need = m - chosen.len();
        if order.len() - from < need || free / min_support < need {
            return false;
        }
        for pos in from..order.len() {
            if order.len() - pos < need {
                break;
            }
            let s = &supports[order[pos]];
            if s.iter().any(|&v| used[v]) {
                continue;
            }
            s.iter().for_each(|&v| used[v] = true);
            chosen.push(order[pos]);
            if search(order, pos + 1, supports, used, free - s.len(), min_support, chosen, m) {
                return true;
            }
            chosen.pop();
            s.iter().for_each(|&v| used[v] = false);
        }
        false
    }

    search(&order, 0, &supports, &mut used, universe, min_support, &mut chosen, m)
        .then(|| chosen.iter().map(|&i| p.realizations[i].clone()).collect())
}

/// Number of types of `split` over `params` that support an `m`-array.
pub fn n_array_count(m: &Structure, split: &Split, size: usize, params: &[usize]) -> Result<usize> {
    Ok(type_space(m, split, params)?.iter().filter(|p| supports_m_array(p, size).is_some()).count())
}

/// Checks that every assignment to every proper part of `R`'s positions has fewer than `k` completions.
pub fn is_k_mutually_algebraic(m: &Structure, relation: usize, k: usize) -> Result<Verdict<BoundViolation>> {
    if relation >= m.language().relations().len() {
        return Err(Error::UnknownRelation(format!("#{}", relation + 1)));
    }
    Ok(bound_violation(m, relation, k).map_or(Verdict::Consistent, Verdict::Refuted))
}

/// Default largest parameter set searched by [`bounded_array_probe`].
pub const DEFAULT_A_MAX: usize = 6;
const EXHAUSTIVE_A: usize = 3;
const CLIMB_STEPS: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeRow {
    pub n: usize,
    /// Largest `N` found over members on `[n]` and searched parameter sets.
    pub max_n: usize,
    /// Index of the witness member within its level and the parameter set.
    pub witness: Option<(usize, Vec<usize>)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeTable {
    pub seed: u64,
    pub rows: Vec<ProbeRow>,
}

impl ProbeTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,maxN,witness_id\n");
        for r in &self.rows {
            let id = r.witness.as_ref().map_or(String::new(), |(i, _)| i.to_string());
            s.push_str(&format!("{},{},{}\n", r.n, r.max_n, id));
        }
        s
    }

    /// Whether the maxima never decrease and strictly increase at least once.
    pub fn grows(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].max_n >= w[0].max_n)
            && self.rows.windows(2).any(|w| w[1].max_n > w[0].max_n)
    }
}

fn best_over_params(m: &Structure, split: &Split, size: usize, a_max: usize, rng: &mut ChaCha8Rng) -> (usize, Vec<usize>) {
    let n = m.n();
    let score = |a: &[usize]| n_array_count(m, split, size, a).expect("parameters are in range");
    let mut best = (score(&[]), vec![]);
    for s in 1..=a_max.min(EXHAUSTIVE_A).min(n) {
        for a in (0..n).combinations(s) {
            let v = score(&a);
            if v > best.0 {
                best = (v, a);
            }
        }
    }
    let elements: Vec<usize> = (0..n).collect();
    for s in EXHAUSTIVE_A + 1..=a_max.min(n) {
        let mut current: Vec<usize> = elements.choose_multiple(rng, s).copied().sorted().collect();
        let mut value = score(&current);
        for _ in 0..CLIMB_STEPS {
            let out = rng.gen_range(0..s);
            let outside: Vec<usize> = elements.iter().copied().filter(|e| !current.contains(e)).collect();
            let Some(&incoming) = outside.choose(rng) else { break };
            let mut next = current.clone();
            next[out] = incoming;
            next.sort_unstable();
            let v = score(&next);
            if v >= value {
                current = next;
                value = v;
            }
        }
        if value > best.0 {
            best = (value, current);
        }
    }
    best
}

/// For each `n <= n_max`, the largest `N^M` over members on `[n]` and parameter sets.
///
/// Parameter sets of size at most 3 are searched exhaustively; larger ones up
/// to `a_max` by seeded hill climbing. Rows start at `n = size`, since smaller
/// domains cannot hold `size` disjoint tuples.
pub fn bounded_array_probe(
    spec: &PropertySpec,
    split_of: impl Fn(&Structure) -> Result<Split> + Sync,
    size: usize,
    n_max: usize,
    a_max: usize,
    seed: u64,
) -> Result<ProbeTable> {
    let levels = members(spec, n_max)?;
    let mut rows = Vec::new();
    for (n, level) in levels.iter().enumerate().skip(size.max(1)) {
        let results: Vec<(usize, Vec<usize>)> = level
            .par_iter()
            .enumerate()
            .map(|(i, m)| {
                let split = split_of(m)?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((n as u64) << 32) ^ i as u64);
                Ok(best_over_params(m, &split, size, a_max, &mut rng))
            })
            .collect::<Result<_>>()?;
        let mut row = ProbeRow { n, max_n: 0, witness: None };
        for (i, (v, a)) in results.into_iter().enumerate() {
            if row.witness.is_none() || v > row.max_n {
                row.max_n = v;
                row.witness = Some((i, a));
            }
        }
        rows.push(row);
    }
    Ok(ProbeTable { seed, rows })
}
