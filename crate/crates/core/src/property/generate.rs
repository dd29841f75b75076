//! Isomorph-free generation of members, one new element at a time.
//!
//! Every member on `n + 1` elements restricts to a member on its first `n`
//! elements, so extending canonical representatives of level `n` by every
//! admissible set of tuples through a new element reaches every isomorphism
//! class of level `n + 1`. Children are deduplicated by canonical form.

use std::collections::BTreeMap;

use itertools::Itertools;
use num_bigint::BigUint;
use num_traits::{One, Zero};
use rayon::prelude::*;

use super::{Ambient, PropertySpec};
use crate::error::{Error, Result};
use crate::structures::{canonical_form, for_each_tuple, permutations, Structure, Tuple};

/// Largest number of independent tuple blocks through a new element.
const MAX_BLOCKS: usize = 24;

/// Tuple blocks that may be added together when element `v` joins `0..v`.
fn blocks(spec: &PropertySpec, v: usize) -> Vec<Vec<(usize, Tuple)>> {
    match spec.ambient {
        Ambient::Graph => (0..v).map(|u| vec![(0, vec![u, v]), (0, vec![v, u])]).collect(),
        Ambient::Uniform(r) => (0..v)
            .combinations(r - 1)
            .map(|mut s| {
                s.push(v);
                permutations(&s).into_iter().map(|p| (0, p)).collect()
            })
            .collect(),
        Ambient::Relational => {
            let mut out = Vec::new();
            for (rel, sym) in spec.language.relations().iter().enumerate() {
                for_each_tuple(v + 1, sym.arity, |t| {
                    if t.contains(&v) {
                        out.push(vec![(rel, t.to_vec())]);
                    }
                });
            }
            out
        }
    }
}

/// Canonical representatives of the members on `0..=n_max` elements, level by level,
/// each paired with its automorphism group order.
fn levels(spec: &PropertySpec, n_max: usize) -> Result<Vec<BTreeMap<Structure, BigUint>>> {
    levels_until(spec, n_max, |_| false)
}

/// Like [`levels`], but stops after the first level on which `stop` returns true.
pub(crate) fn levels_until(
    spec: &PropertySpec,
    n_max: usize,
    mut stop: impl FnMut(&BTreeMap<Structure, BigUint>) -> bool,
) -> Result<Vec<BTreeMap<Structure, BigUint>>> {
    spec.check_budget(n_max)?;
    let empty = Structure::empty(spec.language.clone(), 0)?;
    let mut first = BTreeMap::new();
    if spec.contains(&empty)? {
        first.insert(empty, BigUint::one());
    }
    let halt = stop(&first);
    let mut out = vec![first];
    if halt {
        return Ok(out);
    }
    for n in 0..n_max {
        let options = blocks(spec, n);
        if options.len() > MAX_BLOCKS {
            return Err(Error::BudgetExceeded(format!(
                "{} tuple blocks through a new element at n = {}",
                options.len(),
                n + 1
            )));
        }
        let parents: Vec<&Structure> = out[n].keys().collect();
        let children = parents
            .par_iter()
            .map(|parent| -> Result<BTreeMap<Structure, BigUint>> {
                let mut found = BTreeMap::new();
                for mask in 0u32..1 << options.len() {
                    let extra: Vec<(usize, Tuple)> = options
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask >> i & 1 == 1)
                        .flat_map(|(_, b)| b.iter().cloned())
                        .collect();
                    let child = parent.extended(n + 1, &extra);
                    if spec.accepts_extension(&child)? {
                        let c = canonical_form(&child);
                        found.entry(c.form).or_insert(c.group.order);
                    }
                }
                Ok(found)
            })
            .try_reduce(BTreeMap::new, |mut a, b| {
                a.extend(b);
                Ok(a)
            })?;
        let halt = stop(&children);
        out.push(children);
        if halt {
            break;
        }
    }
    Ok(out)
}

/// Canonical representatives of the members on `0..=n_max` elements, sorted within each level.
pub fn members(spec: &PropertySpec, n_max: usize) -> Result<Vec<Vec<Structure>>> {
    Ok(levels(spec, n_max)?.into_iter().map(|l| l.into_keys().collect()).collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpeedRow {
    pub n: usize,
    /// Number of members on `[n]`.
    pub labeled: BigUint,
    /// Number of isomorphism classes.
    pub unlabeled: usize,
    /// `n! / |Aut|` for each class, in canonical-form order.
    pub multiplicities: Vec<BigUint>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpeedTable {
    pub rows: Vec<SpeedRow>,
}

impl SpeedTable {
    pub fn labeled(&self) -> Vec<BigUint> {
        self.rows.iter().map(|r| r.labeled.clone()).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,labeled,unlabeled\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{}\n", r.n, r.labeled, r.unlabeled));
        }
        s
    }
}

/// Exact speed `|H_n|` for `1 <= n <= n_max`.
pub fn speed(spec: &PropertySpec, n_max: usize) -> Result<SpeedTable> {
    let levels = levels(spec, n_max)?;
    let mut factorial = BigUint::one();
    let mut rows = Vec::new();
    for (n, level) in levels.into_iter().enumerate().skip(1) {
        factorial *= n;
        let multiplicities: Vec<BigUint> = level.values().map(|aut| &factorial / aut).collect();
        let labeled = multiplicities.iter().fold(BigUint::zero(), |acc, m| acc + m);
        rows.push(SpeedRow { n, labeled, unlabeled: multiplicities.len(), multiplicities });
    }
    Ok(SpeedTable { rows })
}

#[cfg(test)]
mod tests {
    use super::super::Predicate;
    use super::*;
    use crate::structures::Language;
    use std::sync::Arc;

    fn big(values: &[u64]) -> Vec<BigUint> {
        values.iter().map(|&v| BigUint::from(v)).collect()
    }

    #[test]
    fn all_graphs() {
        let t = speed(&PropertySpec::graph_predicate(Predicate::All), 5).unwrap();
        assert_eq!(t.labeled(), big(&[1, 2, 8, 64, 1024]));
        let unlabeled: Vec<usize> = t.rows.iter().map(|r| r.unlabeled).collect();
        assert_eq!(unlabeled, vec![1, 2, 4, 11, 34]);
    }

    #[test]
    fn matchings_follow_the_involution_recurrence() {
        let p3 = Structure::graph(3, &[(0, 1), (1, 2)]).unwrap();
        let k3 = Structure::graph(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let spec = PropertySpec::forbid_graphs(vec![p3, k3]).unwrap();
        let mut oracle = vec![1u64, 1];
        for n in 2..=8 {
            oracle.push(oracle[n - 1] + (n as u64 - 1) * oracle[n - 2]);
        }
        assert_eq!(speed(&spec, 8).unwrap().labeled(), big(&oracle[1..]));
    }

    #[test]
    fn edgeless_only() {
        let spec = PropertySpec::forbid_graphs(vec![Structure::graph(2, &[(0, 1)]).unwrap()]).unwrap();
        assert_eq!(speed(&spec, 6).unwrap().labeled(), big(&[1; 6]));
    }

    #[test]
    fn uniform_hypergraphs() {
        let spec = PropertySpec::new(
            Ambient::Uniform(3),
            Arc::new(Language::single("E", 3)),
            super::super::Mode::ForbiddenInduced(vec![Structure::uniform_hypergraph(4, 3, &[
                vec![0, 1, 2],
                vec![0, 1, 3],
                vec![0, 2, 3],
                vec![1, 2, 3],
            ])
            .unwrap()]),
        )
        .unwrap();
        // all 3-graphs on 4 vertices except the complete one: 2^4 - 1
        assert_eq!(speed(&spec, 4).unwrap().labeled(), big(&[1, 1, 2, 15]));
    }

    #[test]
    fn relational_ambient() {
        let spec = PropertySpec::new(
            Ambient::Relational,
            Arc::new(Language::single("R", 1)),
            super::super::Mode::ForbiddenInduced(vec![Structure::empty(
                Arc::new(Language::single("R", 1)),
                5,
            )
            .unwrap()]),
        )
        .unwrap();
        // unary predicates on [n]: 2^n
        assert_eq!(speed(&spec, 3).unwrap().labeled(), big(&[2, 4, 8]));
    }

    #[test]
    fn budget_enforced() {
        let spec = PropertySpec::graph_predicate(Predicate::All).with_budget(4);
        assert!(matches!(speed(&spec, 5), Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn csv_header() {
        let t = speed(&PropertySpec::graph_predicate(Predicate::Edgeless), 2).unwrap();
        assert_eq!(t.to_csv(), "n,labeled,unlabeled\n1,1,1\n2,1,1\n");
    }
}
