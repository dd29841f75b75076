//! The swap-equivalence `a ~ b` and canonical decompositions.
//!
//! `a ~ b` holds when exchanging `a` and `b` (and fixing everything else) is an
//! automorphism. Elements interpreting constants are only related to
//! themselves. The classes of `~` are listed by size, ties broken by least
//! element, and every atom's extension is a union of products of classes.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde_json::{json, Value};

use crate::error::Result;
use crate::structures::{all_atoms, for_each_injective, AtomicDiff, Language, Structure, Tuple};

/// Class-index signatures of an atom.
pub type Signature = BTreeSet<Vec<usize>>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    /// Classes ordered by size, then least element; each class sorted.
    pub classes: Vec<Vec<usize>>,
    /// For each atom, the class tuples (zero-based) on which it holds.
    pub sigma: BTreeMap<AtomicDiff, Signature>,
}

impl Decomposition {
    /// `class_of[v]` is the index of the class containing `v`.
    pub fn class_of(&self, n: usize) -> Vec<usize> {
        let mut out = vec![usize::MAX; n];
        for (i, class) in self.classes.iter().enumerate() {
            for &v in class {
                out[v] = i;
            }
        }
        out
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.classes.iter().map(Vec::len).collect()
    }

    pub fn to_json(&self, language: &Language) -> Value {
        let classes: Vec<Vec<usize>> =
            self.classes.iter().map(|c| c.iter().map(|e| e + 1).collect()).collect();
        let sigma: BTreeMap<String, Vec<Vec<usize>>> = self
            .sigma
            .iter()
            .map(|(atom, sig)| {
                (atom.key(language), sig.iter().map(|t| t.iter().map(|i| i + 1).collect()).collect())
            })
            .collect();
        json!({ "classes": classes, "sigma": sigma })
    }
}

pub fn sim_related(m: &Structure, a: usize, b: usize) -> Result<bool> {
    m.check_element(a)?;
    m.check_element(b)?;
    if a == b {
        return Ok(true);
    }
    if m.is_constant(a) || m.is_constant(b) {
        return Ok(false);
    }
    Ok(m.transposition_is_automorphism(a, b))
}

pub fn decomposition(m: &Structure) -> Decomposition {
    let n = m.n();
    let mut class_of = vec![usize::MAX; n];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for a in 0..n {
        if class_of[a] != usize::MAX {
            continue;
        }
        let id = classes.len();
        class_of[a] = id;
        let mut class = vec![a];
        for b in a + 1..n {
            if class_of[b] == usize::MAX && sim_related(m, a, b).expect("in range") {
                class_of[b] = id;
                class.push(b);
            }
        }
        classes.push(class);
    }
    classes.sort_by_key(|c| (c.len(), c[0]));
    for (i, class) in classes.iter().enumerate() {
        for &v in class {
            class_of[v] = i;
        }
    }
    let sigma = signatures(m, &class_of);
    Decomposition { classes, sigma }
}

pub fn class_count(m: &Structure) -> usize {
    decomposition(m).classes.len()
}

/// Computes the signature of every atom with respect to a partition.
///
/// Panics if some atom is not uniform on a product of parts, which cannot
/// happen for the partition into `~`-classes.
pub(crate) fn signatures(m: &Structure, class_of: &[usize]) -> BTreeMap<AtomicDiff, Signature> {
    try_signatures(m, class_of).expect("atoms are uniform on products of ~-classes")
}

/// Signatures of a partition, or `None` if some atom is not uniform on a product of parts.
pub(crate) fn try_signatures(
    m: &Structure,
    class_of: &[usize],
) -> Option<BTreeMap<AtomicDiff, Signature>> {
    let mut sigma = BTreeMap::new();
    let consts = m.constant_values();
    for atom in all_atoms(m.language(), true) {
        let s = atom.var_count();
        let mut yes: Signature = BTreeSet::new();
        let mut no: Signature = BTreeSet::new();
        let mut ok = true;
        for_each_injective(m.n(), s, |vars| {
            if !ok {
                return;
            }
            let sig: Vec<usize> = vars.iter().map(|&v| class_of[v]).collect();
            let holds = m.holds(atom.relation, &atom.instantiate(vars, consts));
            let (this, other) = if holds { (&mut yes, &no) } else { (&mut no, &yes) };
            if other.contains(&sig) {
                ok = false;
                return;
            }
            this.insert(sig);
        });
        if !ok {
            return None;
        }
        sigma.insert(atom, yes);
    }
    Some(sigma)
}

/// Builds the structure on `0..n` whose atoms hold exactly on the distinct-entry
/// tuples whose class signature lies in `sigma`.
pub fn realize(
    language: &Arc<Language>,
    class_of: &[usize],
    constants: &[usize],
    sigma: &BTreeMap<AtomicDiff, Signature>,
) -> Structure {
    let n = class_of.len();
    let mut relations: Vec<BTreeSet<Tuple>> = vec![BTreeSet::new(); language.relations().len()];
    for (atom, sig) in sigma {
        if sig.is_empty() {
            continue;
        }
        for_each_injective(n, atom.var_count(), |vars| {
            let key: Vec<usize> = vars.iter().map(|&v| class_of[v]).collect();
            if sig.contains(&key) {
                relations[atom.relation].insert(atom.instantiate(vars, constants));
            }
        });
    }
    Structure::new(language.clone(), n, relations, constants.to_vec())
        .expect("realized tuples are in range")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::Slot;

    fn complete_bipartite(a: usize, b: usize) -> Structure {
        let mut edges = vec![];
        for u in 0..a {
            for v in a..a + b {
                edges.push((u, v));
            }
        }
        Structure::graph(a + b, &edges).unwrap()
    }

    fn cycle(n: usize) -> Structure {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Structure::graph(n, &edges).unwrap()
    }

    fn edge_atom() -> AtomicDiff {
        AtomicDiff { relation: 0, pattern: vec![Slot::Var(0), Slot::Var(1)] }
    }

    #[test]
    fn related_examples() {
        let empty = Structure::graph(4, &[]).unwrap();
        assert!(sim_related(&empty, 0, 3).unwrap());
        assert!(sim_related(&cycle(4), 0, 2).unwrap());
        let p3 = Structure::graph(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(!sim_related(&p3, 0, 1).unwrap());
        assert!(sim_related(&p3, 0, 2).unwrap());
        assert!(sim_related(&p3, 0, 9).is_err());
    }

    #[test]
    fn bipartite_decomposition() {
        let d = decomposition(&complete_bipartite(3, 3));
        assert_eq!(d.classes, vec![vec![0, 1, 2], vec![3, 4, 5]]);
        let expect: Signature = [vec![0, 1], vec![1, 0]].into();
        assert_eq!(d.sigma[&edge_atom()], expect);
    }

    #[test]
    fn cycles() {
        assert_eq!(decomposition(&cycle(5)).classes.len(), 5);
        assert_eq!(decomposition(&cycle(4)).classes, vec![vec![0, 2], vec![1, 3]]);
    }

    #[test]
    fn class_counts() {
        assert_eq!(class_count(&Structure::graph(7, &[]).unwrap()), 1);
        let matching = Structure::graph(8, &[(0, 1), (2, 3), (4, 5), (6, 7)]).unwrap();
        assert_eq!(class_count(&matching), 4);
        assert_eq!(class_count(&complete_bipartite(3, 3)), 2);
    }

    #[test]
    fn reconstruction_roundtrip() {
        for m in [cycle(4), cycle(5), complete_bipartite(2, 3)] {
            let d = decomposition(&m);
            let back = realize(m.language(), &d.class_of(m.n()), &[], &d.sigma);
            assert_eq!(back, m);
        }
    }

    #[test]
    fn constants_are_singletons() {
        let lang = Arc::new(Language::new(vec![], vec!["c".into()]).unwrap());
        let m = Structure::new(lang, 3, vec![], vec![1]).unwrap();
        let d = decomposition(&m);
        assert_eq!(d.classes, vec![vec![1], vec![0, 2]]);
    }
}
