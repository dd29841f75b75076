//! Finite relational structures over `[n]`.
//!
//! Elements are stored zero-based (`0..n`); the one-based `[n]` convention is
//! applied only at the JSON boundary (see [`json`]).

mod canon;
mod interp;
pub mod json;

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub use canon::{automorphisms, canonical_form, is_isomorphic, AutomorphismGroup, Canonical};
pub use interp::{apply_interpretation, Formula, Interpretation};

/// A tuple of elements.
pub type Tuple = Vec<usize>;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RelationSymbol {
    pub name: String,
    pub arity: usize,
}

/// A finite language of relation and constant symbols.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Language {
    relations: Vec<RelationSymbol>,
    constants: Vec<String>,
}

impl Language {
    pub fn new(relations: Vec<RelationSymbol>, constants: Vec<String>) -> Result<Self> {
        let mut seen = HashSet::new();
        for rel in &relations {
            if rel.arity == 0 {
                return Err(Error::InvalidLanguage(format!("relation `{}` has arity 0", rel.name)));
            }
            if !seen.insert(rel.name.as_str()) {
                return Err(Error::InvalidLanguage(format!("duplicate relation `{}`", rel.name)));
            }
        }
        let mut seen = HashSet::new();
        for c in &constants {
            if !seen.insert(c.as_str()) {
                return Err(Error::InvalidLanguage(format!("duplicate constant `{c}`")));
            }
        }
        Ok(Language { relations, constants })
    }

    /// Language with a single relation symbol `name` of the given arity.
    pub fn single(name: &str, arity: usize) -> Self {
        Language::new(vec![RelationSymbol { name: name.to_string(), arity }], vec![])
            .expect("single relation language is valid")
    }

    /// The language of graphs, `{E/2}`.
    pub fn graph() -> Self {
        Language::single("E", 2)
    }

    pub fn relations(&self) -> &[RelationSymbol] {
        &self.relations
    }

    pub fn constants(&self) -> &[String] {
        &self.constants
    }

    /// Maximum relation arity, 0 for a language without relations.
    pub fn arity(&self) -> usize {
        self.relations.iter().map(|r| r.arity).max().unwrap_or(0)
    }

    pub fn relation_index(&self, name: &str) -> Result<usize> {
        self.relations
            .iter()
            .position(|r| r.name == name)
            .ok_or_else(|| Error::UnknownRelation(name.to_string()))
    }

    pub fn constant_index(&self, name: &str) -> Option<usize> {
        self.constants.iter().position(|c| c == name)
    }
}

/// A finite structure with domain `0..n`.
///
/// Tuples are ordered and may repeat entries; each relation is an arbitrary
/// subset of `[n]^arity`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Structure {
    language: Arc<Language>,
    n: usize,
    relations: Vec<BTreeSet<Tuple>>,
    constants: Vec<usize>,
}

impl Structure {
    pub fn new(
        language: Arc<Language>,
        n: usize,
        relations: Vec<BTreeSet<Tuple>>,
        constants: Vec<usize>,
    ) -> Result<Self> {
        if relations.len() != language.relations().len() {
            return Err(Error::InvalidStructure(format!(
                "expected {} relations, got {}",
                language.relations().len(),
                relations.len()
            )));
        }
        for (sym, tuples) in language.relations().iter().zip(&relations) {
            for t in tuples {
                if t.len() != sym.arity {
                    return Err(Error::ArityMismatch(format!(
                        "tuple {t:?} in `{}` has length {}, expected {}",
                        sym.name,
                        t.len(),
                        sym.arity
                    )));
                }
                if let Some(&e) = t.iter().find(|&&e| e >= n) {
                    return Err(Error::OutOfRange { element: e, n });
                }
            }
        }
        if constants.len() != language.constants().len() {
            return Err(Error::InvalidStructure(format!(
                "expected {} constant values, got {}",
                language.constants().len(),
                constants.len()
            )));
        }
        if let Some(&e) = constants.iter().find(|&&e| e >= n) {
            return Err(Error::OutOfRange { element: e, n });
        }
        Ok(Structure { language, n, relations, constants })
    }

    /// Structure on `n` elements with every relation empty.
    pub fn empty(language: Arc<Language>, n: usize) -> Result<Self> {
        if !language.constants().is_empty() {
            return Err(Error::InvalidStructure("constants need explicit values".into()));
        }
        let relations = vec![BTreeSet::new(); language.relations().len()];
        Structure::new(language, n, relations, vec![])
    }

    /// A simple graph: every edge `{u, v}` is stored as both `(u, v)` and `(v, u)`.
    pub fn graph(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut tuples = BTreeSet::new();
        for &(u, v) in edges {
            if u == v {
                return Err(Error::InvalidStructure(format!("loop at {u}")));
            }
            tuples.insert(vec![u, v]);
            tuples.insert(vec![v, u]);
        }
        Structure::new(Arc::new(Language::graph()), n, vec![tuples], vec![])
    }

    /// An r-uniform hypergraph as a symmetric relation `E` of arity `r`:
    /// every permutation of every edge is a tuple.
    pub fn uniform_hypergraph(n: usize, r: usize, edges: &[Vec<usize>]) -> Result<Self> {
        let mut tuples = BTreeSet::new();
        for e in edges {
            let set: BTreeSet<usize> = e.iter().copied().collect();
            if e.len() != r || set.len() != r {
                return Err(Error::InvalidStructure(format!("edge {e:?} is not an {r}-set")));
            }
            for p in permutations(e) {
                tuples.insert(p);
            }
        }
        Structure::new(Arc::new(Language::single("E", r)), n, vec![tuples], vec![])
    }

    pub fn language(&self) -> &Arc<Language> {
        &self.language
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn relation(&self, index: usize) -> &BTreeSet<Tuple> {
        &self.relations[index]
    }

    pub fn relations(&self) -> &[BTreeSet<Tuple>] {
        &self.relations
    }

    pub fn relation_by_name(&self, name: &str) -> Result<&BTreeSet<Tuple>> {
        Ok(&self.relations[self.language.relation_index(name)?])
    }

    pub fn constant_values(&self) -> &[usize] {
        &self.constants
    }

    pub fn holds(&self, relation: usize, tuple: &[usize]) -> bool {
        self.relations[relation].contains(tuple)
    }

    pub fn tuple_count(&self) -> usize {
        self.relations.iter().map(BTreeSet::len).sum()
    }

    pub fn is_constant(&self, a: usize) -> bool {
        self.constants.contains(&a)
    }

    pub fn same_language(&self, other: &Structure) -> Result<()> {
        if self.language == other.language {
            Ok(())
        } else {
            Err(Error::LanguageMismatch)
        }
    }

    pub(crate) fn check_element(&self, a: usize) -> Result<()> {
        if a < self.n {
            Ok(())
        } else {
            Err(Error::OutOfRange { element: a, n: self.n })
        }
    }

    /// Undirected edge list `u < v` of the first binary relation, for graph-like use.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self
            .relations
            .first()
            .into_iter()
            .flatten()
            .filter(|t| t.len() == 2 && t[0] < t[1])
            .map(|t| (t[0], t[1]))
            .collect();
        out.sort_unstable();
        out
    }

    /// The induced substructure on `elements`, relabeled to `0..|X|` in increasing order.
    ///
    /// Returns the substructure together with the relabeling (`new index -> old element`).
    pub fn induced_substructure(&self, elements: &[usize]) -> Result<(Structure, Vec<usize>)> {
        let keep: BTreeSet<usize> = elements.iter().copied().collect();
        for &e in &keep {
            self.check_element(e)?;
        }
        for (name, &c) in self.language.constants().iter().zip(&self.constants) {
            if !keep.contains(&c) {
                return Err(Error::MissingConstant(name.clone()));
            }
        }
        let order: Vec<usize> = keep.iter().copied().collect();
        let mut position = vec![usize::MAX; self.n];
        for (i, &e) in order.iter().enumerate() {
            position[e] = i;
        }
        Ok((self.restrict_with(&position, order.len()), order))
    }

    /// Restriction through a position map (`usize::MAX` = dropped), without constant checks.
    pub(crate) fn restrict_with(&self, position: &[usize], m: usize) -> Structure {
        let relations = self
            .relations
            .iter()
            .map(|tuples| {
                tuples
                    .iter()
                    .filter(|t| t.iter().all(|&e| position[e] != usize::MAX))
                    .map(|t| t.iter().map(|&e| position[e]).collect())
                    .collect()
            })
            .collect();
        let constants = self.constants.iter().map(|&c| position[c]).collect();
        Structure { language: self.language.clone(), n: m, relations, constants }
    }

    /// Fast induced substructure on a sorted element list, skipping validation.
    pub(crate) fn induced_unchecked(&self, sorted: &[usize]) -> Structure {
        let mut position = vec![usize::MAX; self.n];
        for (i, &e) in sorted.iter().enumerate() {
            position[e] = i;
        }
        self.restrict_with(&position, sorted.len())
    }

    /// The image `f(M)` of this structure under an injection `f: [n] -> [m]`.
    pub fn apply_bijection(&self, f: &[usize], m: usize) -> Result<Structure> {
        if f.len() != self.n {
            return Err(Error::NotInjective(format!(
                "map has {} entries for a domain of size {}",
                f.len(),
                self.n
            )));
        }
        let mut hit = vec![false; m];
        for &y in f {
            if y >= m {
                return Err(Error::OutOfRange { element: y, n: m });
            }
            if std::mem::replace(&mut hit[y], true) {
                return Err(Error::NotInjective(format!("{y} has two preimages")));
            }
        }
        Ok(self.relabel_unchecked(f, m))
    }

    pub(crate) fn relabel_unchecked(&self, f: &[usize], m: usize) -> Structure {
        let relations = self
            .relations
            .iter()
            .map(|tuples| tuples.iter().map(|t| t.iter().map(|&e| f[e]).collect()).collect())
            .collect();
        let constants = self.constants.iter().map(|&c| f[c]).collect();
        Structure { language: self.language.clone(), n: m, relations, constants }
    }

    /// Adds tuples to a copy of this structure on a (possibly larger) domain.
    pub(crate) fn extended(&self, n: usize, extra: &[(usize, Tuple)]) -> Structure {
        let mut relations = self.relations.clone();
        for (r, t) in extra {
            relations[*r].insert(t.clone());
        }
        Structure { language: self.language.clone(), n, relations, constants: self.constants.clone() }
    }

    /// The transposition `(a b)` fixing every other element is an automorphism.
    pub fn transposition_is_automorphism(&self, a: usize, b: usize) -> bool {
        let swap = |e: usize| {
            if e == a {
                b
            } else if e == b {
                a
            } else {
                e
            }
        };
        if self.constants.iter().any(|&c| swap(c) != c) {
            return false;
        }
        self.relations.iter().all(|tuples| {
            tuples.iter().all(|t| {
                if !t.iter().any(|&e| e == a || e == b) {
                    return true;
                }
                let image: Tuple = t.iter().map(|&e| swap(e)).collect();
                tuples.contains(&image)
            })
        })
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={}", self.n)?;
        for (sym, tuples) in self.language.relations().iter().zip(&self.relations) {
            write!(f, " {}={{", sym.name)?;
            for (i, t) in tuples.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                let parts: Vec<String> = t.iter().map(|e| (e + 1).to_string()).collect();
                write!(f, "({})", parts.join(" "))?;
            }
            write!(f, "}}")?;
        }
        Ok(())
    }
}

/// A slot of an atomic pattern: a variable index or a constant index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slot {
    Var(usize),
    Const(usize),
}

/// An atom of the distinct-variable fragment: a relation applied to a pattern
/// of variables and constants, read together with pairwise inequality of the
/// variables.
///
/// Variables are numbered in order of first occurrence, so two atoms that
/// differ only by renaming of variables are represented once.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AtomicDiff {
    pub relation: usize,
    pub pattern: Vec<Slot>,
}

impl AtomicDiff {
    pub fn var_count(&self) -> usize {
        self.pattern
            .iter()
            .filter_map(|s| match s {
                Slot::Var(v) => Some(v + 1),
                Slot::Const(_) => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// Instantiates the pattern with `vars` (distinct elements) and constant values.
    pub fn instantiate(&self, vars: &[usize], constants: &[usize]) -> Tuple {
        self.pattern
            .iter()
            .map(|s| match *s {
                Slot::Var(v) => vars[v],
                Slot::Const(c) => constants[c],
            })
            .collect()
    }

    /// Human-readable key, e.g. `E(x1,x2)` or `R(x1,x1,c)`.
    pub fn key(&self, language: &Language) -> String {
        let args: Vec<String> = self
            .pattern
            .iter()
            .map(|s| match *s {
                Slot::Var(v) => format!("x{}", v + 1),
                Slot::Const(c) => language.constants()[c].clone(),
            })
            .collect();
        format!("{}({})", language.relations()[self.relation].name, args.join(","))
    }

    /// Parses a key produced by [`AtomicDiff::key`].
    pub fn parse_key(key: &str, language: &Language) -> Result<Self> {
        let bad = || Error::Parse(format!("bad atom key `{key}`"));
        let open = key.find('(').ok_or_else(bad)?;
        if !key.ends_with(')') {
            return Err(bad());
        }
        let relation = language.relation_index(key[..open].trim())?;
        let inner = &key[open + 1..key.len() - 1];
        let mut pattern = Vec::new();
        for arg in inner.split(',').map(str::trim) {
            if let Some(c) = language.constant_index(arg) {
                pattern.push(Slot::Const(c));
            } else if let Some(num) = arg.strip_prefix('x') {
                let v: usize = num.parse().map_err(|_| bad())?;
                if v == 0 {
                    return Err(bad());
                }
                pattern.push(Slot::Var(v - 1));
            } else {
                return Err(bad());
            }
        }
        if pattern.len() != language.relations()[relation].arity {
            return Err(Error::ArityMismatch(format!("atom `{key}`")));
        }
        let atom = AtomicDiff { relation, pattern };
        if !atom.is_normalized() {
            return Err(Error::Parse(format!(
                "atom `{key}` must number variables x1, x2, ... in order of first occurrence"
            )));
        }
        Ok(atom)
    }

    fn is_normalized(&self) -> bool {
        let mut next = 0;
        for s in &self.pattern {
            if let Slot::Var(v) = *s {
                if v > next {
                    return false;
                }
                if v == next {
                    next += 1;
                }
            }
        }
        true
    }

    /// The slot pattern of an actual tuple: returns the atom and its distinct variable values.
    pub fn of_tuple(relation: usize, tuple: &[usize]) -> (AtomicDiff, Vec<usize>) {
        let mut vars: Vec<usize> = Vec::new();
        let pattern = tuple
            .iter()
            .map(|&e| match vars.iter().position(|&v| v == e) {
                Some(i) => Slot::Var(i),
                None => {
                    vars.push(e);
                    Slot::Var(vars.len() - 1)
                }
            })
            .collect();
        (AtomicDiff { relation, pattern }, vars)
    }
}

/// Every atom of the language, up to renaming of variables.
///
/// With `with_constants`, slots may also be filled by constant symbols.
pub fn all_atoms(language: &Language, with_constants: bool) -> Vec<AtomicDiff> {
    let mut out = Vec::new();
    let nconst = if with_constants { language.constants().len() } else { 0 };
    for (ri, sym) in language.relations().iter().enumerate() {
        let mut pattern = Vec::with_capacity(sym.arity);
        atom_patterns(ri, sym.arity, nconst, 0, &mut pattern, &mut out);
    }
    out
}

fn atom_patterns(
    relation: usize,
    arity: usize,
    nconst: usize,
    next_var: usize,
    pattern: &mut Vec<Slot>,
    out: &mut Vec<AtomicDiff>,
) {
    if pattern.len() == arity {
        out.push(AtomicDiff { relation, pattern: pattern.clone() });
        return;
    }
    for v in 0..=next_var {
        pattern.push(Slot::Var(v));
        atom_patterns(relation, arity, nconst, next_var.max(v + 1), pattern, out);
        pattern.pop();
    }
    for c in 0..nconst {
        pattern.push(Slot::Const(c));
        atom_patterns(relation, arity, nconst, next_var, pattern, out);
        pattern.pop();
    }
}

/// All permutations of a slice, in lexicographic order of positions.
pub fn permutations<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    fn go<T: Clone>(items: &[T], used: &mut Vec<bool>, cur: &mut Vec<T>, out: &mut Vec<Vec<T>>) {
        if cur.len() == items.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..items.len() {
            if !used[i] {
                used[i] = true;
                cur.push(items[i].clone());
                go(items, used, cur, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(items, &mut vec![false; items.len()], &mut Vec::new(), &mut out);
    out
}

/// Calls `f` on every injective tuple of length `s` over `0..n`.
pub fn for_each_injective(n: usize, s: usize, mut f: impl FnMut(&[usize])) {
    fn go(n: usize, s: usize, used: &mut [bool], cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == s {
            f(cur);
            return;
        }
        for e in 0..n {
            if !used[e] {
                used[e] = true;
                cur.push(e);
                go(n, s, used, cur, f);
                cur.pop();
                used[e] = false;
            }
        }
    }
    if s > n {
        return;
    }
    go(n, s, &mut vec![false; n], &mut Vec::with_capacity(s), &mut f);
}

/// Calls `f` on every tuple of `[n]^s` in lexicographic order.
pub fn for_each_tuple(n: usize, s: usize, mut f: impl FnMut(&[usize])) {
    if s == 0 {
        f(&[]);
        return;
    }
    if n == 0 {
        return;
    }
    let mut cur = vec![0usize; s];
    loop {
        f(&cur);
        let mut i = s;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < n {
                break;
            }
            cur[i] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(n: usize) -> Structure {
        let mut edges = vec![];
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v));
            }
        }
        Structure::graph(n, &edges).unwrap()
    }

    #[test]
    fn clique_restricts_to_clique() {
        let (sub, map) = k(4).induced_substructure(&[0, 1, 2]).unwrap();
        assert_eq!(sub, k(3));
        assert_eq!(map, vec![0, 1, 2]);
    }

    #[test]
    fn empty_graph_restriction() {
        let g = Structure::graph(5, &[]).unwrap();
        let (sub, map) = g.induced_substructure(&[1, 3]).unwrap();
        assert_eq!(sub, Structure::graph(2, &[]).unwrap());
        assert_eq!(map, vec![1, 3]);
    }

    #[test]
    fn hyperedge_does_not_survive_restriction() {
        let h = Structure::uniform_hypergraph(4, 3, &[vec![0, 1, 2]]).unwrap();
        let (sub, _) = h.induced_substructure(&[0, 1, 3]).unwrap();
        // oracle: no tuple of E lies inside {1,2,4}
        let keep = [0usize, 1, 3];
        let survivors = h.relation(0).iter().filter(|t| t.iter().all(|e| keep.contains(e))).count();
        assert_eq!(survivors, 0);
        assert_eq!(sub.tuple_count(), 0);
    }

    #[test]
    fn missing_constant_is_rejected() {
        let lang = Arc::new(Language::new(vec![], vec!["c".into()]).unwrap());
        let m = Structure::new(lang, 3, vec![], vec![2]).unwrap();
        assert_eq!(m.induced_substructure(&[0, 1]), Err(Error::MissingConstant("c".into())));
        assert!(m.induced_substructure(&[2]).is_ok());
    }

    #[test]
    fn bijection_examples() {
        let p3 = Structure::graph(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(p3.apply_bijection(&[0, 1, 2], 3).unwrap(), p3);
        assert_eq!(p3.apply_bijection(&[2, 1, 0], 3).unwrap(), p3);

        let lang = Arc::new(Language::single("R", 2));
        let d = Structure::new(lang.clone(), 2, vec![[vec![0, 1]].into()], vec![]).unwrap();
        let img = d.apply_bijection(&[1, 0], 2).unwrap();
        assert_eq!(img.relation(0), &[vec![1, 0]].into());
        assert!(matches!(d.apply_bijection(&[0, 0], 2), Err(Error::NotInjective(_))));
    }

    #[test]
    fn atoms_enumerate_restricted_growth_patterns() {
        let lang = Language::single("R", 3);
        let keys: Vec<String> = all_atoms(&lang, false).iter().map(|a| a.key(&lang)).collect();
        // Bell(3) = 5 equality patterns
        assert_eq!(keys.len(), 5);
        assert!(keys.contains(&"R(x1,x2,x1)".to_string()));
        for k in &keys {
            assert_eq!(&AtomicDiff::parse_key(k, &lang).unwrap().key(&lang), k);
        }
        assert!(AtomicDiff::parse_key("R(x2,x1,x1)", &lang).is_err());
    }

    #[test]
    fn injective_tuple_count() {
        let mut c = 0;
        for_each_injective(5, 3, |_| c += 1);
        assert_eq!(c, 60);
        let mut c = 0;
        for_each_tuple(3, 3, |_| c += 1);
        assert_eq!(c, 27);
    }
}
