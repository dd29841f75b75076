//! Hereditary properties: specifications, membership, exact speeds and
//! finite-scale probes.

mod diagnostics;
mod generate;

use std::collections::BTreeMap;
use std::sync::Arc;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::simclass::class_count;
use crate::structures::{canonical_form, Language, Structure};
use crate::template::{embedding, Template};

pub use diagnostics::{growth_diagnostics, DiagnosticRow, GrowthReport, GrowthTag};
pub use generate::{members, speed, SpeedRow, SpeedTable};

/// The class of structures a property lives in; generation only produces these.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ambient {
    /// Simple graphs: `E` symmetric and irreflexive.
    Graph,
    /// `r`-uniform hypergraphs: `E` holds on all orderings of each `r`-set.
    Uniform(usize),
    /// Arbitrary structures of a constant-free language.
    Relational,
}

/// Built-in graph membership tests, all hereditary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Predicate {
    All,
    Edgeless,
    /// Disjoint unions of edges and isolated vertices.
    Matching,
    /// Induced subgraphs of complete bipartite graphs.
    CompleteBipartite,
    Bipartite,
    TriangleFree,
}

impl Predicate {
    pub const ALL: [Predicate; 6] = [
        Predicate::All,
        Predicate::Edgeless,
        Predicate::Matching,
        Predicate::CompleteBipartite,
        Predicate::Bipartite,
        Predicate::TriangleFree,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Predicate::All => "all",
            Predicate::Edgeless => "edgeless",
            Predicate::Matching => "matching",
            Predicate::CompleteBipartite => "complete-bipartite",
            Predicate::Bipartite => "bipartite",
            Predicate::TriangleFree => "triangle-free",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Predicate::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| Error::Parse(format!("unknown predicate `{name}`")))
    }

    fn holds(self, g: &Structure) -> bool {
        let n = g.n();
        let adj = |u: usize, v: usize| g.holds(0, &[u, v]);
        let degree = |u: usize| (0..n).filter(|&v| adj(u, v)).count();
        match self {
            Predicate::All => true,
            Predicate::Edgeless => g.tuple_count() == 0,
            Predicate::Matching => (0..n).all(|u| degree(u) <= 1),
            Predicate::TriangleFree => !(0..n)
                .tuple_combinations()
                .any(|(a, b, c)| adj(a, b) && adj(b, c) && adj(a, c)),
            Predicate::Bipartite => two_colouring(n, &adj).is_some(),
            Predicate::CompleteBipartite => {
                // non-adjacency must be an equivalence relation with at most two classes
                let mut class = vec![usize::MAX; n];
                let mut reps = Vec::new();
                for v in 0..n {
                    match reps.iter().position(|&r| !adj(r, v)) {
                        Some(i) => class[v] = i,
                        None => {
                            class[v] = reps.len();
                            reps.push(v);
                        }
                    }
                }
                reps.len() <= 2
                    && (0..n).tuple_combinations().all(|(u, v)| adj(u, v) == (class[u] != class[v]))
            }
        }
    }
}

fn two_colouring(n: usize, adj: &dyn Fn(usize, usize) -> bool) -> Option<Vec<bool>> {
    let mut colour: Vec<Option<bool>> = vec![None; n];
    for start in 0..n {
        if colour[start].is_some() {
            continue;
        }
        colour[start] = Some(false);
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            let cu = colour[u].expect("coloured before push");
            for v in 0..n {
                if adj(u, v) {
                    match colour[v] {
                        None => {
                            colour[v] = Some(!cu);
                            stack.push(v);
                        }
                        Some(cv) if cv == cu => return None,
                        Some(_) => {}
                    }
                }
            }
        }
    }
    Some(colour.into_iter().map(|c| c.unwrap_or(false)).collect())
}

#[derive(Debug, Clone)]
pub enum Mode {
    /// Members omit every listed structure as an induced substructure.
    ForbiddenInduced(Vec<Structure>),
    /// Members embed into at least one of the templates.
    AgeOfTemplates(Vec<Template>),
    Predicate(Predicate),
}

#[derive(Debug, Clone)]
pub struct PropertySpec {
    language: Arc<Language>,
    ambient: Ambient,
    mode: Mode,
    /// Canonical forms of forbidden structures, with their sizes.
    forbidden: Vec<Structure>,
    budget: usize,
}

impl PropertySpec {
    pub fn new(ambient: Ambient, language: Arc<Language>, mode: Mode) -> Result<Self> {
        if !language.constants().is_empty() {
            return Err(Error::Unsupported("properties over languages with constants".into()));
        }
        match ambient {
            Ambient::Graph if *language != Language::graph() => {
                return Err(Error::LanguageMismatch);
            }
            Ambient::Uniform(r) => {
                if r < 2 {
                    return Err(Error::InvalidLanguage("uniformity must be at least 2".into()));
                }
                if *language != Language::single("E", r) {
                    return Err(Error::LanguageMismatch);
                }
            }
            _ => {}
        }
        let mut forbidden = Vec::new();
        match &mode {
            Mode::ForbiddenInduced(list) => {
                if list.is_empty() {
                    return Err(Error::Precondition("forbidden list is empty".into()));
                }
                for f in list {
                    if f.language() != &language {
                        return Err(Error::LanguageMismatch);
                    }
                    forbidden.push(canonical_form(f).form);
                }
                forbidden.sort();
                forbidden.dedup();
            }
            Mode::AgeOfTemplates(ts) => {
                if ts.is_empty() {
                    return Err(Error::Precondition("template list is empty".into()));
                }
                if ts.iter().any(|t| t.language() != &language) {
                    return Err(Error::LanguageMismatch);
                }
            }
            Mode::Predicate(_) if ambient != Ambient::Graph => {
                return Err(Error::Unsupported("built-in predicates are defined for graphs".into()));
            }
            Mode::Predicate(_) => {}
        }
        let budget = match ambient {
            Ambient::Graph => 9,
            Ambient::Uniform(3) => 7,
            Ambient::Uniform(_) => 6,
            Ambient::Relational => 5,
        };
        Ok(PropertySpec { language, ambient, mode, forbidden, budget })
    }

    pub fn forbid_graphs(forbidden: Vec<Structure>) -> Result<Self> {
        PropertySpec::new(Ambient::Graph, Arc::new(Language::graph()), Mode::ForbiddenInduced(forbidden))
    }

    pub fn graph_predicate(p: Predicate) -> Self {
        PropertySpec::new(Ambient::Graph, Arc::new(Language::graph()), Mode::Predicate(p))
            .expect("graph predicates are valid specs")
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn language(&self) -> &Arc<Language> {
        &self.language
    }

    pub fn ambient(&self) -> Ambient {
        self.ambient
    }

    pub fn mode(&self) -> &Mode {
        &self.mode
    }

    pub(crate) fn check_budget(&self, n_max: usize) -> Result<()> {
        if n_max > self.budget {
            return Err(Error::BudgetExceeded(format!("n_max = {n_max} exceeds the budget {}", self.budget)));
        }
        Ok(())
    }

    /// Whether `m` belongs to the ambient class.
    pub fn in_ambient(&self, m: &Structure) -> bool {
        if m.language() != &self.language {
            return false;
        }
        match self.ambient {
            Ambient::Relational => true,
            Ambient::Graph => m.relation(0).iter().all(|t| t[0] != t[1] && m.holds(0, &[t[1], t[0]])),
            Ambient::Uniform(_) => m.relation(0).iter().all(|t| {
                t.iter().all_unique()
                    && t.iter().copied().permutations(t.len()).all(|p| m.holds(0, &p))
            }),
        }
    }

    /// Membership of an arbitrary structure.
    pub fn contains(&self, m: &Structure) -> Result<bool> {
        if m.language() != &self.language {
            return Err(Error::LanguageMismatch);
        }
        if !self.in_ambient(m) {
            return Ok(false);
        }
        Ok(match &self.mode {
            Mode::ForbiddenInduced(_) => !self.forbidden.iter().any(|f| {
                f.n() <= m.n() && (0..m.n()).combinations(f.n()).any(|s| self.is_copy(m, &s, f))
            }),
            Mode::AgeOfTemplates(ts) => {
                for t in ts {
                    if embedding(m, t)?.is_some() {
                        return Ok(true);
                    }
                }
                false
            }
            Mode::Predicate(p) => p.holds(m),
        })
    }

    fn is_copy(&self, m: &Structure, subset: &[usize], f: &Structure) -> bool {
        let sub = m.induced_unchecked(subset);
        sub.tuple_count() == f.tuple_count() && canonical_form(&sub).form == *f
    }

    /// Membership of `child` given that deleting its last element leaves a member.
    pub(crate) fn accepts_extension(&self, child: &Structure) -> Result<bool> {
        let last = child.n() - 1;
        match &self.mode {
            Mode::ForbiddenInduced(_) => Ok(!self.forbidden.iter().any(|f| {
                f.n() >= 1
                    && f.n() <= child.n()
                    && (0..last).combinations(f.n() - 1).any(|mut s| {
                        s.push(last);
                        self.is_copy(child, &s, f)
                    })
            }) && !self.forbidden.iter().any(|f| f.n() == 0)),
            Mode::AgeOfTemplates(_) => self.contains(child),
            Mode::Predicate(p) => {
                if !p.holds(child) {
                    return Ok(false);
                }
                // heredity certificate: every one-point deletion must also pass
                for drop in 0..child.n() {
                    let keep: Vec<usize> = (0..child.n()).filter(|&v| v != drop).collect();
                    if !p.holds(&child.induced_unchecked(&keep)) {
                        return Err(Error::NotHereditary(format!(
                            "`{}` accepts a structure but rejects its deletion of element {}",
                            p.name(),
                            drop + 1
                        )));
                    }
                }
                Ok(true)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict<W> {
    /// No counterexample up to the searched size; not a proof.
    Consistent,
    Refuted(W),
}

impl<W> Verdict<W> {
    pub fn is_consistent(&self) -> bool {
        matches!(self, Verdict::Consistent)
    }
}

/// Searches members with at most `n_max` elements for one with more than `k` `~`-classes.
pub fn is_basic_upto(spec: &PropertySpec, k: usize, n_max: usize) -> Result<Verdict<Structure>> {
    let mut witness = None;
    generate::levels_until(spec, n_max, |level| {
        witness = level.keys().find(|m| class_count(m) > k).cloned();
        witness.is_some()
    })?;
    Ok(witness.map_or(Verdict::Consistent, Verdict::Refuted))
}

/// A tuple assignment with too many completions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundViolation {
    pub relation: usize,
    /// The fixed positions `I` (zero-based, increasing); the rest are free.
    pub fixed: Vec<usize>,
    /// Values of the fixed positions.
    pub assignment: Vec<usize>,
    pub completions: usize,
}

/// The first (relation, split, assignment) with at least `k` completions, if any.
///
/// Splits range over nonempty proper subsets of positions; entries need not be distinct.
pub fn bound_violation(m: &Structure, relation: usize, k: usize) -> Option<BoundViolation> {
    let arity = m.language().relations()[relation].arity;
    if arity < 2 {
        return None;
    }
    for size in 1..arity {
        for fixed in (0..arity).combinations(size) {
            let mut counts: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
            for t in m.relation(relation) {
                *counts.entry(fixed.iter().map(|&p| t[p]).collect()).or_default() += 1;
            }
            if let Some((assignment, &completions)) = counts.iter().find(|(_, &c)| c >= k) {
                return Some(BoundViolation { relation, fixed, assignment: assignment.clone(), completions });
            }
        }
    }
    None
}

/// Witness of a member that is not totally `k`-bounded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TbWitness {
    pub member: Structure,
    pub violation: BoundViolation,
}

pub fn is_totally_bounded_upto(spec: &PropertySpec, k: usize, n_max: usize) -> Result<Verdict<TbWitness>> {
    let relations = spec.language.relations().len();
    let mut witness = None;
    generate::levels_until(spec, n_max, |level| {
        witness = level.keys().find_map(|m| {
            (0..relations).find_map(|rel| {
                bound_violation(m, rel, k).map(|violation| TbWitness { member: m.clone(), violation })
            })
        });
        witness.is_some()
    })?;
    Ok(witness.map_or(Verdict::Consistent, Verdict::Refuted))
}
