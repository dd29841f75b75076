//! Templates: finite descriptions of countably infinite structures with
//! finitely many `~`-classes, and exact counts of the structures on `[n]`
//! compatible with them.
//!
//! A template lists class sizes (finite or infinite, finite ones first) and,
//! for each atom, the class tuples on which it holds. An ordered partition of
//! `[n]` is admissible when finite parts have the listed sizes and every
//! infinite part has more than `K` elements, where `K` is the larger of the
//! language arity and the largest finite class. Each admissible partition
//! determines one structure, and two partitions give the same structure
//! exactly when they differ by a class permutation preserving sizes and
//! signatures; so the compatible count is the partition count divided by the
//! number of such permutations.

mod fit;
pub mod json;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::RangeInclusive;
use std::sync::Arc;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::simclass::{decomposition, realize, Signature};
use crate::structures::{all_atoms, AtomicDiff, Language, Slot, Structure};

pub use fit::{as_natural, eval_poly, format_poly, SpeedForm};

/// Default cap on `n` for [`enumerate_compatible`].
pub const ENUMERATION_BUDGET: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClassSize {
    Finite(usize),
    Infinite,
}

impl ClassSize {
    pub fn is_infinite(self) -> bool {
        self == ClassSize::Infinite
    }
}

impl fmt::Display for ClassSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassSize::Finite(s) => write!(f, "{s}"),
            ClassSize::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    language: Arc<Language>,
    sizes: Vec<ClassSize>,
    sigma: BTreeMap<AtomicDiff, Signature>,
    threshold: usize,
}

impl Template {
    /// Validates and normalizes a template.
    ///
    /// Atoms missing from `sigma` hold nowhere. Class tuples that repeat a
    /// finite class more often than its size describe no tuples and are
    /// dropped. The template must be proper: its classes must be exactly the
    /// `~`-classes of the structures it generates.
    pub fn new(
        language: Arc<Language>,
        sizes: Vec<ClassSize>,
        sigma: BTreeMap<AtomicDiff, Signature>,
    ) -> Result<Self> {
        if !language.constants().is_empty() {
            return Err(Error::Unsupported("templates over languages with constants".into()));
        }
        let k = sizes.len();
        if k == 0 {
            return Err(Error::InvalidTemplate("no classes".into()));
        }
        let finite: Vec<usize> = sizes
            .iter()
            .filter_map(|s| match s {
                ClassSize::Finite(v) => Some(*v),
                ClassSize::Infinite => None,
            })
            .collect();
        let t = finite.len();
        if sizes[..t].iter().any(|s| s.is_infinite()) {
            return Err(Error::InvalidTemplate("finite classes must precede infinite ones".into()));
        }
        if t == k {
            return Err(Error::InvalidTemplate("at least one infinite class is required".into()));
        }
        if finite.iter().any(|&s| s == 0) {
            return Err(Error::InvalidTemplate("finite classes must be nonempty".into()));
        }
        if finite.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidTemplate("finite class sizes must be nondecreasing".into()));
        }
        let threshold = finite.iter().copied().max().unwrap_or(0).max(language.arity());
        let mut normalized = BTreeMap::new();
        for atom in all_atoms(&language, false) {
            normalized.insert(atom, BTreeSet::new());
        }
        for (atom, sig) in sigma {
            if atom.pattern.iter().any(|s| matches!(s, Slot::Const(_))) {
                return Err(Error::InvalidTemplate("atoms with constants".into()));
            }
            let entry = normalized
                .get_mut(&atom)
                .ok_or_else(|| Error::InvalidTemplate(format!("atom {atom:?} not in language")))?;
            for tuple in sig {
                if tuple.len() != atom.var_count() {
                    return Err(Error::InvalidTemplate(format!(
                        "signature {tuple:?} has the wrong length for {}",
                        atom.key(&language)
                    )));
                }
                if let Some(&i) = tuple.iter().find(|&&i| i >= k) {
                    return Err(Error::InvalidTemplate(format!("class index {} out of range", i + 1)));
                }
                let vacuous = tuple.iter().enumerate().any(|(pos, &i)| match sizes[i] {
                    ClassSize::Finite(s) => tuple[..=pos].iter().filter(|&&j| j == i).count() > s,
                    ClassSize::Infinite => false,
                });
                if !vacuous {
                    entry.insert(tuple);
                }
            }
        }
        let template = Template { language, sizes, sigma: normalized, threshold };
        template.check_proper()?;
        Ok(template)
    }

    /// Like [`Template::new`] but also checks a declared threshold.
    pub fn with_threshold(
        language: Arc<Language>,
        sizes: Vec<ClassSize>,
        sigma: BTreeMap<AtomicDiff, Signature>,
        threshold: usize,
    ) -> Result<Self> {
        let t = Template::new(language, sizes, sigma)?;
        if t.threshold != threshold {
            return Err(Error::InvalidTemplate(format!(
                "declared K = {threshold}, but max(arity, largest finite class) = {}",
                t.threshold
            )));
        }
        Ok(t)
    }

    fn check_proper(&self) -> Result<()> {
        let mut class_of = Vec::new();
        for (i, s) in self.sizes.iter().enumerate() {
            let len = match s {
                ClassSize::Finite(v) => *v,
                ClassSize::Infinite => self.threshold + 1,
            };
            class_of.extend(std::iter::repeat(i).take(len));
        }
        let m = self.realize(&class_of);
        let found = decomposition(&m).classes.len();
        if found != self.k() {
            return Err(Error::DegenerateTemplate(format!(
                "{} listed classes collapse to {found} ~-classes in a generated structure",
                self.k()
            )));
        }
        Ok(())
    }

    pub fn language(&self) -> &Arc<Language> {
        &self.language
    }

    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[ClassSize] {
        &self.sizes
    }

    pub fn sigma(&self) -> &BTreeMap<AtomicDiff, Signature> {
        &self.sigma
    }

    /// The threshold `K`.
    pub fn threshold(&self) -> usize {
        self.threshold
    }

    /// Number of finite classes (`t`).
    pub fn finite_classes(&self) -> usize {
        self.sizes.iter().filter(|s| !s.is_infinite()).count()
    }

    pub fn infinite_classes(&self) -> usize {
        self.k() - self.finite_classes()
    }

    /// Total number of elements in finite classes.
    pub fn finite_total(&self) -> usize {
        self.sizes
            .iter()
            .map(|s| match s {
                ClassSize::Finite(v) => *v,
                ClassSize::Infinite => 0,
            })
            .sum()
    }

    /// The structure determined by assigning element `v` to class `class_of[v]`.
    pub fn realize(&self, class_of: &[usize]) -> Structure {
        realize(&self.language, class_of, &[], &self.sigma)
    }

    /// The template with classes listed in a new order: new class `j` is old class `order[j]`.
    ///
    /// Fails if the new order does not list finite classes first in nondecreasing size.
    pub fn reordered(&self, order: &[usize]) -> Result<Template> {
        let mut position = vec![0; self.k()];
        for (j, &i) in order.iter().enumerate() {
            position[i] = j;
        }
        let sizes = order.iter().map(|&i| self.sizes[i]).collect();
        let sigma = self
            .sigma
            .iter()
            .map(|(a, sig)| (a.clone(), sig.iter().map(|t| t.iter().map(|&i| position[i]).collect()).collect()))
            .collect();
        Template::new(self.language.clone(), sizes, sigma)
    }
}

/// The template obtained from a finite structure by declaring some of its
/// `~`-classes infinite (indices into the decomposition's class order).
pub fn template_of(m: &Structure, infinite: &BTreeSet<usize>) -> Result<Template> {
    let d = decomposition(m);
    for &i in infinite {
        let class = d
            .classes
            .get(i)
            .ok_or_else(|| Error::InvalidTemplate(format!("no class {}", i + 1)))?;
        if class.iter().any(|&v| m.is_constant(v)) {
            return Err(Error::ConstantInInfiniteClass(i));
        }
        if class.len() < m.language().arity() {
            return Err(Error::InvalidTemplate(format!(
                "class {} has {} elements, fewer than the arity {}; its signatures are not determined",
                i + 1,
                class.len(),
                m.language().arity()
            )));
        }
    }
    let mut order: Vec<usize> = (0..d.classes.len()).filter(|i| !infinite.contains(i)).collect();
    order.sort_by_key(|&i| d.classes[i].len());
    order.extend(infinite.iter().copied());
    let mut position = vec![0; d.classes.len()];
    for (j, &i) in order.iter().enumerate() {
        position[i] = j;
    }
    let sizes = order
        .iter()
        .map(|&i| if infinite.contains(&i) { ClassSize::Infinite } else { ClassSize::Finite(d.classes[i].len()) })
        .collect();
    let sigma = d
        .sigma
        .iter()
        .map(|(a, sig)| (a.clone(), sig.iter().map(|t| t.iter().map(|&i| position[i]).collect()).collect()))
        .collect();
    Template::new(m.language().clone(), sizes, sigma)
}

/// Witness partition `(B_1, ..., B_k)` when `n` is compatible with `t`.
pub fn is_compatible(n: &Structure, t: &Template) -> Result<Option<Vec<Vec<usize>>>> {
    if n.language() != t.language() {
        return Err(Error::LanguageMismatch);
    }
    let d = decomposition(n);
    if d.classes.len() != t.k() {
        return Ok(None);
    }
    let fits = |class: usize, slot: usize| match t.sizes[slot] {
        ClassSize::Finite(s) => d.classes[class].len() == s,
        ClassSize::Infinite => d.classes[class].len() > t.threshold,
    };
    let mut assign = vec![usize::MAX; t.k()];
    let mut used = vec![false; t.k()];
    fn search(
        class: usize,
        assign: &mut Vec<usize>,
        used: &mut Vec<bool>,
        fits: &dyn Fn(usize, usize) -> bool,
        accept: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if class == assign.len() {
            return accept(assign);
        }
        for slot in 0..assign.len() {
            if !used[slot] && fits(class, slot) {
                used[slot] = true;
                assign[class] = slot;
                if search(class + 1, assign, used, fits, accept) {
                    return true;
                }
                used[slot] = false;
            }
        }
        false
    }
    let mut accept = |assign: &[usize]| {
        d.sigma.iter().all(|(atom, sig)| {
            let mapped: Signature = sig.iter().map(|tp| tp.iter().map(|&c| assign[c]).collect()).collect();
            t.sigma.get(atom).map_or(mapped.is_empty(), |s| *s == mapped)
        })
    };
    if !search(0, &mut assign, &mut used, &fits, &mut accept) {
        return Ok(None);
    }
    let mut parts = vec![Vec::new(); t.k()];
    for (class, &slot) in assign.iter().enumerate() {
        parts[slot] = d.classes[class].clone();
    }
    Ok(Some(parts))
}

/// A class assignment embedding `m` into the infinite structure described by
/// `t` (so `m` lies in its age), or `None`.
pub fn embedding(m: &Structure, t: &Template) -> Result<Option<Vec<usize>>> {
    if m.language() != t.language() {
        return Err(Error::LanguageMismatch);
    }
    let arity: Vec<usize> = t.language.relations().iter().map(|r| r.arity).collect();
    let capacity: Vec<usize> = t
        .sizes
        .iter()
        .map(|s| match s {
            ClassSize::Finite(v) => *v,
            ClassSize::Infinite => usize::MAX,
        })
        .collect();
    let mut class_of = Vec::with_capacity(m.n());
    let mut used = vec![0usize; t.k()];

    // every tuple over the assigned prefix that mentions the newest element agrees with `t`
    fn consistent(m: &Structure, t: &Template, arity: &[usize], class_of: &[usize]) -> bool {
        let v = class_of.len() - 1;
        for (rel, &s) in arity.iter().enumerate() {
            let mut ok = true;
            crate::structures::for_each_tuple(v + 1, s, |tp| {
                if !ok || !tp.contains(&v) {
                    return;
                }
                let (atom, vars) = AtomicDiff::of_tuple(rel, tp);
                let key: Vec<usize> = vars.iter().map(|&e| class_of[e]).collect();
                let want = t.sigma.get(&atom).is_some_and(|sig| sig.contains(&key));
                if want != m.holds(rel, tp) {
                    ok = false;
                }
            });
            if !ok {
                return false;
            }
        }
        true
    }

    fn go(
        m: &Structure,
        t: &Template,
        arity: &[usize],
        capacity: &[usize],
        class_of: &mut Vec<usize>,
        used: &mut [usize],
    ) -> bool {
        if class_of.len() == m.n() {
            return true;
        }
        for i in 0..capacity.len() {
            if used[i] == capacity[i] {
                continue;
            }
            class_of.push(i);
            used[i] += 1;
            if consistent(m, t, arity, class_of) && go(m, t, arity, capacity, class_of, used) {
                return true;
            }
            used[i] -= 1;
            class_of.pop();
        }
        false
    }

    Ok(go(m, t, &arity, &capacity, &mut class_of, &mut used).then_some(class_of))
}

/// The number of admissible ordered partitions of `[n]`.
pub fn omega_count(t: &Template, n: usize) -> BigUint {
    let c = t.finite_total();
    if n < c {
        return BigUint::zero();
    }
    let rest = n - c;
    // ways to split `rest` labeled elements into `l` ordered parts, each > K
    let l = t.infinite_classes();
    let binom = binomial_table(n);
    let mut ways = vec![BigUint::zero(); rest + 1];
    ways[0] = BigUint::one();
    for _ in 0..l {
        let mut next = vec![BigUint::zero(); rest + 1];
        for m in 0..=rest {
            for a in t.threshold + 1..=m {
                if !ways[m - a].is_zero() {
                    next[m] += &binom[m][a] * &ways[m - a];
                }
            }
        }
        ways = next;
    }
    // place the finite classes: n! / (c_1! ... c_t! (n - c)!)
    let mut placed = BigUint::one();
    let mut remaining = n;
    for s in &t.sizes {
        if let ClassSize::Finite(v) = *s {
            placed *= &binom[remaining][v];
            remaining -= v;
        }
    }
    placed * &ways[rest]
}

fn binomial_table(n: usize) -> Vec<Vec<BigUint>> {
    let mut rows: Vec<Vec<BigUint>> = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let mut row = vec![BigUint::one(); i + 1];
        for j in 1..i {
            row[j] = &rows[i - 1][j - 1] + &rows[i - 1][j];
        }
        rows.push(row);
    }
    rows
}

/// Calls `f` with the class assignment of every admissible ordered partition of `[n]`.
pub fn for_each_partition(t: &Template, n: usize, mut f: impl FnMut(&[usize])) {
    let k = t.k();
    let mut counts = vec![0usize; k];
    let mut class_of = Vec::with_capacity(n);
    fn go(
        t: &Template,
        n: usize,
        counts: &mut [usize],
        class_of: &mut Vec<usize>,
        f: &mut impl FnMut(&[usize]),
    ) {
        let left = n - class_of.len();
        // remaining demand: finite deficits plus infinite parts' minimum
        let demand: usize = t
            .sizes
            .iter()
            .zip(counts.iter())
            .map(|(s, &c)| match s {
                ClassSize::Finite(v) => v - c,
                ClassSize::Infinite => (t.threshold + 1).saturating_sub(c),
            })
            .sum();
        if demand > left {
            return;
        }
        if left == 0 {
            f(class_of);
            return;
        }
        for i in 0..counts.len() {
            if let ClassSize::Finite(v) = t.sizes[i] {
                if counts[i] == v {
                    continue;
                }
            }
            counts[i] += 1;
            class_of.push(i);
            go(t, n, counts, class_of, f);
            class_of.pop();
            counts[i] -= 1;
        }
    }
    go(t, n, &mut counts, &mut class_of, &mut f);
}

/// Class permutations `sigma` (as `i -> sigma[i]`) preserving sizes and every signature.
pub fn aut_star(t: &Template) -> Vec<Vec<usize>> {
    let k = t.k();
    let mut out = Vec::new();
    let mut perm = vec![usize::MAX; k];
    let mut used = vec![false; k];
    fn go(
        t: &Template,
        i: usize,
        perm: &mut Vec<usize>,
        used: &mut Vec<bool>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let k = perm.len();
        if i == k {
            let preserved = t.sigma.values().all(|sig| {
                sig.iter().all(|tp| {
                    let img: Vec<usize> = tp.iter().map(|&c| perm[c]).collect();
                    sig.contains(&img)
                })
            });
            if preserved {
                out.push(perm.clone());
            }
            return;
        }
        for j in 0..k {
            if !used[j] && t.sizes[j] == t.sizes[i] {
                used[j] = true;
                perm[i] = j;
                go(t, i + 1, perm, used, out);
                used[j] = false;
            }
        }
    }
    go(t, 0, &mut perm, &mut used, &mut out);
    out
}

/// `omega_count / |Aut*|`, which must divide exactly.
pub fn count_compatible(t: &Template, n: usize) -> Result<BigUint> {
    let omega = omega_count(t, n);
    let aut = aut_star(t).len();
    let (q, r) = omega.div_rem(&BigUint::from(aut));
    if !r.is_zero() {
        return Err(Error::NonIntegralCount { n, omega: omega.to_string(), aut });
    }
    Ok(q)
}

/// All distinct structures on `[n]` compatible with `t`, sorted.
pub fn enumerate_compatible(t: &Template, n: usize, budget: usize) -> Result<Vec<Structure>> {
    if n > budget {
        return Err(Error::BudgetExceeded(format!("enumeration at n = {n} exceeds the budget {budget}")));
    }
    let mut seen = BTreeSet::new();
    for_each_partition(t, n, |class_of| {
        seen.insert(t.realize(class_of));
    });
    Ok(seen.into_iter().collect())
}

/// Fits the exact closed form of `count_compatible(t, n)` on a window of `n`.
///
/// The polynomial attached to base `i` has degree at most
/// `c + (l - i) * K`, where `c` is the number of elements in finite classes and
/// `l` the number of infinite classes. The form is solved on the first points
/// of the window at or above `l * (K + 1) + c` and verified on the rest.
pub fn speed_form(t: &Template, window: RangeInclusive<usize>) -> Result<SpeedForm> {
    let l = t.infinite_classes();
    let c = t.finite_total();
    let degrees: Vec<usize> = (1..=l).map(|i| c + (l - i) * t.threshold).collect();
    let valid_from = l * (t.threshold + 1) + c;
    fit::fit(&degrees, window, valid_from, |n| count_compatible(t, n))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TemplateRelation {
    /// Class `i` of the first template corresponds to class `sigma[i]` of the second.
    Equivalent(Vec<usize>),
    Disjoint,
}

/// Decides whether two templates describe the same structures or none in common.
pub fn templates_equivalent_or_disjoint(a: &Template, b: &Template) -> Result<TemplateRelation> {
    if a.language != b.language {
        return Err(Error::LanguageMismatch);
    }
    if a.k() != b.k() {
        return Ok(TemplateRelation::Disjoint);
    }
    let exact = |i: usize, j: usize| a.sizes[i] == b.sizes[j];
    if let Some(sigma) = matching_permutation(a, b, &exact) {
        return Ok(TemplateRelation::Equivalent(sigma));
    }
    // A finite class larger than the other template's threshold could sit in an
    // infinite class of the other one; such pairs are not decided here.
    let loose = |i: usize, j: usize| match (a.sizes[i], b.sizes[j]) {
        (ClassSize::Finite(x), ClassSize::Infinite) => x > b.threshold,
        (ClassSize::Infinite, ClassSize::Finite(y)) => y > a.threshold,
        (x, y) => x == y,
    };
    if let Some(sigma) = matching_permutation(a, b, &loose) {
        return Err(Error::MixedSizes(format!(
            "class map {:?} matches signatures only by trading finite for infinite classes",
            sigma.iter().map(|j| j + 1).collect::<Vec<_>>()
        )));
    }
    Ok(TemplateRelation::Disjoint)
}

fn matching_permutation(
    a: &Template,
    b: &Template,
    sizes_ok: &dyn Fn(usize, usize) -> bool,
) -> Option<Vec<usize>> {
    let k = a.k();
    let mut perm = vec![usize::MAX; k];
    let mut used = vec![false; k];
    fn go(
        a: &Template,
        b: &Template,
        i: usize,
        perm: &mut Vec<usize>,
        used: &mut Vec<bool>,
        sizes_ok: &dyn Fn(usize, usize) -> bool,
    ) -> bool {
        let k = perm.len();
        if i == k {
            return a.sigma.iter().all(|(atom, sig)| {
                let img: Signature = sig.iter().map(|tp| tp.iter().map(|&c| perm[c]).collect()).collect();
                b.sigma.get(atom).map_or(img.is_empty(), |s| *s == img)
            });
        }
        for j in 0..k {
            if !used[j] && sizes_ok(i, j) {
                used[j] = true;
                perm[i] = j;
                if go(a, b, i + 1, perm, used, sizes_ok) {
                    return true;
                }
                used[j] = false;
            }
        }
        false
    }
    go(a, b, 0, &mut perm, &mut used, sizes_ok).then_some(perm)
}

/// Number of structures on `[n]` compatible with at least one template.
///
/// Templates are pairwise equivalent or disjoint, so the union is a disjoint
/// union over equivalence-class representatives.
pub fn union_speed(templates: &[Template], n: usize) -> Result<BigUint> {
    let mut reps: Vec<&Template> = Vec::new();
    for t in templates {
        let mut duplicate = false;
        for r in &reps {
            if let TemplateRelation::Equivalent(_) = templates_equivalent_or_disjoint(r, t)? {
                duplicate = true;
                break;
            }
        }
        if !duplicate {
            reps.push(t);
        }
    }
    let mut total = BigUint::zero();
    for r in reps {
        total += count_compatible(r, n)?;
    }
    Ok(total)
}

/// Built-in templates over the graph language used in tests and examples.
pub mod builtin {
    use super::*;

    fn edge() -> AtomicDiff {
        AtomicDiff { relation: 0, pattern: vec![Slot::Var(0), Slot::Var(1)] }
    }

    fn graph_template(sizes: Vec<ClassSize>, edges: &[[usize; 2]]) -> Template {
        let sig: Signature = edges.iter().map(|e| e.to_vec()).collect();
        Template::new(Arc::new(Language::graph()), sizes, [(edge(), sig)].into_iter().collect())
            .expect("built-in template is valid")
    }

    /// An infinite clique.
    pub fn clique() -> Template {
        graph_template(vec![ClassSize::Infinite], &[[0, 0]])
    }

    /// An infinite edgeless graph.
    pub fn empty() -> Template {
        graph_template(vec![ClassSize::Infinite], &[])
    }

    /// Complete bipartite graph with two infinite sides.
    pub fn bipartite() -> Template {
        graph_template(vec![ClassSize::Infinite, ClassSize::Infinite], &[[0, 1], [1, 0]])
    }

    /// An infinite clique plus one isolated vertex.
    pub fn clique_plus_isolated() -> Template {
        graph_template(vec![ClassSize::Finite(1), ClassSize::Infinite], &[[1, 1]])
    }

    /// An infinite clique completely joined to an infinite independent set.
    pub fn clique_join_empty() -> Template {
        graph_template(vec![ClassSize::Infinite, ClassSize::Infinite], &[[0, 0], [0, 1], [1, 0]])
    }

    pub fn all() -> Vec<(&'static str, Template)> {
        vec![
            ("clique", clique()),
            ("empty", empty()),
            ("bipartite", bipartite()),
            ("clique-plus-isolated", clique_plus_isolated()),
            ("clique-join-empty", clique_join_empty()),
        ]
    }
}
