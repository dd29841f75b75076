//! Canonical labeling and automorphism groups by individualization-refinement.
//!
//! Cells are refined by counting, per element, the cell patterns of the tuples
//! it occurs in. When refinement stalls, the first smallest-index non-singleton
//! cell is split by individualizing each of its elements in turn. Leaves are
//! compared by the sorted relabeled tuple lists; the least one is canonical.
//! Children equivalent under automorphisms already found (fixing the current
//! prefix) are skipped, and the group order is read off the first path as a
//! product of orbit lengths.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use num_bigint::BigUint;

use super::{Structure, Tuple};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AutomorphismGroup {
    /// Generators as maps `element -> image`.
    pub generators: Vec<Vec<usize>>,
    pub order: BigUint,
}

#[derive(Debug, Clone)]
pub struct Canonical {
    /// The canonical representative of the isomorphism class.
    pub form: Structure,
    /// `labeling[v]` is the position of `v` in the canonical form.
    pub labeling: Vec<usize>,
    pub group: AutomorphismGroup,
}

pub fn canonical_form(m: &Structure) -> Canonical {
    let mut search = Search::new(m);
    let initial = search.initial_cells();
    let mut prefix = Vec::new();
    search.explore(initial, &mut prefix);
    let best = search.best.take().expect("search reaches at least one leaf");
    let order = search.group_order();
    let form = m.relabel_unchecked(&best.labeling, m.n());
    Canonical {
        form,
        labeling: best.labeling,
        group: AutomorphismGroup { generators: search.generators, order },
    }
}

pub fn automorphisms(m: &Structure) -> AutomorphismGroup {
    canonical_form(m).group
}

/// Returns a witness bijection `f` with `f(M) = N` when the structures are isomorphic.
pub fn is_isomorphic(m: &Structure, n: &Structure) -> Result<Option<Vec<usize>>> {
    m.same_language(n)?;
    if m.n() != n.n() || m.tuple_count() != n.tuple_count() {
        return Ok(None);
    }
    let cm = canonical_form(m);
    let cn = canonical_form(n);
    if cm.form != cn.form {
        return Ok(None);
    }
    let mut inv_n = vec![0; n.n()];
    for (v, &l) in cn.labeling.iter().enumerate() {
        inv_n[l] = v;
    }
    Ok(Some(cm.labeling.iter().map(|&l| inv_n[l]).collect()))
}

struct Leaf {
    labeling: Vec<usize>,
    inverse: Vec<usize>,
    encoding: Vec<Vec<Tuple>>,
}

struct Search<'a> {
    m: &'a Structure,
    /// Flattened (relation, tuple) list for refinement.
    tuples: Vec<(usize, &'a Tuple)>,
    first: Option<Leaf>,
    best: Option<Leaf>,
    first_path: Vec<usize>,
    generators: Vec<Vec<usize>>,
}

impl<'a> Search<'a> {
    fn new(m: &'a Structure) -> Self {
        let tuples = m
            .relations()
            .iter()
            .enumerate()
            .flat_map(|(r, ts)| ts.iter().map(move |t| (r, t)))
            .collect();
        Search { m, tuples, first: None, best: None, first_path: Vec::new(), generators: Vec::new() }
    }

    fn initial_cells(&self) -> Vec<usize> {
        let n = self.m.n();
        let mut keys: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (ci, &c) in self.m.constant_values().iter().enumerate() {
            keys[c].push(ci);
        }
        rank_by(&keys)
    }

    fn refine(&self, mut cells: Vec<usize>) -> Vec<usize> {
        let n = self.m.n();
        let mut count = distinct(&cells);
        loop {
            if count == n {
                return cells;
            }
            let mut sigs: Vec<Vec<u64>> = vec![Vec::new(); n];
            for &(r, t) in &self.tuples {
                for (p, &e) in t.iter().enumerate() {
                    let mut h = DefaultHasher::new();
                    (r, p).hash(&mut h);
                    for &x in t.iter() {
                        cells[x].hash(&mut h);
                    }
                    sigs[e].push(h.finish());
                }
            }
            let keys: Vec<(usize, Vec<u64>)> = sigs
                .into_iter()
                .enumerate()
                .map(|(v, mut s)| {
                    s.sort_unstable();
                    (cells[v], s)
                })
                .collect();
            let next = rank_by(&keys);
            let next_count = distinct(&next);
            if next_count == count {
                return next;
            }
            cells = next;
            count = next_count;
        }
    }

    fn explore(&mut self, cells: Vec<usize>, prefix: &mut Vec<usize>) {
        let cells = self.refine(cells);
        let n = self.m.n();
        let mut sizes = vec![0usize; n.max(1)];
        for &c in &cells {
            sizes[c] += 1;
        }
        let Some(target) = (0..n).find(|&c| sizes[c] > 1) else {
            self.leaf(cells, prefix);
            return;
        };
        let candidates: Vec<usize> = (0..n).filter(|&v| cells[v] == target).collect();
        let mut explored: Vec<usize> = Vec::new();
        for w in candidates {
            if !explored.is_empty() {
                let orbit = self.orbits_fixing(prefix);
                if explored.iter().any(|&u| orbit[u] == orbit[w]) {
                    continue;
                }
            }
            let keys: Vec<(usize, bool)> = (0..n).map(|v| (cells[v], v != w)).collect();
            prefix.push(w);
            self.explore(rank_by(&keys), prefix);
            prefix.pop();
            explored.push(w);
        }
    }

    fn leaf(&mut self, labeling: Vec<usize>, prefix: &[usize]) {
        let encoding = encode(self.m, &labeling);
        let mut inverse = vec![0; labeling.len()];
        for (v, &l) in labeling.iter().enumerate() {
            inverse[l] = v;
        }
        let leaf = Leaf { labeling, inverse, encoding };
        let Some(first) = &self.first else {
            self.first_path = prefix.to_vec();
            self.best = Some(Leaf {
                labeling: leaf.labeling.clone(),
                inverse: leaf.inverse.clone(),
                encoding: leaf.encoding.clone(),
            });
            self.first = Some(leaf);
            return;
        };
        let best = self.best.as_ref().expect("best set with first");
        let partner = if leaf.encoding == first.encoding {
            Some(&first.inverse)
        } else if leaf.encoding == best.encoding {
            Some(&best.inverse)
        } else {
            None
        };
        if let Some(inv) = partner {
            let gamma: Vec<usize> = leaf.labeling.iter().map(|&l| inv[l]).collect();
            if gamma.iter().enumerate().any(|(v, &g)| v != g) && !self.generators.contains(&gamma) {
                self.generators.push(gamma);
            }
            return;
        }
        if leaf.encoding < best.encoding {
            self.best = Some(leaf);
        }
    }

    /// Orbit representatives under the generators fixing `prefix` pointwise.
    fn orbits_fixing(&self, prefix: &[usize]) -> Vec<usize> {
        let n = self.m.n();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for g in &self.generators {
            if prefix.iter().all(|&v| g[v] == v) {
                for v in 0..n {
                    let (a, b) = (find(&mut parent, v), find(&mut parent, g[v]));
                    if a != b {
                        parent[a] = b;
                    }
                }
            }
        }
        (0..n).map(|v| find(&mut parent, v)).collect()
    }

    fn group_order(&self) -> BigUint {
        let mut order = BigUint::from(1u32);
        for d in 0..self.first_path.len() {
            let orbit = self.orbits_fixing(&self.first_path[..d]);
            let rep = orbit[self.first_path[d]];
            let len = orbit.iter().filter(|&&o| o == rep).count();
            order *= len;
        }
        order
    }
}

fn encode(m: &Structure, labeling: &[usize]) -> Vec<Vec<Tuple>> {
    m.relations()
        .iter()
        .map(|ts| {
            let mut out: Vec<Tuple> =
                ts.iter().map(|t| t.iter().map(|&e| labeling[e]).collect()).collect();
            out.sort_unstable();
            out
        })
        .collect()
}

/// Dense ranks `0..` of the keys in sorted key order.
fn rank_by<K: Ord>(keys: &[K]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    let mut ranks = vec![0; keys.len()];
    let mut rank = 0;
    for (i, &v) in order.iter().enumerate() {
        if i > 0 && keys[order[i - 1]] != keys[v] {
            rank += 1;
        }
        ranks[v] = rank;
    }
    ranks
}

fn distinct(cells: &[usize]) -> usize {
    cells.iter().max().map_or(0, |m| m + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::{permutations, Language};
    use std::collections::BTreeSet;
    use std::sync::Arc;

    fn cycle(n: usize) -> Structure {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Structure::graph(n, &edges).unwrap()
    }

    fn brute_aut(m: &Structure) -> usize {
        let ids: Vec<usize> = (0..m.n()).collect();
        permutations(&ids)
            .into_iter()
            .filter(|p| &m.apply_bijection(p, m.n()).unwrap() == m)
            .count()
    }

    #[test]
    fn automorphism_orders() {
        let k3 = Structure::graph(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(automorphisms(&k3).order, BigUint::from(6u32));
        assert_eq!(brute_aut(&cycle(4)), 8);
        assert_eq!(automorphisms(&cycle(4)).order, BigUint::from(8u32));
        let lang = Arc::new(Language::single("R", 2));
        let d = Structure::new(lang, 2, vec![[vec![0, 1]].into()], vec![]).unwrap();
        assert_eq!(automorphisms(&d).order, BigUint::from(1u32));
    }

    #[test]
    fn generators_are_automorphisms() {
        let petersen_like = cycle(6);
        let g = automorphisms(&petersen_like);
        for gen in &g.generators {
            assert_eq!(petersen_like.apply_bijection(gen, 6).unwrap(), petersen_like);
        }
        assert_eq!(g.order, BigUint::from(12u32));
    }

    #[test]
    fn c4_and_star_differ() {
        let star = Structure::graph(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        assert!(is_isomorphic(&cycle(4), &star).unwrap().is_none());
        assert_ne!(canonical_form(&cycle(4)).form, canonical_form(&star).form);
    }

    #[test]
    fn p4_relabelings_share_canonical_form() {
        let p4 = Structure::graph(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let canon = canonical_form(&p4).form;
        let ids: Vec<usize> = (0..4).collect();
        let mut images = BTreeSet::new();
        for p in permutations(&ids) {
            let img = p4.apply_bijection(&p, 4).unwrap();
            assert_eq!(canonical_form(&img).form, canon);
            let w = is_isomorphic(&p4, &img).unwrap().unwrap();
            assert_eq!(p4.apply_bijection(&w, 4).unwrap(), img);
            images.insert(img);
        }
        // orbit-stabilizer: 4!/|Aut(P4)| = 12
        assert_eq!(images.len(), 12);
        assert_eq!(canonical_form(&canon).form, canon);
    }

    #[test]
    fn single_hyperedges_isomorphic() {
        let a = Structure::uniform_hypergraph(4, 3, &[vec![0, 1, 2]]).unwrap();
        let b = Structure::uniform_hypergraph(4, 3, &[vec![1, 2, 3]]).unwrap();
        let ids: Vec<usize> = (0..4).collect();
        let brute = permutations(&ids).into_iter().any(|p| a.apply_bijection(&p, 4).unwrap() == b);
        assert!(brute);
        let w = is_isomorphic(&a, &b).unwrap().unwrap();
        assert_eq!(a.apply_bijection(&w, 4).unwrap(), b);
    }

    #[test]
    fn constants_are_fixed() {
        let lang = Arc::new(Language::new(vec![], vec!["c".into(), "d".into()]).unwrap());
        let a = Structure::new(lang.clone(), 3, vec![], vec![0, 1]).unwrap();
        let b = Structure::new(lang.clone(), 3, vec![], vec![1, 0]).unwrap();
        assert!(is_isomorphic(&a, &b).unwrap().is_some());
        assert_eq!(automorphisms(&a).order, BigUint::from(1u32));
        let same = Structure::new(lang, 3, vec![], vec![2, 2]).unwrap();
        assert!(is_isomorphic(&a, &same).unwrap().is_none());
        assert_eq!(automorphisms(&same).order, BigUint::from(2u32));
    }
}
