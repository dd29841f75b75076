use std::collections::BTreeSet;
use std::sync::Arc;

use hspeed::arrays::{is_k_mutually_algebraic, supports_m_array, type_space, Split};
use hspeed::components::{components_of, neighborhood};
use hspeed::oscillate::{self, Hypergraph};
use hspeed::property::{bound_violation, members, speed, Predicate, PropertySpec};
use hspeed::simclass::{decomposition, realize, sim_related};
use hspeed::structures::{
    apply_interpretation, automorphisms, canonical_form, is_isomorphic, permutations, Formula, Interpretation,
};
use hspeed::template::{builtin, count_compatible, enumerate_compatible, is_compatible, speed_form};
use hspeed::{Language, Structure};
use num_bigint::BigUint;
use num_rational::Rational64;
use proptest::prelude::*;

fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect()
}

fn graph_from_mask(n: usize, mask: u64) -> Structure {
    let edges: Vec<_> = pairs(n).into_iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, e)| e).collect();
    Structure::graph(n, &edges).unwrap()
}

fn digraph_from_mask(n: usize, mask: u64) -> Structure {
    let mut tuples = BTreeSet::new();
    let mut bit = 0;
    for u in 0..n {
        for v in 0..n {
            if mask >> bit & 1 == 1 {
                tuples.insert(vec![u, v]);
            }
            bit += 1;
        }
    }
    Structure::new(Arc::new(Language::single("R", 2)), n, vec![tuples], vec![]).unwrap()
}

fn graph() -> impl Strategy<Value = Structure> {
    (1usize..=6, any::<u64>()).prop_map(|(n, mask)| graph_from_mask(n, mask))
}

fn digraph() -> impl Strategy<Value = Structure> {
    (1usize..=4, any::<u64>()).prop_map(|(n, mask)| digraph_from_mask(n, mask))
}

fn structure() -> impl Strategy<Value = Structure> {
    prop_oneof![graph(), digraph()]
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

fn structure_and_perm() -> impl Strategy<Value = (Structure, Vec<usize>)> {
    structure().prop_flat_map(|m| {
        let n = m.n();
        (Just(m), permutation(n))
    })
}

fn inverse(f: &[usize]) -> Vec<usize> {
    let mut g = vec![0; f.len()];
    for (i, &y) in f.iter().enumerate() {
        g[y] = i;
    }
    g
}

fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::from(1u32), |a, k| a * k)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bijection_round_trip((m, f) in structure_and_perm()) {
        let image = m.apply_bijection(&f, m.n()).unwrap();
        prop_assert_eq!(image.apply_bijection(&inverse(&f), m.n()).unwrap(), m);
    }

    #[test]
    fn isomorphism_witnesses((m, f) in structure_and_perm()) {
        let image = m.apply_bijection(&f, m.n()).unwrap();
        let w = is_isomorphic(&m, &image).unwrap().expect("images are isomorphic");
        prop_assert_eq!(m.apply_bijection(&w, m.n()).unwrap(), image.clone());
        let back = is_isomorphic(&image, &m).unwrap().expect("symmetric");
        prop_assert_eq!(image.apply_bijection(&back, m.n()).unwrap(), m.clone());
        prop_assert!(is_isomorphic(&m, &m).unwrap().is_some());
        prop_assert_eq!(canonical_form(&m).form, canonical_form(&image).form);
    }

    #[test]
    fn canonical_forms_separate(a in graph(), b in graph()) {
        let same = canonical_form(&a).form == canonical_form(&b).form;
        prop_assert_eq!(same, is_isomorphic(&a, &b).unwrap().is_some());
    }

    #[test]
    fn sim_is_an_equivalence(m in structure()) {
        let n = m.n();
        let rel = |a, b| sim_related(&m, a, b).unwrap();
        for a in 0..n {
            prop_assert!(rel(a, a));
            for b in 0..n {
                prop_assert_eq!(rel(a, b), rel(b, a));
                for c in 0..n {
                    if rel(a, b) && rel(b, c) {
                        prop_assert!(rel(a, c));
                    }
                }
            }
        }
    }

    #[test]
    fn decomposition_reconstructs(m in structure()) {
        let d = decomposition(&m);
        let rebuilt = realize(m.language(), &d.class_of(m.n()), m.constant_values(), &d.sigma);
        prop_assert_eq!(rebuilt, m);
    }

    #[test]
    fn class_sizes_are_isomorphism_invariant((m, f) in structure_and_perm()) {
        let image = m.apply_bijection(&f, m.n()).unwrap();
        let mut a = decomposition(&m).sizes();
        let mut b = decomposition(&image).sizes();
        a.sort_unstable();
        b.sort_unstable();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn class_preserving_permutations_are_automorphisms(m in graph(), seed in any::<u64>()) {
        // rotate every class by an amount derived from the seed
        let d = decomposition(&m);
        let mut f: Vec<usize> = (0..m.n()).collect();
        for (i, class) in d.classes.iter().enumerate() {
            let shift = (seed >> (i % 16 * 4)) as usize % class.len();
            for (j, &v) in class.iter().enumerate() {
                f[v] = class[(j + shift) % class.len()];
            }
        }
        prop_assert_eq!(m.apply_bijection(&f, m.n()).unwrap(), m);
    }

    #[test]
    fn interpretation_commutes_with_substructures(m in graph(), keep in any::<u8>()) {
        let alpha = Interpretation {
            target: Arc::new(Language::single("R", 2)),
            formulas: [(
                "R".to_string(),
                Formula::Or(vec![Formula::atom("E", &[0, 1]), Formula::not(Formula::atom("E", &[1, 0]))]),
            )]
            .into_iter()
            .collect(),
        };
        let subset: Vec<usize> = (0..m.n()).filter(|i| keep >> i & 1 == 1).collect();
        prop_assume!(!subset.is_empty());
        let (sub, _) = m.induced_substructure(&subset).unwrap();
        let lhs = apply_interpretation(&alpha, &m).unwrap().induced_substructure(&subset).unwrap().0;
        prop_assert_eq!(lhs, apply_interpretation(&alpha, &sub).unwrap());
    }

    #[test]
    fn components_partition_into_maximal_connected_sets(m in structure()) {
        let report = components_of(&m);
        let mut seen = vec![0usize; m.n()];
        for c in &report.components {
            for &v in c {
                seen[v] += 1;
            }
            // connected: closure of the first element within c by neighborhoods is c
            let mut reached = BTreeSet::from([c[0]]);
            let mut stack = vec![c[0]];
            while let Some(u) = stack.pop() {
                for w in neighborhood(&m, u).unwrap() {
                    prop_assert!(c.contains(&w), "neighbor outside component");
                    if reached.insert(w) {
                        stack.push(w);
                    }
                }
            }
            prop_assert_eq!(reached.into_iter().collect::<Vec<_>>(), c.clone());
        }
        prop_assert!(seen.iter().all(|&k| k == 1));
        let total: usize = report.histogram.iter().map(|(s, k)| s * k).sum();
        prop_assert_eq!(total, m.n());
    }

    #[test]
    fn strictly_balanced_hypergraphs_are_connected(v in 3usize..=7, mask in any::<u64>()) {
        let all: Vec<Vec<usize>> = (0..v).flat_map(|a| (a + 1..v).flat_map(move |b| (b + 1..v).map(move |c| vec![a, b, c]))).collect();
        let edges: Vec<Vec<usize>> = all.into_iter().enumerate().filter(|(i, _)| mask >> (i % 64) & 1 == 1).map(|(_, e)| e).collect();
        let h = Hypergraph::new(3, v, edges.clone()).unwrap();
        prop_assume!(h.e() > 0);
        if oscillate::is_strictly_balanced(&h) {
            let s = Structure::uniform_hypergraph(v, 3, &edges).unwrap();
            prop_assert_eq!(components_of(&s).components.len(), 1);
        }
    }

    #[test]
    fn q_is_inside_s_and_p(n in 2usize..=7, mask in any::<u64>(), num in 1i64..=6, den in 1i64..=6) {
        let g = Hypergraph::from_structure(&graph_from_mask(n, mask)).unwrap();
        let c = Rational64::new(num, den);
        if oscillate::in_q(&g, c) {
            prop_assert!(oscillate::in_s(&g, c));
            let nu: Vec<usize> = (2..=n).collect();
            prop_assert!(oscillate::in_p(&g, &nu, c).unwrap());
        }
    }
}

#[test]
fn orbit_stabilizer() {
    for n in 1..=5 {
        for mask in 0..1u64 << pairs(n).len() {
            let m = graph_from_mask(n, mask);
            let images: BTreeSet<Structure> =
                permutations(&(0..n).collect::<Vec<_>>()).iter().map(|f| m.apply_bijection(f, n).unwrap()).collect();
            assert_eq!(BigUint::from(images.len()) * automorphisms(&m).order, factorial(n));
        }
    }
}

#[test]
fn enumerated_members_fit_their_template() {
    for (name, t) in builtin::all() {
        for n in 1..=6 {
            let found = enumerate_compatible(&t, n, 64).unwrap();
            assert_eq!(BigUint::from(found.len()), count_compatible(&t, n).unwrap(), "{name} at n = {n}");
            for m in &found {
                let classes = is_compatible(m, &t).unwrap().expect("member is compatible");
                let mut witness: Vec<Vec<usize>> = classes.into_iter().filter(|c| !c.is_empty()).collect();
                let mut actual = decomposition(m).classes;
                witness.iter_mut().for_each(|c| c.sort_unstable());
                witness.sort();
                actual.sort();
                assert_eq!(witness, actual, "{name}: classes of {m:?}");
            }
        }
    }
}

#[test]
fn counts_are_invariant_under_class_reordering() {
    for (name, t) in builtin::all() {
        let f = t.finite_classes();
        let order: Vec<usize> = (0..f).rev().chain((f..t.k()).rev()).collect();
        let r = t.reordered(&order).unwrap();
        for n in 1..=8 {
            assert_eq!(count_compatible(&t, n).unwrap(), count_compatible(&r, n).unwrap(), "{name} at n = {n}");
        }
    }
}

#[test]
fn members_are_closed_under_deletion() {
    for p in Predicate::ALL {
        let spec = PropertySpec::graph_predicate(p);
        for level in members(&spec, 5).unwrap() {
            for m in level {
                for drop in 0..m.n() {
                    let keep: Vec<usize> = (0..m.n()).filter(|&v| v != drop).collect();
                    let (sub, _) = m.induced_substructure(&keep).unwrap();
                    assert!(spec.contains(&sub).unwrap(), "{p:?}: deleting {drop} from {m:?}");
                }
            }
        }
    }
}

#[test]
fn labeled_counts_match_brute_force() {
    for p in Predicate::ALL {
        let spec = PropertySpec::graph_predicate(p);
        let table = speed(&spec, 6).unwrap();
        for row in &table.rows {
            let n = row.n;
            let brute = (0..1u64 << pairs(n).len()).filter(|&mask| spec.contains(&graph_from_mask(n, mask)).unwrap()).count();
            assert_eq!(row.labeled, BigUint::from(brute), "{p:?} at n = {n}");
        }
    }
}

#[test]
fn forbidding_more_gives_fewer() {
    let k3 = Structure::graph(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
    let p3 = Structure::graph(3, &[(0, 1), (1, 2)]).unwrap();
    let c4 = Structure::graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
    let small = speed(&PropertySpec::forbid_graphs(vec![k3.clone()]).unwrap(), 6).unwrap().labeled();
    let mid = speed(&PropertySpec::forbid_graphs(vec![k3.clone(), c4.clone()]).unwrap(), 6).unwrap().labeled();
    let large = speed(&PropertySpec::forbid_graphs(vec![k3, c4, p3]).unwrap(), 6).unwrap().labeled();
    for i in 0..small.len() {
        assert!(small[i] >= mid[i] && mid[i] >= large[i]);
    }
}

#[test]
fn p_members_at_checkpoints_are_sparse() {
    // every graph on nu_i vertices in P lies in S at that size
    let c = Rational64::new(1, 1);
    for n in 3..=5 {
        let nu = [n];
        for mask in 0..1u64 << pairs(n).len() {
            let g = Hypergraph::from_structure(&graph_from_mask(n, mask)).unwrap();
            if oscillate::in_p(&g, &nu, c).unwrap() {
                assert!(oscillate::in_s(&g, c), "{}", g.to_json());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn split_types_partition_the_tuples(m in structure(), params in proptest::collection::vec(0usize..6, 0..=3)) {
        let params: Vec<usize> = params.into_iter().filter(|&a| a < m.n()).collect();
        for split in Split::all(&m, 0) {
            let types = type_space(&m, &split, &params).unwrap();
            let width = split.x_positions.len();
            let mut seen = BTreeSet::new();
            for p in &types {
                prop_assert!(!p.realizations.is_empty());
                for x in &p.realizations {
                    prop_assert!(seen.insert(x.clone()), "tuple in two types");
                }
            }
            prop_assert_eq!(seen.len(), m.n().pow(width as u32));
        }
    }

    #[test]
    fn m_arrays_are_monotone(m in structure(), size in 1usize..=4) {
        for split in Split::all(&m, 0) {
            for p in type_space(&m, &split, &[]).unwrap() {
                if let Some(array) = supports_m_array(&p, size) {
                    prop_assert_eq!(array.len(), size);
                    let mut used = BTreeSet::new();
                    for x in &array {
                        let support: BTreeSet<usize> = x.iter().copied().collect();
                        prop_assert!(support.iter().all(|v| used.insert(*v)), "realizations overlap");
                    }
                    prop_assert!(supports_m_array(&p, size - 1).is_some());
                }
            }
        }
    }

    #[test]
    fn bounded_members_are_algebraic_with_small_neighborhoods(m in structure(), k in 1usize..=4) {
        let bounded = bound_violation(&m, 0, k).is_none();
        prop_assert_eq!(bounded, is_k_mutually_algebraic(&m, 0, k).unwrap().is_consistent());
        if bounded {
            prop_assert!(is_k_mutually_algebraic(&m, 0, k + 1).unwrap().is_consistent());
            for a in 0..m.n() {
                // arity 2, one relation
                prop_assert!(neighborhood(&m, a).unwrap().len() <= 2 * k);
            }
        }
    }
}

#[test]
fn single_infinite_class_degree_is_finite_total() {
    for (name, t) in builtin::all().into_iter().filter(|(_, t)| t.infinite_classes() == 1) {
        let form = speed_form(&t, 6..=12).unwrap();
        assert_eq!(form.bases(), 1, "{name}");
        assert_eq!(form.degree(1), Some(t.finite_total()), "{name}");
    }
}
