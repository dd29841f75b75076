//! Built-in families used in tests, examples and the `corpus` command.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::oscillate::{self, Hypergraph};
use crate::structures::Structure;
use crate::template::{builtin, Template};

/// `m` disjoint edges `{2i, 2i + 1}`.
pub fn matching(m: usize) -> Structure {
    let edges: Vec<(usize, usize)> = (0..m).map(|i| (2 * i, 2 * i + 1)).collect();
    Structure::graph(2 * m, &edges).expect("valid matching")
}

pub fn clique(n: usize) -> Structure {
    let edges: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    Structure::graph(n, &edges).expect("valid clique")
}

/// The half-graph on `a_1..a_m`, `b_1..b_m` with every `b_j` replaced by `m` copies:
/// `a_i` is joined to the copies of `b_j` iff `i <= j`. Returns the graph and `a_1..a_m`.
pub fn halfgraph_blowup(m: usize) -> (Structure, Vec<usize>) {
    let copy = |j: usize, c: usize| m + j * m + c;
    let edges: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| (i..m).flat_map(move |j| (0..m).map(move |c| (i, copy(j, c)))))
        .collect();
    let g = Structure::graph(m + m * m, &edges).expect("valid half-graph");
    (g, (0..m).collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CorpusItem {
    Structure(Structure),
    Hypergraph(Hypergraph),
    Template(Template),
}

impl CorpusItem {
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            CorpusItem::Structure(s) => s.to_json(),
            CorpusItem::Hypergraph(h) => serde_json::from_str(&h.to_json()).expect("valid json"),
            CorpusItem::Template(t) => t.to_json(),
        }
    }
}

pub const KINDS: [&str; 5] = ["matching", "clique", "bipartite-template", "halfgraph-blowup", "tight-cycle"];

fn param(params: &BTreeMap<String, usize>, key: &str) -> Result<usize> {
    params.get(key).copied().ok_or_else(|| Error::Precondition(format!("missing parameter `{key}`")))
}

/// One member of the family `kind`, e.g. `matching` with `m`, `tight-cycle` with `r` and `v`.
pub fn generate(kind: &str, params: &BTreeMap<String, usize>) -> Result<CorpusItem> {
    Ok(match kind {
        "matching" => CorpusItem::Structure(matching(param(params, "m")?)),
        "clique" => CorpusItem::Structure(clique(param(params, "n")?)),
        "bipartite-template" => CorpusItem::Template(builtin::bipartite()),
        "halfgraph-blowup" => CorpusItem::Structure(halfgraph_blowup(param(params, "m")?).0),
        "tight-cycle" => CorpusItem::Hypergraph(oscillate::tight_cycle(param(params, "r")?, param(params, "v")?)?),
        other => return Err(Error::UnknownKind(other.to_string())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(pairs: &[(&str, usize)]) -> BTreeMap<String, usize> {
        pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
    }

    #[test]
    fn families() {
        assert_eq!(matching(4).edges(), vec![(0, 1), (2, 3), (4, 5), (6, 7)]);
        assert_eq!(clique(4).edges().len(), 6);
        let (b, a) = halfgraph_blowup(4);
        assert_eq!(b.n(), 20);
        assert_eq!(a, vec![0, 1, 2, 3]);
        // a_i sees 4 (m - i) copies
        assert_eq!(b.edges().len(), 4 * (4 + 3 + 2 + 1));
    }

    #[test]
    fn generation() {
        match generate("tight-cycle", &params(&[("r", 3), ("v", 5)])).unwrap() {
            CorpusItem::Hypergraph(h) => {
                let want: Vec<Vec<usize>> =
                    vec![vec![0, 1, 2], vec![0, 1, 4], vec![0, 3, 4], vec![1, 2, 3], vec![2, 3, 4]];
                assert_eq!(h.edges(), want.as_slice());
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(generate("matching", &params(&[("m", 4)])).unwrap(), CorpusItem::Structure(matching(4)));
        assert_eq!(generate("nope", &params(&[])), Err(Error::UnknownKind("nope".into())));
        assert!(matches!(generate("clique", &params(&[])), Err(Error::Precondition(_))));
    }
}
