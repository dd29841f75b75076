use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::{for_each_tuple, Language, Structure, Tuple};
use crate::error::{Error, Result};

/// A Boolean combination of atoms of the source language.
///
/// Variables are indices into the argument list of the interpreted relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    Atom { relation: String, args: Vec<usize> },
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

impl Formula {
    pub fn atom(relation: &str, args: &[usize]) -> Self {
        Formula::Atom { relation: relation.to_string(), args: args.to_vec() }
    }

    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    fn check(&self, source: &Language, vars: usize) -> Result<()> {
        match self {
            Formula::Atom { relation, args } => {
                let idx = source.relation_index(relation)?;
                let arity = source.relations()[idx].arity;
                if args.len() != arity {
                    return Err(Error::ArityMismatch(format!(
                        "`{relation}` takes {arity} arguments, got {}",
                        args.len()
                    )));
                }
                if let Some(&v) = args.iter().find(|&&v| v >= vars) {
                    return Err(Error::ArityMismatch(format!(
                        "variable x{} used in a formula with {vars} variables",
                        v + 1
                    )));
                }
                Ok(())
            }
            Formula::Not(f) => f.check(source, vars),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().try_for_each(|f| f.check(source, vars)),
        }
    }

    fn eval(&self, n: &Structure, index: &BTreeMap<&str, usize>, tuple: &[usize]) -> bool {
        match self {
            Formula::Atom { relation, args } => {
                let t: Tuple = args.iter().map(|&a| tuple[a]).collect();
                n.holds(index[relation.as_str()], &t)
            }
            Formula::Not(f) => !f.eval(n, index, tuple),
            Formula::And(fs) => fs.iter().all(|f| f.eval(n, index, tuple)),
            Formula::Or(fs) => fs.iter().any(|f| f.eval(n, index, tuple)),
        }
    }
}

/// A relational interpretation: one formula per relation of the target language.
#[derive(Debug, Clone)]
pub struct Interpretation {
    pub target: Arc<Language>,
    pub formulas: BTreeMap<String, Formula>,
}

/// Evaluates each interpreted relation tuple-wise over all of `[n]^arity`
/// (negation included), keeping the domain. Constants of the target language
/// are copied by name from the source structure.
pub fn apply_interpretation(alpha: &Interpretation, source: &Structure) -> Result<Structure> {
    let src_lang = source.language();
    let index: BTreeMap<&str, usize> =
        src_lang.relations().iter().enumerate().map(|(i, r)| (r.name.as_str(), i)).collect();
    let mut relations = Vec::with_capacity(alpha.target.relations().len());
    for sym in alpha.target.relations() {
        let f = alpha
            .formulas
            .get(&sym.name)
            .ok_or_else(|| Error::ArityMismatch(format!("no formula for `{}`", sym.name)))?;
        f.check(src_lang, sym.arity)?;
        let mut tuples = BTreeSet::new();
        for_each_tuple(source.n(), sym.arity, |t| {
            if f.eval(source, &index, t) {
                tuples.insert(t.to_vec());
            }
        });
        relations.push(tuples);
    }
    let mut constants = Vec::new();
    for c in alpha.target.constants() {
        let i = src_lang.constant_index(c).ok_or_else(|| Error::MissingConstant(c.clone()))?;
        constants.push(source.constant_values()[i]);
    }
    Structure::new(alpha.target.clone(), source.n(), relations, constants)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph_alpha(f: Formula) -> Interpretation {
        Interpretation {
            target: Arc::new(Language::graph()),
            formulas: [("E".to_string(), f)].into_iter().collect(),
        }
    }

    #[test]
    fn identity_interpretation() {
        let c4 = Structure::graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let out = apply_interpretation(&graph_alpha(Formula::atom("E", &[0, 1])), &c4).unwrap();
        assert_eq!(out, c4);
    }

    #[test]
    fn negation_ranges_over_all_pairs() {
        let c4 = Structure::graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let out =
            apply_interpretation(&graph_alpha(Formula::not(Formula::atom("E", &[0, 1]))), &c4).unwrap();
        // tuple-wise oracle: every ordered pair not in E, diagonal included
        let mut expect = BTreeSet::new();
        for a in 0..4 {
            for b in 0..4 {
                if !c4.holds(0, &[a, b]) {
                    expect.insert(vec![a, b]);
                }
            }
        }
        assert_eq!(out.relation(0), &expect);
        assert_eq!(expect.len(), 8);
        assert!(expect.contains(&vec![0, 2]) && expect.contains(&vec![1, 1]));
    }

    #[test]
    fn symmetric_core() {
        let lang = Arc::new(Language::single("E", 2));
        let d = Structure::new(lang, 3, vec![[vec![0, 1], vec![1, 0], vec![1, 2]].into()], vec![])
            .unwrap();
        let f = Formula::And(vec![Formula::atom("E", &[0, 1]), Formula::atom("E", &[1, 0])]);
        let out = apply_interpretation(&graph_alpha(f), &d).unwrap();
        assert_eq!(out.relation(0), &[vec![0, 1], vec![1, 0]].into());
    }

    #[test]
    fn arity_mismatch() {
        let c = Structure::graph(2, &[(0, 1)]).unwrap();
        let bad = graph_alpha(Formula::atom("E", &[0]));
        assert!(matches!(apply_interpretation(&bad, &c), Err(Error::ArityMismatch(_))));
        let bad = graph_alpha(Formula::atom("E", &[0, 2]));
        assert!(matches!(apply_interpretation(&bad, &c), Err(Error::ArityMismatch(_))));
    }
}
