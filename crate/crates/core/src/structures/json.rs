//! JSON encoding of languages and structures. Elements are one-based on the wire.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Language, RelationSymbol, Structure};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct RelationJson {
    pub name: String,
    pub arity: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct LanguageJson {
    pub relations: Vec<RelationJson>,
    #[serde(default)]
    pub constants: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct StructureJson {
    pub language: LanguageJson,
    pub n: usize,
    #[serde(default)]
    pub tuples: BTreeMap<String, Vec<Vec<usize>>>,
    #[serde(default)]
    pub constants: BTreeMap<String, usize>,
}

impl From<&Language> for LanguageJson {
    fn from(l: &Language) -> Self {
        LanguageJson {
            relations: l
                .relations()
                .iter()
                .map(|r| RelationJson { name: r.name.clone(), arity: r.arity })
                .collect(),
            constants: l.constants().to_vec(),
        }
    }
}

impl TryFrom<&LanguageJson> for Language {
    type Error = Error;

    fn try_from(j: &LanguageJson) -> Result<Self> {
        Language::new(
            j.relations.iter().map(|r| RelationSymbol { name: r.name.clone(), arity: r.arity }).collect(),
            j.constants.clone(),
        )
    }
}

impl From<&Structure> for StructureJson {
    fn from(m: &Structure) -> Self {
        let lang = m.language();
        let tuples = lang
            .relations()
            .iter()
            .zip(m.relations())
            .map(|(sym, ts)| {
                (sym.name.clone(), ts.iter().map(|t| t.iter().map(|e| e + 1).collect()).collect())
            })
            .collect();
        let constants = lang
            .constants()
            .iter()
            .zip(m.constant_values())
            .map(|(c, &v)| (c.clone(), v + 1))
            .collect();
        StructureJson { language: lang.as_ref().into(), n: m.n(), tuples, constants }
    }
}

impl TryFrom<&StructureJson> for Structure {
    type Error = Error;

    fn try_from(j: &StructureJson) -> Result<Self> {
        let lang = Arc::new(Language::try_from(&j.language)?);
        let one_based = |e: usize| -> Result<usize> {
            if e == 0 || e > j.n {
                Err(Error::OutOfRange { element: e, n: j.n })
            } else {
                Ok(e - 1)
            }
        };
        for name in j.tuples.keys() {
            lang.relation_index(name)?;
        }
        let mut relations = Vec::new();
        for sym in lang.relations() {
            let mut set = BTreeSet::new();
            for t in j.tuples.get(&sym.name).into_iter().flatten() {
                set.insert(t.iter().map(|&e| one_based(e)).collect::<Result<Vec<_>>>()?);
            }
            relations.push(set);
        }
        let mut constants = Vec::new();
        for c in lang.constants() {
            let v = j
                .constants
                .get(c)
                .ok_or_else(|| Error::InvalidStructure(format!("constant `{c}` has no value")))?;
            constants.push(one_based(*v)?);
        }
        Structure::new(lang, j.n, relations, constants)
    }
}

impl Structure {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(StructureJson::from(self)).expect("structure serializes")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let j: StructureJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        Structure::try_from(&j)
    }

    /// Parses one structure per file or a newline-delimited stream.
    pub fn parse_many(s: &str) -> Result<Vec<Self>> {
        let trimmed = s.trim();
        if trimmed.is_empty() {
            return Ok(vec![]);
        }
        if let Ok(one) = Structure::from_json_str(trimmed) {
            return Ok(vec![one]);
        }
        trimmed.lines().filter(|l| !l.trim().is_empty()).map(Structure::from_json_str).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_is_one_based() {
        let p3 = Structure::graph(3, &[(0, 1), (1, 2)]).unwrap();
        let v = p3.to_json();
        assert_eq!(v["tuples"]["E"][0], serde_json::json!([1, 2]));
        let back = Structure::from_json_str(&v.to_string()).unwrap();
        assert_eq!(back, p3);
    }

    #[test]
    fn constants_and_streams() {
        let s = r#"{"language":{"relations":[{"name":"R","arity":1}],"constants":["c"]},"n":2,"tuples":{"R":[[2]]},"constants":{"c":1}}"#;
        let stream = format!("{s}\n{s}\n");
        let many = Structure::parse_many(&stream).unwrap();
        assert_eq!(many.len(), 2);
        assert_eq!(many[0].constant_values(), &[0]);
        let bad = r#"{"language":{"relations":[{"name":"R","arity":1}]},"n":2,"tuples":{"R":[[3]]}}"#;
        assert!(matches!(Structure::from_json_str(bad), Err(Error::OutOfRange { .. })));
    }
}
