//! Template JSON: sizes are integers or `"inf"`, class indices are one-based.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{ClassSize, Template};
use crate::error::{Error, Result};
use crate::structures::json::LanguageJson;
use crate::structures::{AtomicDiff, Language};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SizeJson {
    Finite(usize),
    Marker(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateJson {
    pub language: LanguageJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub sizes: Vec<SizeJson>,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<usize>,
    #[serde(default)]
    pub sigma: BTreeMap<String, Vec<Vec<usize>>>,
}

impl From<&Template> for TemplateJson {
    fn from(t: &Template) -> Self {
        let sizes = t
            .sizes()
            .iter()
            .map(|s| match s {
                ClassSize::Finite(v) => SizeJson::Finite(*v),
                ClassSize::Infinite => SizeJson::Marker("inf".into()),
            })
            .collect();
        let sigma = t
            .sigma()
            .iter()
            .filter(|(_, sig)| !sig.is_empty())
            .map(|(a, sig)| (a.key(t.language()), sig.iter().map(|tp| tp.iter().map(|i| i + 1).collect()).collect()))
            .collect();
        TemplateJson {
            language: t.language().as_ref().into(),
            k: Some(t.k()),
            sizes,
            threshold: Some(t.threshold()),
            sigma,
        }
    }
}

impl TryFrom<&TemplateJson> for Template {
    type Error = Error;

    fn try_from(j: &TemplateJson) -> Result<Self> {
        let language = Arc::new(Language::try_from(&j.language)?);
        let sizes = j
            .sizes
            .iter()
            .map(|s| match s {
                SizeJson::Finite(v) => Ok(ClassSize::Finite(*v)),
                SizeJson::Marker(m) if matches!(m.as_str(), "inf" | "∞" | "infinite") => Ok(ClassSize::Infinite),
                SizeJson::Marker(m) => Err(Error::InvalidTemplate(format!("unknown size `{m}`"))),
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(k) = j.k {
            if k != sizes.len() {
                return Err(Error::InvalidTemplate(format!("k = {k} but {} sizes given", sizes.len())));
            }
        }
        let mut sigma = BTreeMap::new();
        for (key, tuples) in &j.sigma {
            let atom = AtomicDiff::parse_key(key, &language)?;
            let sig = tuples
                .iter()
                .map(|tp| {
                    tp.iter()
                        .map(|&i| {
                            if i == 0 {
                                Err(Error::InvalidTemplate("class indices are one-based".into()))
                            } else {
                                Ok(i - 1)
                            }
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<_>>()?;
            sigma.insert(atom, sig);
        }
        match j.threshold {
            Some(k) => Template::with_threshold(language, sizes, sigma, k),
            None => Template::new(language, sizes, sigma),
        }
    }
}

impl Template {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(TemplateJson::from(self)).expect("template serializes")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let j: TemplateJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        Template::try_from(&j)
    }
}

#[cfg(test)]
mod tests {
    use super::super::builtin;
    use super::*;

    #[test]
    fn roundtrip_builtins() {
        for (_, t) in builtin::all() {
            let back = Template::from_json_str(&t.to_json().to_string()).unwrap();
            assert_eq!(back, t);
        }
    }

    #[test]
    fn wire_format() {
        let v = builtin::clique_plus_isolated().to_json();
        assert_eq!(v["sizes"], serde_json::json!([1, "inf"]));
        assert_eq!(v["K"], 2);
        assert_eq!(v["sigma"]["E(x1,x2)"], serde_json::json!([[2, 2]]));
    }

    #[test]
    fn wrong_threshold_rejected() {
        let s = r#"{"language":{"relations":[{"name":"E","arity":2}]},"sizes":["inf"],"K":5,"sigma":{}}"#;
        assert!(matches!(Template::from_json_str(s), Err(Error::InvalidTemplate(_))));
    }
}
