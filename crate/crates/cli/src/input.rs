//! Reading inputs and parsing argument values.

use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use hspeed::oscillate::Hypergraph;
use hspeed::property::{Ambient, Mode, Predicate, PropertySpec};
use hspeed::template::Template;
use hspeed::{Language, Structure};
use num_rational::{BigRational, Rational64};

use crate::CliError;

pub fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn structure(path: &Path) -> Result<Structure, CliError> {
    Ok(Structure::from_json_str(&read(path)?)?)
}

pub fn template(path: &Path) -> Result<Template, CliError> {
    Ok(Template::from_json_str(&read(path)?)?)
}

pub fn hypergraph(path: &Path) -> Result<Hypergraph, CliError> {
    Ok(Hypergraph::from_json_str(&read(path)?)?)
}

/// A non-negative rational written `p/q`, `p`, or as a finite decimal such as `1.6`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rational(pub Rational64);

impl FromStr for Rational {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("`{s}` is not a rational number (expected p/q or a decimal)");
        let s = s.trim();
        let value = if let Some((p, q)) = s.split_once('/') {
            let p: i64 = p.trim().parse().map_err(|_| bad())?;
            let q: i64 = q.trim().parse().map_err(|_| bad())?;
            if q == 0 {
                return Err(bad());
            }
            Rational64::new(p, q)
        } else if let Some((whole, frac)) = s.split_once('.') {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) || frac.len() > 12 {
                return Err(bad());
            }
            let negative = whole.starts_with('-');
            let whole: i64 = if whole.is_empty() || whole == "-" { 0 } else { whole.parse().map_err(|_| bad())? };
            let denom = 10i64.pow(frac.len() as u32);
            let frac: i64 = frac.parse().map_err(|_| bad())?;
            let magnitude = whole.abs() * denom + frac;
            Rational64::new(if negative { -magnitude } else { magnitude }, denom)
        } else {
            Rational64::from_integer(s.parse().map_err(|_| bad())?)
        };
        Ok(Rational(value))
    }
}

/// `"p/q"`, always with an explicit denominator.
pub fn show_ratio(q: &Rational64) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

pub fn show_big_ratio(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// An inclusive range written `a..b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window(pub usize, pub usize);

impl FromStr for Window {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("`{s}` is not a window a..b");
        let (a, b) = s.split_once("..").ok_or_else(bad)?;
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim_start_matches('=').trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        Ok(Window(a, b))
    }
}

/// `graph`, `relational`, or `uniform:R`.
pub fn ambient(s: &str) -> Result<Ambient, CliError> {
    match s {
        "graph" => Ok(Ambient::Graph),
        "relational" => Ok(Ambient::Relational),
        _ => s
            .strip_prefix("uniform:")
            .and_then(|r| r.parse().ok())
            .map(Ambient::Uniform)
            .ok_or_else(|| CliError::Usage(format!("unknown ambient `{s}` (graph, relational, uniform:R)"))),
    }
}

fn default_ambient(language: &Language) -> Ambient {
    if *language == Language::graph() {
        Ambient::Graph
    } else {
        Ambient::Relational
    }
}

/// Builds a property from exactly one of: forbidden structures, a graph predicate, or templates.
pub fn property(
    forbid: &[std::path::PathBuf],
    predicate: Option<&str>,
    templates: &[std::path::PathBuf],
    ambient_name: Option<&str>,
    budget: Option<usize>,
) -> Result<PropertySpec, CliError> {
    let chosen = usize::from(!forbid.is_empty()) + usize::from(predicate.is_some()) + usize::from(!templates.is_empty());
    if chosen != 1 {
        return Err(CliError::Usage("give exactly one of --forbid, --predicate, --templates".into()));
    }
    let spec = if let Some(name) = predicate {
        PropertySpec::graph_predicate(Predicate::from_name(name)?)
    } else if !forbid.is_empty() {
        let structures = forbid.iter().map(|p| structure(p)).collect::<Result<Vec<_>, _>>()?;
        let language: Arc<Language> = structures[0].language().clone();
        let ambient = match ambient_name {
            Some(a) => ambient(a)?,
            None => default_ambient(&language),
        };
        PropertySpec::new(ambient, language, Mode::ForbiddenInduced(structures))?
    } else {
        let ts = templates.iter().map(|p| template(p)).collect::<Result<Vec<_>, _>>()?;
        let language = ts[0].language().clone();
        let ambient = match ambient_name {
            Some(a) => ambient(a)?,
            None => default_ambient(&language),
        };
        PropertySpec::new(ambient, language, Mode::AgeOfTemplates(ts))?
    };
    Ok(match budget {
        Some(b) => spec.with_budget(b),
        None => spec,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals() {
        assert_eq!("2/5".parse::<Rational>().unwrap().0, Rational64::new(2, 5));
        assert_eq!("1.6".parse::<Rational>().unwrap().0, Rational64::new(8, 5));
        assert_eq!("3".parse::<Rational>().unwrap().0, Rational64::new(3, 1));
        assert_eq!("0.25".parse::<Rational>().unwrap().0, Rational64::new(1, 4));
        assert!("1/0".parse::<Rational>().is_err());
        assert!("x".parse::<Rational>().is_err());
        assert!("1.".parse::<Rational>().is_err());
        assert_eq!(show_ratio(&Rational64::new(3, 1)), "3/1");
    }

    #[test]
    fn windows() {
        assert_eq!("6..12".parse::<Window>().unwrap(), Window(6, 12));
        assert_eq!("6..=12".parse::<Window>().unwrap(), Window(6, 12));
        assert!("12..6".parse::<Window>().is_err());
    }

    #[test]
    fn ambients() {
        assert_eq!(ambient("uniform:3").unwrap(), Ambient::Uniform(3));
        assert!(ambient("torus").is_err());
    }
}
