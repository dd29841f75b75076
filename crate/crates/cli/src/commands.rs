//! Runs one parsed command and renders its primary output.

use std::collections::BTreeMap;

use hspeed::arrays::{self, Split};
use hspeed::components;
use hspeed::corpus;
use hspeed::oscillate::{self, Hypergraph, MemberCertificate, Verification};
use hspeed::property::{self, growth_diagnostics, PropertySpec, Verdict};
use hspeed::simclass;
use hspeed::template::{self, SpeedForm, ENUMERATION_BUDGET};
use hspeed::Structure;
use serde_json::{json, Value};

use crate::input::{self, show_big_ratio, show_ratio};
use crate::{ArraysOp, Cli, CliError, Command, Format, MemberMode, OscOp, ProbeKind, PropertyArgs, SplitArgs, TemplateOp};

type Out = Result<String, CliError>;

fn format(cli: &Cli, default: Format) -> Format {
    cli.format.unwrap_or(default)
}

fn render(v: &Value) -> String {
    format!("{}\n", serde_json::to_string_pretty(v).expect("json renders"))
}

fn with_seed(cli: &Cli, mut v: Value) -> Value {
    if let Value::Object(map) = &mut v {
        map.insert("seed".into(), json!(cli.seed));
    }
    v
}

fn one_based(tuples: &[Vec<usize>]) -> Vec<Vec<usize>> {
    tuples.iter().map(|t| t.iter().map(|x| x + 1).collect()).collect()
}

fn elements(xs: &[usize]) -> Vec<usize> {
    xs.iter().map(|x| x + 1).collect()
}

fn zero_based(xs: &[usize], what: &str) -> Result<Vec<usize>, CliError> {
    xs.iter()
        .map(|&x| x.checked_sub(1).ok_or_else(|| CliError::Usage(format!("{what} are one-based"))))
        .collect()
}

fn property_of(cli: &Cli, p: &PropertyArgs) -> Result<PropertySpec, CliError> {
    input::property(&p.forbid, p.predicate.as_deref(), &p.templates, p.ambient.as_deref(), cli.budget)
}

fn relation_of(m: &Structure, rel: Option<&str>) -> Result<usize, CliError> {
    match rel {
        Some(name) => Ok(m.language().relation_index(name)?),
        None if !m.language().relations().is_empty() => Ok(0),
        None => Err(CliError::Usage("the language has no relations".into())),
    }
}

fn split_of(m: &Structure, s: &SplitArgs) -> Result<Split, CliError> {
    let rel = relation_of(m, s.rel.as_deref())?;
    Ok(Split::new(m, rel, &zero_based(&s.split, "split positions")?)?)
}

pub fn run(cli: &Cli) -> Out {
    match &cli.command {
        Command::Decompose { structure } => {
            let m = input::structure(structure)?;
            Ok(render(&simclass::decomposition(&m).to_json(m.language())))
        }
        Command::Speed { property: p, nmax } => speed(cli, &property_of(cli, p)?, *nmax),
        Command::Probe { kind, property: p, k, nmax } => probe(*kind, &property_of(cli, p)?, *k, *nmax),
        Command::Template { op } => template_op(cli, op),
        Command::Components { structure } => {
            let report = components::components_of(&input::structure(structure)?);
            let histogram: BTreeMap<String, usize> =
                report.histogram.iter().map(|(s, c)| (s.to_string(), *c)).collect();
            Ok(render(&json!({ "components": one_based(&report.components), "histogram": histogram })))
        }
        Command::Census { property: p, nmax } => census(cli, &property_of(cli, p)?, *nmax),
        Command::Blocks { n, k } => {
            let b = components::partitions_into_blocks(*n, *k)?;
            let stirling = components::block_count_stirling_ln(*n, *k);
            match format(cli, Format::Json) {
                Format::Pretty => Ok(format!(
                    "partitions: {}\nln count: {:.6}\nln Stirling bound: {stirling:.6}\nln n^(n(1-1/k)): {:.6}\n",
                    b.count,
                    ln_big(&b.count),
                    b.reference_ln
                )),
                _ => Ok(render(&json!({
                    "n": n,
                    "k": k,
                    "count": b.count.to_string(),
                    "stirling_ln": stirling,
                    "reference_ln": b.reference_ln,
                }))),
            }
        }
        Command::Arrays { op } => arrays_op(cli, op),
        Command::Osc { op } => osc_op(cli, op),
        Command::Corpus { kind, m, n, r, v } => {
            let params: BTreeMap<String, usize> = [("m", m), ("n", n), ("r", r), ("v", v)]
                .into_iter()
                .filter_map(|(k, v)| v.map(|v| (k.to_string(), v)))
                .collect();
            Ok(render(&corpus::generate(kind, &params)?.to_json()))
        }
    }
}

fn ln_big(x: &num_bigint::BigUint) -> f64 {
    let bits = x.bits();
    let shift = bits.saturating_sub(60);
    let top: u64 = (x >> shift).try_into().unwrap_or(u64::MAX);
    (top as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

fn speed(cli: &Cli, spec: &PropertySpec, nmax: usize) -> Out {
    let table = property::speed(spec, nmax)?;
    match format(cli, Format::Csv) {
        Format::Csv => Ok(table.to_csv()),
        Format::Json => {
            let rows: Vec<Value> = table
                .rows
                .iter()
                .map(|r| json!({ "n": r.n, "labeled": r.labeled.to_string(), "unlabeled": r.unlabeled }))
                .collect();
            Ok(render(&with_seed(cli, json!({ "rows": rows }))))
        }
        Format::Pretty => {
            let mut s = String::from("n\tlabeled\tunlabeled\tlog2\tlog ratio\tover n!\n");
            let report = growth_diagnostics(&table).ok();
            for (i, r) in table.rows.iter().enumerate() {
                let d = report.as_ref().map(|rep| &rep.rows[i]);
                let show = |x: Option<f64>| x.map_or("-".to_string(), |x| format!("{x:.4}"));
                s.push_str(&format!(
                    "{}\t{}\t{}\t{}\t{}\t{}\n",
                    r.n,
                    r.labeled,
                    r.unlabeled,
                    show(d.and_then(|d| d.log2)),
                    show(d.and_then(|d| d.log_ratio)),
                    show(d.map(|d| d.over_factorial)),
                ));
            }
            if let Some(rep) = report {
                s.push_str(&format!("growth: {}\n", rep.tag));
            }
            Ok(s)
        }
    }
}

fn probe(kind: ProbeKind, spec: &PropertySpec, k: usize, nmax: usize) -> Out {
    let v = match kind {
        ProbeKind::Basic => match property::is_basic_upto(spec, k, nmax)? {
            Verdict::Consistent => json!({ "verdict": "consistent", "k": k, "nmax": nmax }),
            Verdict::Refuted(m) => json!({ "verdict": "refuted", "k": k, "nmax": nmax, "witness": m.to_json() }),
        },
        ProbeKind::Tb => match property::is_totally_bounded_upto(spec, k, nmax)? {
            Verdict::Consistent => json!({ "verdict": "consistent", "k": k, "nmax": nmax }),
            Verdict::Refuted(w) => json!({
                "verdict": "refuted",
                "k": k,
                "nmax": nmax,
                "witness": w.member.to_json(),
                "relation": w.member.language().relations()[w.violation.relation].name,
                "fixed": elements(&w.violation.fixed),
                "assignment": elements(&w.violation.assignment),
                "completions": w.violation.completions,
            }),
        },
    };
    Ok(render(&v))
}

fn form_json(f: &SpeedForm) -> Value {
    let polys: Vec<Vec<String>> = f.polys.iter().map(|p| p.iter().map(show_big_ratio).collect()).collect();
    json!({
        "polys": polys,
        "valid_from": f.valid_from,
        "fitted_on": f.fitted_on,
        "verified_on": f.verified_on,
    })
}

fn template_op(cli: &Cli, op: &TemplateOp) -> Out {
    match op {
        TemplateOp::Count { template: path, n } => {
            let t = input::template(path)?;
            let count = template::count_compatible(&t, *n)?;
            match format(cli, Format::Pretty) {
                Format::Pretty | Format::Csv => Ok(format!("{count}\n")),
                Format::Json => Ok(render(&json!({ "n": n, "count": count.to_string() }))),
            }
        }
        TemplateOp::Enumerate { template: path, n } => {
            let t = input::template(path)?;
            let all = template::enumerate_compatible(&t, *n, cli.budget.unwrap_or(ENUMERATION_BUDGET))?;
            let members: Vec<Value> = all.iter().map(|m| m.to_json()).collect();
            Ok(render(&json!({ "n": n, "count": members.len(), "members": members })))
        }
        TemplateOp::Fit { template: path, window } => {
            let t = input::template(path)?;
            let f = template::speed_form(&t, window.0..=window.1)?;
            match format(cli, Format::Json) {
                Format::Pretty => {
                    let terms: Vec<String> = f
                        .polys
                        .iter()
                        .enumerate()
                        .filter(|(_, p)| p.iter().any(|c| c.numer().sign() != num_bigint::Sign::NoSign))
                        .map(|(i, p)| format!("({}) * {}^n", template::format_poly(p), i + 1))
                        .collect();
                    Ok(format!("|H_n| = {} for n >= {}\n", terms.join(" + "), f.valid_from))
                }
                _ => Ok(render(&form_json(&f))),
            }
        }
        TemplateOp::Union { templates, n } => {
            let ts = templates.iter().map(|p| input::template(p)).collect::<Result<Vec<_>, _>>()?;
            let count = template::union_speed(&ts, *n)?;
            match format(cli, Format::Pretty) {
                Format::Pretty | Format::Csv => Ok(format!("{count}\n")),
                Format::Json => Ok(render(&json!({ "n": n, "count": count.to_string() }))),
            }
        }
    }
}

fn census(cli: &Cli, spec: &PropertySpec, nmax: usize) -> Out {
    let entries = components::component_census(spec, nmax)?;
    match format(cli, Format::Csv) {
        Format::Json => {
            let rows: Vec<Value> = entries
                .iter()
                .map(|e| json!({ "size": e.size, "max_multiplicity": e.max_multiplicity, "larger_exists": e.larger_exists }))
                .collect();
            Ok(render(&json!({ "nmax": nmax, "entries": rows })))
        }
        _ => {
            let mut s = String::from("size,max_multiplicity,larger_exists\n");
            for e in entries {
                s.push_str(&format!("{},{},{}\n", e.size, e.max_multiplicity, e.larger_exists));
            }
            Ok(s)
        }
    }
}

fn arrays_op(cli: &Cli, op: &ArraysOp) -> Out {
    match op {
        ArraysOp::Types { structure, split, params } => {
            let m = input::structure(structure)?;
            let split = split_of(&m, split)?;
            let types = arrays::type_space(&m, &split, &zero_based(params, "parameters")?)?;
            let rows: Vec<Value> = types
                .iter()
                .map(|t| json!({ "decisions": t.decisions, "realizations": one_based(&t.realizations) }))
                .collect();
            Ok(render(&json!({ "types": rows })))
        }
        ArraysOp::Count { structure, split, params, m: size } => {
            let m = input::structure(structure)?;
            let split = split_of(&m, split)?;
            let count = arrays::n_array_count(&m, &split, *size, &zero_based(params, "parameters")?)?;
            match format(cli, Format::Pretty) {
                Format::Json => Ok(render(&json!({ "m": size, "count": count }))),
                _ => Ok(format!("{count}\n")),
            }
        }
        ArraysOp::Probe { property: p, split, m: size, nmax, amax } => {
            let spec = property_of(cli, p)?;
            let positions = zero_based(&split.split, "split positions")?;
            let rel = split.rel.clone();
            let table = arrays::bounded_array_probe(
                &spec,
                |m| {
                    let r = match rel.as_deref() {
                        Some(name) => m.language().relation_index(name)?,
                        None => 0,
                    };
                    Split::new(m, r, &positions)
                },
                *size,
                *nmax,
                *amax,
                cli.seed,
            )?;
            match format(cli, Format::Csv) {
                Format::Json => {
                    let rows: Vec<Value> = table
                        .rows
                        .iter()
                        .map(|r| {
                            json!({
                                "n": r.n,
                                "maxN": r.max_n,
                                "witness_id": r.witness.as_ref().map(|w| w.0),
                                "A": r.witness.as_ref().map(|w| elements(&w.1)),
                            })
                        })
                        .collect();
                    Ok(render(&with_seed(cli, json!({ "rows": rows, "grows": table.grows() }))))
                }
                _ => Ok(table.to_csv()),
            }
        }
        ArraysOp::Algebraic { structure, rel, k } => {
            let m = input::structure(structure)?;
            let r = relation_of(&m, rel.as_deref())?;
            let v = match arrays::is_k_mutually_algebraic(&m, r, *k)? {
                Verdict::Consistent => json!({ "mutually_algebraic": true, "k": k }),
                Verdict::Refuted(b) => json!({
                    "mutually_algebraic": false,
                    "k": k,
                    "fixed": elements(&b.fixed),
                    "assignment": elements(&b.assignment),
                    "completions": b.completions,
                }),
            };
            Ok(render(&v))
        }
    }
}

fn hypergraph_json(h: &Hypergraph) -> Value {
    serde_json::from_str(&h.to_json()).expect("hypergraph json")
}

fn certificate_json(c: &MemberCertificate) -> Value {
    let verification = match &c.verification {
        Verification::Flow => json!("flow"),
        Verification::Exhaustive => json!("exhaustive"),
        Verification::Sampled { subsets } => json!({ "sampled": subsets }),
    };
    json!({
        "graph": hypergraph_json(&c.graph),
        "edges": c.graph.e(),
        "seed": c.seed,
        "attempts": c.attempts,
        "rejected_sparse": c.rejected_sparse,
        "rejected_dense": c.rejected_dense,
        "verification": verification,
        "closure_checked": c.closure_checked,
        "log2_lower_bound": c.log2_lower_bound(),
    })
}

fn osc_op(cli: &Cli, op: &OscOp) -> Out {
    match op {
        OscOp::Balanced { r, c } => {
            let h = oscillate::find_strictly_balanced(*r, c.0)?;
            Ok(render(&json!({
                "hypergraph": hypergraph_json(&h),
                "density": show_ratio(&oscillate::density(&h)?),
                "strictly_balanced": oscillate::is_strictly_balanced(&h),
            })))
        }
        OscOp::Member { mode, h, c, nu } => {
            let g = input::hypergraph(h)?;
            let member = match mode {
                MemberMode::Q => oscillate::in_q(&g, c.0),
                MemberMode::S => oscillate::in_s(&g, c.0),
                MemberMode::P => oscillate::in_p(&g, nu, c.0)?,
            };
            let (max, witness) = oscillate::max_subgraph_density(&g)?;
            Ok(render(&json!({
                "member": member,
                "c": show_ratio(&c.0),
                "density": show_ratio(&oscillate::density(&g)?),
                "max_subgraph_density": show_ratio(&max),
                "densest": elements(&witness),
            })))
        }
        OscOp::Blowup { h, n, count_only } => {
            let g = input::hypergraph(h)?;
            let b = oscillate::blowup_members(&g, *n, *count_only)?;
            let mut v = json!({
                "n": n,
                "parts": one_based(&b.parts),
                "count": b.count.to_string(),
                "lower_bound": b.lower_bound.to_string(),
                "s_upper_bound": oscillate::s_upper_bound(g.r(), oscillate::density(&g)?, *n).to_string(),
            });
            if let Some(members) = &b.members {
                v["members"] = members.iter().map(hypergraph_json).collect();
            }
            Ok(render(&v))
        }
        OscOp::Sample { r, c, k, n, delta } => {
            let cert = oscillate::sample_dense_member(*r, *k, c.0, *n, delta.0, cli.seed)?;
            let mut v = certificate_json(&cert);
            v["c"] = json!(show_ratio(&c.0));
            v["delta"] = json!(show_ratio(&delta.0));
            v["k"] = json!(k);
            Ok(render(&v))
        }
        OscOp::Sequence { r, c, eps, steps } => {
            let s = oscillate::build_sequence(*r, c.0, eps.0, *steps, cli.seed)?;
            let certificates: Vec<Value> = s
                .certificates
                .iter()
                .map(|st| {
                    json!({
                        "n": st.n,
                        "nu": st.nu,
                        "log2_lower_bound": st.log2_lower_bound.to_string(),
                        "witness": st.witness.as_ref().map(certificate_json),
                    })
                })
                .collect();
            Ok(render(&json!({
                "r": s.r,
                "c": show_ratio(&s.c),
                "eps": show_ratio(&s.eps),
                "seed": s.seed,
                "nu": s.nu,
                "mu_upper_bounds": s.mu,
                "certificates": certificates,
            })))
        }
    }
}
