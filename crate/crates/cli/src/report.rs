//! Rendering of results as text, JSON or CSV. JSON goes through
//! `serde_json::Value`, whose maps keep keys sorted, so output bytes depend
//! only on the data.

use std::fmt::Write;

use clap::ValueEnum;
use gammaspin::verifier::FactReport;
use gammaspin::{
    AmbientElement, Certificate, ChernMonomial, ClassVerdict, GrComponent, GroupModel, ImageModule, ModelInfo, Order,
    Saturation, TorsionBound,
};
use serde::Serialize;
use serde_json::json;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

pub fn json<T: Serialize>(x: &T) -> String {
    let v = serde_json::to_value(x).expect("report serializes");
    let mut s = serde_json::to_string_pretty(&v).expect("value serializes");
    s.push('\n');
    s
}

fn header(e: &ImageModule) -> serde_json::Value {
    json!({ "model": e.model().name(), "n": e.theory().n(), "max_factors": e.max_factors() })
}

fn with_header(e: &ImageModule, key: &str, body: serde_json::Value) -> String {
    let mut v = header(e);
    v[key] = body;
    json(&v)
}

pub fn model(info: &ModelInfo, format: Format) -> String {
    if format == Format::Json {
        return json(info);
    }
    let mut out = String::new();
    let _ = writeln!(out, "{}({})", info.family, info.m);
    let _ = writeln!(out, "ell       {}", info.ell);
    if let Some(b) = info.ell_bar {
        let _ = writeln!(out, "ell_bar   {b}");
    }
    if let Some(t) = info.t {
        let _ = writeln!(out, "t         {t}");
    }
    let _ = writeln!(out, "generators {}", info.generators.join(" "));
    let _ = writeln!(out, "relations {}", if info.relations.is_empty() { "none".into() } else { info.relations.join(", ") });
    let _ = writeln!(out, "classes   {}", info.chern_classes.join(" "));
    if let Some(d) = info.euler_degree {
        let _ = writeln!(out, "euler     degree {d}");
    }
    if let Some(t) = info.torsion_index {
        let _ = writeln!(out, "torsion index {t}");
    }
    let _ = writeln!(out, "y_top     {} (degree {})", info.y_top, info.top_degree);
    out
}

pub fn images(g: &GroupModel, images: &[(ChernMonomial, AmbientElement)], format: Format) -> String {
    if format == Format::Json {
        let rows: Vec<_> = images
            .iter()
            .map(|(x, img)| json!({ "class": x.to_string(), "degree": x.degree(), "image": img.to_json(g.gens()) }))
            .collect();
        return json(&json!({ "model": g.name(), "images": rows }));
    }
    let mut out = String::new();
    for (x, img) in images {
        let _ = writeln!(out, "{x} = {}", img.render(g.gens()));
    }
    out
}

fn group(order: Order) -> String {
    match order {
        Order::Free => "Z".to_string(),
        t => t.to_string(),
    }
}

fn summand(order: Order, rep: &ChernMonomial) -> String {
    format!("{}({rep})", group(order))
}

pub fn gr(e: &ImageModule, table: &[GrComponent], format: Format) -> String {
    match format {
        Format::Json => with_header(e, "components", serde_json::to_value(table).expect("serializes")),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["degree", "factor_order", "representative", "certified"]).expect("in memory");
            for c in table {
                // Without a verified decomposition only the invariant factors are reliable.
                let rows: Vec<(Order, String)> = if c.decomposition_verified {
                    c.factors.iter().map(|f| (f.order, f.representative.to_string())).collect()
                } else {
                    c.invariants.iter().map(|o| (*o, String::new())).collect()
                };
                for (order, rep) in rows {
                    w.write_record([c.degree.to_string(), order.to_string(), rep, c.certified.to_string()])
                        .expect("in memory");
                }
            }
            String::from_utf8(w.into_inner().expect("in memory")).expect("utf-8")
        }
        Format::Text => {
            let mut out = format!("{}, n={}\n", e.model().name(), e.theory().n());
            for c in table {
                let body = if c.invariants.is_empty() {
                    "0".to_string()
                } else if c.decomposition_verified {
                    let parts: Vec<String> = c.factors.iter().map(|f| summand(f.order, &f.representative)).collect();
                    parts.join(" + ")
                } else {
                    let orders: Vec<String> = c.invariants.iter().map(|&o| group(o)).collect();
                    let reps: Vec<String> = c.factors.iter().map(|f| f.representative.to_string()).collect();
                    format!("{}, generated by {}", orders.join(" + "), reps.join(", "))
                };
                let mut flags = Vec::new();
                if !c.certified {
                    flags.push("heuristic");
                }
                if !c.decomposition_verified {
                    flags.push("representatives unverified");
                }
                let note = if flags.is_empty() { String::new() } else { format!("  [{}]", flags.join(", ")) };
                let _ = writeln!(out, "d={}: {body}{note}", c.degree);
            }
            out
        }
    }
}

pub fn profile(e: &ImageModule, format: Format) -> String {
    let p = e.image_profile();
    let g = e.model();
    let rows: Vec<(String, Vec<String>)> = p
        .rows
        .iter()
        .map(|(m, gens)| {
            let ideal = gens.iter().map(|&(k, a)| gammaspin::lattice::render_ideal_generator(k, a)).collect();
            (g.gens().render(*m), ideal)
        })
        .collect();
    if format == Format::Json {
        let rows: Vec<_> = rows.iter().map(|(m, i)| json!({ "monomial": m, "ideal": i })).collect();
        return with_header(e, "profile", json!(rows));
    }
    let mut out = format!("{}, n={}\n", g.name(), e.theory().n());
    for (m, ideal) in rows {
        let _ = writeln!(out, "{m}: ({})", ideal.join(", "));
    }
    out
}

pub fn torsion(g: &GroupModel, n: u32, t: &TorsionBound, format: Format) -> String {
    if format == Format::Json {
        return json(&json!({ "model": g.name(), "n": n, "torsion": t }));
    }
    match t.bound {
        Some(b) => {
            let w: Vec<String> = t.witnesses.iter().map(|x| x.to_string()).collect();
            format!("{}, n={n}: bound {b}, witnesses {}\n", g.name(), w.join(" "))
        }
        None => format!("{}, n={n}: no bound found\n", g.name()),
    }
}

pub fn saturation(e: &ImageModule, s: &Saturation, format: Format) -> String {
    if format == Format::Json {
        return with_header(e, "saturation", serde_json::to_value(s).expect("serializes"));
    }
    let show = |p: Option<u32>| p.map_or_else(|| "none".to_string(), |p| p.to_string());
    let mut out = format!("{}, n={}\n", e.model().name(), e.theory().n());
    for (d, p) in &s.per_degree {
        let _ = writeln!(out, "d={d}: {}", show(*p));
    }
    let _ = writeln!(out, "threshold: {}", show(s.threshold));
    out
}

pub fn verdict(e: &ImageModule, v: &ClassVerdict, format: Format) -> String {
    if format == Format::Json {
        return with_header(e, "verdict", serde_json::to_value(v).expect("serializes"));
    }
    let state = if v.zero { "zero" } else { "nonzero" };
    let how = if v.certified { "certified" } else { "heuristic" };
    let mut out = format!("{} in gr^{} of {}, n={}: {state} ({how})\n", v.class, v.degree, e.model().name(), e.theory().n());
    let _ = writeln!(out, "image {}", v.image);
    match &v.certificate {
        Some(Certificate::OwnTail { precision }) => {
            let _ = writeln!(out, "tail above precision {precision} lies in I*L");
        }
        Some(Certificate::TopPairing { partner, exponent, .. }) => {
            let _ = writeln!(out, "times {partner} gives 2^{exponent}*y_top");
        }
        Some(Certificate::Restriction { m }) => {
            let _ = writeln!(out, "nonzero already in {}({m})", e.model().family());
        }
        None => {}
    }
    out
}

pub fn facts_text(facts: &[FactReport]) -> String {
    let mut out = String::new();
    for f in facts {
        let verdict = match (f.pass, f.certified) {
            (true, true) => "pass",
            (true, false) => "uncertified",
            _ => "FAIL",
        };
        let _ = writeln!(out, "{:<7} {:<12} {}", f.id, verdict, f.citation);
    }
    out
}
