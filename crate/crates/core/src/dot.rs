//! Graphviz export.
//!
//! Tree edges are solid, positive tuples are bold, negative tuples dotted.

use std::fmt::Write;

use crate::cwe::{CliqueExpression, Expr};
use crate::format::Document;
use crate::model::MergeModel;
use crate::ranked::IntervalRanking;
use crate::sequence::MergeSequence;
use crate::structure::BinaryStructure;
use crate::twin::TwinModel;

fn quote(s: &str) -> String {
    let mut out = String::from("\"");
    for ch in s.chars() {
        if ch == '"' || ch == '\\' {
            out.push('\\');
        }
        out.push(ch);
    }
    out.push('"');
    out
}

pub fn structure_dot(s: &BinaryStructure) -> String {
    let mut out = format!("digraph {} {{\n", quote(s.name()));
    for e in s.universe() {
        writeln!(out, "  {};", quote(e)).unwrap();
    }
    for (zi, z) in s.signature().symbols().iter().enumerate() {
        for (u, v) in s.pairs(zi) {
            writeln!(
                out,
                "  {} -> {} [label={}];",
                quote(s.element(u)),
                quote(s.element(v)),
                quote(z)
            )
            .unwrap();
        }
    }
    out.push_str("}\n");
    out
}

/// The laminar family of parts, each part below the part it merges into.
pub fn sequence_dot(seq: &MergeSequence) -> String {
    let mut out = format!("digraph {} {{\n  rankdir=BT;\n", quote(seq.structure_name()));
    let mut seen: Vec<Vec<usize>> = Vec::new();
    for st in seq.steps() {
        for p in &st.parts {
            if !seen.contains(p) {
                seen.push(p.clone());
                writeln!(out, "  {} [shape=box];", quote(&seq.part_name(p))).unwrap();
            }
        }
    }
    for a in &seen {
        let parent = seen
            .iter()
            .filter(|b| b.len() > a.len() && a.iter().all(|e| b.contains(e)))
            .min_by_key(|b| b.len());
        if let Some(b) = parent {
            writeln!(out, "  {} -> {};", quote(&seq.part_name(a)), quote(&seq.part_name(b))).unwrap();
        }
    }
    for (k, st) in seq.steps().iter().enumerate() {
        for &(u, v) in &st.revealed {
            writeln!(
                out,
                "  {} -> {} [style=dashed, constraint=false, label=\"{}\"];",
                quote(&seq.elements()[u]),
                quote(&seq.elements()[v]),
                k + 1
            )
            .unwrap();
        }
    }
    out.push_str("}\n");
    out
}

fn tree_edges(out: &mut String, t: &crate::tree::TreeOrder, labels: &dyn Fn(usize) -> String) {
    for i in 0..t.len() {
        writeln!(out, "  {} [label={}];", quote(t.name(i)), quote(&labels(i))).unwrap();
    }
    for i in 0..t.len() {
        if let Some(p) = t.parent(i) {
            writeln!(out, "  {} -> {} [dir=none];", quote(t.name(p)), quote(t.name(i))).unwrap();
        }
    }
}

pub fn model_dot(m: &MergeModel, ranking: Option<&IntervalRanking>) -> String {
    let t = m.tree();
    let mut out = format!("digraph {} {{\n", quote(m.name()));
    tree_edges(&mut out, t, &|i| match ranking {
        Some(r) => format!("{} {}", t.name(i), r[i]),
        None => t.name(i).to_string(),
    });
    for tu in m.tuples() {
        let style = if tu.alpha == 1 { "bold" } else { "dotted" };
        writeln!(
            out,
            "  {} -> {} [style={style}, constraint=false, label={}];",
            quote(t.name(tu.x)),
            quote(t.name(tu.y)),
            quote(&format!("{},{}", m.signature().symbols()[tu.symbol], tu.alpha))
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}

pub fn twin_dot(tm: &TwinModel) -> String {
    let t = tm.tree();
    let mut out = format!("digraph {} {{\n", quote(tm.name()));
    tree_edges(&mut out, t, &|i| t.name(i).to_string());
    for &(z, x, y) in tm.tuples() {
        writeln!(
            out,
            "  {} -> {} [style=bold, constraint=false, label={}];",
            quote(t.name(x)),
            quote(t.name(y)),
            quote(&tm.signature().symbols()[z])
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}

/// The expression tree, operations as inner nodes.
pub fn expr_dot(e: &CliqueExpression) -> String {
    fn walk(out: &mut String, e: &Expr, next: &mut usize) -> usize {
        let id = *next;
        *next += 1;
        let (label, kids): (String, Vec<&Expr>) = match e {
            Expr::Create { label, name } => (format!("{name}:{label}"), vec![]),
            Expr::Union(a, b) => ("union".into(), vec![a, b]),
            Expr::Add { symbol, i, j, child } => (format!("add {symbol} {i}->{j}"), vec![child]),
            Expr::AddSym { symbol, i, j, child } => (format!("add {symbol} {i}<->{j}"), vec![child]),
            Expr::Relabel { i, j, child } => (format!("relabel {i}->{j}"), vec![child]),
        };
        writeln!(out, "  n{id} [label={}];", quote(&label)).unwrap();
        for k in kids {
            let c = walk(out, k, next);
            writeln!(out, "  n{id} -> n{c};").unwrap();
        }
        id
    }
    let mut out = String::from("digraph expr {\n");
    walk(&mut out, &e.root, &mut 0);
    out.push_str("}\n");
    out
}

pub fn document_dot(d: &Document) -> String {
    match d {
        Document::Structure(s) => structure_dot(s),
        Document::Graph(g) => structure_dot(g.structure()),
        Document::Sequence(s) => sequence_dot(s),
        Document::Model(f) => model_dot(&f.model, f.ranking.as_ref()),
        Document::Twin(t) => twin_dot(t),
        Document::Expression(e) => expr_dot(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::model_p3;
    use crate::sequence::tests::sigma_p3;

    #[test]
    fn model_styles_and_loops() {
        let d = model_dot(&model_p3(), None);
        assert!(d.contains("\"N_ac\" -> \"N_ac\" [style=dotted"));
        assert!(d.contains("\"Root\" -> \"Root\" [style=bold"));
        assert!(d.contains("\"Root\" -> \"N_ac\" [dir=none]"));
    }

    #[test]
    fn sequence_parts_tree() {
        let d = sequence_dot(&sigma_p3());
        assert!(d.contains("\"{a}\" -> \"{a,c}\";"));
        assert!(d.contains("\"{a,c}\" -> \"{a,b,c}\";"));
        assert!(d.contains("\"{b}\" -> \"{a,b,c}\";"));
    }

    #[test]
    fn quoting() {
        assert_eq!(quote("a\"b"), "\"a\\\"b\"");
    }
}
