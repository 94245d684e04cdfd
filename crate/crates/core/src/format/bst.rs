use std::fmt::Write;

use crate::error::Result;
use crate::format::token::{lines, Cursor, Token};
use crate::format::FormatError;
use crate::structure::{BinaryStructure, Signature};

pub fn parse_bst(text: &str) -> Result<BinaryStructure> {
    let lines = lines(text)?;
    let mut name: Option<String> = None;
    let mut symbols: Option<Vec<String>> = None;
    let mut s: Option<BinaryStructure> = None;
    for toks in &lines {
        let mut c = Cursor::new(toks);
        let head = c.next("keyword")?;
        match head.text {
            "structure" if name.is_none() => {
                name = Some(c.name("structure name")?.text.to_string());
                c.done()?;
            }
            _ if name.is_none() => {
                return Err(FormatError::at(head.line, head.col, "expected `structure`"));
            }
            "signature" if symbols.is_none() => {
                let mut syms = Vec::new();
                for &t in c.rest() {
                    super::token::check_name(t, "symbol")?;
                    if syms.iter().any(|x: &String| x == t.text) {
                        return Err(FormatError::at(t.line, t.col, format!("duplicate symbol `{}`", t.text)));
                    }
                    syms.push(t.text.to_string());
                }
                symbols = Some(syms);
            }
            "elements" if s.is_none() => {
                let Some(syms) = &symbols else {
                    return Err(FormatError::at(head.line, head.col, "`elements` before `signature`"));
                };
                let toks = c.rest();
                if toks.is_empty() {
                    return Err(FormatError::at(head.line, head.col, "empty universe"));
                }
                let mut seen = std::collections::BTreeSet::new();
                for &t in toks {
                    super::token::check_name(t, "element")?;
                    if !seen.insert(t.text) {
                        return Err(FormatError::at(t.line, t.col, format!("duplicate element `{}`", t.text)));
                    }
                }
                let sig = Signature::new(syms.iter().cloned())?;
                let names = toks.iter().map(|t| t.text.to_string());
                s = Some(BinaryStructure::new(
                    name.as_deref().expect("header read"),
                    sig,
                    names,
                )?);
            }
            "rel" => {
                let Some(st) = s.as_mut() else {
                    return Err(FormatError::at(head.line, head.col, "`rel` before `elements`"));
                };
                let z = c.next("symbol")?;
                let zi = st.signature().index_of(z.text).ok_or_else(|| {
                    FormatError::at(z.line, z.col, format!("unknown symbol `{}`", z.text))
                })?;
                let u = element(st, c.next("element")?)?;
                let v = element(st, c.next("element")?)?;
                c.done()?;
                st.insert(zi, u, v);
            }
            other => {
                return Err(FormatError::at(head.line, head.col, format!("unexpected `{other}`")));
            }
        }
    }
    s.ok_or_else(|| {
        let line = lines.last().map_or(1, |l| l[0].line);
        FormatError::at(line, 1, "missing `elements` line")
    })
}

fn element(s: &BinaryStructure, t: Token<'_>) -> Result<usize> {
    s.element_index(t.text)
        .ok_or_else(|| FormatError::at(t.line, t.col, format!("unknown element `{}`", t.text)))
}

pub fn write_bst(s: &BinaryStructure) -> String {
    let mut out = String::new();
    writeln!(out, "structure {}", s.name()).unwrap();
    write!(out, "signature").unwrap();
    for z in s.signature().symbols() {
        write!(out, " {z}").unwrap();
    }
    out.push('\n');
    writeln!(out, "elements {}", s.universe().join(" ")).unwrap();
    for (zi, z) in s.signature().symbols().iter().enumerate() {
        for (u, v) in s.pairs(zi) {
            writeln!(out, "rel {z} {} {}", s.element(u), s.element(v)).unwrap();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    const P3: &str = "structure p3\nsignature E\nelements a b c\nrel E a b\nrel E b a\nrel E b c\nrel E c b\n";

    #[test]
    fn round_trip() {
        let s = parse_bst(P3).unwrap();
        assert_eq!(s.pair_count(0), 4);
        assert_eq!(write_bst(&s), P3);
    }

    #[test]
    fn comments_and_order() {
        let s = parse_bst("# p3\nstructure p3\nsignature E\nelements c b a # unsorted\nrel E b a\nrel E a b\nrel E b c\nrel E c b\n")
            .unwrap();
        assert_eq!(write_bst(&s), P3);
    }

    #[test]
    fn positioned_errors() {
        let e = parse_bst("structure p3\nsignature E\nelements a b\nrel F a b\n").unwrap_err();
        assert!(matches!(e, Error::Format(FormatError { line: 4, col: 5, .. })), "{e}");
        let e = parse_bst("structure p3\nsignature E\nelements a b\nrel E a\n").unwrap_err();
        assert!(matches!(e, Error::Format(FormatError { line: 4, col: 8, .. })), "{e}");
        let e = parse_bst("structure p3\nsignature E\nelements a a\n").unwrap_err();
        assert!(matches!(e, Error::Format(FormatError { line: 3, col: 12, .. })), "{e}");
        assert!(parse_bst("elements a").is_err());
        assert!(parse_bst("structure s\nsignature E\nelements _\n").is_err());
        assert!(parse_bst("").is_err());
    }
}
