use std::collections::BTreeSet;
use std::fmt::Write;

use crate::cwe::{CliqueExpression, Expr};
use crate::error::Result;
use crate::format::mmod::signature;
use crate::format::token::{check_name, lines, Cursor, Token};
use crate::format::FormatError;
use crate::structure::Signature;

/// Deepest accepted nesting of brackets.
pub const MAX_DEPTH: usize = 128;

struct Parser<'t, 'a> {
    toks: &'t [Token<'a>],
    pos: usize,
    signature: Option<&'t Signature>,
    names: BTreeSet<&'a str>,
    symbols: BTreeSet<String>,
}

impl<'a> Parser<'_, 'a> {
    fn next(&mut self, what: &str) -> Result<Token<'a>> {
        match self.toks.get(self.pos) {
            Some(&t) => {
                self.pos += 1;
                Ok(t)
            }
            None => {
                let (line, col) = self
                    .toks
                    .last()
                    .map_or((1, 1), |t| (t.line, t.col + t.text.chars().count()));
                Err(FormatError::at(line, col, format!("expected {what}")))
            }
        }
    }

    fn expect(&mut self, s: &str) -> Result<()> {
        let t = self.next(&format!("`{s}`"))?;
        if t.text != s {
            return Err(FormatError::at(t.line, t.col, format!("expected `{s}`, found `{}`", t.text)));
        }
        Ok(())
    }

    fn label(&mut self) -> Result<usize> {
        let t = self.next("label")?;
        match t.text.parse::<usize>() {
            Ok(l) if l >= 1 => Ok(l),
            _ => Err(FormatError::at(t.line, t.col, format!("expected a positive label, found `{}`", t.text))),
        }
    }

    fn labels(&mut self) -> Result<(usize, usize)> {
        let at = self.toks.get(self.pos).copied();
        let i = self.label()?;
        let j = self.label()?;
        if i == j {
            let t = at.expect("label read a token");
            return Err(FormatError::at(t.line, t.col, format!("equal labels {i}")));
        }
        Ok((i, j))
    }

    fn symbol(&mut self) -> Result<String> {
        let t = self.next("symbol")?;
        check_name(t, "symbol")?;
        if let Some(sig) = self.signature {
            if !sig.contains(t.text) {
                return Err(FormatError::at(t.line, t.col, format!("unknown symbol `{}`", t.text)));
            }
        }
        self.symbols.insert(t.text.to_string());
        Ok(t.text.to_string())
    }

    fn expr(&mut self, depth: usize) -> Result<Expr> {
        let open = self.next("`(`")?;
        if open.text != "(" {
            return Err(FormatError::at(open.line, open.col, format!("expected `(`, found `{}`", open.text)));
        }
        if depth >= MAX_DEPTH {
            return Err(FormatError::at(open.line, open.col, format!("nesting deeper than {MAX_DEPTH}")));
        }
        let op = self.next("operation")?;
        let e = match op.text {
            "v" => {
                let l = self.label()?;
                let n = self.next("element name")?;
                check_name(n, "element name")?;
                if !self.names.insert(n.text) {
                    return Err(FormatError::at(n.line, n.col, format!("duplicate element `{}`", n.text)));
                }
                Expr::create(l, n.text)
            }
            "u" => {
                let a = self.expr(depth + 1)?;
                let b = self.expr(depth + 1)?;
                Expr::union(a, b)
            }
            "add" | "sadd" => {
                let z = self.symbol()?;
                let (i, j) = self.labels()?;
                let child = self.expr(depth + 1)?;
                if op.text == "add" {
                    Expr::add(&z, i, j, child)
                } else {
                    Expr::add_sym(&z, i, j, child)
                }
            }
            "rel" => {
                let (i, j) = self.labels()?;
                Expr::relabel(i, j, self.expr(depth + 1)?)
            }
            other => {
                return Err(FormatError::at(op.line, op.col, format!("unknown operation `{other}`")));
            }
        };
        self.expect(")")?;
        Ok(e)
    }
}

/// Reads an optional `signature` line followed by one expression. Without
/// the line, the signature is the sorted set of symbols used.
pub fn parse_cwe(text: &str) -> Result<CliqueExpression> {
    let lines = lines(text)?;
    let mut rest = &lines[..];
    let mut sig = None;
    if let Some(first) = lines.first() {
        if first[0].text == "signature" {
            let mut c = Cursor::new(first);
            c.keyword("signature")?;
            sig = Some(signature(&mut c)?);
            rest = &lines[1..];
        }
    }
    let toks: Vec<Token> = rest.iter().flatten().copied().collect();
    let mut p = Parser {
        toks: &toks,
        pos: 0,
        signature: sig.as_ref(),
        names: BTreeSet::new(),
        symbols: BTreeSet::new(),
    };
    let root = p.expr(0)?;
    if let Some(t) = toks.get(p.pos) {
        return Err(FormatError::at(t.line, t.col, format!("unexpected `{}` after expression", t.text)));
    }
    Ok(match sig {
        Some(s) => CliqueExpression::new(s, root),
        None => CliqueExpression::with_inferred_signature(root),
    })
}

fn write_expr(out: &mut String, e: &Expr) {
    match e {
        Expr::Create { label, name } => write!(out, "(v {label} {name})").unwrap(),
        Expr::Union(a, b) => {
            out.push_str("(u ");
            write_expr(out, a);
            out.push(' ');
            write_expr(out, b);
            out.push(')');
        }
        Expr::Add { symbol, i, j, child } | Expr::AddSym { symbol, i, j, child } => {
            let op = if matches!(e, Expr::Add { .. }) { "add" } else { "sadd" };
            write!(out, "({op} {symbol} {i} {j} ").unwrap();
            write_expr(out, child);
            out.push(')');
        }
        Expr::Relabel { i, j, child } => {
            write!(out, "(rel {i} {j} ").unwrap();
            write_expr(out, child);
            out.push(')');
        }
    }
}

pub fn write_cwe(e: &CliqueExpression) -> String {
    let mut out = String::from("signature");
    for z in e.signature.symbols() {
        write!(out, " {z}").unwrap();
    }
    out.push('\n');
    write_expr(&mut out, &e.root);
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cwe::tests::cwe_p3;
    use crate::error::Error;

    pub(crate) const CWE_P3: &str =
        "signature E\n(sadd E 3 2 (u (v 3 c) (sadd E 1 2 (u (v 2 b) (v 1 a)))))\n";

    #[test]
    fn round_trip() {
        let e = parse_cwe(CWE_P3).unwrap();
        assert_eq!(e, cwe_p3());
        assert_eq!(write_cwe(&e), CWE_P3);
        let loose = "# p3\n(sadd E 3 2\n  (u (v 3 c)\n     (sadd E 1 2 (u (v 2 b) (v 1 a)))))";
        assert_eq!(write_cwe(&parse_cwe(loose).unwrap()), CWE_P3);
    }

    #[test]
    fn errors() {
        let e = parse_cwe("(sadd E 3 2 (u (v 3 c) (w 1 a)))").unwrap_err();
        assert!(matches!(e, Error::Format(FormatError { line: 1, col: 25, .. })), "{e}");
        let e = parse_cwe("signature F\n(add E 1 2 (v 1 a))").unwrap_err();
        assert!(matches!(e, Error::Format(FormatError { line: 2, col: 6, .. })), "{e}");
        assert!(parse_cwe("(u (v 1 a) (v 2 a))").is_err());
        assert!(parse_cwe("(rel 1 1 (v 1 a))").is_err());
        assert!(parse_cwe("(v 0 a)").is_err());
        assert!(parse_cwe("(v 1 a) (v 1 b)").is_err());
        assert!(parse_cwe("(v 1 a").is_err());
        assert!(parse_cwe("").is_err());
        let deep = "(rel 1 2 ".repeat(MAX_DEPTH + 1) + "(v 1 a)" + &")".repeat(MAX_DEPTH + 1);
        assert!(parse_cwe(&deep).is_err());
    }

    #[test]
    fn deepest_allowed_expression() {
        let text = "(rel 1 2 ".repeat(MAX_DEPTH - 1) + "(v 1 a)" + &")".repeat(MAX_DEPTH - 1);
        let e = parse_cwe(&text).unwrap();
        assert_eq!(e.eval().unwrap().structure.size(), 1);
        assert_eq!(parse_cwe(&write_cwe(&e)).unwrap(), e);
    }
}
