use std::fmt::Write;

use crate::error::Result;
use crate::format::mmod::{signature, symbol, write_header, write_nodes, Nodes};
use crate::format::token::{lines, Cursor, Token};
use crate::format::FormatError;
use crate::structure::Signature;
use crate::twin::TwinModel;

pub fn parse_tmod(text: &str) -> Result<TwinModel> {
    let lines = lines(text)?;
    let mut header: Option<(String, (usize, usize))> = None;
    let mut sig: Option<Signature> = None;
    let mut nodes = Nodes::new();
    let mut raw: Vec<[Token; 3]> = Vec::new();
    for toks in &lines {
        let mut c = Cursor::new(toks);
        let head = c.next("keyword")?;
        match head.text {
            "twinmodel" if header.is_none() => {
                let n = c.name("model name")?;
                c.done()?;
                header = Some((n.text.to_string(), (head.line, head.col)));
            }
            _ if header.is_none() => {
                return Err(FormatError::at(head.line, head.col, "expected `twinmodel`"));
            }
            "signature" if sig.is_none() && nodes.names.is_empty() => sig = Some(signature(&mut c)?),
            _ if sig.is_none() => {
                return Err(FormatError::at(head.line, head.col, "expected `signature`"));
            }
            "node" if raw.is_empty() => nodes.read(&mut c, false)?,
            "z" => {
                let z = c.next("symbol")?;
                let x = c.name("node")?;
                let y = c.name("node")?;
                c.done()?;
                raw.push([z, x, y]);
            }
            other => {
                return Err(FormatError::at(head.line, head.col, format!("unexpected `{other}`")));
            }
        }
    }
    let Some((name, pos)) = header else {
        return Err(FormatError::at(1, 1, "missing `twinmodel` header"));
    };
    let Some(sig) = sig else {
        return Err(FormatError::at(pos.0, pos.1, "missing `signature` line"));
    };
    let tree = nodes.tree(pos)?;
    let mut tuples = Vec::new();
    for [z, x, y] in raw {
        tuples.push((symbol(&sig, z)?, nodes.node(&tree, x)?, nodes.node(&tree, y)?));
    }
    Ok(TwinModel::new(&name, sig, tree, tuples))
}

pub fn write_tmod(t: &TwinModel) -> String {
    let mut out = String::new();
    write_header(&mut out, "twinmodel", t.name(), t.signature());
    let tree = t.tree();
    write_nodes(&mut out, tree, None);
    let mut lines: Vec<(&str, &str, &str)> = t
        .tuples()
        .iter()
        .map(|&(z, x, y)| (t.signature().symbols()[z].as_str(), tree.name(x), tree.name(y)))
        .collect();
    lines.sort_unstable();
    for (z, x, y) in lines {
        writeln!(out, "z {z} {x} {y}").unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::twin::tests::twin_p3;

    pub(crate) const TWIN_P3: &str = "twinmodel p3
signature E
node a parent x1
node b parent y1
node c parent x2
node r parent _
node x1 parent r
node x2 parent r
node y1 parent y2
node y2 parent r
z E x1 y1
z E x2 y2
z E y1 x1
z E y2 x2
";

    #[test]
    fn round_trip() {
        let t = parse_tmod(TWIN_P3).unwrap();
        t.validate().unwrap();
        assert_eq!(write_tmod(&t), TWIN_P3);
        assert_eq!(write_tmod(&twin_p3()), TWIN_P3);
    }

    #[test]
    fn errors() {
        assert!(parse_tmod("twinmodel t\nsignature E\nnode r parent _\nz E r q\n").is_err());
        assert!(parse_tmod("twinmodel t\nsignature E\nnode r parent _ interval 1 1\n").is_err());
        assert!(parse_tmod("twinmodel t\nnode r parent _\n").is_err());
    }
}
