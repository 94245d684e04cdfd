use crate::error::Result;
use crate::format::token::{lines, Cursor};
use crate::format::FormatError;
use crate::structure::{BinaryStructure, Graph, Signature, EDGE};

/// Limit on the declared vertex count, to keep matrices small.
pub const MAX_VERTICES: usize = 4096;

/// Reads `p edge n m` and `e u v` lines over vertices `1..=n`; `c` lines
/// are comments. The edge count `m` is informational.
pub fn parse_gr(text: &str, name: &str) -> Result<Graph> {
    let mut g: Option<BinaryStructure> = None;
    let lines = lines(text)?;
    for toks in &lines {
        let mut c = Cursor::new(toks);
        let head = c.next("keyword")?;
        match head.text {
            "c" => {}
            "p" if g.is_none() => {
                c.keyword("edge")?;
                let n = c.number("vertex count")?;
                c.number("edge count")?;
                c.done()?;
                if n == 0 || n > MAX_VERTICES {
                    return Err(FormatError::at(
                        head.line,
                        head.col,
                        format!("vertex count {n} not in 1..={MAX_VERTICES}"),
                    ));
                }
                let sig = Signature::new([EDGE])?;
                g = Some(BinaryStructure::new(name, sig, (1..=n).map(|i| i.to_string()))?);
            }
            "e" => {
                let Some(s) = g.as_mut() else {
                    return Err(FormatError::at(head.line, head.col, "edge before `p` line"));
                };
                let n = s.size();
                let vertex = |c: &mut Cursor| -> Result<usize> {
                    let t = c.peek();
                    let v = c.number("vertex")?;
                    let t = t.expect("number read a token");
                    if v == 0 || v > n {
                        return Err(FormatError::at(t.line, t.col, format!("vertex {v} not in 1..={n}")));
                    }
                    Ok(s.element_index(&v.to_string()).expect("vertex exists"))
                };
                let u = vertex(&mut c)?;
                let v = vertex(&mut c)?;
                c.done()?;
                if u == v {
                    return Err(FormatError::at(head.line, head.col, "loop edge"));
                }
                s.insert(0, u, v);
                s.insert(0, v, u);
            }
            other => {
                return Err(FormatError::at(head.line, head.col, format!("unexpected `{other}`")));
            }
        }
    }
    let s = g.ok_or_else(|| FormatError::at(1, 1, "missing `p edge` line"))?;
    Ok(Graph::try_new(s).expect("symmetric and loopless by construction"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn p3() {
        let g = parse_gr("c path\np edge 3 2\ne 1 2\ne 2 3\n", "p3").unwrap();
        assert_eq!(g.size(), 3);
        assert_eq!(g.edges().count(), 2);
        assert!(g.structure().holds_named("E", "3", "2"));
    }

    #[test]
    fn errors() {
        let e = parse_gr("p edge 2 1\ne 1 3\n", "g").unwrap_err();
        assert!(matches!(e, Error::Format(FormatError { line: 2, col: 5, .. })), "{e}");
        assert!(parse_gr("p edge 2 1\ne 1 1\n", "g").is_err());
        assert!(parse_gr("e 1 2\n", "g").is_err());
        assert!(parse_gr("p edge 0 0\n", "g").is_err());
        assert!(parse_gr("p edge 2\n", "g").is_err());
    }
}
