use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use crate::error::Result;
use crate::format::token::{check_name, lines, Cursor, Token};
use crate::format::FormatError;
use crate::sequence::{MergeSequence, Step};

struct RawStep<'a> {
    parts: Vec<Vec<Token<'a>>>,
    reveals: Vec<(Token<'a>, Token<'a>)>,
}

/// Reads a sequence; its elements are the names in the parts.
pub fn parse_mseq(text: &str) -> Result<MergeSequence> {
    let lines = lines(text)?;
    let mut name: Option<String> = None;
    let mut steps: Vec<RawStep> = Vec::new();
    let mut has_parts = false;
    for toks in &lines {
        let mut c = Cursor::new(toks);
        let head = c.next("keyword")?;
        match head.text {
            "mergeseq" if name.is_none() => {
                name = Some(c.name("structure name")?.text.to_string());
                c.done()?;
            }
            _ if name.is_none() => {
                return Err(FormatError::at(head.line, head.col, "expected `mergeseq`"));
            }
            "step" => {
                if !steps.is_empty() && !has_parts {
                    return Err(FormatError::at(head.line, head.col, "previous step has no `parts`"));
                }
                let t = c.peek();
                let k = c.number("step number")?;
                c.done()?;
                if k != steps.len() + 1 {
                    let t = t.expect("number read a token");
                    return Err(FormatError::at(
                        t.line,
                        t.col,
                        format!("expected step {}, found {k}", steps.len() + 1),
                    ));
                }
                steps.push(RawStep {
                    parts: Vec::new(),
                    reveals: Vec::new(),
                });
                has_parts = false;
            }
            "parts" => {
                let Some(step) = steps.last_mut().filter(|_| !has_parts) else {
                    return Err(FormatError::at(head.line, head.col, "`parts` outside a step"));
                };
                while c.peek().is_some() {
                    c.keyword("{")?;
                    let mut part = Vec::new();
                    loop {
                        let t = c.next("`}`")?;
                        if t.text == "}" {
                            break;
                        }
                        check_name(t, "element")?;
                        part.push(t);
                    }
                    if part.is_empty() {
                        return Err(FormatError::at(head.line, head.col, "empty part"));
                    }
                    step.parts.push(part);
                }
                has_parts = true;
            }
            "reveal" | "revealsym" => {
                let Some(step) = steps.last_mut().filter(|_| has_parts) else {
                    return Err(FormatError::at(head.line, head.col, "reveal before `parts`"));
                };
                let u = c.name("element")?;
                let v = c.name("element")?;
                c.done()?;
                step.reveals.push((u, v));
                if head.text == "revealsym" {
                    step.reveals.push((v, u));
                }
            }
            other => {
                return Err(FormatError::at(head.line, head.col, format!("unexpected `{other}`")));
            }
        }
    }
    let Some(name) = name else {
        return Err(FormatError::at(1, 1, "missing `mergeseq` header"));
    };
    if steps.is_empty() || !has_parts {
        let line = lines.last().map_or(1, |l| l[0].line);
        return Err(FormatError::at(line, 1, "missing step or parts"));
    }
    let mut names = BTreeSet::new();
    for st in &steps {
        for p in &st.parts {
            names.extend(p.iter().map(|t| t.text));
        }
    }
    let index: BTreeMap<&str, usize> = names.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let elements: Vec<String> = names.iter().map(|s| s.to_string()).collect();
    let lookup = |t: &Token| {
        index
            .get(t.text)
            .copied()
            .ok_or_else(|| FormatError::at(t.line, t.col, format!("unknown element `{}`", t.text)))
    };
    let mut out = Vec::new();
    for st in &steps {
        let parts = st
            .parts
            .iter()
            .map(|p| p.iter().map(lookup).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let revealed = st
            .reveals
            .iter()
            .map(|(u, v)| Ok((lookup(u)?, lookup(v)?)))
            .collect::<Result<BTreeSet<_>>>()?;
        out.push(Step::new(parts, revealed));
    }
    Ok(MergeSequence::from_indices(&name, elements, out))
}

pub fn write_mseq(seq: &MergeSequence) -> String {
    let mut out = String::new();
    let el = seq.elements();
    writeln!(out, "mergeseq {}", seq.structure_name()).unwrap();
    for (k, st) in seq.steps().iter().enumerate() {
        writeln!(out, "step {}", k + 1).unwrap();
        out.push_str("parts");
        let mut parts: Vec<Vec<&str>> = st
            .parts
            .iter()
            .map(|p| {
                let mut names: Vec<&str> = p.iter().map(|&e| el[e].as_str()).collect();
                names.sort_unstable();
                names
            })
            .collect();
        parts.sort();
        for p in parts {
            write!(out, " {{ {} }}", p.join(" ")).unwrap();
        }
        out.push('\n');
        for &(u, v) in &st.revealed {
            writeln!(out, "reveal {} {}", el[u], el[v]).unwrap();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::sequence::tests::{p3, sigma_p3};
    use crate::sequence::width;

    pub(crate) const SIGMA_P3: &str = "mergeseq p3
step 1
parts { a } { b } { c }
step 2
parts { a c } { b }
step 3
parts { a b c }
reveal a c
reveal c a
step 4
parts { a b c }
reveal a b
reveal b a
reveal b c
reveal c b
";

    #[test]
    fn round_trip_and_width() {
        let s = parse_mseq(SIGMA_P3).unwrap();
        assert_eq!(s, sigma_p3());
        assert_eq!(write_mseq(&s), SIGMA_P3);
        assert_eq!(width(&s, &p3(), 1).unwrap(), 1);
    }

    #[test]
    fn revealsym_expands() {
        let text = "mergeseq g\nstep 1\nparts {a} {b}\nstep 2\nparts {a b}\nrevealsym a b\n";
        let s = parse_mseq(text).unwrap();
        assert_eq!(s.steps()[1].revealed.len(), 2);
        assert!(write_mseq(&s).contains("reveal b a\n"));
    }

    #[test]
    fn errors() {
        let e = parse_mseq("mergeseq g\nstep 2\n").unwrap_err();
        assert!(matches!(e, Error::Format(FormatError { line: 2, col: 6, .. })), "{e}");
        let e = parse_mseq("mergeseq g\nstep 1\nparts { a } { b\n").unwrap_err();
        assert!(matches!(e, Error::Format(FormatError { line: 3, .. })), "{e}");
        let e = parse_mseq("mergeseq g\nstep 1\nparts { a }\nreveal a z\n").unwrap_err();
        assert!(matches!(e, Error::Format(FormatError { line: 4, col: 10, .. })), "{e}");
        assert!(parse_mseq("mergeseq g\nstep 1\n").is_err());
        assert!(parse_mseq("mergeseq g\nparts { a }\n").is_err());
        assert!(parse_mseq("mergeseq g\nstep 1\nparts { }\n").is_err());
    }
}
