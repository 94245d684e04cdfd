use crate::error::Result;
use crate::format::FormatError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Token<'a> {
    pub text: &'a str,
    pub line: usize,
    pub col: usize,
}

/// Splits into lines of tokens, dropping `#` comments and blank lines.
/// Brackets and braces are tokens of their own.
pub(crate) fn lines(text: &str) -> Result<Vec<Vec<Token<'_>>>> {
    let mut out = Vec::new();
    for (k, raw) in text.split('\n').enumerate() {
        let line = k + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        let mut toks = Vec::new();
        let mut start: Option<usize> = None;
        let mut col = 0;
        for (pos, ch) in raw.char_indices() {
            col += 1;
            if ch.is_control() && ch != '\t' {
                return Err(FormatError::at(line, col, "control character"));
            }
            let special = matches!(ch, '(' | ')' | '{' | '}' | '#');
            if ch.is_whitespace() || special {
                if let Some(s) = start.take() {
                    push(&mut toks, raw, s, pos, line);
                }
                if ch == '#' {
                    break;
                }
                if special {
                    toks.push(Token {
                        text: &raw[pos..pos + 1],
                        line,
                        col,
                    });
                }
            } else if start.is_none() {
                start = Some(pos);
            }
        }
        if let Some(s) = start {
            push(&mut toks, raw, s, raw.len(), line);
        }
        if !toks.is_empty() {
            out.push(toks);
        }
    }
    Ok(out)
}

fn push<'a>(toks: &mut Vec<Token<'a>>, raw: &'a str, s: usize, e: usize, line: usize) {
    let col = raw[..s].chars().count() + 1;
    toks.push(Token {
        text: &raw[s..e],
        line,
        col,
    });
}

/// Reads the tokens of one line left to right.
pub(crate) struct Cursor<'t, 'a> {
    toks: &'t [Token<'a>],
    pos: usize,
}

impl<'t, 'a> Cursor<'t, 'a> {
    pub fn new(toks: &'t [Token<'a>]) -> Self {
        Cursor { toks, pos: 0 }
    }

    pub fn line(&self) -> usize {
        self.toks[0].line
    }

    fn end_col(&self) -> usize {
        let last = self.toks.last().expect("lines are non-empty");
        last.col + last.text.chars().count()
    }

    pub fn peek(&self) -> Option<Token<'a>> {
        self.toks.get(self.pos).copied()
    }

    pub fn next(&mut self, what: &str) -> Result<Token<'a>> {
        match self.toks.get(self.pos) {
            Some(&t) => {
                self.pos += 1;
                Ok(t)
            }
            None => Err(FormatError::at(
                self.line(),
                self.end_col(),
                format!("expected {what}"),
            )),
        }
    }

    pub fn keyword(&mut self, kw: &str) -> Result<Token<'a>> {
        let t = self.next(&format!("`{kw}`"))?;
        if t.text != kw {
            return Err(FormatError::at(
                t.line,
                t.col,
                format!("expected `{kw}`, found `{}`", t.text),
            ));
        }
        Ok(t)
    }

    /// A name: not a bracket and not the reserved `_`.
    pub fn name(&mut self, what: &str) -> Result<Token<'a>> {
        let t = self.next(what)?;
        check_name(t, what)?;
        Ok(t)
    }

    pub fn number(&mut self, what: &str) -> Result<usize> {
        let t = self.next(what)?;
        t.text.parse::<usize>().map_err(|_| {
            FormatError::at(t.line, t.col, format!("expected {what}, found `{}`", t.text))
        })
    }

    pub fn rest(&mut self) -> &'t [Token<'a>] {
        let r = &self.toks[self.pos..];
        self.pos = self.toks.len();
        r
    }

    pub fn done(&self) -> Result<()> {
        match self.peek() {
            None => Ok(()),
            Some(t) => Err(FormatError::at(
                t.line,
                t.col,
                format!("unexpected `{}`", t.text),
            )),
        }
    }
}

pub(crate) fn check_name(t: Token<'_>, what: &str) -> Result<()> {
    if matches!(t.text, "(" | ")" | "{" | "}" | "_") {
        return Err(FormatError::at(
            t.line,
            t.col,
            format!("expected {what}, found `{}`", t.text),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_and_brackets() {
        let ls = lines("a  b # c\n\n(x{y})").unwrap();
        assert_eq!(ls.len(), 2);
        let t: Vec<(&str, usize, usize)> = ls[1].iter().map(|t| (t.text, t.line, t.col)).collect();
        assert_eq!(
            t,
            vec![("(", 3, 1), ("x", 3, 2), ("{", 3, 3), ("y", 3, 4), ("}", 3, 5), (")", 3, 6)]
        );
        assert_eq!((ls[0][1].text, ls[0][1].col), ("b", 4));
    }

    #[test]
    fn missing_token_points_past_line_end() {
        let ls = lines("step").unwrap();
        let mut c = Cursor::new(&ls[0]);
        c.keyword("step").unwrap();
        let err = c.number("step number").unwrap_err();
        assert_eq!(err.to_string(), "1:5: expected step number");
    }
}
