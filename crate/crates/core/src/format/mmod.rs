use std::collections::BTreeMap;
use std::fmt::Write;

use crate::error::Result;
use crate::format::token::{check_name, lines, Cursor, Token};
use crate::format::{FormatError, ModelFile};
use crate::model::{MergeModel, STuple};
use crate::ranked::{Interval, IntervalRanking, Rank, RankedMergeModel};
use crate::structure::Signature;
use crate::tree::TreeOrder;

/// Node lines of a model file, in order of appearance.
pub(crate) struct Nodes<'a> {
    pub names: Vec<Token<'a>>,
    pub parents: Vec<Option<Token<'a>>>,
    pub intervals: Vec<Option<Interval>>,
}

impl<'a> Nodes<'a> {
    pub fn new() -> Self {
        Nodes {
            names: Vec::new(),
            parents: Vec::new(),
            intervals: Vec::new(),
        }
    }

    /// Parses the rest of a `node X parent P [interval lo hi]` line.
    pub fn read(&mut self, c: &mut Cursor<'_, 'a>, intervals: bool) -> Result<()> {
        let name = c.name("node name")?;
        if self.names.iter().any(|t| t.text == name.text) {
            return Err(FormatError::at(name.line, name.col, format!("duplicate node `{}`", name.text)));
        }
        c.keyword("parent")?;
        let p = c.next("parent name")?;
        let parent = if p.text == "_" {
            None
        } else {
            check_name(p, "parent name")?;
            Some(p)
        };
        let mut iv = None;
        if intervals && c.peek().is_some() {
            c.keyword("interval")?;
            let lo = rank(c.next("lower end")?)?;
            let hi = rank(c.next("upper end")?)?;
            iv = Some(Interval::new(lo, hi));
        }
        c.done()?;
        if let Some(first) = self.intervals.first() {
            if first.is_some() != iv.is_some() {
                return Err(FormatError::at(
                    name.line,
                    name.col,
                    "intervals must be given for all nodes or for none",
                ));
            }
        }
        self.names.push(name);
        self.parents.push(parent);
        self.intervals.push(iv);
        Ok(())
    }

    pub fn tree(&self, header: (usize, usize)) -> Result<TreeOrder> {
        if self.names.is_empty() {
            return Err(FormatError::at(header.0, header.1, "model has no nodes"));
        }
        let index: BTreeMap<&str, usize> =
            self.names.iter().enumerate().map(|(i, t)| (t.text, i)).collect();
        let mut parents = Vec::new();
        for p in &self.parents {
            parents.push(match p {
                None => None,
                Some(t) => Some(*index.get(t.text).ok_or_else(|| {
                    FormatError::at(t.line, t.col, format!("unknown parent `{}`", t.text))
                })?),
            });
        }
        Ok(TreeOrder::from_indices(
            self.names.iter().map(|t| t.text.to_string()).collect(),
            parents,
        )?)
    }

    pub fn node(&self, tree: &TreeOrder, t: Token<'_>) -> Result<usize> {
        tree.index_of(t.text)
            .ok_or_else(|| FormatError::at(t.line, t.col, format!("unknown node `{}`", t.text)))
    }
}

/// Bound on numerators and denominators, keeping rank arithmetic exact.
pub const MAX_RANK_PART: i64 = 1 << 30;

fn rank(t: Token<'_>) -> Result<Rank> {
    let bad = || FormatError::at(t.line, t.col, format!("expected a rational, found `{}`", t.text));
    let r: Rank = t.text.parse().map_err(|_| bad())?;
    if r.numer().unsigned_abs() > MAX_RANK_PART as u64 || *r.denom() > MAX_RANK_PART {
        return Err(FormatError::at(t.line, t.col, format!("rank `{}` is too large", t.text)));
    }
    Ok(r)
}

pub(crate) fn signature(c: &mut Cursor<'_, '_>) -> Result<Signature> {
    let mut syms: Vec<String> = Vec::new();
    for &t in c.rest() {
        check_name(t, "symbol")?;
        if syms.iter().any(|x| x == t.text) {
            return Err(FormatError::at(t.line, t.col, format!("duplicate symbol `{}`", t.text)));
        }
        syms.push(t.text.to_string());
    }
    Signature::new(syms)
}

pub(crate) fn symbol(sig: &Signature, t: Token<'_>) -> Result<usize> {
    sig.index_of(t.text)
        .ok_or_else(|| FormatError::at(t.line, t.col, format!("unknown symbol `{}`", t.text)))
}

/// Reads a merge-model, with its ranking when intervals are present.
pub fn parse_mmod(text: &str) -> Result<ModelFile> {
    let lines = lines(text)?;
    let mut header: Option<(String, (usize, usize))> = None;
    let mut sig: Option<Signature> = None;
    let mut nodes = Nodes::new();
    let mut raw_tuples: Vec<[Token; 4]> = Vec::new();
    for toks in &lines {
        let mut c = Cursor::new(toks);
        let head = c.next("keyword")?;
        match head.text {
            "mergemodel" if header.is_none() => {
                let n = c.name("model name")?;
                c.done()?;
                header = Some((n.text.to_string(), (head.line, head.col)));
            }
            _ if header.is_none() => {
                return Err(FormatError::at(head.line, head.col, "expected `mergemodel`"));
            }
            "signature" if sig.is_none() && nodes.names.is_empty() => sig = Some(signature(&mut c)?),
            _ if sig.is_none() => {
                return Err(FormatError::at(head.line, head.col, "expected `signature`"));
            }
            "node" if raw_tuples.is_empty() => nodes.read(&mut c, true)?,
            "s" => {
                let z = c.next("symbol")?;
                let a = c.next("sign")?;
                let x = c.name("node")?;
                let y = c.name("node")?;
                c.done()?;
                raw_tuples.push([z, a, x, y]);
            }
            other => {
                return Err(FormatError::at(head.line, head.col, format!("unexpected `{other}`")));
            }
        }
    }
    let Some((name, pos)) = header else {
        return Err(FormatError::at(1, 1, "missing `mergemodel` header"));
    };
    let Some(sig) = sig else {
        return Err(FormatError::at(pos.0, pos.1, "missing `signature` line"));
    };
    let tree = nodes.tree(pos)?;
    let mut tuples = Vec::new();
    for [z, a, x, y] in raw_tuples {
        let alpha = match a.text {
            "0" => 0,
            "1" => 1,
            other => return Err(FormatError::at(a.line, a.col, format!("expected 0 or 1, found `{other}`"))),
        };
        tuples.push(STuple {
            symbol: symbol(&sig, z)?,
            alpha,
            x: nodes.node(&tree, x)?,
            y: nodes.node(&tree, y)?,
        });
    }
    let ranking = if nodes.intervals.iter().all(Option::is_some) {
        Some(nodes.intervals.iter().map(|i| i.expect("checked")).collect())
    } else {
        None
    };
    Ok(ModelFile {
        model: MergeModel::new(&name, sig, tree, tuples),
        ranking,
    })
}

pub(crate) fn write_header(out: &mut String, keyword: &str, name: &str, sig: &Signature) {
    writeln!(out, "{keyword} {name}").unwrap();
    out.push_str("signature");
    for z in sig.symbols() {
        write!(out, " {z}").unwrap();
    }
    out.push('\n');
}

pub(crate) fn write_nodes(out: &mut String, tree: &TreeOrder, ranking: Option<&IntervalRanking>) {
    let mut order: Vec<usize> = (0..tree.len()).collect();
    order.sort_by(|&a, &b| tree.name(a).cmp(tree.name(b)));
    for i in order {
        let parent = tree.parent(i).map_or("_", |p| tree.name(p));
        write!(out, "node {} parent {}", tree.name(i), parent).unwrap();
        if let Some(r) = ranking {
            write!(out, " interval {} {}", r[i].lo, r[i].hi).unwrap();
        }
        out.push('\n');
    }
}

pub fn write_mmod(m: &MergeModel, ranking: Option<&IntervalRanking>) -> String {
    let mut out = String::new();
    write_header(&mut out, "mergemodel", m.name(), m.signature());
    let t = m.tree();
    write_nodes(&mut out, t, ranking);
    let mut lines: Vec<(&str, u8, &str, &str)> = m
        .tuples()
        .iter()
        .map(|tu| {
            (
                m.signature().symbols()[tu.symbol].as_str(),
                tu.alpha,
                t.name(tu.x),
                t.name(tu.y),
            )
        })
        .collect();
    lines.sort_unstable();
    for (z, a, x, y) in lines {
        writeln!(out, "s {z} {a} {x} {y}").unwrap();
    }
    out
}

pub fn write_ranked(rm: &RankedMergeModel) -> String {
    write_mmod(&rm.model, Some(&rm.ranking))
}
