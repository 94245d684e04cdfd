//! Clique-width expressions over binary signatures.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::structure::{BinaryStructure, Graph, Signature, EDGE, NON_EDGE};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Create { label: usize, name: String },
    Union(Box<Expr>, Box<Expr>),
    Add { symbol: String, i: usize, j: usize, child: Box<Expr> },
    /// Both orientations of `Add` at one node.
    AddSym { symbol: String, i: usize, j: usize, child: Box<Expr> },
    Relabel { i: usize, j: usize, child: Box<Expr> },
}

impl Expr {
    pub fn create(label: usize, name: &str) -> Expr {
        Expr::Create {
            label,
            name: name.to_string(),
        }
    }

    pub fn union(a: Expr, b: Expr) -> Expr {
        Expr::Union(Box::new(a), Box::new(b))
    }

    pub fn add(symbol: &str, i: usize, j: usize, child: Expr) -> Expr {
        Expr::Add {
            symbol: symbol.to_string(),
            i,
            j,
            child: Box::new(child),
        }
    }

    pub fn add_sym(symbol: &str, i: usize, j: usize, child: Expr) -> Expr {
        Expr::AddSym {
            symbol: symbol.to_string(),
            i,
            j,
            child: Box::new(child),
        }
    }

    pub fn relabel(i: usize, j: usize, child: Expr) -> Expr {
        Expr::Relabel {
            i,
            j,
            child: Box::new(child),
        }
    }

    pub fn is_create(&self) -> bool {
        matches!(self, Expr::Create { .. })
    }

    /// Every `Union` has a `Create` child.
    pub fn is_linear(&self) -> bool {
        match self {
            Expr::Create { .. } => true,
            Expr::Union(a, b) => (a.is_create() || b.is_create()) && a.is_linear() && b.is_linear(),
            Expr::Add { child, .. } | Expr::AddSym { child, .. } | Expr::Relabel { child, .. } => {
                child.is_linear()
            }
        }
    }

    /// Largest label mentioned anywhere.
    pub fn max_label(&self) -> usize {
        match self {
            Expr::Create { label, .. } => *label,
            Expr::Union(a, b) => a.max_label().max(b.max_label()),
            Expr::Add { i, j, child, .. }
            | Expr::AddSym { i, j, child, .. }
            | Expr::Relabel { i, j, child } => (*i).max(*j).max(child.max_label()),
        }
    }

    /// Element names in creation order (left to right).
    pub fn element_names(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_names(&mut out);
        out
    }

    fn collect_names(&self, out: &mut Vec<String>) {
        match self {
            Expr::Create { name, .. } => out.push(name.clone()),
            Expr::Union(a, b) => {
                a.collect_names(out);
                b.collect_names(out);
            }
            Expr::Add { child, .. } | Expr::AddSym { child, .. } | Expr::Relabel { child, .. } => {
                child.collect_names(out)
            }
        }
    }

    fn collect_symbols(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Create { .. } => {}
            Expr::Union(a, b) => {
                a.collect_symbols(out);
                b.collect_symbols(out);
            }
            Expr::Add { symbol, child, .. } | Expr::AddSym { symbol, child, .. } => {
                out.insert(symbol.clone());
                child.collect_symbols(out);
            }
            Expr::Relabel { child, .. } => child.collect_symbols(out),
        }
    }

    /// Number of nodes of the expression tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Create { .. } => 1,
            Expr::Union(a, b) => 1 + a.size() + b.size(),
            Expr::Add { child, .. } | Expr::AddSym { child, .. } | Expr::Relabel { child, .. } => {
                1 + child.size()
            }
        }
    }
}

/// An expression with its signature and label bound `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliqueExpression {
    pub signature: Signature,
    pub labels: usize,
    pub root: Expr,
}

/// Result of evaluation: the structure and the final label of each element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evaluation {
    pub structure: BinaryStructure,
    pub labeling: BTreeMap<String, usize>,
}

impl CliqueExpression {
    /// Uses `t` = the largest label mentioned.
    pub fn new(signature: Signature, root: Expr) -> Self {
        let labels = root.max_label();
        CliqueExpression {
            signature,
            labels,
            root,
        }
    }

    /// Signature made of the symbols used, sorted.
    pub fn with_inferred_signature(root: Expr) -> Self {
        let mut symbols = BTreeSet::new();
        root.collect_symbols(&mut symbols);
        let sig = Signature::new(symbols).expect("set has no duplicates");
        CliqueExpression::new(sig, root)
    }

    pub fn is_linear(&self) -> bool {
        self.root.is_linear()
    }

    pub fn eval(&self) -> Result<Evaluation> {
        self.eval_named("expr")
    }

    pub fn eval_named(&self, name: &str) -> Result<Evaluation> {
        let mut names = self.root.element_names();
        let mut seen = BTreeSet::new();
        for n in &names {
            if !seen.insert(n.clone()) {
                return Err(Error::Duplicate(n.clone()));
            }
        }
        names.sort();
        let mut s = BinaryStructure::new(name, self.signature.clone(), names)?;
        let labels = self.eval_into(&self.root, &mut s)?;
        let labeling = labels
            .into_iter()
            .map(|(e, l)| (s.element(e).to_string(), l))
            .collect();
        Ok(Evaluation {
            structure: s,
            labeling,
        })
    }

    fn check_label(&self, l: usize) -> Result<()> {
        if l == 0 || l > self.labels {
            return Err(Error::Expression(format!(
                "label {l} outside 1..={}",
                self.labels
            )));
        }
        Ok(())
    }

    fn symbol(&self, name: &str) -> Result<usize> {
        self.signature
            .index_of(name)
            .ok_or_else(|| Error::UnknownSymbol(name.to_string()))
    }

    fn eval_into(&self, e: &Expr, s: &mut BinaryStructure) -> Result<Vec<(usize, usize)>> {
        match e {
            Expr::Create { label, name } => {
                self.check_label(*label)?;
                let idx = s.element_index(name).expect("names collected up front");
                Ok(vec![(idx, *label)])
            }
            Expr::Union(a, b) => {
                let mut l = self.eval_into(a, s)?;
                l.extend(self.eval_into(b, s)?);
                Ok(l)
            }
            Expr::Add { symbol, i, j, child } | Expr::AddSym { symbol, i, j, child } => {
                self.check_label(*i)?;
                self.check_label(*j)?;
                if i == j {
                    return Err(Error::Expression(format!("add with equal labels {i}")));
                }
                let z = self.symbol(symbol)?;
                let l = self.eval_into(child, s)?;
                let sym = matches!(e, Expr::AddSym { .. });
                for &(u, lu) in &l {
                    for &(v, lv) in &l {
                        if lu == *i && lv == *j {
                            s.insert(z, u, v);
                            if sym {
                                s.insert(z, v, u);
                            }
                        }
                    }
                }
                Ok(l)
            }
            Expr::Relabel { i, j, child } => {
                self.check_label(*i)?;
                self.check_label(*j)?;
                if i == j {
                    return Err(Error::Expression(format!("relabel with equal labels {i}")));
                }
                let l = self.eval_into(child, s)?;
                Ok(l.into_iter()
                    .map(|(u, lu)| (u, if lu == *i { *j } else { lu }))
                    .collect())
            }
        }
    }
}

/// A linear expression for the complement expansion of `g`: one label per
/// vertex, and for every pair a symmetric add of either `E` or `F`.
pub fn complement_expansion_expr(g: &Graph) -> CliqueExpression {
    let s = g.structure();
    let n = s.size();
    let mut e = Expr::create(1, s.element(0));
    for k in 1..n {
        e = Expr::union(Expr::create(k + 1, s.element(k)), e);
        for j in 0..k {
            let sym = if g.adjacent(j, k) { EDGE } else { NON_EDGE };
            e = Expr::add_sym(sym, j + 1, k + 1, e);
        }
    }
    let sig = Signature::new([EDGE, NON_EDGE]).expect("distinct");
    let mut out = CliqueExpression::new(sig, e);
    out.labels = n;
    out
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::structure::{complement_expand, matches_by_name};

    pub(crate) fn cwe_p3() -> CliqueExpression {
        let inner = Expr::add_sym(
            "E",
            1,
            2,
            Expr::union(Expr::create(2, "b"), Expr::create(1, "a")),
        );
        let root = Expr::add_sym("E", 3, 2, Expr::union(Expr::create(3, "c"), inner));
        CliqueExpression::with_inferred_signature(root)
    }

    #[test]
    fn single_directed_pair() {
        let e = Expr::add("E", 1, 2, Expr::union(Expr::create(2, "b"), Expr::create(1, "a")));
        let s = CliqueExpression::with_inferred_signature(e).eval().unwrap().structure;
        assert_eq!(s.pairs(0).collect::<Vec<_>>(), vec![(0, 1)]);
    }

    #[test]
    fn cwe_p3_is_p3() {
        let s = cwe_p3().eval().unwrap().structure;
        let p3 = Graph::from_edges("expr", &["a", "b", "c"], &[("a", "b"), ("b", "c")]).unwrap();
        assert!(matches_by_name(&s, p3.structure()));
        assert_eq!(cwe_p3().labels, 3);
    }

    #[test]
    fn relabel_of_empty_class_changes_nothing() {
        let base = cwe_p3();
        let wrapped = CliqueExpression {
            root: Expr::relabel(1, 3, Expr::relabel(1, 2, base.root.clone())),
            ..base.clone()
        };
        let a = base.eval().unwrap().structure;
        let b = wrapped.eval().unwrap().structure;
        assert!(matches_by_name(&a, &b));
    }

    #[test]
    fn linearity() {
        assert!(cwe_p3().is_linear());
        let two = |x: &str, y: &str| Expr::union(Expr::create(1, x), Expr::create(2, y));
        let balanced = Expr::union(two("a", "b"), two("c", "d"));
        assert!(!balanced.is_linear());
        assert!(Expr::create(1, "a").is_linear());
    }

    #[test]
    fn eval_errors() {
        let dup = Expr::union(Expr::create(1, "a"), Expr::create(2, "a"));
        assert!(matches!(
            CliqueExpression::with_inferred_signature(dup).eval(),
            Err(Error::Duplicate(_))
        ));
        let same = Expr::add("E", 1, 1, Expr::create(1, "a"));
        assert!(CliqueExpression::with_inferred_signature(same).eval().is_err());
        let mut out_of_range = cwe_p3();
        out_of_range.labels = 2;
        assert!(out_of_range.eval().is_err());
    }

    #[test]
    fn complement_expression_evaluates_to_expansion() {
        let p4 = Graph::from_edges(
            "g",
            &["a", "b", "c", "d"],
            &[("a", "b"), ("b", "c"), ("c", "d")],
        )
        .unwrap();
        let e = complement_expansion_expr(&p4);
        assert!(e.is_linear());
        let s = e.eval_named("g").unwrap().structure;
        assert!(matches_by_name(&s, &complement_expand(&p4)));
    }
}
