//! Twin-models, the twin-model of a clique-width expression together with
//! a clique-width witness for it, and the translation into merge-models.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::cwe::{CliqueExpression, Expr};
use crate::error::{Error as CrateError, Result};
use crate::model::{is_acyclic, MergeModel, STuple, ORDER_SYMBOL};
use crate::structure::{BinaryStructure, Signature, EDGE, NON_EDGE};
use crate::tree::TreeOrder;

/// Name of the derived symbol `Z_R`.
pub fn z_symbol(r: &str) -> String {
    format!("Z__{r}")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TwinViolation {
    #[error("invalid tree: {0}")]
    Tree(#[from] crate::tree::TreeViolation),
    #[error("Z_{symbol}({x},{y}) joins comparable nodes")]
    Comparable { symbol: String, x: String, y: String },
    #[error("Z_{symbol}({x},{y}) is not minimal: ({x2},{y2}) lies below it")]
    NotMinimal {
        symbol: String,
        x: String,
        y: String,
        x2: String,
        y2: String,
    },
    #[error("tree and Z edges form a cycle through `{0}`")]
    Cycle(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwinModel {
    name: String,
    signature: Signature,
    tree: TreeOrder,
    // (symbol, x, y)
    tuples: BTreeSet<(usize, usize, usize)>,
}

impl TwinModel {
    pub fn new(
        name: &str,
        signature: Signature,
        tree: TreeOrder,
        tuples: impl IntoIterator<Item = (usize, usize, usize)>,
    ) -> Self {
        let tuples: BTreeSet<_> = tuples.into_iter().collect();
        for &(z, x, y) in &tuples {
            assert!(z < signature.len() && x < tree.len() && y < tree.len());
        }
        TwinModel {
            name: name.to_string(),
            signature,
            tree,
            tuples,
        }
    }

    pub fn from_named(
        name: &str,
        symbols: &[&str],
        nodes: &[(&str, Option<&str>)],
        tuples: &[(&str, &str, &str)],
    ) -> Result<Self> {
        let signature = Signature::new(symbols.iter().copied())?;
        let tree = TreeOrder::new(
            nodes.iter().map(|(n, _)| n.to_string()).collect(),
            nodes.iter().map(|(_, p)| p.map(str::to_string)).collect(),
        )?;
        let mut out = Vec::new();
        for &(z, x, y) in tuples {
            let s = signature
                .index_of(z)
                .ok_or_else(|| CrateError::UnknownSymbol(z.to_string()))?;
            out.push((s, tree.require(x)?, tree.require(y)?));
        }
        Ok(TwinModel::new(name, signature, tree, out))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: &str) {
        self.name = name.to_string();
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn tree(&self) -> &TreeOrder {
        &self.tree
    }

    pub fn tuples(&self) -> &BTreeSet<(usize, usize, usize)> {
        &self.tuples
    }

    pub fn validate(&self) -> std::result::Result<(), TwinViolation> {
        let t = &self.tree;
        let name = |i: usize| t.name(i).to_string();
        let sym = |z: usize| self.signature.symbols()[z].clone();
        for &(z, x, y) in &self.tuples {
            if t.comparable(x, y) {
                return Err(TwinViolation::Comparable {
                    symbol: sym(z),
                    x: name(x),
                    y: name(y),
                });
            }
        }
        for &(z, x, y) in &self.tuples {
            for &(z2, x2, y2) in &self.tuples {
                if z2 == z && (x2, y2) != (x, y) && t.precedes_eq(x2, x) && t.precedes_eq(y2, y) {
                    return Err(TwinViolation::NotMinimal {
                        symbol: sym(z),
                        x: name(x),
                        y: name(y),
                        x2: name(x2),
                        y2: name(y2),
                    });
                }
            }
        }
        let mut arcs = vec![BTreeSet::new(); t.len()];
        for &(_, a, b) in &self.tuples {
            for (v, other) in [(a, b), (b, a)] {
                for u in t.ancestors(v).into_iter().skip(1) {
                    arcs[u].insert(other);
                }
            }
        }
        if !is_acyclic(&arcs) {
            let witness = (0..t.len())
                .find(|&u| !arcs[u].is_empty() && on_cycle(&arcs, u))
                .unwrap_or(t.root());
            return Err(TwinViolation::Cycle(name(witness)));
        }
        Ok(())
    }

    /// `R(u,v)` iff some pair of ancestors of `u` and `v` lies in `Z_R`.
    pub fn interpret(&self) -> Result<BinaryStructure> {
        self.validate()?;
        Ok(self.interpret_unchecked())
    }

    pub(crate) fn interpret_unchecked(&self) -> BinaryStructure {
        let t = &self.tree;
        let leaves = t.leaves();
        let mut s = BinaryStructure::new(
            &self.name,
            self.signature.clone(),
            leaves.iter().map(|&l| t.name(l).to_string()),
        )
        .expect("leaf names are distinct");
        let below: Vec<Vec<usize>> = (0..t.len()).map(|i| t.leaf_descendants(i)).collect();
        for &(z, x, y) in &self.tuples {
            for &u in &below[x] {
                for &v in &below[y] {
                    let a = s.element_index(t.name(u)).expect("leaf");
                    let b = s.element_index(t.name(v)).expect("leaf");
                    s.insert(z, a, b);
                }
            }
        }
        s
    }

    /// Signature of [`TwinModel::full_structure`].
    pub fn full_signature(&self) -> Signature {
        let mut names = vec![ORDER_SYMBOL.to_string()];
        names.extend(self.signature.symbols().iter().map(|r| z_symbol(r)));
        Signature::new(names).expect("derived names are distinct")
    }

    /// Strict tree order plus the `Z_R` tuples as one structure.
    pub fn full_structure(&self) -> BinaryStructure {
        let t = &self.tree;
        let mut s = BinaryStructure::new(&self.name, self.full_signature(), t.names().iter().cloned())
            .expect("node names are distinct");
        let idx = |s: &BinaryStructure, i: usize| s.element_index(t.name(i)).expect("node");
        for y in 0..t.len() {
            for x in t.ancestors(y).into_iter().skip(1) {
                let (a, b) = (idx(&s, x), idx(&s, y));
                s.insert(0, a, b);
            }
        }
        for &(z, x, y) in &self.tuples {
            let (a, b) = (idx(&s, x), idx(&s, y));
            s.insert(1 + z, a, b);
        }
        s
    }

    /// Gaifman graph of the `Z` part (tree order dropped).
    pub fn z_graph(&self) -> crate::structure::Graph {
        let full = self.full_structure();
        let keep: Vec<String> = full.signature().symbols()[1..].to_vec();
        let keep: Vec<&str> = keep.iter().map(String::as_str).collect();
        crate::structure::gaifman(&crate::structure::reduct(&full, &keep).expect("own symbols"))
    }
}

fn on_cycle(arcs: &[BTreeSet<usize>], start: usize) -> bool {
    let mut seen = BTreeSet::new();
    let mut stack: Vec<usize> = arcs[start].iter().copied().collect();
    while let Some(u) = stack.pop() {
        if u == start {
            return true;
        }
        if seen.insert(u) {
            stack.extend(arcs[u].iter().copied());
        }
    }
    false
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Color {
    Plain(usize),
    Primed(usize),
}

struct Builder<'a> {
    t: usize,
    signature: &'a Signature,
    names: Vec<String>,
    parent: Vec<Option<usize>>,
    color: Vec<Color>,
    tuples: Vec<(usize, usize, usize)>,
    used: BTreeSet<String>,
    fresh: usize,
    // tuples dropped by the final pruning, known on the second pass
    pruned: Option<BTreeSet<(usize, usize, usize)>>,
}

impl Builder<'_> {
    fn fresh_node(&mut self, color: Color, children: &[usize]) -> usize {
        let name = loop {
            self.fresh += 1;
            let candidate = format!("n{}", self.fresh);
            if !self.used.contains(&candidate) {
                break candidate;
            }
        };
        self.used.insert(name.clone());
        let id = self.names.len();
        self.names.push(name);
        self.parent.push(None);
        self.color.push(color);
        for &c in children {
            self.parent[c] = Some(id);
        }
        id
    }

    fn roots_colored(&self, forest: &[usize], c: Color) -> Vec<usize> {
        forest
            .iter()
            .copied()
            .filter(|&v| self.color[v] == c && self.parent[v].is_none())
            .collect()
    }

    fn keeps(&self, tuple: (usize, usize, usize)) -> bool {
        self.pruned.as_ref().is_none_or(|p| !p.contains(&tuple))
    }

    /// Replays `e`, returning the nodes of its forest and the witness.
    fn replay(&mut self, e: &Expr) -> Result<(Vec<usize>, Expr)> {
        let t = self.t;
        let out = match e {
            Expr::Create { label, name } => {
                let id = self.names.len();
                self.names.push(name.clone());
                self.parent.push(None);
                self.color.push(Color::Plain(*label));
                (vec![id], Expr::create(*label, name))
            }
            Expr::Union(a, b) => {
                let (mut fa, wa) = self.replay(a)?;
                let (fb, wb) = self.replay(b)?;
                fa.extend(fb);
                (fa, Expr::union(wa, wb))
            }
            Expr::Add { symbol, i, j, child } | Expr::AddSym { symbol, i, j, child } => {
                let (mut forest, mut w) = self.replay(child)?;
                let z = self
                    .signature
                    .index_of(symbol)
                    .ok_or_else(|| CrateError::UnknownSymbol(symbol.clone()))?;
                let ci = self.roots_colored(&forest, Color::Plain(*i));
                let cj = self.roots_colored(&forest, Color::Plain(*j));
                if !ci.is_empty() && !cj.is_empty() {
                    for &v in ci.iter().chain(&cj) {
                        self.color[v] = match self.color[v] {
                            Color::Plain(c) => Color::Primed(c),
                            other => other,
                        };
                    }
                    w = Expr::relabel(*j, t + j, Expr::relabel(*i, t + i, w));
                    let x = self.fresh_node(Color::Plain(*i), &ci);
                    let y = self.fresh_node(Color::Plain(*j), &cj);
                    forest.extend([x, y]);
                    let xn = self.names[x].clone();
                    let yn = self.names[y].clone();
                    w = Expr::add(ORDER_SYMBOL, *i, t + i, Expr::union(w, Expr::create(*i, &xn)));
                    w = Expr::add(ORDER_SYMBOL, *j, t + j, Expr::union(w, Expr::create(*j, &yn)));
                    let zname = z_symbol(symbol);
                    self.tuples.push((z, x, y));
                    if self.keeps((z, x, y)) {
                        w = Expr::add(&zname, *i, *j, w);
                    }
                    if matches!(e, Expr::AddSym { .. }) {
                        self.tuples.push((z, y, x));
                        if self.keeps((z, y, x)) {
                            w = Expr::add(&zname, *j, *i, w);
                        }
                    }
                }
                (forest, w)
            }
            Expr::Relabel { i, j, child } => {
                let (mut forest, mut w) = self.replay(child)?;
                let ci = self.roots_colored(&forest, Color::Plain(*i));
                if !ci.is_empty() {
                    let cj = self.roots_colored(&forest, Color::Plain(*j));
                    for &v in &forest {
                        if matches!(self.color[v], Color::Plain(c) | Color::Primed(c) if c == *i)
                            || self.color[v] == Color::Plain(*j)
                        {
                            self.color[v] = Color::Primed(*j);
                        }
                    }
                    w = Expr::relabel(*i, t + j, w);
                    w = Expr::relabel(t + i, t + j, w);
                    w = Expr::relabel(*j, t + j, w);
                    let mut tops = ci;
                    tops.extend(cj);
                    let y = self.fresh_node(Color::Plain(*j), &tops);
                    forest.push(y);
                    let yn = self.names[y].clone();
                    w = Expr::add(ORDER_SYMBOL, *j, t + j, Expr::union(w, Expr::create(*j, &yn)));
                }
                (forest, w)
            }
        };
        self.check_forest(&out.0)?;
        Ok(out)
    }

    /// Plain-colored nodes are roots, the subtree strictly below a `c` root
    /// is colored `c'`, and every `c'` node lies below a `c` root.
    fn check_forest(&self, forest: &[usize]) -> Result<()> {
        let broken = |what: &str, v: usize| {
            Err(CrateError::Expression(format!(
                "colored forest invariant broken at `{}`: {what}",
                self.names[v]
            )))
        };
        for &v in forest {
            let mut top = v;
            while let Some(p) = self.parent[top] {
                top = p;
            }
            match self.color[v] {
                Color::Plain(_) if self.parent[v].is_some() => return broken("plain node has a parent", v),
                Color::Primed(c) if v == top || self.color[top] != Color::Plain(c) => {
                    return broken("primed node outside a matching tree", v)
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// The twin-model of the structure of `e`, plus a clique-width expression
/// with `2t` labels over the order and `Z` symbols that builds the model.
pub fn twin_model_from_cliqueexpr(e: &CliqueExpression) -> Result<(TwinModel, CliqueExpression)> {
    // evaluation checks labels, duplicates and symbols
    e.eval()?;
    let first = build(e, None)?;
    let (model, _) = &first;
    let t = model.tree();
    let mut pruned = BTreeSet::new();
    let all: Vec<(usize, usize, usize)> = first.1.clone();
    for &(z, x, y) in &all {
        if all.iter().any(|&(z2, x2, y2)| {
            z2 == z && (x2, y2) != (x, y) && t.precedes_eq(x2, x) && t.precedes_eq(y2, y)
        }) {
            pruned.insert((z, x, y));
        }
    }
    let (model, _, witness) = build_full(e, Some(pruned))?;
    Ok((model, witness))
}

fn build(
    e: &CliqueExpression,
    pruned: Option<BTreeSet<(usize, usize, usize)>>,
) -> Result<(TwinModel, Vec<(usize, usize, usize)>)> {
    let (m, all, _) = build_full(e, pruned)?;
    Ok((m, all))
}

fn build_full(
    e: &CliqueExpression,
    pruned: Option<BTreeSet<(usize, usize, usize)>>,
) -> Result<(TwinModel, Vec<(usize, usize, usize)>, CliqueExpression)> {
    let t = e.labels;
    let used: BTreeSet<String> = e.root.element_names().into_iter().collect();
    let mut b = Builder {
        t,
        signature: &e.signature,
        names: Vec::new(),
        parent: Vec::new(),
        color: Vec::new(),
        tuples: Vec::new(),
        used,
        fresh: 0,
        pruned,
    };
    let (forest, mut w) = b.replay(&e.root)?;
    // finalization: everything becomes 1', then one root above all
    let tops: Vec<usize> = forest.iter().copied().filter(|&v| b.parent[v].is_none()).collect();
    for &v in &forest {
        b.color[v] = Color::Primed(1);
    }
    for l in 1..=2 * t {
        if l != t + 1 {
            w = Expr::relabel(l, t + 1, w);
        }
    }
    let root = b.fresh_node(Color::Plain(1), &tops);
    let rn = b.names[root].clone();
    w = Expr::add(ORDER_SYMBOL, 1, t + 1, Expr::union(w, Expr::create(1, &rn)));

    let tree = TreeOrder::from_indices(b.names.clone(), b.parent.clone())
        .map_err(|v| CrateError::Expression(format!("builder produced no tree: {v}")))?;
    let all = b.tuples.clone();
    let kept: Vec<_> = all.iter().copied().filter(|&tu| b.keeps(tu)).collect();
    let model = TwinModel::new("expr", e.signature.clone(), tree, kept);
    let mut witness = CliqueExpression::new(model.full_signature(), w);
    witness.labels = 2 * t;
    Ok((model, all, witness))
}

/// Reads a twin-model over `{E,F}` as a merge-model over `{E}`:
/// `Z_E` pairs become `S_{E,1}` and `Z_F` pairs become `S_{E,0}`.
pub fn twin_to_merge(t: &TwinModel) -> Result<MergeModel> {
    let sig = t.signature();
    let (Some(e), Some(f)) = (sig.index_of(EDGE), sig.index_of(NON_EDGE)) else {
        return Err(CrateError::InvalidStructure(format!(
            "twin-model signature {sig} lacks {EDGE} or {NON_EDGE}"
        )));
    };
    if sig.len() != 2 {
        return Err(CrateError::InvalidStructure(format!(
            "twin-model signature {sig} is not {{{EDGE},{NON_EDGE}}}"
        )));
    }
    t.validate()?;
    let tuples = t.tuples().iter().map(|&(z, x, y)| STuple {
        symbol: 0,
        alpha: u8::from(z == e),
        x,
        y,
    });
    debug_assert!(t.tuples().iter().all(|&(z, _, _)| z == e || z == f));
    let m = MergeModel::new(
        t.name(),
        Signature::new([EDGE]).expect("single symbol"),
        t.tree().clone(),
        tuples,
    );
    m.validate()?;
    Ok(m)
}

/// Leaf names of a model keyed by name, for comparisons.
pub fn leaf_names(t: &TreeOrder) -> BTreeMap<String, usize> {
    t.leaves().into_iter().map(|l| (t.name(l).to_string(), l)).collect()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::cwe::tests::cwe_p3;
    use crate::structure::{biclique_number, complement_expand, matches_by_name, reduct, Graph};

    pub(crate) fn twin_p3() -> TwinModel {
        TwinModel::from_named(
            "p3",
            &["E"],
            &[
                ("r", None),
                ("x1", Some("r")),
                ("y2", Some("r")),
                ("y1", Some("y2")),
                ("x2", Some("r")),
                ("a", Some("x1")),
                ("b", Some("y1")),
                ("c", Some("x2")),
            ],
            &[
                ("E", "x1", "y1"),
                ("E", "y1", "x1"),
                ("E", "x2", "y2"),
                ("E", "y2", "x2"),
            ],
        )
        .unwrap()
    }

    fn shape(t: &TwinModel) -> BTreeSet<String> {
        let keys: Vec<String> = (0..t.tree().len())
            .map(|i| {
                let mut names: Vec<&str> = t
                    .tree()
                    .leaf_descendants(i)
                    .into_iter()
                    .map(|l| t.tree().name(l))
                    .collect();
                names.sort_unstable();
                let rank = t
                    .tree()
                    .ancestors(i)
                    .into_iter()
                    .skip(1)
                    .filter(|&a| t.tree().leaf_descendants(a) == t.tree().leaf_descendants(i))
                    .count();
                format!("{}#{}", names.join(","), rank)
            })
            .collect();
        let mut out = BTreeSet::new();
        for i in 0..t.tree().len() {
            let p = t.tree().parent(i).map(|p| keys[p].clone()).unwrap_or_default();
            out.insert(format!("{} < {}", p, keys[i]));
        }
        for &(z, x, y) in t.tuples() {
            out.insert(format!("{z} {} {}", keys[x], keys[y]));
        }
        out
    }

    #[test]
    fn twin_p3_is_valid_and_interprets_to_p3() {
        let t = twin_p3();
        t.validate().unwrap();
        let p3 = Graph::from_edges("p3", &["a", "b", "c"], &[("a", "b"), ("b", "c")]).unwrap();
        assert!(matches_by_name(&t.interpret().unwrap(), p3.structure()));
    }

    #[test]
    fn nested_pair_is_not_minimal() {
        let base = twin_p3();
        let mut tuples: Vec<_> = base.tuples().iter().copied().collect();
        let tr = base.tree();
        tuples.push((0, tr.index_of("a").unwrap(), tr.index_of("b").unwrap()));
        let t = TwinModel::new("p3", base.signature().clone(), tr.clone(), tuples);
        assert!(matches!(t.validate(), Err(TwinViolation::NotMinimal { .. })));
    }

    #[test]
    fn comparable_pair_rejected() {
        let t = TwinModel::from_named(
            "t",
            &["E"],
            &[("r", None), ("a", Some("r")), ("b", Some("r"))],
            &[("E", "r", "a")],
        )
        .unwrap();
        assert!(matches!(t.validate(), Err(TwinViolation::Comparable { .. })));
    }

    #[test]
    fn interpretation_examples() {
        let t = TwinModel::from_named(
            "t",
            &["E"],
            &[("r", None), ("a", Some("r")), ("b", Some("r"))],
            &[],
        )
        .unwrap();
        assert_eq!(t.interpret().unwrap().pair_count(0), 0);
        let t = TwinModel::from_named(
            "t",
            &["E"],
            &[
                ("r", None),
                ("x", Some("r")),
                ("y", Some("r")),
                ("a", Some("x")),
                ("b", Some("x")),
                ("c", Some("y")),
            ],
            &[("E", "x", "y")],
        )
        .unwrap();
        let s = t.interpret().unwrap();
        let pairs: Vec<_> = s.pairs(0).collect();
        assert_eq!(pairs, vec![(0, 2), (1, 2)]);
    }

    #[test]
    fn cwe_p3_builds_twin_p3() {
        let (t, w) = twin_model_from_cliqueexpr(&cwe_p3()).unwrap();
        t.validate().unwrap();
        assert_eq!(shape(&t), shape(&twin_p3()));
        assert_eq!(w.labels, 6);
        assert!(w.is_linear());
        let ev = w.eval().unwrap().structure;
        assert!(matches_by_name(&ev, &t.full_structure()));
    }

    #[test]
    fn single_create_gives_root_over_leaf() {
        let e = CliqueExpression::with_inferred_signature(Expr::create(1, "a"));
        let (t, w) = twin_model_from_cliqueexpr(&e).unwrap();
        assert_eq!(t.tree().len(), 2);
        assert!(t.tuples().is_empty());
        assert!(matches_by_name(&w.eval().unwrap().structure, &t.full_structure()));
    }

    #[test]
    fn add_on_empty_class_is_skipped() {
        let base = cwe_p3();
        let with = CliqueExpression {
            root: Expr::add_sym("E", 1, 4, base.root.clone()),
            labels: 4,
            ..base.clone()
        };
        let (a, _) = twin_model_from_cliqueexpr(&base).unwrap();
        let (b, _) = twin_model_from_cliqueexpr(&with).unwrap();
        assert_eq!(shape(&a), shape(&b));
    }

    #[test]
    fn twin_to_merge_examples() {
        let k2 = Graph::from_edges("k2", &["a", "b"], &[("a", "b")]).unwrap();
        let e = crate::cwe::complement_expansion_expr(&k2);
        let (t, _) = twin_model_from_cliqueexpr(&e).unwrap();
        let m = twin_to_merge(&t).unwrap();
        assert!(m.is_loopless());
        assert!(matches_by_name(&m.interpret().unwrap(), k2.structure()));

        let e2 = Graph::from_edges("e2", &["a", "b"], &[]).unwrap();
        let (t, _) = twin_model_from_cliqueexpr(&crate::cwe::complement_expansion_expr(&e2)).unwrap();
        let m = twin_to_merge(&t).unwrap();
        assert!(m.tuples().iter().all(|tu| tu.alpha == 0));
        assert_eq!(m.interpret().unwrap().pair_count(0), 0);

        let clash = TwinModel::from_named(
            "c",
            &["E", "F"],
            &[("r", None), ("a", Some("r")), ("b", Some("r"))],
            &[("E", "a", "b"), ("F", "a", "b"), ("E", "b", "a")],
        )
        .unwrap();
        assert!(matches!(
            twin_to_merge(&clash),
            Err(CrateError::InvalidModel(crate::model::ModelViolation::BothSigns { .. }))
        ));
    }

    #[test]
    fn z_part_biclique_bound() {
        let g = Graph::from_edges(
            "c4",
            &["a", "b", "c", "d"],
            &[("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")],
        )
        .unwrap();
        let e = crate::cwe::complement_expansion_expr(&g);
        let (t, _) = twin_model_from_cliqueexpr(&e).unwrap();
        let s = t.interpret().unwrap();
        assert!(matches_by_name(&s, &complement_expand(&g)));
        assert!(biclique_number(&t.z_graph(), 64).unwrap() <= 2 * e.labels);
        let m = twin_to_merge(&t).unwrap();
        assert!(matches_by_name(
            &m.interpret().unwrap(),
            &reduct(&s, &["E"]).unwrap()
        ));
    }
}
