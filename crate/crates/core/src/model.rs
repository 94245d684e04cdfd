//! Merge-models: a tree-order carrying transversal tuples `S_{Z,α}`.
//!
//! An `S_{Z,1}` tuple between two nodes says `Z` holds by default between
//! the leaves below them, an `S_{Z,0}` tuple says it does not; the deepest
//! tuple above a pair of leaves decides.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::error::{Error as CrateError, Result};
use crate::structure::{BinaryStructure, Signature};
use crate::tree::TreeOrder;

/// Name of the tree-order symbol in derived signatures.
pub const ORDER_SYMBOL: &str = "<";

/// Name of the derived symbol `S_{Z,α}`.
pub fn s_symbol(z: &str, alpha: u8) -> String {
    format!("S__{z}__{alpha}")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelViolation {
    #[error("invalid tree: {0}")]
    Tree(#[from] crate::tree::TreeViolation),
    #[error("S_{{{symbol},{alpha}}}({x},{y}) joins distinct comparable nodes")]
    Comparable {
        symbol: String,
        alpha: u8,
        x: String,
        y: String,
    },
    #[error("crossing tuples S({x},{y2}) and S({x2},{y}) with {x} < {x2} and {y} < {y2}")]
    Cross {
        x: String,
        y: String,
        x2: String,
        y2: String,
    },
    #[error("both S_{{{symbol},0}} and S_{{{symbol},1}} hold on ({x},{y})")]
    BothSigns { symbol: String, x: String, y: String },
    #[error("no S_{symbol} tuple above the leaf pair ({u},{v})")]
    Undecided { symbol: String, u: String, v: String },
}

/// A tuple `S_{Z,α}(x,y)`, with `Z` an index into the base signature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct STuple {
    pub symbol: usize,
    pub alpha: u8,
    pub x: usize,
    pub y: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeModel {
    name: String,
    signature: Signature,
    tree: TreeOrder,
    tuples: BTreeSet<STuple>,
    // (x,y) -> (symbol, alpha) of every tuple on that pair
    carriers: BTreeMap<(usize, usize), Vec<(usize, u8)>>,
}

impl MergeModel {
    pub fn new(
        name: &str,
        signature: Signature,
        tree: TreeOrder,
        tuples: impl IntoIterator<Item = STuple>,
    ) -> Self {
        let tuples: BTreeSet<STuple> = tuples.into_iter().collect();
        let mut carriers: BTreeMap<(usize, usize), Vec<(usize, u8)>> = BTreeMap::new();
        for t in &tuples {
            assert!(t.symbol < signature.len() && t.alpha <= 1);
            assert!(t.x < tree.len() && t.y < tree.len());
            carriers.entry((t.x, t.y)).or_default().push((t.symbol, t.alpha));
        }
        MergeModel {
            name: name.to_string(),
            signature,
            tree,
            tuples,
            carriers,
        }
    }

    /// Builds a model from named nodes and tuples `(Z, α, x, y)`.
    pub fn from_named(
        name: &str,
        symbols: &[&str],
        nodes: &[(&str, Option<&str>)],
        tuples: &[(&str, u8, &str, &str)],
    ) -> Result<Self> {
        let signature = Signature::new(symbols.iter().copied())?;
        let tree = TreeOrder::new(
            nodes.iter().map(|(n, _)| n.to_string()).collect(),
            nodes.iter().map(|(_, p)| p.map(str::to_string)).collect(),
        )?;
        let mut out = Vec::new();
        for &(z, alpha, x, y) in tuples {
            let symbol = signature
                .index_of(z)
                .ok_or_else(|| CrateError::UnknownSymbol(z.to_string()))?;
            if alpha > 1 {
                return Err(CrateError::OutOfRange(format!("sign {alpha}")));
            }
            out.push(STuple {
                symbol,
                alpha,
                x: tree.require(x)?,
                y: tree.require(y)?,
            });
        }
        Ok(MergeModel::new(name, signature, tree, out))
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

    pub fn tuples(&self) -> &BTreeSet<STuple> {
        &self.tuples
    }

    pub fn len(&self) -> usize {
        self.tree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tree.is_empty()
    }

    /// `S(x,y)` for some symbol and sign.
    pub fn s(&self, x: usize, y: usize) -> bool {
        self.carriers.contains_key(&(x, y))
    }

    /// `S_Z(x,y)`: the sign of the tuple for `z`, if any.
    pub fn s_sign(&self, z: usize, x: usize, y: usize) -> Option<u8> {
        self.carriers
            .get(&(x, y))
            .and_then(|v| v.iter().find(|(s, _)| *s == z).map(|&(_, a)| a))
    }

    pub fn has(&self, z: usize, alpha: u8, x: usize, y: usize) -> bool {
        self.carriers
            .get(&(x, y))
            .is_some_and(|v| v.contains(&(z, alpha)))
    }

    /// Distinct node pairs carrying at least one tuple.
    pub fn s_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.carriers.keys().copied()
    }

    /// Checks the five defining conditions, reporting the first failure.
    /// The tree condition holds by construction of [`TreeOrder`].
    pub fn validate(&self) -> std::result::Result<(), ModelViolation> {
        let t = &self.tree;
        let name = |i: usize| t.name(i).to_string();
        for tu in &self.tuples {
            if tu.x != tu.y && t.comparable(tu.x, tu.y) {
                return Err(ModelViolation::Comparable {
                    symbol: self.signature.symbols()[tu.symbol].clone(),
                    alpha: tu.alpha,
                    x: name(tu.x),
                    y: name(tu.y),
                });
            }
        }
        let pairs: Vec<(usize, usize)> = self.s_pairs().collect();
        for &(x, y2) in &pairs {
            for &(x2, y) in &pairs {
                if t.precedes(x, x2) && t.precedes(y, y2) {
                    return Err(ModelViolation::Cross {
                        x: name(x),
                        y: name(y),
                        x2: name(x2),
                        y2: name(y2),
                    });
                }
            }
        }
        for (&(x, y), v) in &self.carriers {
            for &(z, a) in v {
                if a == 0 && v.contains(&(z, 1)) {
                    return Err(ModelViolation::BothSigns {
                        symbol: self.signature.symbols()[z].clone(),
                        x: name(x),
                        y: name(y),
                    });
                }
            }
        }
        let leaves = t.leaves();
        let chains: BTreeMap<usize, Vec<usize>> =
            leaves.iter().map(|&l| (l, t.ancestors(l))).collect();
        for z in 0..self.signature.len() {
            for &u in &leaves {
                for &v in &leaves {
                    if u == v {
                        continue;
                    }
                    let decided = chains[&u]
                        .iter()
                        .any(|&x| chains[&v].iter().any(|&y| self.s_sign(z, x, y).is_some()));
                    if !decided {
                        return Err(ModelViolation::Undecided {
                            symbol: self.signature.symbols()[z].clone(),
                            u: name(u),
                            v: name(v),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// The componentwise-maximal S-carrying pair below `(u,v)`, if unique.
    pub fn hat(&self, u: usize, v: usize) -> Option<(usize, usize)> {
        let t = &self.tree;
        // ancestors listed deepest first
        let au = t.ancestors(u);
        let av = t.ancestors(v);
        let mut found: Vec<(usize, usize)> = Vec::new();
        for &x in &au {
            for &y in &av {
                if self.s(x, y) {
                    found.push((x, y));
                }
            }
        }
        let &(bx, by) = found
            .iter()
            .max_by_key(|&&(x, y)| (t.depth(x) + t.depth(y), std::cmp::Reverse((x, y))))?;
        found
            .iter()
            .all(|&(x, y)| t.precedes_eq(x, bx) && t.precedes_eq(y, by))
            .then_some((bx, by))
    }

    /// Named form of [`MergeModel::hat`] for distinct leaves of a valid model.
    pub fn hat_named(&self, u: &str, v: &str) -> Result<(String, String)> {
        let (a, b) = (self.tree.require(u)?, self.tree.require(v)?);
        if a == b || !self.tree.is_leaf(a) || !self.tree.is_leaf(b) {
            return Err(CrateError::OutOfRange(format!(
                "hat needs two distinct leaves, got ({u},{v})"
            )));
        }
        self.validate()?;
        let (x, y) = self.hat(a, b).expect("valid models have hats");
        Ok((self.tree.name(x).to_string(), self.tree.name(y).to_string()))
    }

    /// The structure on the leaves decided by hats.
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
        for &u in &leaves {
            for &v in &leaves {
                if u == v {
                    continue;
                }
                let Some((x, y)) = self.hat(u, v) else {
                    continue;
                };
                let (a, b) = (
                    s.element_index(t.name(u)).expect("leaf"),
                    s.element_index(t.name(v)).expect("leaf"),
                );
                for z in 0..self.signature.len() {
                    if self.has(z, 1, x, y) {
                        s.insert(z, a, b);
                    }
                }
            }
        }
        s
    }

    /// Root, leaves, and every node occurring in a tuple in either position.
    pub fn skeleton(&self) -> BTreeSet<usize> {
        let t = &self.tree;
        let mut out: BTreeSet<usize> = t.leaves().into_iter().collect();
        out.insert(t.root());
        for &(x, y) in self.carriers.keys() {
            out.insert(x);
            out.insert(y);
        }
        out
    }

    /// Restriction to a node set containing the root; returns the old index
    /// of every kept node.
    pub fn restrict(&self, keep: &BTreeSet<usize>) -> (MergeModel, Vec<usize>) {
        let (tree, old) = self.tree.restrict(keep);
        let mut new_of = vec![usize::MAX; self.len()];
        for (k, &i) in old.iter().enumerate() {
            new_of[i] = k;
        }
        let tuples = self
            .tuples
            .iter()
            .filter(|tu| keep.contains(&tu.x) && keep.contains(&tu.y))
            .map(|tu| STuple {
                x: new_of[tu.x],
                y: new_of[tu.y],
                ..*tu
            });
        (
            MergeModel::new(&self.name, self.signature.clone(), tree, tuples),
            old,
        )
    }

    /// Restriction to the skeleton.
    pub fn compactify(&self) -> Result<MergeModel> {
        self.validate()?;
        Ok(self.restrict(&self.skeleton()).0)
    }

    pub fn is_compact(&self) -> bool {
        self.skeleton().len() == self.len()
    }

    /// Acyclicity of the digraph with an arc `u -> u'` whenever some strict
    /// descendant `v` of `u` has a tuple `S(v,u')`.
    pub fn is_sequenceable(&self) -> Result<bool> {
        self.validate()?;
        let n = self.len();
        let t = &self.tree;
        let mut arcs = vec![BTreeSet::new(); n];
        for &(v, u2) in self.carriers.keys() {
            for u in t.ancestors(v).into_iter().skip(1) {
                arcs[u].insert(u2);
            }
        }
        Ok(is_acyclic(&arcs))
    }

    /// No tuple of the form `(x,x)`.
    pub fn is_loopless(&self) -> bool {
        self.tuples.iter().all(|t| t.x != t.y)
    }

    /// Signature of [`MergeModel::full_structure`]: the order symbol then
    /// `S__Z__0`, `S__Z__1` for every base symbol.
    pub fn full_signature(&self) -> Signature {
        let mut names = vec![ORDER_SYMBOL.to_string()];
        for z in self.signature.symbols() {
            names.push(s_symbol(z, 0));
            names.push(s_symbol(z, 1));
        }
        Signature::new(names).expect("derived names are distinct")
    }

    /// The model as a plain structure: strict tree order plus all tuples.
    pub fn full_structure(&self) -> BinaryStructure {
        let t = &self.tree;
        let mut s = BinaryStructure::new(
            &self.name,
            self.full_signature(),
            t.names().iter().cloned(),
        )
        .expect("node names are distinct");
        let at: Vec<usize> = (0..t.len()).map(|i| s_index(&s, t.name(i))).collect();
        let idx = |i: usize| at[i];
        for y in 0..t.len() {
            for x in t.ancestors(y).into_iter().skip(1) {
                let (a, b) = (idx(x), idx(y));
                s.insert(0, a, b);
            }
        }
        for tu in &self.tuples {
            let (a, b) = (idx(tu.x), idx(tu.y));
            s.insert(1 + 2 * tu.symbol + tu.alpha as usize, a, b);
        }
        s
    }

    /// Leaf-keyed description invariant under renaming internal nodes:
    /// every node is named by its leaf set and its position among nodes
    /// with the same leaf set.
    pub fn shape(&self) -> BTreeSet<String> {
        let keys = self.node_keys();
        let t = &self.tree;
        let mut out = BTreeSet::new();
        for i in 0..t.len() {
            let p = t.parent(i).map(|p| keys[p].clone()).unwrap_or_default();
            out.insert(format!("node {} parent {}", keys[i], p));
        }
        for tu in &self.tuples {
            out.insert(format!(
                "s {} {} {} {}",
                self.signature.symbols()[tu.symbol],
                tu.alpha,
                keys[tu.x],
                keys[tu.y]
            ));
        }
        out
    }

    pub(crate) fn node_keys(&self) -> Vec<String> {
        let t = &self.tree;
        let leafsets: Vec<String> = (0..t.len())
            .map(|i| {
                let mut names: Vec<&str> =
                    t.leaf_descendants(i).into_iter().map(|l| t.name(l)).collect();
                names.sort_unstable();
                names.join(",")
            })
            .collect();
        (0..t.len())
            .map(|i| {
                let rank = t
                    .ancestors(i)
                    .into_iter()
                    .skip(1)
                    .filter(|&a| leafsets[a] == leafsets[i])
                    .count();
                format!("{{{}}}#{}", leafsets[i], rank)
            })
            .collect()
    }
}

fn s_index(s: &BinaryStructure, name: &str) -> usize {
    s.element_index(name).expect("node present")
}

pub(crate) fn is_acyclic(arcs: &[BTreeSet<usize>]) -> bool {
    let n = arcs.len();
    // 0 unvisited, 1 on stack, 2 done
    let mut state = vec![0u8; n];
    for start in 0..n {
        if state[start] != 0 {
            continue;
        }
        let mut stack: Vec<(usize, Vec<usize>)> =
            vec![(start, arcs[start].iter().copied().collect())];
        state[start] = 1;
        while let Some((node, rest)) = stack.last_mut() {
            if let Some(next) = rest.pop() {
                match state[next] {
                    1 => return false,
                    0 => {
                        state[next] = 1;
                        let succ = arcs[next].iter().copied().collect();
                        stack.push((next, succ));
                    }
                    _ => {}
                }
            } else {
                state[*node] = 2;
                stack.pop();
            }
        }
    }
    true
}
