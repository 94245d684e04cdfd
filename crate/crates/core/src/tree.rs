//! Rooted tree-orders stored by parent pointers.
//!
//! `x ⪯ y` means `x` is an ancestor of `y` (or equal): the root is the
//! minimum and leaves are the maximal elements.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::error::{Error as CrateError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeViolation {
    #[error("no nodes")]
    Empty,
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("node `{node}` has unknown parent `{parent}`")]
    UnknownParent { node: String, parent: String },
    #[error("no root: every node has a parent")]
    NoRoot,
    #[error("two roots `{0}` and `{1}`")]
    MultipleRoots(String, String),
    #[error("parent chain of `{0}` is cyclic")]
    Cycle(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Comparison {
    /// The first node is a strict ancestor of the second.
    Less,
    Greater,
    Equal,
    Incomparable,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeOrder {
    names: Vec<String>,
    index: BTreeMap<String, usize>,
    parent: Vec<Option<usize>>,
    depth: Vec<usize>,
    children: Vec<Vec<usize>>,
    root: usize,
}

/// Checks raw parent data, reporting the first violated invariant.
pub fn validate_tree_order(
    nodes: &[String],
    parent: &BTreeMap<String, String>,
) -> std::result::Result<(), TreeViolation> {
    let parents = nodes.iter().map(|n| parent.get(n).cloned()).collect();
    TreeOrder::new(nodes.to_vec(), parents).map(|_| ())
}

impl TreeOrder {
    /// Builds a tree from node names and optional parent names.
    pub fn new(
        names: Vec<String>,
        parents: Vec<Option<String>>,
    ) -> std::result::Result<Self, TreeViolation> {
        let mut index = BTreeMap::new();
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.clone(), i).is_some() {
                return Err(TreeViolation::DuplicateNode(n.clone()));
            }
        }
        let mut parent = Vec::with_capacity(names.len());
        for (n, p) in names.iter().zip(&parents) {
            parent.push(match p {
                None => None,
                Some(p) => Some(*index.get(p).ok_or_else(|| TreeViolation::UnknownParent {
                    node: n.clone(),
                    parent: p.clone(),
                })?),
            });
        }
        TreeOrder::from_indices(names, parent)
    }

    /// Builds a tree from node names and parent indices.
    pub fn from_indices(
        names: Vec<String>,
        parent: Vec<Option<usize>>,
    ) -> std::result::Result<Self, TreeViolation> {
        let n = names.len();
        if n == 0 {
            return Err(TreeViolation::Empty);
        }
        let mut index = BTreeMap::new();
        for (i, name) in names.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(TreeViolation::DuplicateNode(name.clone()));
            }
        }
        let mut root: Option<usize> = None;
        for (i, p) in parent.iter().enumerate() {
            if p.is_none() {
                if let Some(r) = root {
                    return Err(TreeViolation::MultipleRoots(
                        names[r].clone(),
                        names[i].clone(),
                    ));
                }
                root = Some(i);
            }
        }
        let root = root.ok_or(TreeViolation::NoRoot)?;
        let mut depth = vec![usize::MAX; n];
        depth[root] = 0;
        for start in 0..n {
            let mut chain = Vec::new();
            let mut cur = start;
            while depth[cur] == usize::MAX {
                if chain.len() > n {
                    return Err(TreeViolation::Cycle(names[start].clone()));
                }
                chain.push(cur);
                cur = parent[cur].expect("only the root lacks a parent");
            }
            let mut d = depth[cur];
            for &c in chain.iter().rev() {
                d += 1;
                depth[c] = d;
            }
        }
        let mut children = vec![Vec::new(); n];
        for (i, p) in parent.iter().enumerate() {
            if let Some(p) = p {
                children[*p].push(i);
            }
        }
        Ok(TreeOrder {
            names,
            index,
            parent,
            depth,
            children,
            root,
        })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn require(&self, name: &str) -> Result<usize> {
        self.index_of(name)
            .ok_or_else(|| CrateError::UnknownElement(name.to_string()))
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, i: usize) -> Option<usize> {
        self.parent[i]
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parent
    }

    pub fn depth(&self, i: usize) -> usize {
        self.depth[i]
    }

    pub fn children(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    pub fn is_leaf(&self, i: usize) -> bool {
        self.children[i].is_empty()
    }

    /// Leaves in node order.
    pub fn leaves(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.is_leaf(i)).collect()
    }

    /// `i` followed by its strict ancestors, ending at the root.
    pub fn ancestors(&self, i: usize) -> Vec<usize> {
        let mut out = vec![i];
        let mut cur = i;
        while let Some(p) = self.parent[cur] {
            out.push(p);
            cur = p;
        }
        out
    }

    /// `x ⪯ y`: `x` is an ancestor of `y` or equal to it.
    pub fn precedes_eq(&self, x: usize, y: usize) -> bool {
        if self.depth[x] > self.depth[y] {
            return false;
        }
        let mut cur = y;
        for _ in 0..self.depth[y] - self.depth[x] {
            cur = self.parent[cur].expect("depth positive");
        }
        cur == x
    }

    /// `x ≺ y`.
    pub fn precedes(&self, x: usize, y: usize) -> bool {
        x != y && self.precedes_eq(x, y)
    }

    pub fn comparable(&self, x: usize, y: usize) -> bool {
        self.precedes_eq(x, y) || self.precedes_eq(y, x)
    }

    pub fn compare(&self, x: usize, y: usize) -> Comparison {
        if x == y {
            Comparison::Equal
        } else if self.precedes_eq(x, y) {
            Comparison::Less
        } else if self.precedes_eq(y, x) {
            Comparison::Greater
        } else {
            Comparison::Incomparable
        }
    }

    pub fn compare_named(&self, x: &str, y: &str) -> Result<Comparison> {
        Ok(self.compare(self.require(x)?, self.require(y)?))
    }

    /// Pairwise incomparable; with `maximal`, also every node is
    /// comparable to some member.
    pub fn is_antichain(&self, set: &[usize], maximal: bool) -> bool {
        for (k, &a) in set.iter().enumerate() {
            for &b in &set[k + 1..] {
                if a == b || self.comparable(a, b) {
                    return false;
                }
            }
        }
        if !maximal {
            return true;
        }
        (0..self.len()).all(|v| set.iter().any(|&a| self.comparable(a, v)))
    }

    pub fn is_antichain_named(&self, set: &[&str], maximal: bool) -> Result<bool> {
        let idx = set
            .iter()
            .map(|n| self.require(n))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.is_antichain(&idx, maximal))
    }

    /// Nodes in the subtree of `i` (preorder).
    pub fn descendants(&self, i: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![i];
        while let Some(v) = stack.pop() {
            out.push(v);
            stack.extend(self.children[v].iter().rev());
        }
        out
    }

    /// Leaves of the subtree of `i`, sorted by index.
    pub fn leaf_descendants(&self, i: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .descendants(i)
            .into_iter()
            .filter(|&v| self.is_leaf(v))
            .collect();
        out.sort_unstable();
        out
    }

    /// Nearest strict ancestor of `i` satisfying `keep`.
    pub fn nearest_ancestor(&self, i: usize, keep: impl Fn(usize) -> bool) -> Option<usize> {
        let mut cur = self.parent[i];
        while let Some(p) = cur {
            if keep(p) {
                return Some(p);
            }
            cur = self.parent[p];
        }
        None
    }

    /// Restriction to the nodes in `keep` (which must contain the root),
    /// with parents re-derived as nearest kept ancestors. Returns the new
    /// tree and the old index of each new node.
    pub fn restrict(&self, keep: &BTreeSet<usize>) -> (TreeOrder, Vec<usize>) {
        assert!(keep.contains(&self.root), "restriction must keep the root");
        let old: Vec<usize> = (0..self.len()).filter(|i| keep.contains(i)).collect();
        let mut new_of = vec![usize::MAX; self.len()];
        for (k, &i) in old.iter().enumerate() {
            new_of[i] = k;
        }
        let names = old.iter().map(|&i| self.names[i].clone()).collect();
        let parent = old
            .iter()
            .map(|&i| self.nearest_ancestor(i, |p| keep.contains(&p)).map(|p| new_of[p]))
            .collect();
        let tree = TreeOrder::from_indices(names, parent).expect("restriction of a tree");
        (tree, old)
    }
}
