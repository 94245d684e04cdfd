//! Finite binary relational structures.
//!
//! Elements are stored in lexicographic order of their identifiers, so
//! element indices, pair iteration and serialization all agree on one
//! canonical order.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};

/// Name of the edge symbol of a graph.
pub const EDGE: &str = "E";
/// Name of the non-edge symbol added by [`complement_expand`].
pub const NON_EDGE: &str = "F";

/// An ordered list of binary relation symbols.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Signature {
    symbols: Vec<String>,
}

impl Signature {
    pub fn new<I, S>(symbols: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for s in symbols {
            let s = s.into();
            if !seen.insert(s.clone()) {
                return Err(Error::Duplicate(s));
            }
            out.push(s);
        }
        Ok(Signature { symbols: out })
    }

    pub fn empty() -> Self {
        Signature::default()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index_of(name).is_some()
    }

    /// Same symbols, ignoring declaration order.
    pub fn same_symbols(&self, other: &Signature) -> bool {
        let a: BTreeSet<&String> = self.symbols.iter().collect();
        let b: BTreeSet<&String> = other.symbols.iter().collect();
        a == b
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.symbols.join(","))
    }
}

/// A finite structure with a non-empty universe and binary relations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryStructure {
    name: String,
    signature: Signature,
    universe: Vec<String>,
    index: BTreeMap<String, usize>,
    // one n*n adjacency matrix per symbol, row-major
    relations: Vec<Vec<bool>>,
}

impl BinaryStructure {
    /// Creates a structure with empty relations. The universe is sorted.
    pub fn new<S: Into<String>>(
        name: S,
        signature: Signature,
        universe: impl IntoIterator<Item = String>,
    ) -> Result<Self> {
        let mut elems: Vec<String> = universe.into_iter().collect();
        if elems.is_empty() {
            return Err(Error::InvalidStructure("empty universe".into()));
        }
        elems.sort();
        for w in elems.windows(2) {
            if w[0] == w[1] {
                return Err(Error::Duplicate(w[0].clone()));
            }
        }
        let n = elems.len();
        let index = elems
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
        let relations = vec![vec![false; n * n]; signature.len()];
        Ok(BinaryStructure {
            name: name.into(),
            signature,
            universe: elems,
            index,
            relations,
        })
    }

    /// Builds a structure from named pairs.
    pub fn from_pairs<'a>(
        name: &str,
        symbols: &[&str],
        universe: &[&str],
        pairs: impl IntoIterator<Item = (&'a str, &'a str, &'a str)>,
    ) -> Result<Self> {
        let sig = Signature::new(symbols.iter().copied())?;
        let mut s = BinaryStructure::new(name, sig, universe.iter().map(|e| e.to_string()))?;
        for (sym, u, v) in pairs {
            s.insert_named(sym, u, v)?;
        }
        Ok(s)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name<S: Into<String>>(&mut self, name: S) {
        self.name = name.into();
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn universe(&self) -> &[String] {
        &self.universe
    }

    pub fn size(&self) -> usize {
        self.universe.len()
    }

    pub fn element(&self, i: usize) -> &str {
        &self.universe[i]
    }

    pub fn element_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn holds(&self, sym: usize, u: usize, v: usize) -> bool {
        self.relations[sym][u * self.size() + v]
    }

    pub fn holds_named(&self, sym: &str, u: &str, v: &str) -> bool {
        match (
            self.signature.index_of(sym),
            self.element_index(u),
            self.element_index(v),
        ) {
            (Some(z), Some(a), Some(b)) => self.holds(z, a, b),
            _ => false,
        }
    }

    pub fn insert(&mut self, sym: usize, u: usize, v: usize) {
        let n = self.size();
        self.relations[sym][u * n + v] = true;
    }

    pub fn remove(&mut self, sym: usize, u: usize, v: usize) {
        let n = self.size();
        self.relations[sym][u * n + v] = false;
    }

    pub fn insert_named(&mut self, sym: &str, u: &str, v: &str) -> Result<()> {
        let z = self
            .signature
            .index_of(sym)
            .ok_or_else(|| Error::UnknownSymbol(sym.to_string()))?;
        let a = self
            .element_index(u)
            .ok_or_else(|| Error::UnknownElement(u.to_string()))?;
        let b = self
            .element_index(v)
            .ok_or_else(|| Error::UnknownElement(v.to_string()))?;
        self.insert(z, a, b);
        Ok(())
    }

    /// Pairs of one relation, in lexicographic order.
    pub fn pairs(&self, sym: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.size();
        self.relations[sym]
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(k, _)| (k / n, k % n))
    }

    pub fn pair_count(&self, sym: usize) -> usize {
        self.relations[sym].iter().filter(|&&b| b).count()
    }

    /// Copy without any loop tuples `(u,u)`.
    pub fn without_loops(&self) -> BinaryStructure {
        let mut out = self.clone();
        for z in 0..self.signature.len() {
            for u in 0..self.size() {
                out.remove(z, u, u);
            }
        }
        out
    }

    /// Same signature (as a set), universe and relations; names ignored.
    pub fn same_as(&self, other: &BinaryStructure) -> bool {
        if self.universe != other.universe || !self.signature.same_symbols(&other.signature) {
            return false;
        }
        self.signature.symbols().iter().enumerate().all(|(z, name)| {
            let w = other.signature.index_of(name).expect("same symbols");
            self.relations[z] == other.relations[w]
        })
    }
}

/// A structure over `{E}` with `E` symmetric and irreflexive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph(BinaryStructure);

impl Graph {
    pub fn try_new(s: BinaryStructure) -> Result<Self> {
        if s.signature().symbols() != [EDGE.to_string()] {
            return Err(Error::NotAGraph(format!(
                "signature is {}, expected {{{EDGE}}}",
                s.signature()
            )));
        }
        for (u, v) in s.pairs(0) {
            if u == v {
                return Err(Error::NotAGraph(format!("loop at `{}`", s.element(u))));
            }
            if !s.holds(0, v, u) {
                return Err(Error::NotAGraph(format!(
                    "pair ({},{}) lacks its reverse",
                    s.element(u),
                    s.element(v)
                )));
            }
        }
        Ok(Graph(s))
    }

    /// Graph on the given vertices with the given undirected edges.
    pub fn from_edges(name: &str, vertices: &[&str], edges: &[(&str, &str)]) -> Result<Self> {
        let mut s = BinaryStructure::from_pairs(name, &[EDGE], vertices, [])?;
        for &(u, v) in edges {
            if u == v {
                return Err(Error::NotAGraph(format!("loop at `{u}`")));
            }
            s.insert_named(EDGE, u, v)?;
            s.insert_named(EDGE, v, u)?;
        }
        Ok(Graph(s))
    }

    pub fn structure(&self) -> &BinaryStructure {
        &self.0
    }

    pub fn into_structure(self) -> BinaryStructure {
        self.0
    }

    pub fn size(&self) -> usize {
        self.0.size()
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.0.holds(0, u, v)
    }

    /// Undirected edges `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0.pairs(0).filter(|&(u, v)| u < v)
    }
}

/// Gaifman graph: distinct elements are adjacent iff they occur together
/// in some tuple. Loops never produce edges.
pub fn gaifman(s: &BinaryStructure) -> Graph {
    let sig = Signature::new([EDGE]).expect("single symbol");
    let mut g = BinaryStructure::new(s.name(), sig, s.universe().iter().cloned())
        .expect("universe already valid");
    for z in 0..s.signature().len() {
        for (u, v) in s.pairs(z) {
            if u != v {
                g.insert(0, u, v);
                g.insert(0, v, u);
            }
        }
    }
    Graph(g)
}

/// Restriction of `s` to the symbols in `keep` (declaration order kept).
pub fn reduct(s: &BinaryStructure, keep: &[&str]) -> Result<BinaryStructure> {
    for k in keep {
        if !s.signature().contains(k) {
            return Err(Error::UnknownSymbol(k.to_string()));
        }
    }
    let kept: Vec<usize> = (0..s.signature().len())
        .filter(|&z| keep.contains(&s.signature().symbols()[z].as_str()))
        .collect();
    let sig = Signature::new(kept.iter().map(|&z| s.signature().symbols()[z].clone()))?;
    let mut out = BinaryStructure::new(s.name(), sig, s.universe().iter().cloned())?;
    for (w, &z) in kept.iter().enumerate() {
        for (u, v) in s.pairs(z) {
            out.insert(w, u, v);
        }
    }
    Ok(out)
}

/// Expands a graph to `{E,F}` where `F` holds on distinct non-adjacent pairs.
pub fn complement_expand(g: &Graph) -> BinaryStructure {
    let sig = Signature::new([EDGE, NON_EDGE]).expect("distinct symbols");
    let s = g.structure();
    let mut out = BinaryStructure::new(s.name(), sig, s.universe().iter().cloned())
        .expect("universe already valid");
    let n = s.size();
    for u in 0..n {
        for v in 0..n {
            if u == v {
                continue;
            }
            if g.adjacent(u, v) {
                out.insert(0, u, v);
            } else {
                out.insert(1, u, v);
            }
        }
    }
    out
}

/// True iff `f` is a bijection from the universe of `s1` onto that of `s2`
/// carrying every relation exactly onto the relation of the same name.
pub fn matches_via(
    s1: &BinaryStructure,
    s2: &BinaryStructure,
    f: &BTreeMap<String, String>,
) -> bool {
    if s1.size() != s2.size() || !s1.signature().same_symbols(s2.signature()) {
        return false;
    }
    let mut image = Vec::with_capacity(s1.size());
    let mut hit = BTreeSet::new();
    for e in s1.universe() {
        let Some(t) = f.get(e) else { return false };
        let Some(j) = s2.element_index(t) else {
            return false;
        };
        if !hit.insert(j) {
            return false;
        }
        image.push(j);
    }
    for (z, name) in s1.signature().symbols().iter().enumerate() {
        let w = s2.signature().index_of(name).expect("same symbols");
        if s1.pair_count(z) != s2.pair_count(w) {
            return false;
        }
        if !s1.pairs(z).all(|(u, v)| s2.holds(w, image[u], image[v])) {
            return false;
        }
    }
    true
}

/// Identity-on-names check, the common case of [`matches_via`].
pub fn matches_by_name(s1: &BinaryStructure, s2: &BinaryStructure) -> bool {
    let f = s1
        .universe()
        .iter()
        .map(|e| (e.clone(), e.clone()))
        .collect();
    matches_via(s1, s2, &f)
}

/// Largest `t` such that `K_{t,t}` is a (not necessarily induced) subgraph.
pub fn biclique_number(g: &Graph, limit: usize) -> Result<usize> {
    let n = g.size();
    let cap = limit.min(128);
    if n > cap {
        return Err(Error::LimitExceeded {
            what: "biclique search",
            size: n,
            limit: cap,
        });
    }
    let adj: Vec<u128> = (0..n)
        .map(|u| {
            (0..n)
                .filter(|&v| g.adjacent(u, v))
                .fold(0u128, |m, v| m | (1u128 << v))
        })
        .collect();
    let full = if n == 128 { u128::MAX } else { (1u128 << n) - 1 };
    let mut t = 0;
    while has_biclique(&adj, n, t + 1, full) {
        t += 1;
    }
    Ok(t)
}

fn has_biclique(adj: &[u128], n: usize, t: usize, full: u128) -> bool {
    if 2 * t > n {
        return false;
    }
    extend_side(adj, n, t, 0, 0, 0, full)
}

// Grows side A in increasing index order; `common` is the common
// neighbourhood of A, so side B must fit inside `common \ A`.
fn extend_side(
    adj: &[u128],
    n: usize,
    t: usize,
    start: usize,
    chosen: usize,
    side: u128,
    common: u128,
) -> bool {
    if chosen == t {
        return (common & !side).count_ones() as usize >= t;
    }
    for v in start..n {
        if n - v < t - chosen {
            break;
        }
        let a = side | (1u128 << v);
        let c = common & adj[v];
        if ((c & !a).count_ones() as usize) < t {
            continue;
        }
        if extend_side(adj, n, t, v + 1, chosen + 1, a, c) {
            return true;
        }
    }
    false
}
