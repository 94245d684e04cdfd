//! Exact merge-width by exhaustive search over canonical sequences.
//!
//! A canonical sequence strictly coarsens its partition at every step,
//! reveals only what the uniformity condition forces (branching over the
//! two possible sides per mixed symbol), and ends with one full reveal once
//! every element sits in a single part. Pair sets are `u64` bitmasks with
//! bit `u * n + v`, which bounds the search to eight elements.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::sequence::{greedy_sequence, MergeSequence, Step};
use crate::structure::BinaryStructure;

/// Largest universe any search in this module accepts.
pub const HARD_LIMIT: usize = 8;
/// Default bound for [`mw_exact`].
pub const DEFAULT_NMAX: usize = 5;

struct Masks {
    n: usize,
    full: u64,
    rels: Vec<u64>,
}

impl Masks {
    fn new(g: &BinaryStructure) -> Self {
        let n = g.size();
        let mut full = 0u64;
        for u in 0..n {
            for v in 0..n {
                if u != v {
                    full |= bit(n, u, v);
                }
            }
        }
        let rels = (0..g.signature().len())
            .map(|z| g.pairs(z).fold(0u64, |m, (u, v)| m | bit(n, u, v)))
            .collect();
        Masks { n, full, rels }
    }

    fn pairs(&self, a: u16, b: u16) -> u64 {
        let mut m = 0u64;
        for u in members(a) {
            for v in members(b) {
                if u != v {
                    m |= bit(self.n, u, v);
                }
            }
        }
        m
    }

    fn uniform(&self, left: u64) -> bool {
        self.rels
            .iter()
            .all(|&z| left & z == 0 || left & !z == 0)
    }

    /// Minimal reveal sets making `left` uniform in every symbol.
    fn options(&self, left: u64) -> Vec<u64> {
        let mixed: Vec<u64> = self
            .rels
            .iter()
            .copied()
            .filter(|&z| left & z != 0 && left & !z != 0)
            .collect();
        let mut out = BTreeSet::new();
        for choice in 0u32..(1u32 << mixed.len()) {
            let mut x = 0u64;
            for (k, &z) in mixed.iter().enumerate() {
                // bit set: leftover stays inside the relation
                x |= if choice >> k & 1 == 1 { left & !z } else { left & z };
            }
            out.insert(x);
        }
        minimal(out.into_iter().collect())
    }

    fn adjacency(&self, rel: u64) -> Vec<u16> {
        let n = self.n;
        (0..n)
            .map(|u| {
                (0..n)
                    .filter(|&v| rel & bit(n, u, v) != 0 || rel & bit(n, v, u) != 0)
                    .fold(0u16, |m, v| m | 1 << v)
            })
            .collect()
    }

    /// Largest number of blocks of `labels` met by a radius-`r` ball in `rel`.
    fn step_width(&self, labels: &[u8], rel: u64, r: usize) -> usize {
        let adj = self.adjacency(rel);
        (0..self.n)
            .map(|v| {
                let mut ball: u16 = 1 << v;
                for _ in 0..r {
                    let grown = members(ball).fold(ball, |m, u| m | adj[u]);
                    if grown == ball {
                        break;
                    }
                    ball = grown;
                }
                members(ball)
                    .fold(0u16, |m, u| m | 1 << labels[u])
                    .count_ones() as usize
            })
            .max()
            .unwrap_or(0)
    }
}

fn bit(n: usize, u: usize, v: usize) -> u64 {
    1u64 << (u * n + v)
}

fn members(set: u16) -> impl Iterator<Item = usize> {
    (0..16).filter(move |&i| set >> i & 1 == 1)
}

/// Drops every mask that strictly contains another.
fn minimal(mut sets: Vec<u64>) -> Vec<u64> {
    sets.sort_by_key(|s| (s.count_ones(), *s));
    let mut out: Vec<u64> = Vec::new();
    for s in sets {
        if !out.iter().any(|&t| t & s == t) {
            out.push(s);
        }
    }
    out.sort_unstable();
    out
}

fn blocks_of(labels: &[u8]) -> Vec<u16> {
    let k = labels.iter().map(|&l| l as usize + 1).max().unwrap_or(0);
    let mut out = vec![0u16; k];
    for (e, &l) in labels.iter().enumerate() {
        out[l as usize] |= 1 << e;
    }
    out
}

/// Restricted growth strings of length `k`, in lexicographic order.
fn growth_strings(k: usize) -> Vec<Vec<u8>> {
    fn go(k: usize, cur: &mut Vec<u8>, top: u8, out: &mut Vec<Vec<u8>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for l in 0..=top {
            cur.push(l);
            go(k, cur, top.max(l + 1), out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k > 0 {
        go(k, &mut Vec::new(), 0, &mut out);
    }
    out
}

/// Canonical labels after renumbering blocks by first occurrence.
fn canonical(labels: &[u8]) -> Vec<u8> {
    let mut map = [u8::MAX; 16];
    let mut next = 0u8;
    labels
        .iter()
        .map(|&l| {
            if map[l as usize] == u8::MAX {
                map[l as usize] = next;
                next += 1;
            }
            map[l as usize]
        })
        .collect()
}

/// Strict coarsenings of `labels` with every combined reveal option.
fn successors(masks: &Masks, labels: &[u8], rel: u64, gs: &[Vec<u8>]) -> Vec<(Vec<u8>, u64)> {
    let k = labels.iter().map(|&l| l as usize + 1).max().unwrap_or(0);
    let mut out = Vec::new();
    for merge in gs {
        if merge.iter().map(|&l| l as usize + 1).max().unwrap_or(0) == k {
            continue; // identity
        }
        let next: Vec<u8> = canonical(&labels.iter().map(|&l| merge[l as usize]).collect::<Vec<_>>());
        let blocks = blocks_of(&next);
        let old = blocks_of(labels);
        let fresh: Vec<bool> = blocks.iter().map(|b| !old.contains(b)).collect();
        let mut combined = vec![0u64];
        for (a, &ba) in blocks.iter().enumerate() {
            for (b, &bb) in blocks.iter().enumerate() {
                if !fresh[a] && !fresh[b] {
                    continue;
                }
                let left = masks.pairs(ba, bb) & !rel;
                if masks.uniform(left) {
                    continue;
                }
                let opts = masks.options(left);
                let mut grown = Vec::with_capacity(combined.len() * opts.len());
                for &c in &combined {
                    for &o in &opts {
                        grown.push(c | o);
                    }
                }
                let set: BTreeSet<u64> = grown.into_iter().collect();
                combined = minimal(set.into_iter().collect());
            }
        }
        for c in combined {
            out.push((next.clone(), rel | c));
        }
    }
    out
}

fn check_size(g: &BinaryStructure, nmax: usize) -> Result<()> {
    let limit = nmax.min(HARD_LIMIT);
    if g.size() > limit {
        return Err(Error::LimitExceeded {
            what: "exact merge-width search",
            size: g.size(),
            limit,
        });
    }
    Ok(())
}

fn to_sequence(g: &BinaryStructure, masks: &Masks, chain: &[(Vec<u8>, u64)]) -> MergeSequence {
    let n = masks.n;
    let mut steps = Vec::new();
    let mut prev = 0u64;
    let mut push = |labels: &[u8], rel: u64, steps: &mut Vec<Step>| {
        let parts = blocks_of(labels)
            .into_iter()
            .map(|b| members(b).collect())
            .collect();
        let fresh = rel & !prev;
        let revealed = (0..n * n)
            .filter(|&k| fresh >> k & 1 == 1)
            .map(|k| (k / n, k % n))
            .collect();
        prev = rel;
        steps.push(Step::new(parts, revealed));
    };
    for (labels, rel) in chain {
        push(labels, *rel, &mut steps);
    }
    if n >= 2 {
        push(&vec![0u8; n], masks.full, &mut steps);
    }
    MergeSequence::from_indices(g.name(), g.universe().to_vec(), steps)
}

struct Search<'a> {
    masks: &'a Masks,
    r: usize,
    gs: Vec<Vec<Vec<u8>>>,
    best: usize,
    witness: Option<Vec<(Vec<u8>, u64)>>,
    seen: HashMap<(Vec<u8>, u64), usize>,
}

impl Search<'_> {
    fn dfs(&mut self, chain: &mut Vec<(Vec<u8>, u64)>, so_far: usize) {
        let (labels, rel) = chain.last().cloned().expect("chain starts non-empty");
        let k = labels.iter().map(|&l| l as usize + 1).max().unwrap_or(0);
        for (next, rel2) in successors(self.masks, &labels, rel, &self.gs[k]) {
            let w = so_far.max(self.masks.step_width(&labels, rel2, self.r));
            if next.iter().all(|&l| l == 0) {
                // closing full-reveal step meets exactly one part
                let total = w.max(1);
                if total < self.best {
                    self.best = total;
                    let mut done = chain.clone();
                    done.push((next, rel2));
                    self.witness = Some(done);
                }
                continue;
            }
            if w.max(1) >= self.best {
                continue;
            }
            let key = (next.clone(), rel2);
            if self.seen.get(&key).is_some_and(|&s| s <= w) {
                continue;
            }
            self.seen.insert(key, w);
            chain.push((next, rel2));
            self.dfs(chain, w);
            chain.pop();
            if self.best == 1 {
                return;
            }
        }
    }
}

/// Exact radius-`r` merge-width with a witness sequence of that width.
pub fn mw_exact(g: &BinaryStructure, r: usize, nmax: usize) -> Result<(usize, MergeSequence)> {
    check_size(g, nmax)?;
    let n = g.size();
    let masks = Masks::new(g);
    let start: Vec<u8> = (0..n as u8).collect();
    if n == 1 {
        return Ok((0, to_sequence(g, &masks, &[(start, 0)])));
    }
    let greedy = greedy_sequence(g, r).width_unchecked(r);
    let mut search = Search {
        masks: &masks,
        r,
        gs: (0..=n).map(growth_strings).collect(),
        best: greedy + 1,
        witness: None,
        seen: HashMap::new(),
    };
    search.dfs(&mut vec![(start, 0)], 0);
    let chain = search.witness.expect("greedy width is attainable canonically");
    Ok((search.best, to_sequence(g, &masks, &chain)))
}

/// Calls `f` on every canonical sequence of `g`.
pub fn for_each_canonical_sequence(
    g: &BinaryStructure,
    nmax: usize,
    mut f: impl FnMut(&MergeSequence),
) -> Result<()> {
    check_size(g, nmax)?;
    let n = g.size();
    let masks = Masks::new(g);
    let start: Vec<u8> = (0..n as u8).collect();
    if n == 1 {
        f(&to_sequence(g, &masks, &[(start, 0)]));
        return Ok(());
    }
    let gs: Vec<Vec<Vec<u8>>> = (0..=n).map(growth_strings).collect();
    fn walk(
        masks: &Masks,
        g: &BinaryStructure,
        gs: &[Vec<Vec<u8>>],
        chain: &mut Vec<(Vec<u8>, u64)>,
        f: &mut dyn FnMut(&MergeSequence),
    ) {
        let (labels, rel) = chain.last().cloned().expect("non-empty");
        let k = labels.iter().map(|&l| l as usize + 1).max().unwrap_or(0);
        for (next, rel2) in successors(masks, &labels, rel, &gs[k]) {
            let done = next.iter().all(|&l| l == 0);
            chain.push((next, rel2));
            if done {
                f(&to_sequence(g, masks, chain));
            } else {
                walk(masks, g, gs, chain, f);
            }
            chain.pop();
        }
    }
    walk(&masks, g, &gs, &mut vec![(start, 0)], &mut f);
    Ok(())
}

/// Largest universe the unreduced enumerator accepts.
pub const UNREDUCED_LIMIT: usize = 3;

/// Exact radius-`r` merge-width over all sequences with at most
/// `max_steps` steps, allowing repeated partitions and arbitrary extra
/// reveals. Intended only as an independent check of [`mw_exact`].
pub fn mw_unreduced(g: &BinaryStructure, r: usize, max_steps: usize) -> Result<usize> {
    check_size(g, UNREDUCED_LIMIT)?;
    let n = g.size();
    let masks = Masks::new(g);
    let all_labels: Vec<Vec<u8>> = growth_strings(n);
    let start: Vec<u8> = (0..n as u8).collect();
    let mut memo: HashMap<(usize, Vec<u8>, u64), usize> = HashMap::new();

    fn coarser_or_equal(a: &[u8], b: &[u8]) -> bool {
        // every block of `a` sits inside one block of `b`
        (0..a.len()).all(|x| (0..a.len()).all(|y| a[x] != a[y] || b[x] == b[y]))
    }

    fn valid(masks: &Masks, labels: &[u8], rel: u64) -> bool {
        let blocks = blocks_of(labels);
        blocks.iter().all(|&a| {
            blocks
                .iter()
                .all(|&b| masks.uniform(masks.pairs(a, b) & !rel))
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn best_from(
        masks: &Masks,
        all: &[Vec<u8>],
        memo: &mut HashMap<(usize, Vec<u8>, u64), usize>,
        r: usize,
        max_steps: usize,
        step: usize,
        labels: &[u8],
        rel: u64,
    ) -> usize {
        if labels.iter().all(|&l| l == 0) && rel == masks.full {
            return 0;
        }
        if step == max_steps {
            return usize::MAX;
        }
        let key = (step, labels.to_vec(), rel);
        if let Some(&v) = memo.get(&key) {
            return v;
        }
        let free = masks.full & !rel;
        let mut best = usize::MAX;
        for next in all.iter().filter(|q| coarser_or_equal(labels, q)) {
            // every superset of `rel`
            let mut sub = free;
            loop {
                let rel2 = rel | sub;
                if valid(masks, next, rel2) {
                    let w = masks.step_width(labels, rel2, r);
                    if w < best {
                        let rest = best_from(masks, all, memo, r, max_steps, step + 1, next, rel2);
                        best = best.min(w.max(rest));
                    }
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & free;
            }
        }
        memo.insert(key, best);
        best
    }

    let mut best = usize::MAX;
    let mut sub = masks.full;
    loop {
        best = best.min(best_from(
            &masks, &all_labels, &mut memo, r, max_steps, 1, &start, sub,
        ));
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & masks.full;
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::{validate_sequence, width};
    use crate::structure::{gaifman, reduct, Graph};

    fn complete(n: usize) -> BinaryStructure {
        let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                edges.push((refs[i], refs[j]));
            }
        }
        Graph::from_edges("k", &refs, &edges).unwrap().into_structure()
    }

    fn edgeless(n: usize) -> BinaryStructure {
        let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        Graph::from_edges("e", &refs, &[]).unwrap().into_structure()
    }

    #[test]
    fn p3_has_width_one() {
        let p3 = Graph::from_edges("p3", &["a", "b", "c"], &[("a", "b"), ("b", "c")])
            .unwrap()
            .into_structure();
        let (w, seq) = mw_exact(&p3, 1, DEFAULT_NMAX).unwrap();
        assert_eq!(w, 1);
        assert_eq!(width(&seq, &p3, 1).unwrap(), 1);
    }

    #[test]
    fn complete_and_edgeless_have_width_one() {
        for n in 2..=4 {
            assert_eq!(mw_exact(&complete(n), 1, 5).unwrap().0, 1);
            assert_eq!(mw_exact(&edgeless(n), 1, 5).unwrap().0, 1);
        }
    }

    #[test]
    fn single_vertex_is_zero() {
        let g = edgeless(1);
        let (w, seq) = mw_exact(&g, 1, 5).unwrap();
        assert_eq!(w, 0);
        assert_eq!(seq.len(), 1);
        assert_eq!(mw_unreduced(&g, 1, 6).unwrap(), 0);
    }

    #[test]
    fn limit_is_enforced() {
        assert!(matches!(
            mw_exact(&edgeless(6), 1, 5),
            Err(Error::LimitExceeded { .. })
        ));
        assert!(mw_unreduced(&edgeless(4), 1, 6).is_err());
    }

    #[test]
    fn growth_strings_count_bell_numbers() {
        let bell = [1usize, 1, 2, 5, 15, 52];
        for (k, &b) in bell.iter().enumerate().skip(1) {
            assert_eq!(growth_strings(k).len(), b);
        }
    }

    #[test]
    fn canonical_sequences_are_valid() {
        let p4 = Graph::from_edges(
            "p4",
            &["a", "b", "c", "d"],
            &[("a", "b"), ("b", "c"), ("c", "d")],
        )
        .unwrap()
        .into_structure();
        let mut count = 0;
        let mut least = usize::MAX;
        for_each_canonical_sequence(&p4, 5, |s| {
            validate_sequence(s, &p4).unwrap();
            least = least.min(s.width_unchecked(1));
            count += 1;
        })
        .unwrap();
        assert!(count > 0);
        assert_eq!(least, mw_exact(&p4, 1, 5).unwrap().0);
    }

    mod props {
        use super::*;
        use crate::testutil::structure_strategy;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn witness_is_valid_and_tight(g in structure_strategy(5), r in 1usize..3) {
                let (w, seq) = mw_exact(&g, r, 5).unwrap();
                prop_assert!(validate_sequence(&seq, &g).is_ok());
                prop_assert_eq!(seq.width_unchecked(r), w);
                prop_assert!(w <= greedy_sequence(&g, r).width_unchecked(r));
            }

            #[test]
            fn reducts_never_increase_width(g in structure_strategy(4)) {
                let w = mw_exact(&g, 1, 5).unwrap().0;
                let first = g.signature().symbols()[0].clone();
                let red = reduct(&g, &[first.as_str()]).unwrap();
                prop_assert!(mw_exact(&red, 1, 5).unwrap().0 <= w);
                prop_assert!(mw_exact(gaifman(&g).structure(), 1, 5).unwrap().0 <= w);
            }

            #[test]
            fn agrees_with_unreduced(g in structure_strategy(3), r in 1usize..3) {
                prop_assert_eq!(mw_exact(&g, r, 5).unwrap().0, mw_unreduced(&g, r, 6).unwrap());
            }
        }
    }
}
