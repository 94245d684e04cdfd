//! Merge sequences: chains of coarsening partitions with cumulative sets
//! of revealed ordered pairs.

use std::collections::{BTreeSet, VecDeque};

use thiserror::Error;

use crate::error::{Error as CrateError, Result};
use crate::structure::BinaryStructure;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SequenceViolation {
    #[error("sequence has no steps")]
    NoSteps,
    #[error("step {step}: not a partition ({detail})")]
    NotPartition { step: usize, detail: String },
    #[error("step 1 is not the partition into singletons")]
    FirstNotSingletons,
    #[error("step {step}: part {part} of the previous step is split")]
    NotRefinement { step: usize, part: String },
    #[error("last step is not the single part holding every element")]
    LastNotWhole,
    #[error("step {step}: loop ({element},{element}) revealed")]
    LoopRevealed { step: usize, element: String },
    #[error("pair ({0},{1}) is never revealed")]
    NotFullyRevealed(String, String),
    #[error(
        "step {step}: unrevealed pairs of {left}x{right} are mixed in `{symbol}` \
         (({in_pair}) holds, ({out_pair}) does not; parts may coincide)"
    )]
    NotUniform {
        step: usize,
        left: String,
        right: String,
        symbol: String,
        in_pair: String,
        out_pair: String,
    },
}

/// One step: a partition of the elements and the pairs first revealed here.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub parts: Vec<Vec<usize>>,
    pub revealed: BTreeSet<(usize, usize)>,
}

impl Step {
    /// Sorts every part and then the list of parts.
    pub fn new(mut parts: Vec<Vec<usize>>, revealed: BTreeSet<(usize, usize)>) -> Self {
        for p in &mut parts {
            p.sort_unstable();
        }
        parts.sort();
        Step { parts, revealed }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeSequence {
    structure: String,
    elements: Vec<String>,
    steps: Vec<Step>,
}

impl MergeSequence {
    /// `elements` must be sorted and distinct; steps refer to them by index.
    pub fn from_indices(structure: &str, elements: Vec<String>, steps: Vec<Step>) -> Self {
        debug_assert!(elements.windows(2).all(|w| w[0] < w[1]));
        MergeSequence {
            structure: structure.to_string(),
            elements,
            steps,
        }
    }

    /// Builds a sequence from named parts and reveals; the element set is
    /// the union of all parts.
    pub fn from_named(
        structure: &str,
        steps: &[(Vec<Vec<&str>>, Vec<(&str, &str)>)],
    ) -> Result<Self> {
        let mut names = BTreeSet::new();
        for (parts, _) in steps {
            for p in parts {
                names.extend(p.iter().map(|s| s.to_string()));
            }
        }
        let elements: Vec<String> = names.into_iter().collect();
        let lookup = |s: &str| {
            elements
                .binary_search_by(|e| e.as_str().cmp(s))
                .map_err(|_| CrateError::UnknownElement(s.to_string()))
        };
        let mut out = Vec::new();
        for (parts, rev) in steps {
            let parts = parts
                .iter()
                .map(|p| p.iter().map(|s| lookup(s)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            let revealed = rev
                .iter()
                .map(|(u, v)| Ok((lookup(u)?, lookup(v)?)))
                .collect::<Result<BTreeSet<_>>>()?;
            out.push(Step::new(parts, revealed));
        }
        Ok(MergeSequence::from_indices(structure, elements, out))
    }

    pub fn structure_name(&self) -> &str {
        &self.structure
    }

    pub fn set_structure_name(&mut self, name: &str) {
        self.structure = name.to_string();
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn steps_mut(&mut self) -> &mut Vec<Step> {
        &mut self.steps
    }

    /// Number of steps `m`.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn n(&self) -> usize {
        self.elements.len()
    }

    pub fn part_name(&self, part: &[usize]) -> String {
        let names: Vec<&str> = part.iter().map(|&e| self.elements[e].as_str()).collect();
        format!("{{{}}}", names.join(","))
    }

    /// Part index of each element at a step (0-based step).
    pub fn blocks(&self, step: usize) -> Vec<usize> {
        let mut block = vec![usize::MAX; self.n()];
        for (k, p) in self.steps[step].parts.iter().enumerate() {
            for &e in p {
                block[e] = k;
            }
        }
        block
    }

    /// Cumulative revealed relation `R_i` for every step, as `n*n` matrices.
    pub fn cumulative(&self) -> Vec<Vec<bool>> {
        let n = self.n();
        let mut cur = vec![false; n * n];
        let mut out = Vec::with_capacity(self.len());
        for s in &self.steps {
            for &(u, v) in &s.revealed {
                cur[u * n + v] = true;
            }
            out.push(cur.clone());
        }
        out
    }

    /// Parts of `P_{i-1}` within distance `r` of `v` in the undirected graph
    /// of `R_i`. Steps are 1-indexed, `2 <= i <= m`.
    pub fn reach(&self, v: usize, i: usize, r: usize) -> Result<Vec<usize>> {
        if i < 2 || i > self.len() {
            return Err(CrateError::OutOfRange(format!(
                "step {i} not in 2..={}",
                self.len()
            )));
        }
        if v >= self.n() {
            return Err(CrateError::OutOfRange(format!("element {v}")));
        }
        let cum = self.cumulative();
        Ok(reach_in(&cum[i - 1], &self.blocks(i - 2), self.n(), v, r))
    }

    /// Named form of [`MergeSequence::reach`].
    pub fn reach_named(&self, v: &str, i: usize, r: usize) -> Result<Vec<String>> {
        let idx = self
            .elements
            .iter()
            .position(|e| e == v)
            .ok_or_else(|| CrateError::UnknownElement(v.to_string()))?;
        let parts = self.reach(idx, i, r)?;
        Ok(parts
            .into_iter()
            .map(|k| self.part_name(&self.steps[i - 2].parts[k]))
            .collect())
    }

    /// Radius-`r` width without validating the sequence.
    pub fn width_unchecked(&self, r: usize) -> usize {
        let n = self.n();
        let cum = self.cumulative();
        let mut best = 0;
        for i in 1..self.len() {
            let block = self.blocks(i - 1);
            for v in 0..n {
                best = best.max(reach_in(&cum[i], &block, n, v, r).len());
            }
        }
        best
    }
}

/// Distinct blocks met by a radius-`r` ball around `v` in the symmetric
/// closure of `rel`, sorted.
pub(crate) fn reach_in(rel: &[bool], block: &[usize], n: usize, v: usize, r: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; n];
    dist[v] = 0;
    let mut queue = VecDeque::from([v]);
    while let Some(u) = queue.pop_front() {
        if dist[u] == r {
            continue;
        }
        for w in 0..n {
            if dist[w] == usize::MAX && (rel[u * n + w] || rel[w * n + u]) {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
    let found: BTreeSet<usize> = (0..n)
        .filter(|&u| dist[u] != usize::MAX)
        .map(|u| block[u])
        .collect();
    found.into_iter().collect()
}

/// Checks every structural invariant and the uniformity condition, which
/// is required for all ordered pairs of parts including a part with itself.
pub fn validate_sequence(seq: &MergeSequence, g: &BinaryStructure) -> Result<()> {
    if seq.elements() != g.universe() {
        return Err(CrateError::Mismatch(format!(
            "sequence elements {:?} differ from universe {:?}",
            seq.elements(),
            g.universe()
        )));
    }
    check_sequence(seq, g).map_err(CrateError::from)
}

fn check_sequence(
    seq: &MergeSequence,
    g: &BinaryStructure,
) -> std::result::Result<(), SequenceViolation> {
    let n = seq.n();
    if seq.is_empty() {
        return Err(SequenceViolation::NoSteps);
    }
    for (i, s) in seq.steps().iter().enumerate() {
        let mut seen = vec![false; n];
        for p in &s.parts {
            if p.is_empty() {
                return Err(SequenceViolation::NotPartition {
                    step: i + 1,
                    detail: "empty part".into(),
                });
            }
            for &e in p {
                if e >= n || seen[e] {
                    return Err(SequenceViolation::NotPartition {
                        step: i + 1,
                        detail: format!("element {} repeated", seq.elements()[e.min(n - 1)]),
                    });
                }
                seen[e] = true;
            }
        }
        if let Some(e) = seen.iter().position(|&b| !b) {
            return Err(SequenceViolation::NotPartition {
                step: i + 1,
                detail: format!("element {} missing", seq.elements()[e]),
            });
        }
        for &(u, v) in &s.revealed {
            if u == v {
                return Err(SequenceViolation::LoopRevealed {
                    step: i + 1,
                    element: seq.elements()[u].clone(),
                });
            }
        }
    }
    if seq.steps()[0].parts.iter().any(|p| p.len() != 1) {
        return Err(SequenceViolation::FirstNotSingletons);
    }
    for i in 1..seq.len() {
        let block = seq.blocks(i);
        for p in &seq.steps()[i - 1].parts {
            if p.iter().any(|&e| block[e] != block[p[0]]) {
                return Err(SequenceViolation::NotRefinement {
                    step: i + 1,
                    part: seq.part_name(p),
                });
            }
        }
    }
    if seq.steps().last().expect("non-empty").parts.len() != 1 {
        return Err(SequenceViolation::LastNotWhole);
    }
    let cum = seq.cumulative();
    let last = cum.last().expect("non-empty");
    for u in 0..n {
        for v in 0..n {
            if u != v && !last[u * n + v] {
                return Err(SequenceViolation::NotFullyRevealed(
                    seq.elements()[u].clone(),
                    seq.elements()[v].clone(),
                ));
            }
        }
    }
    for (i, s) in seq.steps().iter().enumerate() {
        let rel = &cum[i];
        for p in &s.parts {
            for q in &s.parts {
                for z in 0..g.signature().len() {
                    let mut inside = None;
                    let mut outside = None;
                    for &u in p {
                        for &v in q {
                            if u == v || rel[u * n + v] {
                                continue;
                            }
                            if g.holds(z, u, v) {
                                inside.get_or_insert((u, v));
                            } else {
                                outside.get_or_insert((u, v));
                            }
                        }
                    }
                    if let (Some(a), Some(b)) = (inside, outside) {
                        let pair = |(u, v): (usize, usize)| {
                            format!("{},{}", seq.elements()[u], seq.elements()[v])
                        };
                        return Err(SequenceViolation::NotUniform {
                            step: i + 1,
                            left: seq.part_name(p),
                            right: seq.part_name(q),
                            symbol: g.signature().symbols()[z].clone(),
                            in_pair: pair(a),
                            out_pair: pair(b),
                        });
                    }
                }
            }
        }
    }
    Ok(())
}

/// Radius-`r` width of a valid sequence; 0 for a one-step sequence.
pub fn width(seq: &MergeSequence, g: &BinaryStructure, r: usize) -> Result<usize> {
    validate_sequence(seq, g)?;
    Ok(seq.width_unchecked(r))
}

/// Smallest set of pairs of `p × q` whose reveal makes the leftover
/// uniform in every symbol, choosing per symbol the cheaper side.
pub(crate) fn forced_reveal(
    g: &BinaryStructure,
    rel: &[bool],
    p: &[usize],
    q: &[usize],
) -> Vec<(usize, usize)> {
    let n = g.size();
    let mut left: Vec<(usize, usize)> = p
        .iter()
        .flat_map(|&u| q.iter().map(move |&v| (u, v)))
        .filter(|&(u, v)| u != v && !rel[u * n + v])
        .collect();
    let mut out = Vec::new();
    for z in 0..g.signature().len() {
        let (yes, no): (Vec<_>, Vec<_>) = left.iter().partition(|&&(u, v)| g.holds(z, u, v));
        if yes.is_empty() || no.is_empty() {
            continue;
        }
        // keep the larger side unrevealed; ties keep the pairs in the relation
        let (reveal, keep) = if no.len() <= yes.len() {
            (no, yes)
        } else {
            (yes, no)
        };
        out.extend(reveal);
        left = keep;
    }
    out
}

/// Upper-bound heuristic: merges two parts per step, picking the merge with
/// the fewest forced reveals, then the smallest step width at radius `r`,
/// then the earliest pair of parts. A full reveal step closes the sequence.
pub fn greedy_sequence(g: &BinaryStructure, r: usize) -> MergeSequence {
    let n = g.size();
    let elements = g.universe().to_vec();
    let mut parts: Vec<Vec<usize>> = (0..n).map(|e| vec![e]).collect();
    let mut rel = vec![false; n * n];
    let mut steps = vec![Step::new(parts.clone(), BTreeSet::new())];
    while parts.len() > 1 {
        let prev_block = block_vec(&parts, n);
        let mut best: Option<((usize, usize), Vec<(usize, usize)>, Vec<Vec<usize>>)> = None;
        for a in 0..parts.len() {
            for b in a + 1..parts.len() {
                let mut merged = parts[a].clone();
                merged.extend(&parts[b]);
                merged.sort_unstable();
                let mut next: Vec<Vec<usize>> = parts
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != a && k != b)
                    .map(|(_, p)| p.clone())
                    .collect();
                next.push(merged.clone());
                next.sort();
                let mut reveals = Vec::new();
                let mut trial = rel.clone();
                for q in &next {
                    for (x, y) in [(&merged, q), (q, &merged)] {
                        for (u, v) in forced_reveal(g, &trial, x, y) {
                            trial[u * n + v] = true;
                            reveals.push((u, v));
                        }
                    }
                }
                let step_width = (0..n)
                    .map(|v| reach_in(&trial, &prev_block, n, v, r).len())
                    .max()
                    .unwrap_or(0);
                let key = (reveals.len(), step_width);
                if best.as_ref().is_none_or(|(k, _, _)| key < *k) {
                    best = Some((key, reveals, next));
                }
            }
        }
        let (_, reveals, next) = best.expect("at least two parts");
        for &(u, v) in &reveals {
            rel[u * n + v] = true;
        }
        parts = next;
        steps.push(Step::new(parts.clone(), reveals.into_iter().collect()));
    }
    if n >= 2 {
        let rest: BTreeSet<(usize, usize)> = (0..n)
            .flat_map(|u| (0..n).map(move |v| (u, v)))
            .filter(|&(u, v)| u != v && !rel[u * n + v])
            .collect();
        steps.push(Step::new(parts, rest));
    }
    MergeSequence::from_indices(g.name(), elements, steps)
}

fn block_vec(parts: &[Vec<usize>], n: usize) -> Vec<usize> {
    let mut block = vec![0; n];
    for (k, p) in parts.iter().enumerate() {
        for &e in p {
            block[e] = k;
        }
    }
    block
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::structure::{complement_expand, Graph};

    pub(crate) fn p3() -> BinaryStructure {
        Graph::from_edges("p3", &["a", "b", "c"], &[("a", "b"), ("b", "c")])
            .unwrap()
            .into_structure()
    }

    pub(crate) fn sigma_p3() -> MergeSequence {
        MergeSequence::from_named(
            "p3",
            &[
                (vec![vec!["a"], vec!["b"], vec!["c"]], vec![]),
                (vec![vec!["a", "c"], vec!["b"]], vec![]),
                (vec![vec!["a", "b", "c"]], vec![("a", "c"), ("c", "a")]),
                (
                    vec![vec!["a", "b", "c"]],
                    vec![("a", "b"), ("b", "a"), ("b", "c"), ("c", "b")],
                ),
            ],
        )
        .unwrap()
    }

    #[test]
    fn sigma_p3_is_valid() {
        validate_sequence(&sigma_p3(), &p3()).unwrap();
    }

    #[test]
    fn removing_step_three_reveal_breaks_uniformity() {
        let mut s = sigma_p3();
        s.steps_mut()[2].revealed.clear();
        s.steps_mut()[3].revealed.extend([(0, 2), (2, 0)]);
        let err = validate_sequence(&s, &p3()).unwrap_err();
        match err {
            CrateError::InvalidSequence(SequenceViolation::NotUniform {
                step,
                left,
                right,
                symbol,
                ..
            }) => {
                assert_eq!(step, 3);
                assert_eq!(left, "{a,b,c}");
                assert_eq!(right, "{a,b,c}");
                assert_eq!(symbol, "E");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn single_vertex_sequence() {
        let g = BinaryStructure::from_pairs("one", &["E"], &["v"], []).unwrap();
        let s = MergeSequence::from_named("one", &[(vec![vec!["v"]], vec![])]).unwrap();
        validate_sequence(&s, &g).unwrap();
        assert_eq!(width(&s, &g, 1).unwrap(), 0);
        assert_eq!(greedy_sequence(&g, 1).len(), 1);
    }

    #[test]
    fn reach_examples() {
        let s = sigma_p3();
        assert_eq!(s.reach_named("a", 3, 1).unwrap(), vec!["{a,c}"]);
        assert_eq!(s.reach_named("b", 3, 1).unwrap(), vec!["{b}"]);
        assert_eq!(s.reach_named("a", 4, 1).unwrap(), vec!["{a,b,c}"]);
        assert!(s.reach(0, 1, 1).is_err());
        assert!(s.reach(0, 5, 1).is_err());
    }

    #[test]
    fn width_examples() {
        assert_eq!(width(&sigma_p3(), &p3(), 1).unwrap(), 1);
        let short = MergeSequence::from_named(
            "p3",
            &[
                (vec![vec!["a"], vec!["b"], vec!["c"]], vec![]),
                (vec![vec!["a", "b", "c"]], vec![("a", "c"), ("c", "a")]),
                (
                    vec![vec!["a", "b", "c"]],
                    vec![("a", "b"), ("b", "a"), ("b", "c"), ("c", "b")],
                ),
            ],
        )
        .unwrap();
        assert_eq!(width(&short, &p3(), 1).unwrap(), 2);
    }

    #[test]
    fn greedy_on_k2() {
        let k2 = Graph::from_edges("k2", &["a", "b"], &[("a", "b")])
            .unwrap()
            .into_structure();
        let s = greedy_sequence(&k2, 1);
        assert_eq!(s.len(), 3);
        assert!(s.steps()[1].revealed.is_empty());
        assert_eq!(width(&s, &k2, 1).unwrap(), 1);
    }

    #[test]
    fn greedy_on_p3_is_valid() {
        let s = greedy_sequence(&p3(), 1);
        validate_sequence(&s, &p3()).unwrap();
        let plus = complement_expand(&Graph::try_new(p3()).unwrap());
        validate_sequence(&greedy_sequence(&plus, 2), &plus).unwrap();
    }

    #[test]
    fn mismatched_elements_error() {
        let g = BinaryStructure::from_pairs("q", &["E"], &["x", "y", "z"], []).unwrap();
        assert!(matches!(
            validate_sequence(&sigma_p3(), &g),
            Err(CrateError::Mismatch(_))
        ));
    }

    mod props {
        use super::*;
        use crate::testutil::structure_strategy;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn greedy_is_valid(g in structure_strategy(6)) {
                let s = greedy_sequence(&g, 1);
                prop_assert!(validate_sequence(&s, &g).is_ok());
            }

            #[test]
            fn width_grows_with_radius(g in structure_strategy(6), r in 0usize..3) {
                let s = greedy_sequence(&g, r);
                prop_assert!(s.width_unchecked(r) <= s.width_unchecked(r + 1));
            }

            #[test]
            fn extra_reveals_never_shrink_width(
                g in structure_strategy(6),
                extra in proptest::collection::vec((0usize..64, 0usize..6, 0usize..6), 0..8),
                r in 1usize..3,
            ) {
                let s = greedy_sequence(&g, r);
                let before = s.width_unchecked(r);
                let mut t = s.clone();
                let n = g.size();
                for (step, u, v) in extra {
                    let (u, v) = (u % n, v % n);
                    if u != v {
                        let step = step % t.len();
                        t.steps_mut()[step].revealed.insert((u, v));
                    }
                }
                prop_assert!(validate_sequence(&t, &g).is_ok());
                prop_assert!(t.width_unchecked(r) >= before);
            }
        }
    }
}
