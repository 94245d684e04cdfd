//! Interval rankings of merge-models, cleaning, the conversions between
//! merge sequences and ranked models, merge-walks and ranked width.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use num_rational::Ratio;
use thiserror::Error;

use crate::error::{Error as CrateError, Result};
use crate::model::{MergeModel, STuple};
use crate::sequence::{validate_sequence, MergeSequence, Step};
use crate::structure::BinaryStructure;
use crate::tree::TreeOrder;

pub type Rank = Ratio<i64>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RankingViolation {
    #[error("ranking has {found} intervals for {nodes} nodes")]
    WrongLength { nodes: usize, found: usize },
    #[error("interval of `{0}` is empty")]
    Empty(String),
    #[error("interval of `{child}` is not strictly left of its ancestor `{parent}`")]
    NotLeftOfParent { child: String, parent: String },
    #[error("intervals of `{x}` and `{y}` are disjoint although S({x},{y}) holds")]
    Disjoint { x: String, y: String },
}

/// A closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: Rank,
    pub hi: Rank,
}

impl Interval {
    pub fn new(lo: Rank, hi: Rank) -> Self {
        Interval { lo, hi }
    }

    pub fn int(lo: i64, hi: i64) -> Self {
        Interval::new(Rank::from_integer(lo), Rank::from_integer(hi))
    }

    pub fn contains(&self, t: Rank) -> bool {
        self.lo <= t && t <= self.hi
    }

    /// Right end of the intersection, if the intervals meet.
    pub fn overlap_max(&self, other: &Interval) -> Option<Rank> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.lo, self.hi)
    }
}

/// One interval per node, indexed like the model's tree.
pub type IntervalRanking = Vec<Interval>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedMergeModel {
    pub model: MergeModel,
    pub ranking: IntervalRanking,
}

/// Outcome of a successful ranking check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankingStatus {
    /// First clean clause that fails, if any.
    pub not_clean: Option<String>,
}

impl RankingStatus {
    pub fn is_clean(&self) -> bool {
        self.not_clean.is_none()
    }
}

/// Customisable pieces of the pipelines, so that a deliberately broken
/// cleaning can be injected when testing the harness itself.
#[derive(Clone, Copy)]
pub struct Hooks {
    pub clean: fn(&RankedMergeModel) -> RankedMergeModel,
}

impl Default for Hooks {
    fn default() -> Self {
        Hooks {
            clean: cleaning_unchecked,
        }
    }
}

impl RankedMergeModel {
    pub fn new(model: MergeModel, ranking: IntervalRanking) -> Self {
        RankedMergeModel { model, ranking }
    }

    pub fn tree(&self) -> &TreeOrder {
        self.model.tree()
    }

    pub fn interval(&self, i: usize) -> Interval {
        self.ranking[i]
    }

    /// Checks both ranking conditions and reports cleanliness.
    pub fn validate_ranking(&self) -> std::result::Result<RankingStatus, RankingViolation> {
        let t = self.tree();
        if self.ranking.len() != t.len() {
            return Err(RankingViolation::WrongLength {
                nodes: t.len(),
                found: self.ranking.len(),
            });
        }
        for i in 0..t.len() {
            if self.ranking[i].lo > self.ranking[i].hi {
                return Err(RankingViolation::Empty(t.name(i).to_string()));
            }
        }
        // parent pairs suffice: the order is the transitive closure
        for i in 0..t.len() {
            if let Some(p) = t.parent(i) {
                if self.ranking[i].hi >= self.ranking[p].lo {
                    return Err(RankingViolation::NotLeftOfParent {
                        child: t.name(i).to_string(),
                        parent: t.name(p).to_string(),
                    });
                }
            }
        }
        for (x, y) in self.model.s_pairs() {
            if self.ranking[x].overlap_max(&self.ranking[y]).is_none() {
                return Err(RankingViolation::Disjoint {
                    x: t.name(x).to_string(),
                    y: t.name(y).to_string(),
                });
            }
        }
        Ok(RankingStatus {
            not_clean: self.clean_defect(),
        })
    }

    /// Validates the model and its ranking.
    pub fn validate(&self) -> Result<RankingStatus> {
        self.model.validate()?;
        Ok(self.validate_ranking()?)
    }

    fn clean_defect(&self) -> Option<String> {
        let t = self.tree();
        for (i, iv) in self.ranking.iter().enumerate() {
            if !iv.lo.is_integer() || !iv.hi.is_integer() {
                return Some(format!("interval of `{}` is not integral", t.name(i)));
            }
        }
        let root = self.ranking[t.root()];
        if root.lo != root.hi {
            return Some(format!("root interval {root} is not a single point"));
        }
        let m = root.lo.to_integer();
        let los: BTreeSet<i64> = self.ranking.iter().map(|iv| iv.lo.to_integer()).collect();
        if los != (1..=m).collect() {
            return Some(format!("left endpoints are not exactly 1..{m}"));
        }
        for i in 0..t.len() {
            if t.is_leaf(i) && self.ranking[i].lo != Rank::from_integer(1) {
                return Some(format!("leaf `{}` does not start at 1", t.name(i)));
            }
            if let Some(p) = t.parent(i) {
                if self.ranking[i].hi != self.ranking[p].lo - 1 {
                    return Some(format!(
                        "`{}` does not end just before its parent starts",
                        t.name(i)
                    ));
                }
            }
        }
        None
    }

    pub fn is_clean(&self) -> bool {
        self.validate_ranking().is_ok_and(|s| s.is_clean())
    }

    /// `lo` of the root, which is `m` for clean models.
    pub fn top(&self) -> Rank {
        self.ranking[self.tree().root()].lo
    }

    /// Same model and ranking up to renaming of internal nodes.
    pub fn shape(&self) -> BTreeSet<String> {
        let mut out = self.model.shape();
        let keys = self.model.node_keys();
        for (i, iv) in self.ranking.iter().enumerate() {
            out.insert(format!("interval {} {}", keys[i], iv));
        }
        out
    }
}

/// The cleaning of a valid ranked model.
pub fn cleaning(rm: &RankedMergeModel) -> Result<RankedMergeModel> {
    rm.validate()?;
    Ok(cleaning_unchecked(rm))
}

pub(crate) fn cleaning_unchecked(rm: &RankedMergeModel) -> RankedMergeModel {
    cleaning_shifted(rm, 0)
}

/// Cleaning with every rank shifted by `shift`; `0` is the real cleaning.
pub(crate) fn cleaning_shifted(rm: &RankedMergeModel, shift: i64) -> RankedMergeModel {
    let t = rm.tree();
    let leaf_min = t
        .leaves()
        .into_iter()
        .map(|l| rm.ranking[l].lo)
        .min()
        .expect("trees have leaves");
    let f: Vec<Rank> = (0..t.len())
        .map(|i| if t.is_leaf(i) { leaf_min } else { rm.ranking[i].lo })
        .collect();
    let distinct: BTreeSet<Rank> = f.iter().copied().collect();
    let rank: BTreeMap<Rank, i64> = distinct
        .into_iter()
        .enumerate()
        .map(|(k, v)| (v, k as i64 + 1 + shift))
        .collect();
    let g: Vec<i64> = f.iter().map(|v| rank[v]).collect();
    let ranking = (0..t.len())
        .map(|i| match t.parent(i) {
            None => Interval::int(g[i], g[i]),
            Some(p) => Interval::int(g[i], g[p] - 1),
        })
        .collect();
    RankedMergeModel::new(rm.model.clone(), ranking)
}

/// Name of a part: the element itself for singletons, `+`-joined otherwise.
fn part_label(seq: &MergeSequence, part: &[usize]) -> String {
    let names: Vec<&str> = part.iter().map(|&e| seq.elements()[e].as_str()).collect();
    names.join("+")
}

/// The ranked model of a sequence before cleaning: one node per distinct
/// part, ordered by reverse inclusion, ranked by the steps the part occurs in.
pub fn model_of_sequence_raw(seq: &MergeSequence, g: &BinaryStructure) -> Result<RankedMergeModel> {
    validate_sequence(seq, g)?;
    let n = seq.n();
    let mut parts: Vec<Vec<usize>> = Vec::new();
    let mut span: BTreeMap<Vec<usize>, (usize, usize)> = BTreeMap::new();
    for (i, s) in seq.steps().iter().enumerate() {
        for p in &s.parts {
            span.entry(p.clone())
                .and_modify(|e| e.1 = i + 1)
                .or_insert_with(|| {
                    parts.push(p.clone());
                    (i + 1, i + 1)
                });
        }
    }
    let index: BTreeMap<Vec<usize>, usize> =
        parts.iter().enumerate().map(|(k, p)| (p.clone(), k)).collect();
    let mut names = Vec::new();
    let mut used: BTreeSet<String> = seq.elements().iter().cloned().collect();
    for p in &parts {
        if p.len() == 1 {
            names.push(seq.elements()[p[0]].clone());
            continue;
        }
        let mut name = part_label(seq, p);
        while used.contains(&name) {
            name.push('\'');
        }
        used.insert(name.clone());
        names.push(name);
    }
    let parent: Vec<Option<usize>> = parts
        .iter()
        .map(|p| {
            parts
                .iter()
                .enumerate()
                .filter(|(_, q)| q.len() > p.len() && p.iter().all(|e| q.binary_search(e).is_ok()))
                .min_by_key(|(_, q)| q.len())
                .map(|(k, _)| k)
        })
        .collect();
    let tree = TreeOrder::from_indices(names, parent).expect("parts form a laminar family");
    let mut tuples = Vec::new();
    // pairs revealed at step 1 sit between singletons, as if after an empty step
    let batches = std::iter::once((0, 0)).chain((0..seq.len().saturating_sub(1)).map(|i| (i, i + 1)));
    for (i, j) in batches {
        let batch = &seq.steps()[j].revealed;
        let here = &seq.steps()[i].parts;
        for p in here {
            for q in here {
                let hit: Vec<(usize, usize)> = p
                    .iter()
                    .flat_map(|&u| q.iter().map(move |&v| (u, v)))
                    .filter(|pair| batch.contains(pair))
                    .collect();
                let Some(&(u, v)) = hit.first() else { continue };
                for z in 0..g.signature().len() {
                    tuples.push(STuple {
                        symbol: z,
                        alpha: g.holds(z, u, v) as u8,
                        x: index[p],
                        y: index[q],
                    });
                }
            }
        }
    }
    debug_assert!(n >= 1);
    let model = MergeModel::new(seq.structure_name(), g.signature().clone(), tree, tuples);
    let ranking = parts
        .iter()
        .map(|p| {
            let (lo, hi) = span[p];
            Interval::int(lo as i64, hi as i64)
        })
        .collect();
    Ok(RankedMergeModel::new(model, ranking))
}

/// The clean ranked model of a valid sequence.
pub fn model_of_sequence(seq: &MergeSequence, g: &BinaryStructure) -> Result<RankedMergeModel> {
    model_of_sequence_with(seq, g, &Hooks::default())
}

pub fn model_of_sequence_with(
    seq: &MergeSequence,
    g: &BinaryStructure,
    hooks: &Hooks,
) -> Result<RankedMergeModel> {
    let raw = model_of_sequence_raw(seq, g)?;
    Ok((hooks.clean)(&raw))
}

/// The merge sequence read off the layers of a clean ranked model, closed
/// by one full reveal step when there are at least two leaves.
pub fn sequence_of_model(rm: &RankedMergeModel) -> Result<MergeSequence> {
    let status = rm.validate()?;
    if let Some(why) = status.not_clean {
        return Err(CrateError::NotClean(why));
    }
    Ok(sequence_of_model_unchecked(rm))
}

pub(crate) fn sequence_of_model_unchecked(rm: &RankedMergeModel) -> MergeSequence {
    let t = rm.tree();
    let m = rm.top().to_integer();
    let mut leaves: Vec<(String, usize)> = t
        .leaves()
        .into_iter()
        .map(|l| (t.name(l).to_string(), l))
        .collect();
    leaves.sort();
    let n = leaves.len();
    let elem_of: BTreeMap<usize, usize> =
        leaves.iter().enumerate().map(|(k, &(_, l))| (l, k)).collect();
    let below: Vec<Vec<usize>> = (0..t.len())
        .map(|i| t.leaf_descendants(i).into_iter().map(|l| elem_of[&l]).collect())
        .collect();
    // every leaf pair gets the step at which it is first revealed
    let mut first = vec![i64::MAX; n * n];
    for (x, y) in rm.model.s_pairs() {
        let Some(top) = rm.ranking[x].overlap_max(&rm.ranking[y]) else {
            continue;
        };
        // revealed from the first integer step strictly above the overlap
        let from = top.floor().to_integer() + 1;
        for &u in &below[x] {
            for &v in &below[y] {
                if u != v {
                    first[u * n + v] = first[u * n + v].min(from);
                }
            }
        }
    }
    let mut steps = Vec::new();
    for i in 1..=m {
        let layer: Vec<usize> = (0..t.len())
            .filter(|&x| rm.ranking[x].contains(Rank::from_integer(i)))
            .collect();
        let parts = layer.iter().map(|&x| below[x].clone()).collect();
        let revealed = (0..n * n)
            .filter(|&k| {
                let f = first[k];
                if i == 1 {
                    f <= 1
                } else {
                    f == i
                }
            })
            .map(|k| (k / n, k % n))
            .collect();
        steps.push(Step::new(parts, revealed));
    }
    if n >= 2 {
        let rest = (0..n * n)
            .filter(|&k| k / n != k % n && first[k] > m)
            .map(|k| (k / n, k % n))
            .collect();
        steps.push(Step::new(vec![(0..n).collect()], rest));
    }
    let elements = leaves.into_iter().map(|(s, _)| s).collect();
    MergeSequence::from_indices(rm.model.name(), elements, steps)
}

/// Endpoints of `τ`-bounded merge-walks of order at most `r` from leaf `v`.
pub fn mwreach(rm: &RankedMergeModel, v: usize, tau: Rank, r: usize) -> Result<BTreeSet<usize>> {
    if tau >= rm.top() {
        return Err(CrateError::OutOfRange(format!(
            "tau {tau} must be below the root rank {}",
            rm.top()
        )));
    }
    if v >= rm.tree().len() || !rm.tree().is_leaf(v) {
        return Err(CrateError::OutOfRange(format!("node {v} is not a leaf")));
    }
    Ok(mwreach_unchecked(rm, &Partners::new(rm), v, tau, r))
}

/// S-partners of each node in either direction, with the overlap maximum.
pub(crate) struct Partners(Vec<Vec<(usize, Rank)>>);

impl Partners {
    pub(crate) fn new(rm: &RankedMergeModel) -> Self {
        let mut out = vec![Vec::new(); rm.tree().len()];
        for (x, y) in rm.model.s_pairs() {
            let top = rm.ranking[x]
                .overlap_max(&rm.ranking[y])
                .expect("valid rankings overlap on S pairs");
            out[x].push((y, top));
            out[y].push((x, top));
        }
        Partners(out)
    }
}

fn comparable_nodes(t: &TreeOrder, u: usize) -> Vec<usize> {
    let mut out = t.ancestors(u);
    out.extend(t.descendants(u).into_iter().skip(1));
    out
}

pub(crate) fn mwreach_unchecked(
    rm: &RankedMergeModel,
    partners: &Partners,
    v: usize,
    tau: Rank,
    r: usize,
) -> BTreeSet<usize> {
    let t = rm.tree();
    let endpoint = |w: usize| {
        rm.ranking[w].lo <= tau && t.parent(w).is_some_and(|p| tau < rm.ranking[p].lo)
    };
    let mut level = vec![usize::MAX; t.len()];
    level[v] = 0;
    let mut queue = VecDeque::from([v]);
    let mut out = BTreeSet::new();
    while let Some(u) = queue.pop_front() {
        let near = comparable_nodes(t, u);
        out.extend(near.iter().copied().filter(|&w| endpoint(w)));
        if level[u] == r {
            continue;
        }
        for &w in &near {
            for &(next, top) in &partners.0[w] {
                if top <= tau && level[next] == usize::MAX {
                    level[next] = level[u] + 1;
                    queue.push_back(next);
                }
            }
        }
    }
    out
}

/// Candidate walk bounds: every interval endpoint below the root rank.
pub fn tau_values(rm: &RankedMergeModel) -> Vec<Rank> {
    let top = rm.top();
    let set: BTreeSet<Rank> = rm
        .ranking
        .iter()
        .flat_map(|iv| [iv.lo, iv.hi])
        .filter(|&x| x < top)
        .collect();
    set.into_iter().collect()
}

/// Largest merge-walk reach over leaves and walk bounds.
pub fn ranked_width(rm: &RankedMergeModel, r: usize) -> Result<usize> {
    rm.validate()?;
    Ok(ranked_width_unchecked(rm, r))
}

pub(crate) fn ranked_width_unchecked(rm: &RankedMergeModel, r: usize) -> usize {
    let partners = Partners::new(rm);
    let leaves = rm.tree().leaves();
    let mut best = 0;
    for tau in tau_values(rm) {
        for &v in &leaves {
            best = best.max(mwreach_unchecked(rm, &partners, v, tau, r).len());
        }
    }
    best
}

/// Restriction to the skeleton followed by cleaning.
pub fn compactify_ranked(rm: &RankedMergeModel) -> Result<RankedMergeModel> {
    rm.validate()?;
    Ok(compactify_ranked_with(rm, &Hooks::default()))
}

pub(crate) fn compactify_ranked_with(rm: &RankedMergeModel, hooks: &Hooks) -> RankedMergeModel {
    let (model, old) = rm.model.restrict(&rm.model.skeleton());
    let ranking = old.iter().map(|&i| rm.ranking[i]).collect();
    (hooks.clean)(&RankedMergeModel::new(model, ranking))
}
