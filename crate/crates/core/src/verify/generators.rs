//! Seeded generators for structures, sequences, expressions and rankings.
//!
//! Structures: the universe size is uniform in `1..=nmax`. Half are graphs
//! over `{E}` with an edge density drawn from a fixed sweep; the others are
//! loop-free `{E,F}` structures whose two relations are independent,
//! asymmetric, and have separately drawn densities.
//!
//! Expressions are sampled top-down: the element count is split at every
//! union (one side a single element when linear), and every union is
//! followed by up to three random add, symmetric add or relabel operations
//! over labels reused from `1..=t`.

use std::collections::BTreeSet;

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::cwe::{CliqueExpression, Expr};
use crate::oracle::for_each_canonical_sequence;
use crate::ranked::{Interval, Rank, RankedMergeModel};
use crate::sequence::{greedy_sequence, MergeSequence, Step};
use crate::structure::{BinaryStructure, Graph, Signature, EDGE, NON_EDGE};

const DENSITIES: [f64; 5] = [0.15, 0.3, 0.5, 0.7, 0.85];

/// Element names `a`, `b`, ... (then `v26`, `v27`, ...).
pub fn element_name(i: usize) -> String {
    if i < 26 {
        ((b'a' + i as u8) as char).to_string()
    } else {
        format!("v{i}")
    }
}

pub fn random_graph<R: Rng>(rng: &mut R, nmax: usize) -> Graph {
    let n = rng.gen_range(1..=nmax.max(1));
    let p = *DENSITIES.choose(rng).expect("non-empty");
    let sig = Signature::new([EDGE]).expect("one symbol");
    let mut s = BinaryStructure::new("g", sig, (0..n).map(element_name)).expect("distinct");
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                s.insert(0, u, v);
                s.insert(0, v, u);
            }
        }
    }
    Graph::try_new(s).expect("symmetric")
}

pub fn random_structure<R: Rng>(rng: &mut R, nmax: usize) -> BinaryStructure {
    if rng.gen_bool(0.5) {
        return random_graph(rng, nmax).into_structure();
    }
    let n = rng.gen_range(1..=nmax.max(1));
    let sig = Signature::new([EDGE, NON_EDGE]).expect("distinct");
    let mut s = BinaryStructure::new("g", sig, (0..n).map(element_name)).expect("distinct");
    let pe = *DENSITIES.choose(rng).expect("non-empty");
    let pf = *DENSITIES.choose(rng).expect("non-empty");
    for u in 0..n {
        for v in 0..n {
            if u != v {
                if rng.gen_bool(pe) {
                    s.insert(0, u, v);
                }
                if rng.gen_bool(pf) {
                    s.insert(1, u, v);
                }
            }
        }
    }
    s
}

/// Every loop-free structure on `n` elements over the given symbols.
pub fn all_structures(n: usize, symbols: &[&str]) -> Vec<BinaryStructure> {
    let sig = Signature::new(symbols.iter().copied()).expect("distinct");
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v)))
        .collect();
    let slots = pairs.len() * symbols.len();
    let mut out = Vec::with_capacity(1 << slots);
    for mask in 0u64..(1u64 << slots) {
        let mut s = BinaryStructure::new("g", sig.clone(), (0..n).map(element_name)).expect("distinct");
        for (k, &(u, v)) in pairs.iter().enumerate() {
            for z in 0..symbols.len() {
                if mask >> (z * pairs.len() + k) & 1 == 1 {
                    s.insert(z, u, v);
                }
            }
        }
        out.push(s);
    }
    out
}

/// A valid sequence for `g`: a random canonical one for tiny universes,
/// the greedy one otherwise, then with random repeated steps and random
/// early reveals.
pub fn random_sequence<R: Rng>(
    rng: &mut R,
    g: &BinaryStructure,
    r: usize,
    extra_reveals: bool,
) -> MergeSequence {
    let mut seq = None;
    if g.size() <= 3 {
        let mut all = Vec::new();
        for_each_canonical_sequence(g, 3, |s| all.push(s.clone())).expect("small");
        seq = all.choose(rng).cloned();
    }
    let mut seq = seq.unwrap_or_else(|| greedy_sequence(g, r));
    let n = g.size();
    if rng.gen_bool(0.5) && seq.len() >= 2 {
        let at = rng.gen_range(1..seq.len());
        let parts = seq.steps()[at - 1].parts.clone();
        seq.steps_mut().insert(at, Step::new(parts, BTreeSet::new()));
    }
    if extra_reveals && n >= 2 && rng.gen_bool(0.5) {
        let m = seq.len();
        for _ in 0..rng.gen_range(1..=3) {
            let u = rng.gen_range(0..n);
            let v = rng.gen_range(0..n);
            if u != v {
                let at = rng.gen_range(0..m);
                let already = seq.steps()[..at].iter().any(|s| s.revealed.contains(&(u, v)));
                if !already {
                    seq.steps_mut()[at].revealed.insert((u, v));
                    for s in &mut seq.steps_mut()[at + 1..] {
                        s.revealed.remove(&(u, v));
                    }
                }
            }
        }
    }
    seq
}

pub fn random_expression<R: Rng>(
    rng: &mut R,
    max_labels: usize,
    max_elements: usize,
    linear: bool,
) -> CliqueExpression {
    let t = rng.gen_range(1..=max_labels.max(1));
    let k = rng.gen_range(1..=max_elements.max(1));
    let symbols: &[&str] = if rng.gen_bool(0.5) { &[EDGE] } else { &[EDGE, NON_EDGE] };
    let mut next = 0;
    let root = build(rng, k, t, symbols, linear, &mut next);
    let mut e = CliqueExpression::new(Signature::new(symbols.iter().copied()).expect("distinct"), root);
    e.labels = t;
    e
}

fn build<R: Rng>(rng: &mut R, k: usize, t: usize, symbols: &[&str], linear: bool, next: &mut usize) -> Expr {
    if k == 1 {
        let name = element_name(*next);
        *next += 1;
        return Expr::create(rng.gen_range(1..=t), &name);
    }
    let left = if linear {
        if rng.gen_bool(0.5) { 1 } else { k - 1 }
    } else {
        rng.gen_range(1..k)
    };
    let a = build(rng, left, t, symbols, linear, next);
    let b = build(rng, k - left, t, symbols, linear, next);
    let mut e = Expr::union(a, b);
    if t >= 2 {
        for _ in 0..rng.gen_range(0..=3) {
            let i = rng.gen_range(1..=t);
            let mut j = rng.gen_range(1..t);
            if j >= i {
                j += 1;
            }
            let z = *symbols.choose(rng).expect("non-empty");
            e = match rng.gen_range(0..5) {
                0 | 1 => Expr::add(z, i, j, e),
                2 | 3 => Expr::add_sym(z, i, j, e),
                _ => Expr::relabel(i, j, e),
            };
        }
    }
    e
}

fn fraction<R: Rng>(rng: &mut R) -> Rank {
    Ratio::new(rng.gen_range(0..8), 8)
}

/// A valid, usually unclean, ranking of the same model: some left ends
/// move down (bottom-up, staying right of the children) and some right
/// ends move up (staying left of the parent).
pub fn perturb_ranking<R: Rng>(rng: &mut R, rm: &RankedMergeModel) -> RankedMergeModel {
    let t = rm.tree();
    let mut ranking = rm.ranking.clone();
    let mut order: Vec<usize> = (0..t.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(t.depth(i)));
    for &v in &order {
        let iv = ranking[v];
        let floor = t.children(v).iter().map(|&c| ranking[c].hi).max();
        ranking[v].lo = match floor {
            None => iv.lo - Rank::from_integer(rng.gen_range(0..3)),
            Some(f) => iv.lo - (iv.lo - f) * fraction(rng),
        };
    }
    for &v in order.iter().rev() {
        let iv = ranking[v];
        ranking[v].hi = match t.parent(v) {
            None => iv.hi + Rank::from_integer(rng.gen_range(0..3)),
            Some(p) => iv.hi + (ranking[p].lo - iv.hi) * fraction(rng),
        };
    }
    RankedMergeModel::new(rm.model.clone(), ranking)
}

/// Maps every endpoint through one random strictly increasing map.
pub fn rescale_ranking<R: Rng>(rng: &mut R, rm: &RankedMergeModel) -> RankedMergeModel {
    let values: BTreeSet<Rank> = rm.ranking.iter().flat_map(|iv| [iv.lo, iv.hi]).collect();
    let mut cur = Rank::from_integer(rng.gen_range(-5..5));
    let mut map = std::collections::BTreeMap::new();
    for v in values {
        cur += Ratio::new(rng.gen_range(1..=6), rng.gen_range(1..=3));
        map.insert(v, cur);
    }
    let ranking = rm
        .ranking
        .iter()
        .map(|iv| Interval::new(map[&iv.lo], map[&iv.hi]))
        .collect();
    RankedMergeModel::new(rm.model.clone(), ranking)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ranked::{cleaning, model_of_sequence};
    use crate::sequence::validate_sequence;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generators_are_deterministic_and_valid() {
        for seed in 0..40 {
            let mut a = ChaCha8Rng::seed_from_u64(seed);
            let mut b = ChaCha8Rng::seed_from_u64(seed);
            let g = random_structure(&mut a, 5);
            assert_eq!(g, random_structure(&mut b, 5));
            assert!((1..=5).contains(&g.size()));
            let seq = random_sequence(&mut a, &g, 1, true);
            validate_sequence(&seq, &g).unwrap();
            let rm = model_of_sequence(&seq, &g).unwrap();
            let p = perturb_ranking(&mut a, &rm);
            p.validate().unwrap();
            let s = rescale_ranking(&mut a, &p);
            s.validate().unwrap();
            assert_eq!(cleaning(&s).unwrap(), cleaning(&p).unwrap());
            let e = random_expression(&mut a, 4, 10, seed % 2 == 0);
            assert!(e.labels <= 4);
            if seed % 2 == 0 {
                assert!(e.is_linear());
            }
            e.eval().unwrap();
        }
    }

    #[test]
    fn all_structures_counts() {
        assert_eq!(all_structures(1, &["E"]).len(), 1);
        assert_eq!(all_structures(2, &["E"]).len(), 4);
        assert_eq!(all_structures(3, &["E"]).len(), 64);
        assert_eq!(all_structures(2, &["E", "F"]).len(), 16);
    }
}
