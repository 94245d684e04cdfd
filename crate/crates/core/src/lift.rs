//! A compact ranked merge-model of a merge-model viewed as a structure.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::model::{s_symbol, MergeModel, STuple, ORDER_SYMBOL};
use crate::ranked::{Interval, Rank, RankedMergeModel};
use crate::structure::Signature;
use crate::tree::TreeOrder;

fn fresh(base: &str, used: &mut BTreeSet<String>) -> String {
    let mut name = base.to_string();
    while used.contains(&name) {
        name.push('\'');
    }
    used.insert(name.clone());
    name
}

fn derived(signature: &Signature, m: &MergeModel, tu: &STuple) -> usize {
    let name = s_symbol(&m.signature().symbols()[tu.symbol], tu.alpha);
    signature.index_of(&name).expect("derived symbol")
}

/// Builds a ranked model whose leaves are the nodes of `rm` and whose
/// interpretation is the full structure of `rm` (loops aside).
///
/// Every leaf `v` keeps its name. Every internal node `u` yields a leaf
/// named `u` and a copy `u'` of its place in the tree, joined by an
/// order-symbol tuple. A fresh root carries negative loops for every symbol.
/// A one-node model lifts to its single leaf.
pub fn lift_model(rm: &RankedMergeModel) -> Result<RankedMergeModel> {
    let status = rm.validate()?;
    if let Some(why) = status.not_clean {
        return Err(Error::NotClean(why));
    }
    if !rm.model.is_compact() {
        return Err(Error::NotCompact);
    }
    let m = &rm.model;
    let t = m.tree();
    let n = t.len();
    let signature = m.full_signature();
    if n == 1 {
        // a lone leaf needs no root above it; one rank layer keeps width 0
        let tuples: Vec<STuple> = m
            .tuples()
            .iter()
            .map(|tu| STuple {
                symbol: derived(&signature, m, tu),
                alpha: 1,
                x: 0,
                y: 0,
            })
            .collect();
        let tree = TreeOrder::from_indices(vec![t.name(0).to_string()], vec![None])?;
        let lifted = MergeModel::new(m.name(), signature, tree, tuples);
        return Ok(RankedMergeModel::new(lifted, vec![Interval::int(1, 1)]));
    }
    let mut used: BTreeSet<String> = t.names().iter().cloned().collect();

    // node ids: 0 root, then leaf-encoding of every node, then copies
    let mut names = vec![fresh("rho", &mut used)];
    let mut parents: Vec<Option<usize>> = vec![None];
    let mut ranking = vec![Interval::new(rm.top() + 1, rm.top() + 1)];
    let enc: Vec<usize> = (0..n).map(|i| 1 + i).collect();
    let mut copy = vec![usize::MAX; n];
    let mut next = 1 + n;
    for i in 0..n {
        if !t.is_leaf(i) {
            copy[i] = next;
            next += 1;
        }
    }
    let above = |i: usize| t.parent(i).map_or(0, |p| copy[p]);
    for i in 0..n {
        names.push(t.name(i).to_string());
        parents.push(Some(above(i)));
        let iv = rm.interval(i);
        ranking.push(if t.is_leaf(i) {
            iv
        } else {
            Interval::new(Rank::from_integer(1), iv.hi)
        });
    }
    for i in 0..n {
        if !t.is_leaf(i) {
            names.push(fresh(&format!("{}'", t.name(i)), &mut used));
            parents.push(Some(above(i)));
            ranking.push(rm.interval(i));
        }
    }
    let tree = TreeOrder::from_indices(names, parents)?;

    let order = signature
        .index_of(ORDER_SYMBOL)
        .expect("full signatures contain the order symbol");
    let mut tuples = Vec::new();
    for z in 0..signature.len() {
        tuples.push(STuple {
            symbol: z,
            alpha: 0,
            x: 0,
            y: 0,
        });
    }
    for i in 0..n {
        if !t.is_leaf(i) {
            tuples.push(STuple {
                symbol: order,
                alpha: 1,
                x: enc[i],
                y: copy[i],
            });
        }
    }
    for tu in m.tuples() {
        tuples.push(STuple {
            symbol: derived(&signature, m, tu),
            alpha: 1,
            x: enc[tu.x],
            y: enc[tu.y],
        });
    }
    let lifted = MergeModel::new(m.name(), signature, tree, tuples);
    Ok(RankedMergeModel::new(lifted, ranking))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ranked::ranked_width;
    use crate::ranked::tests::ranked_p3;
    use crate::structure::matches_by_name;

    #[test]
    fn model_p3_lifts_to_eight_nodes() {
        let rm = ranked_p3();
        let lifted = lift_model(&rm).unwrap();
        assert_eq!(lifted.tree().len(), 8);
        let status = lifted.validate().unwrap();
        assert!(status.is_clean());
        assert!(lifted.model.is_compact());
        let s = lifted.model.interpret().unwrap();
        assert!(matches_by_name(&s, &rm.model.full_structure().without_loops()));
        let w = ranked_width(&lifted, 1).unwrap();
        assert!(w <= 2 * ranked_width(&rm, 1).unwrap());
    }

    #[test]
    fn negative_loop_becomes_positive_loop_on_leaf() {
        let lifted = lift_model(&ranked_p3()).unwrap();
        let t = lifted.tree();
        let leaf = t.index_of("N_ac").unwrap();
        assert!(t.is_leaf(leaf));
        let z = lifted.model.signature().index_of("S__E__0").unwrap();
        assert!(lifted.model.has(z, 1, leaf, leaf));
    }

    #[test]
    fn single_node_model() {
        let m = MergeModel::from_named("one", &["E"], &[("a", None)], &[]).unwrap();
        let rm = RankedMergeModel::new(m, vec![Interval::int(1, 1)]);
        let lifted = lift_model(&rm).unwrap();
        assert_eq!(lifted.tree().len(), 1);
        assert!(lifted.model.tuples().is_empty());
        assert!(lifted.validate().unwrap().is_clean());
        assert_eq!(ranked_width(&lifted, 1).unwrap(), 0);
        let s = lifted.model.interpret().unwrap();
        assert!(matches_by_name(&s, &rm.model.full_structure()));
    }

    #[test]
    fn rejects_unclean_and_non_compact() {
        let mut rm = ranked_p3();
        rm.ranking[0] = Interval::int(3, 4);
        assert!(matches!(lift_model(&rm), Err(Error::NotClean(_))));

        let m = MergeModel::from_named(
            "chain",
            &["E"],
            &[("r", None), ("x", Some("r")), ("a", Some("x")), ("b", Some("x"))],
            &[("E", 1, "r", "r")],
        )
        .unwrap();
        let rm = RankedMergeModel::new(
            m,
            vec![Interval::int(3, 3), Interval::int(2, 2), Interval::int(1, 1), Interval::int(1, 1)],
        );
        assert!(rm.is_clean());
        assert!(matches!(lift_model(&rm), Err(Error::NotCompact)));
    }
}
