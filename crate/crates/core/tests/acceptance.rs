//! Acceptance run: one line per criterion, exact integer comparisons.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mergewidth::cwe::complement_expansion_expr;
use mergewidth::format::{parse_mmod, write_bst, write_mseq, write_ranked};
use mergewidth::lift::lift_model;
use mergewidth::oracle::{mw_exact, mw_unreduced};
use mergewidth::ranked::{
    cleaning, compactify_ranked, model_of_sequence, ranked_width, sequence_of_model,
};
use mergewidth::sequence::{greedy_sequence, width};
use mergewidth::structure::{
    biclique_number, gaifman, matches_by_name, reduct, BinaryStructure, Graph, EDGE,
};
use mergewidth::twin::{twin_model_from_cliqueexpr, twin_to_merge};
use mergewidth::verify::generators::{
    all_structures, perturb_ranking, random_expression, random_graph, rescale_ranking,
};
use mergewidth::{MergeSequence, RankedMergeModel, Signature};

const SEED: u64 = 2024;
const RADII: [usize; 3] = [1, 2, 3];
const CORPUS: usize = 200;
const NMAX: usize = 7;

struct Outcome {
    checked: usize,
    failures: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            checked: 0,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures.push(what());
        }
    }
}

struct Item {
    g: BinaryStructure,
    seq: MergeSequence,
    rm: RankedMergeModel,
}

impl Item {
    fn dump(&self) -> String {
        format!(
            "--- structure\n{}--- sequence\n{}--- model\n{}",
            write_bst(&self.g),
            write_mseq(&self.seq),
            write_ranked(&self.rm)
        )
    }
}

/// 200 structures with up to 7 elements, half over `{E}` and half over
/// `{E,F}`, each with its greedy sequence.
fn corpus() -> Vec<Item> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    (0..CORPUS)
        .map(|k| {
            let n = rng.gen_range(1..=NMAX);
            let g = if k % 2 == 0 {
                random_graph(&mut rng, n).into_structure()
            } else {
                random_ef(&mut rng, n)
            };
            let seq = greedy_sequence(&g, 1);
            let rm = model_of_sequence(&seq, &g).expect("greedy sequences are valid");
            Item { g, seq, rm }
        })
        .collect()
}

fn random_ef(rng: &mut ChaCha8Rng, n: usize) -> BinaryStructure {
    let sig = Signature::new([EDGE, "F"]).unwrap();
    let names = (0..n).map(|i| format!("v{i}"));
    let mut s = BinaryStructure::new("g", sig, names).unwrap();
    let (pe, pf) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
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

fn fixture(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "fixtures", name].iter().collect();
    std::fs::read_to_string(path).expect("fixture present")
}

fn round_trip(items: &[Item]) -> Outcome {
    let mut o = Outcome::new();
    for it in items {
        let s = it.rm.model.interpret().unwrap();
        o.check(matches_by_name(&s, &it.g), || format!("interpretation differs\n{}", it.dump()));
    }
    o
}

fn width_equality(items: &[Item]) -> Outcome {
    let mut o = Outcome::new();
    for it in items {
        let seq = sequence_of_model(&it.rm).unwrap();
        for r in RADII {
            let a = width(&seq, &it.g, r).unwrap();
            let b = ranked_width(&it.rm, r).unwrap();
            o.check(a == b, || format!("r={r}: width {a}, ranked width {b}\n{}", it.dump()));
        }
    }
    o
}

fn contraction(items: &[Item]) -> Outcome {
    let mut o = Outcome::new();
    for it in items {
        let seq = sequence_of_model(&it.rm).unwrap();
        for r in RADII {
            let a = width(&seq, &it.g, r).unwrap();
            let b = width(&it.seq, &it.g, r).unwrap();
            o.check(a <= b, || format!("r={r}: {a} > {b}\n{}", it.dump()));
        }
    }
    o
}

fn cleaning_checks(items: &[Item]) -> Outcome {
    let mut o = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);
    for k in 0..CORPUS {
        let it = &items[k % items.len()];
        let p = perturb_ranking(&mut rng, &it.rm);
        let c = cleaning(&p).unwrap();
        o.check(cleaning(&c).unwrap() == c, || format!("not idempotent\n{}", write_ranked(&p)));
        for r in RADII {
            let a = ranked_width(&c, r).unwrap();
            let b = ranked_width(&p, r).unwrap();
            o.check(a <= b, || format!("r={r}: cleaning raised {b} to {a}\n{}", write_ranked(&p)));
        }
        let q = rescale_ranking(&mut rng, &p);
        o.check(cleaning(&q).unwrap() == c, || {
            format!("rescaling changed the cleaning\n{}", write_ranked(&p))
        });
    }
    o
}

fn sigma_part_biclique(rm: &RankedMergeModel) -> usize {
    let full = rm.model.full_structure();
    let syms: Vec<&str> = full.signature().symbols()[1..].iter().map(String::as_str).collect();
    biclique_number(&gaifman(&reduct(&full, &syms).unwrap()), 64).unwrap()
}

fn biclique_bound(items: &[Item]) -> Outcome {
    let mut o = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 5);
    for it in items {
        for rm in [it.rm.clone(), perturb_ranking(&mut rng, &it.rm)] {
            let b = sigma_part_biclique(&rm);
            let w = ranked_width(&rm, 1).unwrap();
            o.check(b <= w, || format!("biclique {b} > width {w}\n{}", write_ranked(&rm)));
        }
    }
    o
}

fn compactification(items: &[Item]) -> Outcome {
    let mut o = Outcome::new();
    for it in items {
        let c = compactify_ranked(&it.rm).unwrap();
        let s = c.model.interpret().unwrap();
        o.check(matches_by_name(&s, &it.g), || format!("interpretation changed\n{}", it.dump()));
        for r in RADII {
            let a = ranked_width(&c, r).unwrap();
            let b = ranked_width(&it.rm, r).unwrap();
            o.check(a <= b, || {
                format!("r={r}: compact width {a} > {b}\n{}--- compact\n{}", it.dump(), write_ranked(&c))
            });
        }
    }
    o
}

fn model_of_model(items: &[Item]) -> Outcome {
    let mut o = Outcome::new();
    let p3 = parse_mmod(&fixture("model-p3.mmod")).unwrap().ranked().unwrap();
    let lifted = lift_model(&p3).unwrap();
    o.check(lifted.tree().len() == 8, || format!("P3 lift has {} nodes", lifted.tree().len()));
    for it in items {
        let c = compactify_ranked(&it.rm).unwrap();
        let l = lift_model(&c).unwrap();
        let st = l.validate().unwrap();
        o.check(st.is_clean() && l.model.is_compact(), || format!("lift not clean+compact\n{}", write_ranked(&c)));
        let s = l.model.interpret().unwrap();
        o.check(matches_by_name(&s, &c.model.full_structure().without_loops()), || {
            format!("lift interprets wrongly\n{}", write_ranked(&c))
        });
        for r in RADII {
            let a = ranked_width(&l, r).unwrap();
            let b = ranked_width(&c, r).unwrap();
            o.check(a <= 2 * b, || format!("r={r}: lift width {a} > 2*{b}\n{}", write_ranked(&c)));
        }
    }
    o
}

fn clique_expressions() -> Outcome {
    let mut o = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 8);
    for k in 0..100 {
        let e = random_expression(&mut rng, 4, 10, k % 2 == 0);
        let t = e.labels;
        let ev = e.eval().unwrap();
        let (tm, witness) = twin_model_from_cliqueexpr(&e).unwrap();
        o.check(tm.validate().is_ok(), || format!("expression {k}: twin-model invalid"));
        o.check(matches_by_name(&tm.interpret().unwrap(), &ev.structure), || {
            format!("expression {k}: interpretation differs")
        });
        let b = biclique_number(&tm.z_graph(), 64).unwrap();
        o.check(b <= 2 * t, || format!("expression {k}: biclique {b} > 2*{t}"));
        o.check(witness.labels <= 2 * t, || format!("expression {k}: {} labels", witness.labels));
        o.check(!e.is_linear() || witness.is_linear(), || format!("expression {k}: witness not linear"));
        o.check(
            matches_by_name(&witness.eval().unwrap().structure, &tm.full_structure()),
            || format!("expression {k}: witness builds another structure"),
        );
    }
    o
}

fn twin_width_direction() -> Outcome {
    let mut o = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 9);
    for k in 0..100 {
        let g = random_graph(&mut rng, 6);
        let (tm, _) = twin_model_from_cliqueexpr(&complement_expansion_expr(&g)).unwrap();
        match twin_to_merge(&tm) {
            Ok(m) => {
                o.check(m.is_loopless(), || format!("graph {k}: loop"));
                o.check(m.validate().is_ok(), || format!("graph {k}: invalid"));
                let s = m.interpret().unwrap();
                o.check(matches_by_name(&s, g.structure()), || format!("graph {k}: interpretation differs"));
            }
            Err(e) => o.check(false, || format!("graph {k}: {e}")),
        }
    }
    o
}

fn complete(n: usize) -> Graph {
    let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            edges.push((refs[i], refs[j]));
        }
    }
    Graph::from_edges("k", &refs, &edges).unwrap()
}

fn edgeless(n: usize) -> Graph {
    let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    Graph::from_edges("e", &refs, &[]).unwrap()
}

fn oracle() -> Outcome {
    let mut o = Outcome::new();
    let mut slowest = Duration::ZERO;
    for n in 2..=5 {
        for g in [complete(n), edgeless(n)] {
            let start = Instant::now();
            let (w, _) = mw_exact(g.structure(), 1, 5).unwrap();
            slowest = slowest.max(start.elapsed());
            o.check(w == 1, || format!("{} on {n} vertices: {w}", g.structure().name()));
        }
    }
    o.check(slowest <= Duration::from_secs(30), || format!("oracle took {slowest:?}"));
    let p3 = Graph::from_edges("p3", &["a", "b", "c"], &[("a", "b"), ("b", "c")]).unwrap();
    let (w, witness) = mw_exact(p3.structure(), 1, 5).unwrap();
    o.check(w == 1, || format!("P3: {w}"));
    o.check(width(&witness, p3.structure(), 1).unwrap() == 1, || "P3 witness width".into());
    for n in 1..=3 {
        for g in all_structures(n, &[EDGE]) {
            let a = mw_exact(&g, 1, 3).unwrap().0;
            let b = mw_unreduced(&g, 1, 6).unwrap();
            o.check(a == b, || format!("exact {a} but unreduced {b}\n{}", write_bst(&g)));
        }
    }
    for n in 1..=4 {
        for syms in [&[EDGE][..], &[EDGE, "F"][..]] {
            if n == 4 && syms.len() == 2 {
                continue;
            }
            for g in all_structures(n, syms) {
                for r in [1, 2] {
                    let w = mw_exact(&g, r, 4).unwrap().0;
                    let wg = mw_exact(gaifman(&g).structure(), r, 4).unwrap().0;
                    let we = mw_exact(&reduct(&g, &[EDGE]).unwrap(), r, 4).unwrap().0;
                    o.check(wg <= w && we <= w, || format!("r={r}: reducts exceed {w}\n{}", write_bst(&g)));
                }
            }
        }
    }
    o
}

fn main() -> ExitCode {
    let items = corpus();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("round trip", Box::new(|| round_trip(&items))),
        ("width equality", Box::new(|| width_equality(&items))),
        ("sequence contraction", Box::new(|| contraction(&items))),
        ("cleaning", Box::new(|| cleaning_checks(&items))),
        ("biclique bound", Box::new(|| biclique_bound(&items))),
        ("compactification", Box::new(|| compactification(&items))),
        ("model of model", Box::new(|| model_of_model(&items))),
        ("clique-width to twin-model", Box::new(clique_expressions)),
        ("twin-model to merge-model", Box::new(twin_width_direction)),
        ("exact oracle", Box::new(oracle)),
    ];
    let mut all = true;
    let mut details = String::new();
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let secs = start.elapsed().as_secs_f64();
        let ok = o.failures.is_empty();
        all &= ok;
        println!(
            "criterion {:>2} {:<28} {}  ({} checks, {} failures, {secs:.2}s)",
            k + 1,
            name,
            if ok { "PASS" } else { "FAIL" },
            o.checked,
            o.failures.len()
        );
        if let Some(first) = o.failures.first() {
            details.push_str(&format!("criterion {} first failure: {first}\n", k + 1));
        }
    }
    if !details.is_empty() {
        println!("\n{details}");
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
