//! Randomised and exhaustive checks of the relations between sequences,
//! models, rankings, widths and the constructions, with reports that carry
//! counterexamples in the native file formats.

pub mod generators;

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cwe::complement_expansion_expr;
use crate::error::{Error, Result};
use crate::format::{write_bst, write_cwe, write_mseq, write_ranked, write_tmod};
use crate::lift::lift_model;
use crate::oracle::{for_each_canonical_sequence, mw_exact, mw_unreduced, UNREDUCED_LIMIT};
use crate::ranked::{
    cleaning_shifted, compactify_ranked_with, model_of_sequence_with, ranked_width,
    sequence_of_model, Hooks, Rank, RankedMergeModel,
};
use crate::sequence::{validate_sequence, width, MergeSequence};
use crate::structure::{
    biclique_number, gaifman, matches_by_name, reduct, BinaryStructure, EDGE,
};
use crate::twin::{twin_model_from_cliqueexpr, twin_to_merge};
use generators::{
    all_structures, perturb_ranking, random_expression, random_graph, random_sequence,
    random_structure, rescale_ranking,
};

/// Bound passed to the biclique search; far above any generated size.
const BICLIQUE_LIMIT: usize = 64;
/// Universe bound for checks that run the exact search.
const ORACLE_NMAX: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Profile {
    /// Graphs over `{E}` only.
    Graphs,
    /// Graphs and `{E,F}` structures.
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrialConfig {
    pub seed: u64,
    pub nmax: usize,
    pub trials: usize,
    pub radii: Vec<usize>,
    pub profile: Profile,
    /// Run only the named check.
    pub only: Option<String>,
    /// Also reveal a few random pairs earlier than the sequence needs.
    pub extra_reveals: bool,
}

impl TrialConfig {
    pub fn new(seed: u64, nmax: usize, trials: usize) -> Self {
        TrialConfig {
            seed,
            nmax,
            trials,
            radii: vec![1, 2, 3],
            profile: Profile::Mixed,
            only: None,
            extra_reveals: false,
        }
    }

    fn check(&self) -> Result<()> {
        if self.nmax == 0 || self.trials == 0 || self.radii.is_empty() || self.radii.contains(&0) {
            return Err(Error::OutOfRange(
                "nmax, trials and radii must be positive".into(),
            ));
        }
        if let Some(name) = &self.only {
            if !LEMMAS.contains(&name.as_str()) && name != ORACLE {
                return Err(Error::OutOfRange(format!(
                    "unknown check `{name}`; known: {}, {ORACLE}",
                    LEMMAS.join(", ")
                )));
            }
        }
        Ok(())
    }
}

/// One failed trial with the files needed to replay it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub trial: usize,
    pub message: String,
    /// `(file name, contents)` pairs.
    pub files: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LemmaReport {
    pub lemma: String,
    pub trials: usize,
    pub failures: Vec<Failure>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn line(&self) -> String {
        format!(
            "{} {}: {} trials, {} failures",
            if self.passed() { "ok  " } else { "FAIL" },
            self.lemma,
            self.trials,
            self.failures.len()
        )
    }
}

/// Names accepted by [`TrialConfig::only`], in run order.
pub const LEMMAS: [&str; 15] = [
    "seq_to_mod",
    "width_eq_w",
    "sigmap",
    "cleaning",
    "clean_is_min",
    "tau",
    "ws_model",
    "comp",
    "model_of_model",
    "min_sigma",
    "mw_red",
    "mw_w",
    "cw_model",
    "mw_tww",
    "sequenceable",
];

/// Name of the oracle cross-check.
pub const ORACLE: &str = "oracle";

type Check = std::result::Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lib<T>(r: Result<T>, what: &str) -> std::result::Result<T, String> {
    r.map_err(|e| format!("{what}: {e}"))
}

fn trial_rng(seed: u64, lemma: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((lemma as u64) << 32) | trial as u64);
    rng
}

/// What a structure-based trial works on.
struct Case {
    g: BinaryStructure,
    seq: MergeSequence,
    rm: Option<RankedMergeModel>,
}

impl Case {
    fn files(&self) -> Vec<(String, String)> {
        let mut f = vec![
            ("structure.bst".to_string(), write_bst(&self.g)),
            ("sequence.mseq".to_string(), write_mseq(&self.seq)),
        ];
        if let Some(rm) = &self.rm {
            f.push(("model.mmod".to_string(), write_ranked(rm)));
        }
        f
    }
}

struct Runner<'a> {
    cfg: &'a TrialConfig,
    hooks: Hooks,
}

impl Runner<'_> {
    fn structure(&self, rng: &mut ChaCha8Rng, nmax: usize) -> BinaryStructure {
        match self.cfg.profile {
            Profile::Graphs => random_graph(rng, nmax).into_structure(),
            Profile::Mixed => random_structure(rng, nmax),
        }
    }

    fn case(&self, rng: &mut ChaCha8Rng, nmax: usize) -> Case {
        let g = self.structure(rng, nmax);
        let r = self.cfg.radii[rng.gen_range(0..self.cfg.radii.len())];
        let seq = random_sequence(rng, &g, r, self.cfg.extra_reveals);
        let rm = model_of_sequence_with(&seq, &g, &self.hooks).ok();
        Case { g, seq, rm }
    }

    fn model(case: &Case) -> std::result::Result<&RankedMergeModel, String> {
        case.rm.as_ref().ok_or_else(|| "model_of_sequence rejected a valid sequence".to_string())
    }

    fn run(&self, lemma: usize, name: &str) -> LemmaReport {
        let mut failures = Vec::new();
        for trial in 0..self.cfg.trials {
            let mut rng = trial_rng(self.cfg.seed, lemma, trial);
            let mut files = Vec::new();
            let outcome = catch_unwind(AssertUnwindSafe(|| self.trial(name, &mut rng, &mut files)))
                .unwrap_or_else(|p| {
                    let msg = p
                        .downcast_ref::<String>()
                        .cloned()
                        .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                        .unwrap_or_default();
                    Err(format!("panicked: {msg}"))
                });
            if let Err(message) = outcome {
                failures.push(Failure {
                    trial,
                    message,
                    files,
                });
            }
        }
        LemmaReport {
            lemma: name.to_string(),
            trials: self.cfg.trials,
            failures,
        }
    }

    fn trial(&self, name: &str, rng: &mut ChaCha8Rng, files: &mut Vec<(String, String)>) -> Check {
        let radii = &self.cfg.radii;
        let nmax = self.cfg.nmax;
        match name {
            "cw_model" => {
                let linear = rng.gen_bool(0.5);
                let e = random_expression(rng, 4, 10, linear);
                files.push(("expression.cwe".into(), write_cwe(&e)));
                check_cw_model(&e, files)
            }
            "mw_tww" => {
                let g = random_graph(rng, nmax.min(6));
                files.push(("graph.bst".into(), write_bst(g.structure())));
                let e = complement_expansion_expr(&g);
                let (t, _) = lib(twin_model_from_cliqueexpr(&e), "twin-model")?;
                files.push(("twin.tmod".into(), write_tmod(&t)));
                let m = lib(twin_to_merge(&t), "twin_to_merge")?;
                ensure(m.is_loopless(), || "translated model has a loop".into())?;
                let s = lib(m.interpret(), "interpret")?;
                ensure(matches_by_name(&s, g.structure()), || "interpretation differs from the graph".into())
            }
            "min_sigma" | "mw_red" | "mw_w" => {
                let case = self.case(rng, nmax.min(ORACLE_NMAX));
                files.extend(case.files());
                self.oracle_trial(name, &case, rng)
            }
            _ => {
                let case = self.case(rng, nmax);
                files.extend(case.files());
                self.model_trial(name, &case, radii, rng, files)
            }
        }
    }

    fn model_trial(
        &self,
        name: &str,
        case: &Case,
        radii: &[usize],
        rng: &mut ChaCha8Rng,
        files: &mut Vec<(String, String)>,
    ) -> Check {
        let g = &case.g;
        let rm = Self::model(case)?;
        let status = lib(rm.validate(), "model of sequence")?;
        match name {
            "seq_to_mod" => {
                ensure(status.is_clean(), || format!("model of sequence not clean: {:?}", status.not_clean))?;
                let s = lib(rm.model.interpret(), "interpret")?;
                ensure(matches_by_name(&s, g), || "interpretation differs from the structure".into())
            }
            "sequenceable" => {
                let ok = lib(rm.model.is_sequenceable(), "sequenceability")?;
                ensure(ok, || "model of a sequence is not sequenceable".into())
            }
            "width_eq_w" => {
                let seq = lib(sequence_of_model(rm), "sequence of model")?;
                files.push(("sequence-of-model.mseq".into(), write_mseq(&seq)));
                let s = lib(rm.model.interpret(), "interpret")?;
                lib(validate_sequence(&seq, &s), "sequence of model")?;
                for &r in radii {
                    let a = lib(width(&seq, &s, r), "width")?;
                    let b = lib(ranked_width(rm, r), "ranked width")?;
                    ensure(a == b, || format!("r={r}: width {a} but ranked width {b}"))?;
                }
                Ok(())
            }
            "sigmap" => {
                let seq = lib(sequence_of_model(rm), "sequence of model")?;
                files.push(("sequence-of-model.mseq".into(), write_mseq(&seq)));
                for &r in radii {
                    let a = lib(width(&seq, g, r), "width of sequence of model")?;
                    let b = lib(width(&case.seq, g, r), "width")?;
                    ensure(a <= b, || format!("r={r}: contracted width {a} > original {b}"))?;
                }
                Ok(())
            }
            "cleaning" => {
                let c = (self.hooks.clean)(rm);
                ensure(c == *rm, || "cleaning a clean model changed it".into())?;
                let p = perturb_ranking(rng, rm);
                files.push(("perturbed.mmod".into(), write_ranked(&p)));
                lib(p.validate(), "perturbed ranking")?;
                let cp = (self.hooks.clean)(&p);
                ensure(cp.is_clean(), || "cleaning output is not clean".into())?;
                ensure((self.hooks.clean)(&cp) == cp, || "cleaning is not idempotent".into())?;
                let q = rescale_ranking(rng, &p);
                files.push(("rescaled.mmod".into(), write_ranked(&q)));
                ensure((self.hooks.clean)(&q) == cp, || "cleaning depends on more than the order of endpoints".into())
            }
            "clean_is_min" => {
                let p = perturb_ranking(rng, rm);
                files.push(("perturbed.mmod".into(), write_ranked(&p)));
                let cp = (self.hooks.clean)(&p);
                for &r in radii {
                    let a = lib(ranked_width(&cp, r), "ranked width of cleaning")?;
                    let b = lib(ranked_width(&p, r), "ranked width")?;
                    ensure(a <= b, || format!("r={r}: cleaning raised width from {b} to {a}"))?;
                }
                Ok(())
            }
            "tau" => {
                let t = rm.tree();
                let m = rm.top().to_integer();
                for x in 0..t.len() {
                    let Some(p) = t.parent(x) else { continue };
                    for tau in 1..m {
                        let tau = Rank::from_integer(tau);
                        let a = rm.ranking[x].lo <= tau && tau < rm.ranking[p].lo;
                        ensure(a == rm.ranking[x].contains(tau), || {
                            format!("tau={tau}: endpoint rule and membership disagree at {}", t.name(x))
                        })?;
                    }
                }
                for i in 1..=m {
                    let layer: Vec<usize> = (0..t.len())
                        .filter(|&x| rm.ranking[x].contains(Rank::from_integer(i)))
                        .collect();
                    ensure(t.is_antichain(&layer, true), || format!("layer {i} is not a maximal antichain"))?;
                }
                Ok(())
            }
            "ws_model" => {
                for model in [rm.clone(), perturb_ranking(rng, rm)] {
                    let b = lib(sigma_biclique(&model), "biclique number")?;
                    let w = lib(ranked_width(&model, 1), "ranked width")?;
                    ensure(b <= w, || format!("biclique number {b} > ranked width {w}"))?;
                }
                Ok(())
            }
            "comp" => {
                let p = perturb_ranking(rng, rm);
                for (label, model) in [("clean", rm), ("perturbed", &p)] {
                    let c = compactify_ranked_with(model, &self.hooks);
                    files.push((format!("compact-{label}.mmod"), write_ranked(&c)));
                    let st = lib(c.validate(), "compactification")?;
                    ensure(st.is_clean(), || "compactification is not clean".into())?;
                    ensure(c.model.is_compact(), || "compactification is not compact".into())?;
                    let a = lib(c.model.interpret(), "interpret")?;
                    ensure(matches_by_name(&a, g), || format!("{label}: compactification changed the interpretation"))?;
                    for &r in radii {
                        let x = lib(ranked_width(&c, r), "ranked width")?;
                        let y = lib(ranked_width(model, r), "ranked width")?;
                        ensure(x <= y, || format!("{label}, r={r}: compactification raised width from {y} to {x}"))?;
                    }
                }
                Ok(())
            }
            "model_of_model" => {
                let c = compactify_ranked_with(rm, &self.hooks);
                files.push(("compact.mmod".into(), write_ranked(&c)));
                let lifted = lib(lift_model(&c), "lift")?;
                files.push(("lifted.mmod".into(), write_ranked(&lifted)));
                let st = lib(lifted.validate(), "lifted model")?;
                ensure(st.is_clean(), || "lifted model is not clean".into())?;
                ensure(lifted.model.is_compact(), || "lifted model is not compact".into())?;
                let s = lib(lifted.model.interpret(), "interpret")?;
                ensure(matches_by_name(&s, &c.model.full_structure().without_loops()), || {
                    "lifted model does not interpret to the model".into()
                })?;
                for &r in radii {
                    let x = lib(ranked_width(&lifted, r), "ranked width")?;
                    let y = lib(ranked_width(&c, r), "ranked width")?;
                    ensure(x <= 2 * y, || format!("r={r}: lifted width {x} > 2*{y}"))?;
                }
                Ok(())
            }
            other => unreachable!("unknown check {other}"),
        }
    }

    fn oracle_trial(&self, name: &str, case: &Case, rng: &mut ChaCha8Rng) -> Check {
        let g = &case.g;
        let n = g.size();
        let r = self.cfg.radii[rng.gen_range(0..self.cfg.radii.len())];
        match name {
            "min_sigma" => {
                let mut more = case.seq.clone();
                if n >= 2 {
                    let u = rng.gen_range(0..n);
                    let v = (u + rng.gen_range(1..n)) % n;
                    let at = rng.gen_range(0..more.len());
                    if !more.steps()[..at].iter().any(|s| s.revealed.contains(&(u, v))) {
                        more.steps_mut()[at].revealed.insert((u, v));
                        for s in &mut more.steps_mut()[at + 1..] {
                            s.revealed.remove(&(u, v));
                        }
                    }
                }
                let a = lib(width(&case.seq, g, r), "width")?;
                let b = lib(width(&more, g, r), "width with extra reveal")?;
                ensure(a <= b, || format!("r={r}: extra reveal lowered width from {a} to {b}"))
            }
            "mw_red" => {
                let (w, _) = lib(mw_exact(g, r, ORACLE_NMAX), "oracle")?;
                let (wg, _) = lib(mw_exact(gaifman(g).structure(), r, ORACLE_NMAX), "oracle")?;
                let (we, _) = lib(mw_exact(&lib(reduct(g, &[EDGE]), "reduct")?, r, ORACLE_NMAX), "oracle")?;
                ensure(wg <= w && we <= w, || format!("r={r}: reducts {we}, gaifman {wg} exceed {w}"))
            }
            "mw_w" => {
                let (w, witness) = lib(mw_exact(g, r, ORACLE_NMAX), "oracle")?;
                ensure(lib(width(&witness, g, r), "witness")? == w, || "witness width differs".into())?;
                let mut best = usize::MAX;
                let mut err = None;
                lib(
                    for_each_canonical_sequence(g, ORACLE_NMAX, |s| {
                        match model_of_sequence_with(s, g, &self.hooks).and_then(|rm| ranked_width(&rm, r)) {
                            Ok(x) => best = best.min(x),
                            Err(e) => err = Some(e.to_string()),
                        }
                    }),
                    "enumeration",
                )?;
                if let Some(e) = err {
                    return Err(e);
                }
                ensure(best == w, || format!("r={r}: best model width {best} but merge-width {w}"))
            }
            other => unreachable!("unknown check {other}"),
        }
    }
}

/// Biclique number of the Gaifman graph of the tuple part of a model.
fn sigma_biclique(rm: &RankedMergeModel) -> Result<usize> {
    let full = rm.model.full_structure();
    let symbols: Vec<&str> = full.signature().symbols()[1..].iter().map(String::as_str).collect();
    biclique_number(&gaifman(&reduct(&full, &symbols)?), BICLIQUE_LIMIT)
}

fn check_cw_model(e: &crate::cwe::CliqueExpression, files: &mut Vec<(String, String)>) -> Check {
    let t = e.labels;
    let ev = lib(e.eval(), "evaluation")?;
    let (tm, witness) = lib(twin_model_from_cliqueexpr(e), "twin-model")?;
    files.push(("twin.tmod".into(), write_tmod(&tm)));
    files.push(("witness.cwe".into(), write_cwe(&witness)));
    tm.validate().map_err(|v| format!("twin-model invalid: {v}"))?;
    let s = lib(tm.interpret(), "interpret")?;
    ensure(matches_by_name(&s, &ev.structure), || "twin-model interprets to another structure".into())?;
    let b = lib(biclique_number(&tm.z_graph(), BICLIQUE_LIMIT), "biclique number")?;
    ensure(b <= 2 * t, || format!("biclique number {b} > 2*{t}"))?;
    ensure(witness.labels <= 2 * t, || format!("witness uses {} labels", witness.labels))?;
    ensure(!e.is_linear() || witness.is_linear(), || "witness of a linear expression is not linear".into())?;
    let w = lib(witness.eval(), "witness evaluation")?;
    ensure(matches_by_name(&w.structure, &tm.full_structure()), || "witness builds another structure".into())
}

/// Runs every check (or the one named in `cfg.only`) with the real pipeline.
pub fn run_lemma_suite(cfg: &TrialConfig) -> Result<Vec<LemmaReport>> {
    run_lemma_suite_with(cfg, Hooks::default())
}

/// As [`run_lemma_suite`] with replaced pipeline pieces.
pub fn run_lemma_suite_with(cfg: &TrialConfig, hooks: Hooks) -> Result<Vec<LemmaReport>> {
    cfg.check()?;
    let runner = Runner { cfg, hooks };
    let mut out = Vec::new();
    for (k, name) in LEMMAS.iter().enumerate() {
        if cfg.only.as_deref().is_none_or(|o| o == *name) {
            out.push(runner.run(k, name));
        }
    }
    if cfg.only.as_deref().is_none_or(|o| o == ORACLE) {
        out.push(oracle_crosscheck(cfg)?);
    }
    Ok(out)
}

/// A cleaning whose ranks start at 2: an off-by-one used to show that the
/// checks catch broken pipelines.
pub fn off_by_one_cleaning(rm: &RankedMergeModel) -> RankedMergeModel {
    cleaning_shifted(rm, 1)
}

pub fn broken_hooks() -> Hooks {
    Hooks {
        clean: off_by_one_cleaning,
    }
}

/// Compares the exact search with the unreduced enumerator on every
/// structure of the profile with at most `min(nmax, 3)` elements.
pub fn oracle_crosscheck(cfg: &TrialConfig) -> Result<LemmaReport> {
    cfg.check()?;
    let symbols: &[&str] = match cfg.profile {
        Profile::Graphs => &[EDGE],
        Profile::Mixed => &[EDGE, "F"],
    };
    let mut failures = Vec::new();
    let mut trials = 0;
    for n in 1..=cfg.nmax.min(UNREDUCED_LIMIT) {
        for syms in [&symbols[..1], symbols] {
            if syms.len() == 2 && n == UNREDUCED_LIMIT {
                // 4096 structures; the one-symbol sweep already covers n = 3
                continue;
            }
            for g in all_structures(n, syms) {
                for &r in &cfg.radii {
                    trials += 1;
                    let a = mw_exact(&g, r, UNREDUCED_LIMIT)?.0;
                    let b = mw_unreduced(&g, r, 6)?;
                    if a != b {
                        failures.push(Failure {
                            trial: trials - 1,
                            message: format!("r={r}: exact {a} but unreduced {b}"),
                            files: vec![("structure.bst".into(), write_bst(&g))],
                        });
                    }
                }
            }
        }
    }
    Ok(LemmaReport {
        lemma: ORACLE.to_string(),
        trials,
        failures,
    })
}

/// Line-oriented text report.
pub fn report_text(reports: &[LemmaReport]) -> String {
    let mut out = String::new();
    for r in reports {
        writeln!(out, "{}", r.line()).unwrap();
        for f in &r.failures {
            writeln!(out, "  trial {}: {}", f.trial, f.message).unwrap();
        }
    }
    out
}

/// Machine-readable summary.
pub fn report_json(cfg: &TrialConfig, reports: &[LemmaReport]) -> String {
    #[derive(Serialize)]
    struct Summary<'a> {
        config: &'a TrialConfig,
        passed: bool,
        reports: &'a [LemmaReport],
    }
    serde_json::to_string_pretty(&Summary {
        config: cfg,
        passed: reports.iter().all(LemmaReport::passed),
        reports,
    })
    .expect("plain data serializes")
}

/// Writes the summary and every counterexample file below `dir`.
pub fn write_reports(dir: &Path, cfg: &TrialConfig, reports: &[LemmaReport]) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("summary.json"), report_json(cfg, reports))?;
    std::fs::write(dir.join("report.txt"), report_text(reports))?;
    let mut used = BTreeSet::new();
    for r in reports {
        for f in &r.failures {
            for (name, text) in &f.files {
                let file = format!("{}-{}-{}", r.lemma, f.trial, name);
                if used.insert(file.clone()) {
                    std::fs::write(dir.join(file), text)?;
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(only: &str, trials: usize) -> TrialConfig {
        TrialConfig {
            only: Some(only.to_string()),
            ..TrialConfig::new(1, 4, trials)
        }
    }

    #[test]
    fn unknown_check_is_rejected() {
        assert!(run_lemma_suite(&small("nonsense", 1)).is_err());
        assert!(run_lemma_suite(&TrialConfig::new(1, 0, 1)).is_err());
    }

    #[test]
    fn mutation_is_caught() {
        let reports = run_lemma_suite_with(&small("width_eq_w", 20), broken_hooks()).unwrap();
        assert!(!reports[0].passed());
        let reports = run_lemma_suite(&small("width_eq_w", 20)).unwrap();
        assert!(reports[0].passed(), "{}", report_text(&reports));
    }

    #[test]
    fn deterministic() {
        let cfg = small("cleaning", 10);
        let a = report_json(&cfg, &run_lemma_suite_with(&cfg, broken_hooks()).unwrap());
        let b = report_json(&cfg, &run_lemma_suite_with(&cfg, broken_hooks()).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn single_element_runs() {
        let cfg = TrialConfig::new(7, 1, 10);
        let reports = run_lemma_suite(&cfg).unwrap();
        assert!(reports.iter().all(LemmaReport::passed), "{}", report_text(&reports));
    }
}
