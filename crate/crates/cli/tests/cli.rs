use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "..", "..", "fixtures", name].iter().collect()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mergewidth"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn f(name: &str) -> String {
    fixture(name).to_string_lossy().into_owned()
}

#[test]
fn mw_of_p3_is_one() {
    let o = run(&["mw", "--r", "1", &f("p3.gr")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "1\n");
}

#[test]
fn model_fixture_validates() {
    let o = run(&["validate", &f("model-p3.mmod")]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn width_of_sigma_p3_is_one() {
    let o = run(&["width", "--r", "1", &f("sigma-p3.mseq"), &f("p3.bst")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "1\n");
}

#[test]
fn every_fixture_validates() {
    for name in ["p3.gr", "p3.bst", "sigma-p3.mseq", "model-p3.mmod", "twin-p3.tmod", "cwe-p3.cwe"] {
        let o = run(&["validate", &f(name)]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = run(&["validate", &f("sigma-p3.mseq"), &f("p3.bst")]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.bst");
    std::fs::write(&bad, "structure x\nsignature E\nelements a b\nrel E a q\n").unwrap();
    let o = run(&["validate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("4:9"), "{stderr}");

    // uniformity fails once the step-3 reveal is gone
    let text = std::fs::read_to_string(fixture("sigma-p3.mseq")).unwrap();
    let broken = text.replace("reveal a c\nreveal c a\n", "");
    let seq = dir.path().join("broken.mseq");
    std::fs::write(&seq, broken).unwrap();
    let o = run(&["width", "--r", "1", seq.to_str().unwrap(), &f("p3.bst")]);
    assert_eq!(o.status.code(), Some(1));

    let o = run(&["mw", "--r", "1", "--nmax", "2", &f("p3.gr")]);
    assert_eq!(o.status.code(), Some(3));

    let o = run(&["validate", dir.path().join("missing").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(&["lift", &f("twin-p3.tmod"), "-o", "-"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn pipeline_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    assert!(run(&["seq2model", &f("sigma-p3.mseq"), &f("p3.bst"), "-o", &p("m.mmod")]).status.success());
    assert_eq!(stdout(&run(&["wr", "--r", "1", &p("m.mmod")])), "1\n");
    assert!(run(&["model2seq", &p("m.mmod"), "-o", &p("s.mseq")]).status.success());
    assert_eq!(stdout(&run(&["width", "--r", "1", &p("s.mseq"), &f("p3.bst")])), "1\n");
    assert!(run(&["interpret", &p("m.mmod"), "-o", &p("g.bst")]).status.success());
    assert_eq!(
        std::fs::read_to_string(p("g.bst")).unwrap(),
        std::fs::read_to_string(fixture("p3.bst")).unwrap()
    );
    assert!(run(&["clean", &p("m.mmod"), "-o", &p("c.mmod")]).status.success());
    assert!(run(&["compact", &p("c.mmod"), "-o", &p("k.mmod")]).status.success());
    assert!(run(&["lift", &p("k.mmod"), "-o", &p("l.mmod")]).status.success());
    assert!(run(&["validate", &p("l.mmod")]).status.success());

    assert!(run(&["cw2twin", &f("cwe-p3.cwe"), "-o", &p("t.tmod"), "--emit-expr", &p("w.cwe")]).status.success());
    assert!(run(&["validate", &p("t.tmod")]).status.success());
    assert!(run(&["validate", &p("w.cwe")]).status.success());
    assert!(run(&["cexpand", &f("p3.gr"), "-o", &p("x.bst")]).status.success());
    assert_eq!(stdout(&run(&["bomega", &f("twin-p3.tmod")])), "1\n");
    assert!(run(&["dot", &f("model-p3.mmod"), "-o", &p("m.dot")]).status.success());
    assert!(std::fs::read_to_string(p("m.dot")).unwrap().starts_with("digraph"));
}

#[test]
fn outputs_are_byte_identical() {
    let a = run(&["lift", &f("model-p3.mmod"), "-o", "-"]);
    let b = run(&["lift", &f("model-p3.mmod"), "-o", "-"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn verify_runs_and_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("reports");
    let o = run(&[
        "verify", "--seed", "1", "--nmax", "4", "--trials", "10", "--lemma", "width_eq_w",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("width_eq_w: 10 trials, 0 failures"));
    assert!(out.join("summary.json").exists());
    let o = run(&["verify", "--seed", "1", "--nmax", "4", "--trials", "1", "--lemma", "nope"]);
    assert_eq!(o.status.code(), Some(2));
}
