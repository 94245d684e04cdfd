use std::fmt::Display;
use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mergewidth::cwe::CliqueExpression;
use mergewidth::dot::document_dot;
use mergewidth::format::{
    detect, parse_any, parse_cwe, parse_gr, parse_mmod, parse_mseq, parse_tmod, write_bst,
    write_cwe, write_mmod, write_mseq, write_ranked, write_tmod, Document, Kind, ModelFile,
};
use mergewidth::lift::lift_model;
use mergewidth::oracle::mw_exact;
use mergewidth::ranked::{
    cleaning, compactify_ranked, model_of_sequence, ranked_width, sequence_of_model,
};
use mergewidth::sequence::{validate_sequence, width};
use mergewidth::structure::{biclique_number, complement_expand, gaifman, reduct};
use mergewidth::twin::{twin_model_from_cliqueexpr, twin_to_merge};
use mergewidth::verify::{
    report_text, run_lemma_suite, write_reports, TrialConfig, LEMMAS, ORACLE,
};
use mergewidth::{BinaryStructure, Error, Graph, RankedMergeModel, Signature};

#[derive(Parser)]
#[command(name = "mergewidth", version, about = "Merge-width tools for finite binary structures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a file of any kind; a sequence is checked against the optional structure.
    Validate { file: PathBuf, structure: Option<PathBuf> },
    /// Radius-r width of a sequence of a structure.
    Width {
        #[arg(long)]
        r: usize,
        sequence: PathBuf,
        structure: PathBuf,
    },
    /// Exact radius-r merge-width.
    Mw {
        #[arg(long)]
        r: usize,
        #[arg(long, default_value_t = 5)]
        nmax: usize,
        structure: PathBuf,
    },
    /// Ranked merge-model of a sequence.
    Seq2model {
        sequence: PathBuf,
        structure: PathBuf,
        #[arg(short)]
        o: PathBuf,
    },
    /// Sequence read off a clean ranked model.
    Model2seq {
        model: PathBuf,
        #[arg(short)]
        o: PathBuf,
    },
    /// Cleaning of a ranked model.
    Clean {
        model: PathBuf,
        #[arg(short)]
        o: PathBuf,
    },
    /// Compactification of a model, ranked or not.
    Compact {
        model: PathBuf,
        #[arg(short)]
        o: PathBuf,
    },
    /// Radius-r width of a ranked model.
    Wr {
        #[arg(long)]
        r: usize,
        model: PathBuf,
    },
    /// Structure represented by a merge-model or twin-model.
    Interpret {
        model: PathBuf,
        #[arg(short)]
        o: PathBuf,
    },
    /// Biclique number of the relevant Gaifman graph.
    Bomega {
        #[arg(long, default_value_t = 64)]
        limit: usize,
        file: PathBuf,
    },
    /// Twin-model of a clique-width expression.
    Cw2twin {
        expression: PathBuf,
        #[arg(short)]
        o: PathBuf,
        /// Also write the expression that builds the twin-model.
        #[arg(long)]
        emit_expr: Option<PathBuf>,
    },
    /// Loopless merge-model of a complement-expansion twin-model.
    Twin2merge {
        twin: PathBuf,
        #[arg(short)]
        o: PathBuf,
    },
    /// Compact ranked model of a compact ranked model seen as a structure.
    Lift {
        model: PathBuf,
        #[arg(short)]
        o: PathBuf,
    },
    /// Complement expansion of a graph.
    Cexpand {
        graph: PathBuf,
        #[arg(short)]
        o: PathBuf,
    },
    /// Graphviz rendering of any file.
    Dot {
        file: PathBuf,
        #[arg(short)]
        o: PathBuf,
    },
    /// Randomised checks of the relations between all constructions.
    Verify {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        nmax: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        lemma: Option<String>,
        /// Directory for the summary and counterexample files.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Add random early reveals to generated sequences.
        #[arg(long)]
        extra_reveals: bool,
    },
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn invalid(message: impl Display) -> Self {
        Failure {
            code: 1,
            message: message.to_string(),
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Format(_) => 2,
        Error::LimitExceeded { .. } => 3,
        _ => 1,
    }
}

/// Attaches the file name to library errors.
trait In<T> {
    fn in_file(self, path: &Path) -> Result<T, Failure>;
}

impl<T> In<T> for mergewidth::Result<T> {
    fn in_file(self, path: &Path) -> Result<T, Failure> {
        self.map_err(|e| Failure {
            code: exit_code(&e),
            message: format!("{}: {e}", path.display()),
        })
    }
}

fn lib<T>(r: mergewidth::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| Failure {
        code: exit_code(&e),
        message: e.to_string(),
    })
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure {
        code: 2,
        message: format!("{}: {e}", path.display()),
    })
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    let r = if path == Path::new("-") {
        io::stdout().write_all(text.as_bytes())
    } else {
        fs::write(path, text)
    };
    r.map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "graph".to_string())
}

fn wrong_kind(path: &Path, kind: Kind, wanted: &str) -> Failure {
    Failure {
        code: 2,
        message: format!("{}: expected {wanted}, found {kind}", path.display()),
    }
}

fn load(path: &Path) -> Result<Document, Failure> {
    let text = read(path)?;
    match detect(&text).in_file(path)? {
        Kind::Graph => Ok(Document::Graph(parse_gr(&text, &stem(path)).in_file(path)?)),
        _ => parse_any(&text).in_file(path),
    }
}

fn load_structure(path: &Path) -> Result<BinaryStructure, Failure> {
    match load(path)? {
        Document::Structure(s) => Ok(s),
        Document::Graph(g) => Ok(g.into_structure()),
        d => Err(wrong_kind(path, d.kind(), "a structure or graph")),
    }
}

fn load_graph(path: &Path) -> Result<Graph, Failure> {
    match load(path)? {
        Document::Graph(g) => Ok(g),
        Document::Structure(s) => Graph::try_new(s).in_file(path),
        d => Err(wrong_kind(path, d.kind(), "a graph")),
    }
}

fn load_model(path: &Path) -> Result<ModelFile, Failure> {
    parse_mmod(&read(path)?).in_file(path)
}

fn load_ranked(path: &Path) -> Result<RankedMergeModel, Failure> {
    let file = load_model(path)?;
    file.ranked().ok_or_else(|| Failure {
        code: 1,
        message: format!("{}: model has no interval ranking", path.display()),
    })
}

fn load_expression(path: &Path) -> Result<CliqueExpression, Failure> {
    parse_cwe(&read(path)?).in_file(path)
}

fn validate(file: &Path, structure: Option<&Path>) -> Result<String, Failure> {
    let doc = load(file)?;
    let kind = doc.kind();
    let detail = match doc {
        Document::Structure(s) => format!("{} elements", s.size()),
        Document::Graph(g) => format!("{} vertices", g.size()),
        Document::Sequence(seq) => {
            let g = match structure {
                Some(p) => load_structure(p)?,
                // no symbols: only the partition chain and reveal sets are checked
                None => lib(BinaryStructure::new(
                    seq.structure_name(),
                    Signature::empty(),
                    seq.elements().iter().cloned(),
                ))?,
            };
            validate_sequence(&seq, &g).in_file(file)?;
            format!("{} steps", seq.len())
        }
        Document::Model(mf) => {
            mf.model.validate().map_err(|v| Failure::invalid(format!("{}: {v}", file.display())))?;
            match mf.ranked() {
                Some(rm) => {
                    let status = rm.validate().in_file(file)?;
                    let clean = if status.is_clean() { "clean" } else { "not clean" };
                    let compact = if rm.model.is_compact() { "compact" } else { "not compact" };
                    format!("{} nodes, ranked, {clean}, {compact}", rm.tree().len())
                }
                None => format!("{} nodes, unranked", mf.model.tree().len()),
            }
        }
        Document::Twin(t) => {
            t.validate().map_err(|v| Failure::invalid(format!("{}: {v}", file.display())))?;
            format!("{} nodes", t.tree().len())
        }
        Document::Expression(e) => {
            lib(e.eval())?;
            format!("{} labels{}", e.labels, if e.is_linear() { ", linear" } else { "" })
        }
    };
    Ok(format!("ok: {kind}, {detail}\n"))
}

fn bomega(file: &Path, limit: usize) -> Result<usize, Failure> {
    let g = match load(file)? {
        Document::Structure(s) => gaifman(&s),
        Document::Graph(g) => g,
        Document::Model(mf) => {
            mf.model.validate().map_err(|v| Failure::invalid(format!("{}: {v}", file.display())))?;
            let full = mf.model.full_structure();
            let symbols: Vec<&str> =
                full.signature().symbols()[1..].iter().map(String::as_str).collect();
            gaifman(&lib(reduct(&full, &symbols))?)
        }
        Document::Twin(t) => {
            t.validate().map_err(|v| Failure::invalid(format!("{}: {v}", file.display())))?;
            t.z_graph()
        }
        d => return Err(wrong_kind(file, d.kind(), "a structure, graph, merge-model or twin-model")),
    };
    lib(biclique_number(&g, limit))
}

fn verify(cfg: TrialConfig, out: Option<&Path>) -> Result<String, Failure> {
    let reports = lib(run_lemma_suite(&cfg))?;
    if let Some(dir) = out {
        write_reports(dir, &cfg, &reports)
            .map_err(|e| Failure::invalid(format!("{}: {e}", dir.display())))?;
    }
    let text = report_text(&reports);
    if reports.iter().all(|r| r.passed()) {
        Ok(text)
    } else {
        print!("{text}");
        Err(Failure::invalid("some checks failed"))
    }
}

fn run(cli: Cli) -> Result<String, Failure> {
    let done = String::new;
    match cli.command {
        Command::Validate { file, structure } => validate(&file, structure.as_deref()),
        Command::Width { r, sequence, structure } => {
            let seq = parse_mseq(&read(&sequence)?).in_file(&sequence)?;
            let g = load_structure(&structure)?;
            Ok(format!("{}\n", lib(width(&seq, &g, r))?))
        }
        Command::Mw { r, nmax, structure } => {
            let g = load_structure(&structure)?;
            Ok(format!("{}\n", lib(mw_exact(&g, r, nmax))?.0))
        }
        Command::Seq2model { sequence, structure, o } => {
            let seq = parse_mseq(&read(&sequence)?).in_file(&sequence)?;
            let g = load_structure(&structure)?;
            write(&o, &write_ranked(&lib(model_of_sequence(&seq, &g))?))?;
            Ok(done())
        }
        Command::Model2seq { model, o } => {
            let rm = load_ranked(&model)?;
            write(&o, &write_mseq(&sequence_of_model(&rm).in_file(&model)?))?;
            Ok(done())
        }
        Command::Clean { model, o } => {
            let rm = load_ranked(&model)?;
            write(&o, &write_ranked(&cleaning(&rm).in_file(&model)?))?;
            Ok(done())
        }
        Command::Compact { model, o } => {
            let mf = load_model(&model)?;
            let text = match mf.ranked() {
                Some(rm) => write_ranked(&compactify_ranked(&rm).in_file(&model)?),
                None => write_mmod(&mf.model.compactify().in_file(&model)?, None),
            };
            write(&o, &text)?;
            Ok(done())
        }
        Command::Wr { r, model } => {
            let rm = load_ranked(&model)?;
            Ok(format!("{}\n", ranked_width(&rm, r).in_file(&model)?))
        }
        Command::Interpret { model, o } => {
            let s = match load(&model)? {
                Document::Model(mf) => mf.model.interpret().in_file(&model)?,
                Document::Twin(t) => t.interpret().in_file(&model)?,
                d => return Err(wrong_kind(&model, d.kind(), "a merge-model or twin-model")),
            };
            write(&o, &write_bst(&s))?;
            Ok(done())
        }
        Command::Bomega { limit, file } => Ok(format!("{}\n", bomega(&file, limit)?)),
        Command::Cw2twin { expression, o, emit_expr } => {
            let e = load_expression(&expression)?;
            let (mut t, witness) = twin_model_from_cliqueexpr(&e).in_file(&expression)?;
            t.set_name(&stem(&expression));
            write(&o, &write_tmod(&t))?;
            if let Some(p) = emit_expr {
                write(&p, &write_cwe(&witness))?;
            }
            Ok(done())
        }
        Command::Twin2merge { twin, o } => {
            let t = parse_tmod(&read(&twin)?).in_file(&twin)?;
            write(&o, &write_mmod(&twin_to_merge(&t).in_file(&twin)?, None))?;
            Ok(done())
        }
        Command::Lift { model, o } => {
            let rm = load_ranked(&model)?;
            write(&o, &write_ranked(&lift_model(&rm).in_file(&model)?))?;
            Ok(done())
        }
        Command::Cexpand { graph, o } => {
            let g = load_graph(&graph)?;
            write(&o, &write_bst(&complement_expand(&g)))?;
            Ok(done())
        }
        Command::Dot { file, o } => {
            let doc = load(&file)?;
            write(&o, &document_dot(&doc))?;
            Ok(done())
        }
        Command::Verify { seed, nmax, trials, lemma, out, extra_reveals } => {
            if let Some(name) = &lemma {
                if !LEMMAS.contains(&name.as_str()) && name != ORACLE {
                    return Err(Failure {
                        code: 2,
                        message: format!("unknown lemma `{name}`; known: {}, {ORACLE}", LEMMAS.join(", ")),
                    });
                }
            }
            let cfg = TrialConfig {
                only: lemma,
                extra_reveals,
                ..TrialConfig::new(seed, nmax, trials)
            };
            verify(cfg, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
