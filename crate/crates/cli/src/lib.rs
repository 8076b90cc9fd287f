//! The `argbank` command line.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use argbank_core::export::{parse_export_bytes, serialize_export, ExportDocument};
use argbank_core::query::{parse_query, search};
use argbank_core::{Inventory, Strictness, SyntaxGraph};
use argbank_models::chunk::train_chunk;
use argbank_models::labeler::train_labeler;
use argbank_models::pos::{tagged_sentences, train_trigram};
use argbank_models::{LabelThresholds, LabelerConfig, ModelBundle};
use argbank_service::{compare_documents, Config, Service};
use clap::Parser;
use rayon::prelude::*;

pub mod args;
mod ops;

use args::{Cli, Command, CorpusFormat, Output, ReportFormat, Training};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// A failure with the exit status it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn domain(message: impl ToString) -> Failure {
        Failure {
            code: EXIT_DOMAIN,
            message: message.to_string(),
        }
    }

    fn usage(message: impl ToString) -> Failure {
        Failure {
            code: EXIT_USAGE,
            message: message.to_string(),
        }
    }
}

type Result<T> = std::result::Result<T, Failure>;

/// Parses `argv` and runs the command. Returns the exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("argbank: {}", f.message);
            f.code
        }
    }
}

fn read_input(path: &Path) -> Result<Vec<u8>> {
    if path == Path::new("-") {
        let mut buf = Vec::new();
        io::stdin()
            .read_to_end(&mut buf)
            .map_err(|e| Failure::domain(format!("standard input: {e}")))?;
        return Ok(buf);
    }
    fs::read(path).map_err(|e| Failure::domain(format!("{}: {e}", path.display())))
}

fn read_corpus(path: &Path) -> Result<ExportDocument> {
    parse_export_bytes(&read_input(path)?).map_err(|e| Failure::domain(format!("{}: {e}", path.display())))
}

/// Concatenation of several corpora, which must share a tagset.
fn read_corpora(paths: &[PathBuf]) -> Result<ExportDocument> {
    let mut out: Option<ExportDocument> = None;
    for p in paths {
        let doc = read_corpus(p)?;
        match &mut out {
            None => out = Some(doc),
            Some(acc) => {
                if acc.tagset_name != doc.tagset_name {
                    return Err(Failure::domain(format!(
                        "{}: tagset `{}` differs from `{}`",
                        p.display(),
                        doc.tagset_name,
                        acc.tagset_name
                    )));
                }
                acc.sentences.extend(doc.sentences);
            }
        }
    }
    out.ok_or_else(|| Failure::usage("no corpus given"))
}

fn load_models(path: &Path, tagset: &str) -> Result<ModelBundle> {
    let text = String::from_utf8(read_input(path)?).map_err(|_| Failure::domain(format!("{}: not UTF-8", path.display())))?;
    ModelBundle::from_json(&text, Some(tagset)).map_err(|e| Failure::domain(format!("{}: {e}", path.display())))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::domain(format!("{}: {e}", p.display()))),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::domain(format!("standard output: {e}")))
        }
    }
}

fn check_threshold(name: &str, t: f64) -> Result<()> {
    if t.is_nan() || t < 0.0 {
        return Err(Failure::usage(format!("--{name} must be non-negative")));
    }
    Ok(())
}

/// Runs `f` on every sentence with `jobs` workers and writes the corpus
/// or the records, both in corpus order.
fn per_sentence<E: std::fmt::Display + Send>(
    mut doc: ExportDocument,
    out: &Output,
    f: impl Fn(&mut SyntaxGraph) -> std::result::Result<Vec<String>, E> + Sync,
) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(out.jobs as usize)
        .build()
        .map_err(Failure::domain)?;
    let results: Vec<std::result::Result<Vec<String>, String>> = pool.install(|| {
        doc.sentences
            .par_iter_mut()
            .map(|g| f(g).map_err(|e| format!("sentence {}: {e}", g.sentence_id())))
            .collect()
    });
    let mut records = Vec::new();
    for r in results {
        records.extend(r.map_err(Failure::domain)?);
    }
    let text = match out.format {
        CorpusFormat::Canonical => serialize_export(&doc).map_err(Failure::domain)?,
        CorpusFormat::Records => records.into_iter().map(|r| r + "\n").collect(),
    };
    write_output(out.output.as_deref(), &text)
}

/// Loads the container at `t.output` if there is one, lets `fill` replace
/// a section and writes it back.
fn train(t: &Training, fill: impl FnOnce(&mut ModelBundle, &ExportDocument) -> Result<()>) -> Result<()> {
    let doc = read_corpora(&t.corpora)?;
    let mut bundle = if t.output.exists() {
        load_models(&t.output, &doc.tagset_name)?
    } else {
        ModelBundle::new(doc.tagset_name.clone())
    };
    fill(&mut bundle, &doc)?;
    write_output(Some(&t.output), &bundle.to_json())
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::TrainPos(t) => train(&t, |b, doc| {
            b.sections.pos = Some(train_trigram(&tagged_sentences(doc)).map_err(Failure::domain)?);
            Ok(())
        }),
        Command::Tag {
            model,
            threshold,
            corpus,
            out,
        } => {
            check_threshold("threshold", threshold)?;
            let doc = read_corpus(&corpus)?;
            let bundle = load_models(&model, &doc.tagset_name)?;
            let pos = bundle.pos().map_err(Failure::domain)?;
            per_sentence(doc, &out, |g| ops::tag(g, pos, threshold))
        }
        Command::TrainLabeler {
            training,
            order,
            no_priors,
        } => train(&training, |b, doc| {
            let config = LabelerConfig {
                order: order as usize,
                use_priors: !no_priors,
            };
            b.sections.labeler = Some(train_labeler(&doc.sentences, config).map_err(Failure::domain)?);
            Ok(())
        }),
        Command::Label {
            model,
            keep_categories,
            category_threshold,
            label_threshold,
            corpus,
            out,
        } => {
            check_threshold("category-threshold", category_threshold)?;
            check_threshold("label-threshold", label_threshold)?;
            let doc = read_corpus(&corpus)?;
            let bundle = load_models(&model, &doc.tagset_name)?;
            let labeler = bundle.labeler().map_err(Failure::domain)?;
            let thresholds = LabelThresholds {
                category: category_threshold,
                label: label_threshold,
            };
            per_sentence(doc, &out, |g| {
                Ok::<_, String>(ops::label(g, labeler, thresholds, keep_categories))
            })
        }
        Command::TrainChunker { training, categories } => train(&training, |b, doc| {
            let targets: Vec<_> = categories.iter().map(|c| c.as_str().into()).collect();
            let (model, stats) = train_chunk(&doc.sentences, &targets).map_err(Failure::domain)?;
            eprintln!("argbank: {} phrases used, {} skipped", stats.used, stats.skipped);
            b.sections.chunker = Some(model);
            Ok(())
        }),
        Command::Chunk {
            model,
            threshold,
            categories,
            corpus,
            out,
        } => {
            check_threshold("threshold", threshold)?;
            let doc = read_corpus(&corpus)?;
            let bundle = load_models(&model, &doc.tagset_name)?;
            let chunker = bundle.chunker().map_err(Failure::domain)?;
            let known: Vec<String> = chunker.categories().map(|c| c.as_str().to_owned()).collect();
            let categories = if categories.is_empty() {
                known
            } else {
                if let Some(c) = categories.iter().find(|c| !known.contains(c)) {
                    return Err(Failure::domain(format!("no chunk model for category `{c}`")));
                }
                categories
            };
            let labeler = bundle.sections.labeler.as_ref();
            let thresholds = LabelThresholds {
                category: std::f64::consts::LN_10,
                label: std::f64::consts::LN_10,
            };
            per_sentence(doc, &out, |g| ops::chunk(g, chunker, labeler, &categories, threshold, thresholds))
        }
        Command::Project { corpus, out } => per_sentence(read_corpus(&corpus)?, &out, ops::project),
        Command::Validate {
            strict,
            inventory,
            corpora,
        } => validate(strict, inventory.as_deref(), &corpora),
        Command::Compare { left, right, format } => {
            let report = compare_documents(&read_corpus(&left)?, &read_corpus(&right)?);
            let text = match format {
                ReportFormat::Text => report.to_text(),
                ReportFormat::Json => serde_json::to_string_pretty(&report).map_err(Failure::domain)? + "\n",
            };
            write_output(None, &text)
        }
        Command::Search { query, corpora, format } => {
            let q = parse_query(&query).map_err(Failure::usage)?;
            let doc = read_corpora(&corpora)?;
            let matches = search(&doc, &q);
            let text = match format {
                CorpusFormat::Records => matches
                    .iter()
                    .map(|m| {
                        let b: Vec<String> = m.bindings.iter().map(|(v, n)| format!("{v}={n}")).collect();
                        format!("match\t{}\t{}\n", m.sentence_id, b.join("\t"))
                    })
                    .collect(),
                CorpusFormat::Canonical => {
                    let mut hits: Vec<&str> = matches.iter().map(|m| m.sentence_id.as_str()).collect();
                    hits.dedup();
                    let sentences = doc
                        .sentences
                        .iter()
                        .filter(|g| hits.contains(&g.sentence_id()))
                        .cloned()
                        .collect();
                    serialize_export(&ExportDocument { sentences, ..doc }).map_err(Failure::domain)?
                }
            };
            write_output(None, &text)
        }
        Command::Serve {
            config,
            host,
            port,
            corpus_root,
            models,
        } => {
            let mut c = match &config {
                Some(p) => Config::load(p).map_err(Failure::domain)?,
                None => Config::default(),
            };
            c.apply_env(|k| std::env::var(k).ok()).map_err(Failure::domain)?;
            c.host = host.unwrap_or(c.host);
            c.port = port.unwrap_or(c.port);
            c.corpus_root = corpus_root.unwrap_or(c.corpus_root);
            c.models = models.or(c.models);
            c.check().map_err(Failure::domain)?;
            serve(c)
        }
    }
}

fn validate(strict: bool, inventory: Option<&Path>, corpora: &[PathBuf]) -> Result<()> {
    let inv = match inventory {
        Some(p) => {
            let text = String::from_utf8(read_input(p)?).map_err(|_| Failure::domain(format!("{}: not UTF-8", p.display())))?;
            let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            Inventory::parse(&name, &text).map_err(|e| Failure::domain(format!("{}: {e}", p.display())))?
        }
        None => Inventory::stts(),
    };
    let mut out = String::new();
    let mut count = 0;
    for p in corpora {
        let doc = read_corpus(p)?;
        for g in &doc.sentences {
            let strictness = if strict { Strictness::Strict(&inv) } else { Strictness::Lenient };
            for v in g.validate(strictness) {
                count += 1;
                let node = v.node.map(|n| n.to_string()).unwrap_or_else(|| "-".into());
                out.push_str(&format!(
                    "violation\t{}\t{}\t{node}\t{}\t{}\n",
                    p.display(),
                    g.sentence_id(),
                    v.rule.name(),
                    v.message
                ));
            }
        }
    }
    write_output(None, &out)?;
    if count > 0 {
        return Err(Failure::domain(format!("{count} violations")));
    }
    Ok(())
}

fn serve(config: Config) -> Result<()> {
    let addr = format!("{}:{}", config.host, config.port);
    let addr: std::net::SocketAddr = addr
        .parse()
        .map_err(|_| Failure::usage(format!("cannot listen on `{addr}`")))?;
    let service = Arc::new(Service::from_config(config).map_err(Failure::domain)?);
    let rt = tokio::runtime::Runtime::new().map_err(Failure::domain)?;
    eprintln!("argbank: listening on {addr}");
    rt.block_on(argbank_service::serve(service, addr)).map_err(Failure::domain)
}
