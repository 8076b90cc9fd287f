use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Treebank annotation tools: train and apply the tagging, labeling and
/// chunking models, check, project, compare and search export corpora, and
/// run the annotation service.
///
/// Exit status: 0 on success, 1 when the input or a model is at fault,
/// 2 on a usage error. A corpus argument of `-` reads standard input.
#[derive(Debug, Parser)]
#[command(name = "argbank", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CorpusFormat {
    /// Canonical export bytes.
    Canonical,
    /// Tab-separated records, one per line, led by the record kind.
    Records,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    /// One line per inconsistency, then a summary.
    Text,
    /// The report object served by the annotation service.
    Json,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Output format.
    #[arg(long, value_enum, default_value = "canonical")]
    pub format: CorpusFormat,
    /// Write here instead of standard output.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Worker threads over sentences; output order does not depend on it.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    pub jobs: u16,
}

#[derive(Debug, Args)]
pub struct Training {
    /// Model container to write. An existing container keeps its other
    /// sections; this one is replaced.
    #[arg(short, long)]
    pub output: PathBuf,
    /// Training corpora in export format.
    #[arg(required = true)]
    pub corpora: Vec<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train the trigram part-of-speech tagger.
    TrainPos(Training),
    /// Re-tag every token of a corpus.
    Tag {
        /// Model container with a `pos` section.
        #[arg(long)]
        model: PathBuf,
        /// Minimal log-probability gap for a tag to count as reliable.
        #[arg(long, default_value_t = std::f64::consts::LN_10)]
        threshold: f64,
        corpus: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Train the function labeler.
    TrainLabeler {
        #[command(flatten)]
        training: Training,
        /// Markov order over function labels.
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
        order: u8,
        /// Choose categories by sequence probability alone.
        #[arg(long)]
        no_priors: bool,
    },
    /// Predict categories and edge labels of every phrase, bottom-up.
    Label {
        /// Model container with a `labeler` section.
        #[arg(long)]
        model: PathBuf,
        /// Keep the categories in the corpus and predict edge labels only.
        #[arg(long)]
        keep_categories: bool,
        /// Minimal gap for a category to count as reliable.
        #[arg(long, default_value_t = std::f64::consts::LN_10)]
        category_threshold: f64,
        /// Minimal gap for an edge label to count as reliable.
        #[arg(long, default_value_t = std::f64::consts::LN_10)]
        label_threshold: f64,
        corpus: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Train the chunk structurer.
    TrainChunker {
        #[command(flatten)]
        training: Training,
        /// Phrase categories to learn structures for.
        #[arg(long, value_delimiter = ',', default_value = "AP,NP,PP")]
        categories: Vec<String>,
    },
    /// Give flat phrases internal structure.
    ///
    /// Every contiguous phrase of a chunked category whose children are all
    /// tokens receives the most probable structure. With a labeler in the
    /// container the inner edges are labeled too; otherwise they read `NK`.
    Chunk {
        /// Model container with a `chunker` section.
        #[arg(long)]
        model: PathBuf,
        /// Minimal gap for a structure to count as reliable.
        #[arg(long, default_value_t = std::f64::consts::LN_10)]
        threshold: f64,
        /// Restrict to these categories.
        #[arg(long, value_delimiter = ',')]
        categories: Vec<String>,
        corpus: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Turn every sentence into a continuous tree with traces.
    ///
    /// Canonical output lists each trace as a comment line
    /// `*T<id>* <filler> <site> <label>`.
    Project {
        corpus: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Check corpora against the well-formedness rules.
    ///
    /// Prints one record per violation; exits 1 if there is any.
    Validate {
        /// Also check labels against a label inventory.
        #[arg(long)]
        strict: bool,
        /// Inventory file for --strict; the bundled STTS inventory otherwise.
        #[arg(long, requires = "strict")]
        inventory: Option<PathBuf>,
        #[arg(required = true)]
        corpora: Vec<PathBuf>,
    },
    /// Compare two annotations of the same sentences.
    Compare {
        left: PathBuf,
        right: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: ReportFormat,
    },
    /// Find nodes matching a query.
    ///
    /// Records list the bindings of each match; canonical output lists the
    /// matching sentences.
    Search {
        query: String,
        #[arg(required = true)]
        corpora: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "records")]
        format: CorpusFormat,
    },
    /// Run the annotation service until interrupted.
    ///
    /// Settings come from the config file, then ARGBANK_PORT and
    /// ARGBANK_CORPUS_ROOT, then the flags below.
    Serve {
        /// TOML config file.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        host: Option<String>,
        #[arg(long)]
        port: Option<u16>,
        #[arg(long)]
        corpus_root: Option<PathBuf>,
        #[arg(long)]
        models: Option<PathBuf>,
    },
}
