//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "hardlda", version, about = "Hard topic models: generate, fit, evaluate, benchmark")]
pub struct Cli {
    /// Worker threads for document-parallel phases (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a corpus from the LDA generative process, with ground truth.
    Generate(GenerateArgs),
    /// Split a corpus into training and held-out documents.
    Split(SplitArgs),
    /// Fit a model and write labels, topics, trace and manifest.
    Fit(FitArgs),
    /// Score a fitted model against ground truth and held-out documents.
    Eval(EvalArgs),
    /// Per-iteration timing table across corpus sizes.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    SynthA,
    SynthB,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Start from a named parameter set; explicit flags override it.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[arg(long)]
    pub docs: Option<usize>,
    #[arg(long)]
    pub topics: Option<usize>,
    #[arg(long)]
    pub vocab: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub doc_len: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Number of held-out documents.
    #[arg(long)]
    pub heldout: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Receives `train/` and `heldout/` corpus directories.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Basic,
    Word,
    WordRefine,
    Cgs,
    Kmeans,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Basic => "basic",
            Algo::Word => "word",
            Algo::WordRefine => "word-refine",
            Algo::Cgs => "cgs",
            Algo::Kmeans => "kmeans",
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long, value_enum)]
    pub algo: Algo,
    /// Corpus directory holding docword.txt and vocab.txt.
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, short = 'k')]
    pub topics: usize,
    #[arg(long, conflicts_with = "lambda_sweep")]
    pub lambda: Option<f64>,
    /// Comma-separated lambda values, e.g. 6,7,8,9,10,11,12.
    #[arg(long, value_delimiter = ',')]
    pub lambda_sweep: Option<Vec<f64>>,
    /// Iteration cap (default: basic 100, word 20, word-refine 10, kmeans 100).
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Smoothing pseudocount for topic rows.
    #[arg(long, default_value_t = hardlda_core::DEFAULT_GAMMA)]
    pub gamma: f64,
    /// Dirichlet prior on document proportions (cgs).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Dirichlet prior on topic rows (cgs).
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub burnin: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub thinning: Option<usize>,
    /// Gibbs schedule of 3000 burn-in sweeps, 30 samples, thinning 10
    /// (default is 500 / 5 / 10).
    #[arg(long)]
    pub full_schedule: bool,
    /// Start from the labels in this file instead of random labels.
    #[arg(long)]
    pub init_from: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Fit output directory (labels.txt, psi.txt, manifest.txt).
    #[arg(long)]
    pub model: PathBuf,
    /// Corpus the model was fitted on.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Generator output directory with psi_true.txt and z_true.txt.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Reference topic matrix; overrides the one under --truth.
    #[arg(long)]
    pub truth_psi: Option<PathBuf>,
    /// Reference token labels; overrides the ones under --truth.
    #[arg(long)]
    pub truth_labels: Option<PathBuf>,
    /// Held-out corpus directory for predictive likelihoods.
    #[arg(long)]
    pub heldout: Option<PathBuf>,
    /// Topic matrix to compare against with symmetric KL.
    #[arg(long)]
    pub compare_psi: Option<PathBuf>,
    /// Penalty for the objective and hard likelihood (default: from the model manifest).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Fold-in prior for the soft likelihood (default: model manifest alpha, else 0.1).
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 200)]
    pub fold_in_sweeps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BenchAlgo {
    Basic,
    Word,
    Refine,
    Cgs,
}

impl BenchAlgo {
    pub fn name(self) -> &'static str {
        match self {
            BenchAlgo::Basic => "basic",
            BenchAlgo::Word => "word",
            BenchAlgo::Refine => "refine",
            BenchAlgo::Cgs => "cgs",
        }
    }
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Document counts, one synthetic corpus per value.
    #[arg(long, value_delimiter = ',', default_value = "250,500,1000")]
    pub sizes: Vec<usize>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "word,refine,cgs")]
    pub algos: Vec<BenchAlgo>,
    /// Timed iterations per (algorithm, size); at least 3.
    #[arg(long, default_value_t = 3)]
    pub iters: usize,
    #[arg(long, default_value_t = 10.0)]
    pub lambda: f64,
    #[arg(long, value_enum, default_value = "synth-a")]
    pub preset: Preset,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV destination; the table is also printed to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
