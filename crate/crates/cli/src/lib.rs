//! The `hardlda` command line: reproducible pipelines for generating
//! synthetic corpora, fitting hard and probabilistic topic models,
//! evaluating them and timing their iterations.
//!
//! Exit codes: 0 success, 2 usage error, 3 bad input data, 4 internal
//! failure.

pub mod args;
pub mod bench;
pub mod eval;
pub mod fit;
pub mod generate;
pub mod manifest;

use std::path::{Path, PathBuf};

pub use args::Cli;
use args::Command;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] hardlda_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(hardlda_core::Error::Argument(_)) => EXIT_USAGE,
            CliError::Core(e) if e.is_data_error() => EXIT_DATA,
            CliError::Io { .. } => EXIT_DATA,
            CliError::Core(_) | CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        // A second call in the same process fails; the first pool stays.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match cli.command {
        Command::Generate(a) => generate::cmd_generate(&a),
        Command::Split(a) => generate::cmd_split(&a),
        Command::Fit(a) => fit::cmd_fit(&a),
        Command::Eval(a) => eval::cmd_eval(&a),
        Command::Bench(a) => bench::cmd_bench(&a),
    }
}

pub(crate) fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}
