//! `hspeed`: exact counting and diagnostics for hereditary properties.
//!
//! Exit codes: 0 on success, 2 on usage or contract errors (with a JSON
//! `{code, message}` object on stderr), 1 on internal failure.

mod commands;
mod input;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use input::{Rational, Window};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Contract(#[from] hspeed::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn code(&self) -> &'static str {
        match self {
            CliError::Contract(e) => e.code(),
            CliError::Usage(_) => "UsageError",
            CliError::Io(_) => "IoError",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Pretty,
}

#[derive(Debug, Parser)]
#[command(name = "hspeed", version, about = "Exact computation with hereditary properties of finite structures")]
pub struct Cli {
    /// Largest structure size the command may generate.
    #[arg(long, global = true)]
    pub budget: Option<usize>,
    /// Seed for randomized steps; recorded in JSON outputs.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the primary output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

/// Selects a hereditary property.
#[derive(Debug, Args)]
pub struct PropertyArgs {
    /// Forbidden induced substructures (structure JSON files).
    #[arg(long, value_delimiter = ',')]
    pub forbid: Vec<PathBuf>,
    /// A built-in graph property: all, edgeless, matching, complete-bipartite, bipartite, triangle-free.
    #[arg(long)]
    pub predicate: Option<String>,
    /// The property of embedding into one of these templates (template JSON files).
    #[arg(long, value_delimiter = ',')]
    pub templates: Vec<PathBuf>,
    /// graph, relational, or uniform:R (default: graph for the graph language, else relational).
    #[arg(long)]
    pub ambient: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// The ~-decomposition of a structure.
    Decompose { structure: PathBuf },
    /// Exact speeds of a property.
    Speed {
        #[command(flatten)]
        property: PropertyArgs,
        #[arg(long)]
        nmax: usize,
    },
    /// Search for members violating basicness or total boundedness.
    Probe {
        #[arg(value_enum)]
        kind: ProbeKind,
        #[command(flatten)]
        property: PropertyArgs,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        nmax: usize,
    },
    /// Template counting, enumeration, closed forms and unions.
    Template {
        #[command(subcommand)]
        op: TemplateOp,
    },
    /// Connected components of a structure.
    Components { structure: PathBuf },
    /// Component sizes over all members up to a size.
    Census {
        #[command(flatten)]
        property: PropertyArgs,
        #[arg(long)]
        nmax: usize,
    },
    /// Partitions into blocks of equal size.
    Blocks {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
    },
    /// Split types, m-arrays and the bounded-array probe.
    Arrays {
        #[command(subcommand)]
        op: ArraysOp,
    },
    /// Hypergraph density constructions.
    Osc {
        #[command(subcommand)]
        op: OscOp,
    },
    /// Write a member of a built-in family.
    Corpus {
        /// matching, clique, bipartite-template, halfgraph-blowup, tight-cycle
        kind: String,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        r: Option<usize>,
        #[arg(long)]
        v: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProbeKind {
    Basic,
    Tb,
}

#[derive(Debug, Subcommand)]
pub enum TemplateOp {
    Count {
        #[arg(long)]
        template: PathBuf,
        #[arg(long)]
        n: usize,
    },
    Enumerate {
        #[arg(long)]
        template: PathBuf,
        #[arg(long)]
        n: usize,
    },
    Fit {
        #[arg(long)]
        template: PathBuf,
        #[arg(long, default_value = "6..12")]
        window: Window,
    },
    Union {
        #[arg(long, value_delimiter = ',', required = true)]
        templates: Vec<PathBuf>,
        #[arg(long)]
        n: usize,
    },
}

/// Relation and split selection shared by the array commands.
#[derive(Debug, Args)]
pub struct SplitArgs {
    /// Relation name (default: the first relation).
    #[arg(long)]
    pub rel: Option<String>,
    /// One-based free positions.
    #[arg(long, value_delimiter = ',', required = true)]
    pub split: Vec<usize>,
}

#[derive(Debug, Subcommand)]
pub enum ArraysOp {
    Types {
        #[arg(long)]
        structure: PathBuf,
        #[command(flatten)]
        split: SplitArgs,
        /// One-based parameter elements.
        #[arg(long = "A", value_delimiter = ',')]
        params: Vec<usize>,
    },
    Count {
        #[arg(long)]
        structure: PathBuf,
        #[command(flatten)]
        split: SplitArgs,
        #[arg(long = "A", value_delimiter = ',')]
        params: Vec<usize>,
        #[arg(long)]
        m: usize,
    },
    Probe {
        #[command(flatten)]
        property: PropertyArgs,
        #[command(flatten)]
        split: SplitArgs,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        nmax: usize,
        #[arg(long, default_value_t = hspeed::arrays::DEFAULT_A_MAX)]
        amax: usize,
    },
    /// Check k-mutual algebraicity of one relation.
    Algebraic {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        rel: Option<String>,
        #[arg(long)]
        k: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MemberMode {
    Q,
    S,
    P,
}

#[derive(Debug, Subcommand)]
pub enum OscOp {
    Balanced {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        c: Rational,
    },
    Member {
        #[arg(long, value_enum)]
        mode: MemberMode,
        #[arg(long)]
        h: PathBuf,
        #[arg(long)]
        c: Rational,
        #[arg(long, value_delimiter = ',')]
        nu: Vec<usize>,
    },
    Blowup {
        #[arg(long)]
        h: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        count_only: bool,
    },
    Sample {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        c: Rational,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        delta: Rational,
    },
    Sequence {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        c: Rational,
        #[arg(long)]
        eps: Rational,
        #[arg(long)]
        steps: usize,
    },
}

fn fail(e: &CliError) -> ExitCode {
    let body = serde_json::json!({ "code": e.code(), "message": e.to_string() });
    eprintln!("{body}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = std::panic::catch_unwind(|| commands::run(&cli));
    let output = match result {
        Ok(Ok(output)) => output,
        Ok(Err(e)) => return fail(&e),
        Err(_) => {
            eprintln!("{}", serde_json::json!({ "code": "Internal", "message": "internal failure" }));
            return ExitCode::from(1);
        }
    };
    let written = match &cli.out {
        Some(path) => std::fs::write(path, &output).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => std::io::stdout().write_all(output.as_bytes()).map_err(|e| CliError::Io(e.to_string())),
    };
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", serde_json::json!({ "code": e.code(), "message": e.to_string() }));
            ExitCode::from(1)
        }
    }
}
