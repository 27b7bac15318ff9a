use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use citequal::pipeline::{run_stages, ConfigOverrides, PipelineConfig, PipelineError, Stage};

/// Citation index, article quality scores and top-K topic matrices from
/// MediaWiki dumps.
#[derive(Parser)]
#[command(name = "citequal", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: GlobalArgs,
}

#[derive(Args)]
struct GlobalArgs {
    /// Pipeline configuration file (TOML).
    #[arg(long, global = true, default_value = "citequal.toml")]
    config: PathBuf,
    /// Rerun stages even when their outputs exist.
    #[arg(long, global = true)]
    force: bool,
    /// Abort on the first malformed dump row.
    #[arg(long, global = true, conflicts_with = "lenient")]
    strict: bool,
    /// Skip malformed dump rows and count them.
    #[arg(long, global = true)]
    lenient: bool,
    /// Comma-separated language codes to process.
    #[arg(long, global = true, value_delimiter = ',')]
    languages: Option<Vec<String>>,
    /// Comma-separated, strictly increasing K values.
    #[arg(long, global = true, value_delimiter = ',')]
    k: Option<Vec<usize>>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Parse page tables and redirect targets.
    Ingest,
    /// Build the citation index from pagelinks.
    Index,
    /// Measure article features from the XML export.
    Features,
    /// Compute benchmarks and quality scores.
    Score,
    /// Map articles to topics through Wikidata.
    Align,
    /// Rank each topic's articles by citations for every K.
    Rank,
    /// Write the average-quality matrix.
    Report,
    /// Run every stage.
    Run,
}

impl Command {
    fn stages(self) -> Vec<Stage> {
        match self {
            Command::Ingest => vec![Stage::Ingest],
            Command::Index => vec![Stage::Index],
            Command::Features => vec![Stage::Features],
            Command::Score => vec![Stage::Score],
            Command::Align => vec![Stage::Align],
            Command::Rank => vec![Stage::Rank],
            Command::Report => vec![Stage::Report],
            Command::Run => Stage::ALL.to_vec(),
        }
    }
}

fn run(cli: &Cli) -> Result<String, PipelineError> {
    let g = &cli.global;
    let overrides = ConfigOverrides {
        strict: match (g.strict, g.lenient) {
            (true, _) => Some(true),
            (_, true) => Some(false),
            _ => None,
        },
        languages: g.languages.clone(),
        k_values: g.k.clone(),
    };
    let config = PipelineConfig::load_with(&g.config, &overrides)?;
    let report = run_stages(&config, &cli.command.stages(), g.force)?;
    Ok(report.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage mistakes are configuration errors; 2 is reserved for parse failures
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(report) => {
            print!("{report}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
