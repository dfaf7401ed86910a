use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ontosearch_cli::{
    cmd_compare, cmd_eval, cmd_expand, cmd_index, cmd_search, FileConfig, Settings,
};

/// Ontology-based semantic text search over a file-backed corpus.
#[derive(Parser)]
#[command(name = "ontosearch", version, about)]
struct Cli {
    /// JSON configuration file (paths, preset, model overrides).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Model preset: lexical, ne_kw, ww_kw, ne_ww_kw, csa, rcsa, semantic.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Seed for the randomization test and the run manifest.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Render latent concepts as plain keywords regardless of preset.
    #[arg(long, global = true)]
    latent_keywords: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Annotate a corpus and build the persisted index.
    Index {
        /// Corpus file: JSONL ({"docno","text"}) or TREC-style SGML.
        #[arg(long)]
        corpus: PathBuf,
        /// Directory with the five ontology files.
        #[arg(long)]
        ontology: PathBuf,
        /// Output directory for vocab.tsv, postings.tsv, meta.tsv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Rank documents for a query or a topics file.
    Search {
        #[arg(long)]
        index: PathBuf,
        /// Ontology directory; defaults to the one recorded in the index.
        #[arg(long)]
        ontology: Option<PathBuf>,
        #[arg(long)]
        query: Option<String>,
        /// Topics file (query_id<TAB>text) for batch runs.
        #[arg(long)]
        topics: Option<PathBuf>,
        /// Number of results per query.
        #[arg(short, long, default_value_t = 10)]
        k: usize,
        /// Print matched terms and latent-term provenance.
        #[arg(long)]
        explain: bool,
        /// Write the results as a TREC run file.
        #[arg(long)]
        run_out: Option<PathBuf>,
        /// Run tag for the TREC output.
        #[arg(long, default_value = "ontosearch")]
        tag: String,
    },
    /// Print a query's latent concepts with provenance, without searching.
    Expand {
        #[arg(long)]
        ontology: PathBuf,
        #[arg(long)]
        query: String,
    },
    /// Evaluate a TREC run against qrels.
    Eval {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        qrels: PathBuf,
        #[arg(long)]
        out_json: PathBuf,
        #[arg(long)]
        out_tsv: Option<PathBuf>,
    },
    /// Randomization test between two evaluation reports.
    Compare {
        #[arg(long)]
        report_a: PathBuf,
        #[arg(long)]
        report_b: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        permutations: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are successful exits; everything else is a
            // usage error.
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };

    let config = match &cli.config {
        Some(path) => match FileConfig::load(path) {
            Ok(config) => config,
            Err(e) => {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
        },
        None => FileConfig::default(),
    };
    let settings = Settings {
        config,
        preset: cli.preset.clone(),
        seed: cli.seed,
        latent_keywords: cli.latent_keywords,
    };

    let result = match &cli.command {
        Command::Index {
            corpus,
            ontology,
            out,
        } => cmd_index(&settings, corpus, ontology, out),
        Command::Search {
            index,
            ontology,
            query,
            topics,
            k,
            explain,
            run_out,
            tag,
        } => cmd_search(
            &settings,
            index,
            ontology.as_deref(),
            query.as_deref(),
            topics.as_deref(),
            *k,
            *explain,
            run_out.as_deref(),
            tag,
        ),
        Command::Expand { ontology, query } => cmd_expand(&settings, ontology, query),
        Command::Eval {
            run,
            qrels,
            out_json,
            out_tsv,
        } => cmd_eval(&settings, run, qrels, out_json, out_tsv.as_deref()),
        Command::Compare {
            report_a,
            report_b,
            permutations,
        } => cmd_compare(&settings, report_a, report_b, *permutations),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
