//! Command-line entry point.
//!
//! Exit codes: 0 success, 1 usage error, 2 input validation error,
//! 3 runtime failure. Every scoring flag can also be set through a
//! `WGPARSE_*` environment variable.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use crate::chart::ParseConfig;
use crate::eval::{
    generate_corpus, load_annotations, run_corpus, write_corpus, ContextTable, Corpus, EvalError, EvalSetup,
    GenParams, ScoreModel,
};
use crate::grammar::{load_lexicon, Lexicon};
use crate::predictions::{load_prediction_sets, load_predictions, PredictionList};
use crate::robust::analyze;
use crate::scoring::{fmt_score, ScMode, ScoreConfig};
use crate::sil::{build_sil_output, load_trc_rules};
use crate::wordgraph::{node_count, parse_graph_file, WordGraph};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "wgparse", version, about = "Robust word-graph parsing and IC evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a word graph and print its size and best path cost.
    Validate {
        #[arg(long)]
        graph: PathBuf,
    },
    /// Parse a word graph and emit the selected results as SIL JSON.
    Parse {
        #[command(flatten)]
        input: ParseInput,
        /// Write SIL JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the score breakdown of every chart edge.
    Score {
        #[command(flatten)]
        input: ParseInput,
    },
    /// Evaluate a corpus without and with context predictions.
    Eval {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        lexicon: PathBuf,
        #[arg(long)]
        trc_rules: PathBuf,
        /// JSON array of prediction lists; built-in contexts otherwise.
        #[arg(long)]
        contexts: Option<PathBuf>,
        #[arg(long, env = "WGPARSE_JOBS", default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        jobs: u32,
        /// Write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        scoring: ScoringArgs,
    },
    /// Generate a synthetic word-graph corpus from transcripts.
    Gen {
        #[arg(long)]
        transcripts: PathBuf,
        #[arg(long)]
        lexicon: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        density: u32,
        #[arg(long, value_parser = parse_percent)]
        target_wa: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Debug)]
struct ParseInput {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    lexicon: PathBuf,
    #[arg(long)]
    predictions: Option<PathBuf>,
    #[command(flatten)]
    scoring: ScoringArgs,
}

#[derive(Args, Debug)]
struct ScoringArgs {
    #[arg(long, env = "WGPARSE_PR_MATCH", default_value_t = 4.0)]
    pr_match: f64,
    #[arg(long, env = "WGPARSE_PR_NOMATCH", default_value_t = 1.0)]
    pr_nomatch: f64,
    /// constant-one or valence-ratio
    #[arg(long, env = "WGPARSE_SC_MODE", default_value = "constant-one")]
    sc_mode: ScMode,
    #[arg(long, env = "WGPARSE_MAX_STEPS", value_parser = clap::value_parser!(u64).range(1..))]
    max_steps: Option<u64>,
    /// Comma-separated categories accepted as complete solutions.
    #[arg(long, env = "WGPARSE_RESULT_CATS", value_delimiter = ',')]
    result_cats: Option<Vec<String>>,
}

fn parse_percent(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=100.0).contains(&v) {
        Ok(v)
    } else {
        Err("must lie in [0, 100]".into())
    }
}

struct CliError {
    code: i32,
    err: anyhow::Error,
}

type CliResult = Result<(), CliError>;

fn input<E: Into<anyhow::Error>>(e: E) -> CliError {
    CliError {
        code: EXIT_INPUT,
        err: e.into(),
    }
}

fn runtime<E: Into<anyhow::Error>>(e: E) -> CliError {
    CliError {
        code: EXIT_RUNTIME,
        err: e.into(),
    }
}

fn usage(msg: String) -> CliError {
    CliError {
        code: EXIT_USAGE,
        err: anyhow!(msg),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(input)
}

fn eval_error(e: EvalError) -> CliError {
    match e {
        EvalError::Io { .. } => runtime(e),
        other => input(other),
    }
}

impl ScoringArgs {
    fn config(&self) -> Result<ParseConfig, CliError> {
        let score = ScoreConfig {
            pr_match: self.pr_match,
            pr_nomatch: self.pr_nomatch,
            sc_mode: self.sc_mode,
            ..ScoreConfig::default()
        };
        score.validate().map_err(|e| usage(e.to_string()))?;
        Ok(ParseConfig {
            score,
            result_categories: self
                .result_cats
                .as_ref()
                .map(|v| v.iter().cloned().collect::<BTreeSet<_>>()),
            max_steps: self.max_steps.map(|n| n as usize),
        })
    }
}

struct Loaded {
    graph: WordGraph,
    lexicon: Lexicon,
    preds: PredictionList,
    cfg: ParseConfig,
}

impl ParseInput {
    fn load(&self) -> Result<Loaded, CliError> {
        let cfg = self.scoring.config()?;
        let graph = parse_graph_file(&read(&self.graph)?)
            .with_context(|| self.graph.display().to_string())
            .map_err(input)?;
        let lexicon = load_lexicon(&read(&self.lexicon)?)
            .with_context(|| self.lexicon.display().to_string())
            .map_err(input)?;
        let preds = match &self.predictions {
            Some(p) => load_predictions(&read(p)?)
                .with_context(|| p.display().to_string())
                .map_err(input)?,
            None => PredictionList::empty(),
        };
        Ok(Loaded {
            graph,
            lexicon,
            preds,
            cfg,
        })
    }
}

fn io(e: std::io::Error) -> CliError {
    runtime(e)
}

fn cmd_validate(graph: &Path, out: &mut dyn Write) -> CliResult {
    let g = parse_graph_file(&read(graph)?)
        .with_context(|| graph.display().to_string())
        .map_err(input)?;
    writeln!(
        out,
        "nodes={} edges={} maxseg={}",
        node_count(&g),
        g.edges().len(),
        fmt_score(g.best_path_cost())
    )
    .map_err(io)
}

fn cmd_parse(args: &ParseInput, dest: Option<&Path>, out: &mut dyn Write) -> CliResult {
    let l = args.load()?;
    let analysis = analyze(&l.graph, &l.lexicon, &l.preds, &l.cfg).map_err(input)?;
    let sil = build_sil_output(&analysis.results);
    let mut json = serde_json::to_string_pretty(&sil).map_err(runtime)?;
    json.push('\n');
    writeln!(out, "{}", analysis.status_line()).map_err(io)?;
    match dest {
        Some(path) => std::fs::write(path, json)
            .with_context(|| format!("cannot write {}", path.display()))
            .map_err(runtime),
        None => out.write_all(json.as_bytes()).map_err(io),
    }
}

fn cmd_score(args: &ParseInput, out: &mut dyn Write) -> CliResult {
    let l = args.load()?;
    let outcome = crate::chart::parse(&l.graph, &l.lexicon, &l.preds, &l.cfg).map_err(input)?;
    let mut edges = outcome.chart.clone();
    edges.sort_by(|a, b| crate::chart::rank_cmp(a, b));
    let w = edges.iter().map(|e| e.string().len()).max().unwrap_or(0).max(6);
    writeln!(
        out,
        "{:>4} {:>4} {:<w$} {:<6} {:>8} {:>8} {:>8} {:>5} {:>5} {:>8}",
        "from", "to", "string", "cat", "rs", "sf", "q_a", "sc", "pr", "qs"
    )
    .map_err(io)?;
    for e in &edges {
        let s = &e.scores;
        writeln!(
            out,
            "{:>4} {:>4} {:<w$} {:<6} {:>8} {:>8} {:>8} {:>5} {:>5} {:>8}",
            e.from.0,
            e.to.0,
            e.string(),
            e.constituent.cat.major,
            fmt_score(s.rs),
            fmt_score(s.sf),
            fmt_score(s.q_a),
            fmt_score(s.sc),
            fmt_score(s.pr),
            fmt_score(s.qs)
        )
        .map_err(io)?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_eval(
    corpus: &Path,
    lexicon: &Path,
    trc_rules: &Path,
    contexts: Option<&Path>,
    jobs: u32,
    dest: Option<&Path>,
    scoring: &ScoringArgs,
    out: &mut dyn Write,
) -> CliResult {
    let cfg = scoring.config()?;
    let lexicon = load_lexicon(&read(lexicon)?).map_err(input)?;
    let rules = load_trc_rules(&read(trc_rules)?).map_err(input)?;
    let contexts = match contexts {
        Some(p) => ContextTable::new(load_prediction_sets(&read(p)?).map_err(input)?),
        None => ContextTable::builtin(),
    };
    let corpus = Corpus::load(corpus).map_err(|e| match e {
        EvalError::Io { .. } | EvalError::Json { .. } => input(e),
        other => eval_error(other),
    })?;
    let setup = EvalSetup {
        lexicon: &lexicon,
        rules: &rules,
        contexts: &contexts,
        parse: &cfg,
        jobs: jobs as usize,
    };
    let report = run_corpus(&corpus, &setup).map_err(eval_error)?;
    out.write_all(report.table().as_bytes()).map_err(io)?;
    if let Some(path) = dest {
        let mut json = serde_json::to_string_pretty(&report).map_err(runtime)?;
        json.push('\n');
        std::fs::write(path, json)
            .with_context(|| format!("cannot write {}", path.display()))
            .map_err(runtime)?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_gen(
    transcripts: &Path,
    lexicon: &Path,
    density: u32,
    target_wa: f64,
    seed: u64,
    dest: &Path,
    out: &mut dyn Write,
) -> CliResult {
    let params = GenParams {
        density: density as usize,
        target_wa,
        score: ScoreModel::default(),
        seed,
    };
    params.validate().map_err(|e| usage(e.to_string()))?;
    let lexicon = load_lexicon(&read(lexicon)?).map_err(input)?;
    let specs = load_annotations(transcripts).map_err(input)?;
    let corpus = generate_corpus(&specs, &lexicon, &params).map_err(input)?;
    write_corpus(dest, &corpus).map_err(runtime)?;
    let (errors, words) = corpus.iter().fold((0, 0), |(e, n), u| {
        let (ue, un) = crate::eval::word_accuracy(&u.graph, &u.annotation.transcript);
        (e + ue, n + un)
    });
    writeln!(
        out,
        "utterances={} words={} wa={:.2}",
        corpus.len(),
        words,
        100.0 * (1.0 - errors as f64 / words.max(1) as f64)
    )
    .map_err(io)
}

/// Run the CLI with the given arguments, returning the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    let res = match &cli.command {
        Command::Validate { graph } => cmd_validate(graph, out),
        Command::Parse { input, out: dest } => cmd_parse(input, dest.as_deref(), out),
        Command::Score { input } => cmd_score(input, out),
        Command::Eval {
            corpus,
            lexicon,
            trc_rules,
            contexts,
            jobs,
            out: dest,
            scoring,
        } => cmd_eval(
            corpus,
            lexicon,
            trc_rules,
            contexts.as_deref(),
            *jobs,
            dest.as_deref(),
            scoring,
            out,
        ),
        Command::Gen {
            transcripts,
            lexicon,
            density,
            target_wa,
            seed,
            out: dest,
        } => cmd_gen(transcripts, lexicon, *density, *target_wa, *seed, dest, out),
    };
    match res {
        Ok(()) => 0,
        Err(CliError { code, err }) => {
            eprintln!("error: {err:#}");
            code
        }
    }
}
