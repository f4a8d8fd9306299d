use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use revrec::testkit::SynthParams;
use revrec_cli::{
    cmd_dump_graph, cmd_evaluate, cmd_ingest, cmd_recommend, cmd_synth, parse_weights, AppConfig,
    CliError, FileConfig, QuerySource,
};

#[derive(Parser)]
#[command(
    name = "revrec",
    version,
    about = "Hypergraph-based code-reviewer recommendation pipeline"
)]
struct Cli {
    /// Flat key = value config file; flags override it.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Worker threads for the data-parallel stages (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct ModelArgs {
    /// Propagation strength in [0, 1).
    #[arg(long)]
    mu: Option<f64>,

    /// Attenuation for repeat interactions within one PR.
    #[arg(long)]
    alpha: Option<f64>,

    /// Cap on PR-PR similarity edges per PR.
    #[arg(long = "top-k-similar", value_name = "K")]
    top_k_similar: Option<usize>,

    /// Role weights as `a,b,c,d` (reviewer, committer, review commenter,
    /// issue commenter).
    #[arg(long, value_parser = parse_weights_arg, value_name = "A,B,C,D")]
    weights: Option<revrec::hypergraph::RoleWeights>,

    /// Drop the PR-Reviewers relation.
    #[arg(long = "no-re")]
    no_re: bool,

    /// Drop the PR-Committers relation.
    #[arg(long = "no-ct")]
    no_ct: bool,

    /// Drop the PR-Issue-Commenters relation.
    #[arg(long = "no-ic")]
    no_ic: bool,

    /// Drop the PR-Review-Commenters relation.
    #[arg(long = "no-rc")]
    no_rc: bool,

    /// Drop the PR-Creator relation.
    #[arg(long = "no-creator")]
    no_creator: bool,

    /// Drop the PR-PR similarity relation.
    #[arg(long = "no-prpr")]
    no_prpr: bool,

    /// Solver residual tolerance.
    #[arg(long)]
    tol: Option<f64>,

    /// Solver iteration cap.
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,

    /// Edit-distance threshold for identity resolution.
    #[arg(long = "max-distance")]
    max_distance: Option<usize>,
}

fn parse_weights_arg(raw: &str) -> Result<revrec::hypergraph::RoleWeights, String> {
    parse_weights(raw)
}

#[derive(Args, Default)]
struct FilterArgs {
    /// Commits touching at least this many files are dropped.
    #[arg(long = "bulk-commit-threshold", value_name = "N")]
    bulk_commit_threshold: Option<usize>,

    /// Keep events by Bot actors.
    #[arg(long = "keep-bots")]
    keep_bots: bool,

    /// Keep events whose actor has no usable identity.
    #[arg(long = "keep-unresolved")]
    keep_unresolved: bool,

    /// Keep reviews by the PR creator.
    #[arg(long = "keep-self-reviews")]
    keep_self_reviews: bool,

    /// Keep events after the merge.
    #[arg(long = "keep-post-merge")]
    keep_post_merge: bool,

    /// Keep PRs without files or reviews.
    #[arg(long = "keep-empty-prs")]
    keep_empty_prs: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a raw export, unify identities, clean it, and write the result.
    Ingest {
        /// Raw JSON-lines event log.
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
        /// Cleaned JSON-lines output.
        #[arg(long, value_name = "PATH")]
        output: PathBuf,
        /// Project name used when the log has no header.
        #[arg(long, default_value = "project")]
        project: String,
        /// CSV table `login,email,name` of forced identity mappings.
        #[arg(long, value_name = "PATH")]
        overrides: Option<PathBuf>,
        #[command(flatten)]
        filter: FilterArgs,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Rank reviewer candidates for one PR against the history before it.
    Recommend {
        /// Cleaned JSON-lines event log.
        #[arg(long, value_name = "PATH")]
        log: PathBuf,
        /// Query PR id, looked up in the log.
        #[arg(long = "pr-id", conflicts_with = "pr_json")]
        pr_id: Option<String>,
        /// JSON file with a single PR record to use as the query.
        #[arg(long = "pr-json", value_name = "PATH")]
        pr_json: Option<PathBuf>,
        /// Number of candidates to emit.
        #[arg(short, long, default_value_t = 5)]
        k: usize,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Sliding-window ACC/MRR evaluation (12 training months + 1 test month).
    Evaluate {
        /// Cleaned JSON-lines event log.
        #[arg(long, value_name = "PATH")]
        log: PathBuf,
        /// Maximum number of sliding rounds.
        #[arg(long, default_value_t = 30)]
        rounds: usize,
        /// Write the per-round CSV here instead of stdout.
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
        /// Write the JSON summary here instead of stdout.
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Generate a deterministic synthetic event log with planted reviewers.
    Synth {
        /// JSON-lines output path.
        #[arg(long, value_name = "PATH")]
        output: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        devs: usize,
        #[arg(long, default_value_t = 400)]
        prs: usize,
        #[arg(long, default_value_t = 10)]
        subtrees: usize,
        #[arg(long, default_value_t = 14)]
        months: u32,
        /// Probability that each home-subtree developer reviews a subtree PR.
        #[arg(long = "reviewer-affinity", default_value_t = 1.0)]
        reviewer_affinity: f64,
        /// Probability that commits come from home-subtree developers.
        #[arg(long = "committer-affinity", default_value_t = 0.0)]
        committer_affinity: f64,
    },
    /// Build the full-log hypergraph and dump vertices/edges/weights as JSON.
    DumpGraph {
        /// Cleaned JSON-lines event log.
        #[arg(long, value_name = "PATH")]
        log: PathBuf,
        /// Write the dump here instead of stdout.
        #[arg(long, value_name = "PATH")]
        output: Option<PathBuf>,
        #[command(flatten)]
        model: ModelArgs,
    },
}

fn merge_model_args(cfg: &mut AppConfig, args: &ModelArgs) {
    if let Some(mu) = args.mu {
        cfg.hyper.mu = mu;
    }
    if let Some(alpha) = args.alpha {
        cfg.hyper.alpha = alpha;
    }
    if let Some(k) = args.top_k_similar {
        cfg.hyper.top_k_similar = k;
    }
    if let Some(weights) = args.weights {
        cfg.hyper.role_weights = weights;
    }
    if args.no_re {
        cfg.mask.include_re = false;
    }
    if args.no_ct {
        cfg.mask.include_ct = false;
    }
    if args.no_ic {
        cfg.mask.include_ic = false;
    }
    if args.no_rc {
        cfg.mask.include_rc = false;
    }
    if args.no_creator {
        cfg.mask.include_creator = false;
    }
    if args.no_prpr {
        cfg.mask.include_prpr = false;
    }
    if let Some(tol) = args.tol {
        cfg.solver.tol = tol;
    }
    if let Some(max_iter) = args.max_iter {
        cfg.solver.max_iter = max_iter;
    }
    if let Some(d) = args.max_distance {
        cfg.max_distance = d;
    }
}

fn merge_filter_args(cfg: &mut AppConfig, args: &FilterArgs) {
    if let Some(threshold) = args.bulk_commit_threshold {
        cfg.filter.bulk_commit_threshold = threshold;
    }
    if args.keep_bots {
        cfg.filter.drop_bots = false;
    }
    if args.keep_unresolved {
        cfg.filter.drop_unresolved = false;
    }
    if args.keep_self_reviews {
        cfg.filter.drop_self_reviews = false;
    }
    if args.keep_post_merge {
        cfg.filter.truncate_post_merge = false;
    }
    if args.keep_empty_prs {
        cfg.filter.drop_empty_prs = false;
    }
}

/// Print to stdout, treating a closed pipe as a silent success.
fn print_stdout(content: &str) -> Result<(), CliError> {
    let mut stdout = std::io::stdout().lock();
    let result = stdout
        .write_all(content.as_bytes())
        .and_then(|()| stdout.flush());
    match result {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {
            std::process::exit(0);
        }
        Err(source) => Err(CliError::Io {
            path: PathBuf::from("<stdout>"),
            source,
        }),
    }
}

fn write_or_print(path: Option<&PathBuf>, content: &str) -> Result<(), CliError> {
    match path {
        Some(path) => std::fs::write(path, content).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        }),
        None => print_stdout(content),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = AppConfig::default();
    if let Some(path) = &cli.config {
        FileConfig::load(path)?.apply_to(&mut cfg);
    }
    if cli.jobs.is_some() {
        cfg.jobs = cli.jobs;
    }
    if let Some(jobs) = cfg.jobs {
        if jobs == 0 {
            return Err(CliError::Usage("--jobs must be >= 1".to_string()));
        }
        revrec::configure_parallelism(jobs).map_err(CliError::Usage)?;
    }

    match &cli.command {
        Command::Ingest {
            input,
            output,
            project,
            overrides,
            filter,
            model,
        } => {
            merge_model_args(&mut cfg, model);
            merge_filter_args(&mut cfg, filter);
            cfg.validate()?;
            let summary = cmd_ingest(input, output, project, overrides.as_deref(), &cfg)?;
            let text = format!(
                "{}\n",
                serde_json::to_string_pretty(&summary).expect("json")
            );
            print_stdout(&text)?;
        }
        Command::Recommend {
            log,
            pr_id,
            pr_json,
            k,
            model,
        } => {
            merge_model_args(&mut cfg, model);
            cfg.validate()?;
            let source = match (pr_id, pr_json) {
                (Some(id), None) => QuerySource::PrId(id.clone()),
                (None, Some(path)) => QuerySource::PrJson(path.clone()),
                _ => {
                    return Err(CliError::Usage(
                        "exactly one of --pr-id or --pr-json is required".to_string(),
                    ))
                }
            };
            let recommendation = cmd_recommend(log, source, *k, &cfg)?;
            let text = format!(
                "{}\n",
                serde_json::to_string_pretty(&recommendation.to_json()).expect("json")
            );
            print_stdout(&text)?;
        }
        Command::Evaluate {
            log,
            rounds,
            csv,
            json,
            model,
        } => {
            merge_model_args(&mut cfg, model);
            cfg.validate()?;
            let (report, summary) = cmd_evaluate(log, *rounds, &cfg)?;
            write_or_print(csv.as_ref(), &report.to_csv())?;
            let summary_text = format!(
                "{}\n",
                serde_json::to_string_pretty(&summary).expect("json")
            );
            write_or_print(json.as_ref(), &summary_text)?;
        }
        Command::Synth {
            output,
            seed,
            devs,
            prs,
            subtrees,
            months,
            reviewer_affinity,
            committer_affinity,
        } => {
            let params = SynthParams {
                seed: *seed,
                n_devs: *devs,
                n_prs: *prs,
                n_subtrees: *subtrees,
                months: *months,
                reviewer_affinity: *reviewer_affinity,
                committer_affinity: *committer_affinity,
            };
            let written = cmd_synth(&params, output)?;
            eprintln!("wrote {written} PRs to {}", output.display());
        }
        Command::DumpGraph { log, output, model } => {
            merge_model_args(&mut cfg, model);
            cfg.validate()?;
            let dump = cmd_dump_graph(log, &cfg)?;
            let text = format!("{}\n", serde_json::to_string_pretty(&dump).expect("json"));
            write_or_print(output.as_ref(), &text)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
