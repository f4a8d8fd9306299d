//! Command implementations and configuration plumbing for the `revrec`
//! binary.
//!
//! Configuration precedence is flag > config file > default. The config file
//! is a flat `key = value` text file mirroring the field names; `#` starts a
//! comment. Every command maps its failures onto a distinct exit-code class.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read};
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use revrec::eval::{self, EvalError, EvalReport, DEFAULT_KS};
use revrec::events::{self, EventLog, EventLogError, PullRequest};
use revrec::hypergraph::{
    build_hypergraph_masked, HypergraphError, HyperparamConfig, RelationMask, RoleWeights,
};
use revrec::identity::{build_identity_map_with_overrides, IdentityMap, IdentityOverride};
use revrec::preprocess::{apply_filters, FilterConfig, FilterReport};
use revrec::ranker::{recommend, RankerError, Recommendation, SolverConfig};
use revrec::testkit::{generate_log, SynthParams, TestkitError};

/// Exit-code classes: 2 usage/config, 3 io, 4 parse/schema, 5 domain,
/// 6 insufficient span, 7 no convergence.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(EventLogError),
    #[error("{0}")]
    Domain(String),
    #[error("unknown pr {0:?}")]
    UnknownPr(String),
    #[error("{0}")]
    InsufficientSpan(String),
    #[error("{0}")]
    NoConvergence(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Parse(_) => 4,
            CliError::Domain(_) | CliError::UnknownPr(_) => 5,
            CliError::InsufficientSpan(_) => 6,
            CliError::NoConvergence(_) => 7,
        }
    }
}

impl From<EventLogError> for CliError {
    fn from(err: EventLogError) -> Self {
        match err {
            EventLogError::Io(e) => CliError::Io {
                path: PathBuf::from("<stream>"),
                source: e,
            },
            other => CliError::Parse(other),
        }
    }
}

impl From<HypergraphError> for CliError {
    fn from(err: HypergraphError) -> Self {
        CliError::Domain(err.to_string())
    }
}

impl From<RankerError> for CliError {
    fn from(err: RankerError) -> Self {
        match err {
            RankerError::NoConvergence { .. } => CliError::NoConvergence(err.to_string()),
            other => CliError::Domain(other.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(err: EvalError) -> Self {
        match err {
            EvalError::InsufficientSpan => CliError::InsufficientSpan(err.to_string()),
            EvalError::Ranker(RankerError::NoConvergence { .. }) => {
                CliError::NoConvergence(err.to_string())
            }
            other => CliError::Domain(other.to_string()),
        }
    }
}

impl From<TestkitError> for CliError {
    fn from(err: TestkitError) -> Self {
        match err {
            TestkitError::InvalidParams(_) => CliError::Usage(err.to_string()),
            TestkitError::SingularMatrix => CliError::Domain(err.to_string()),
        }
    }
}

/// Everything the pipeline is parameterized by.
#[derive(Debug, Clone, Serialize)]
pub struct AppConfig {
    pub hyper: HyperparamConfig,
    #[serde(skip)]
    pub filter: FilterConfig,
    #[serde(skip)]
    pub mask: RelationMask,
    pub solver: SolverConfig,
    pub max_distance: usize,
    #[serde(skip)]
    pub jobs: Option<usize>,
}

impl Default for AppConfig {
    fn default() -> Self {
        AppConfig {
            hyper: HyperparamConfig::default(),
            filter: FilterConfig::default(),
            mask: RelationMask::default(),
            solver: SolverConfig::default(),
            max_distance: 2,
            jobs: None,
        }
    }
}

impl AppConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        self.hyper.validate().map_err(CliError::Usage)?;
        if !self.mask.is_valid() {
            return Err(CliError::Usage(
                "at least one relation must stay enabled".to_string(),
            ));
        }
        if self.filter.bulk_commit_threshold < 1 {
            return Err(CliError::Usage(
                "bulk_commit_threshold must be >= 1".to_string(),
            ));
        }
        if self.solver.tol <= 0.0 {
            return Err(CliError::Usage("tol must be positive".to_string()));
        }
        Ok(())
    }

    /// JSON echo of the effective configuration.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "mu": self.hyper.mu,
            "alpha": self.hyper.alpha,
            "top_k_similar": self.hyper.top_k_similar,
            "weights": [
                self.hyper.role_weights.reviewer,
                self.hyper.role_weights.committer,
                self.hyper.role_weights.review_commenter,
                self.hyper.role_weights.issue_commenter,
            ],
            "mask": self.mask.label(),
            "tol": self.solver.tol,
            "max_iter": self.solver.max_iter,
            "bulk_commit_threshold": self.filter.bulk_commit_threshold,
            "max_distance": self.max_distance,
        })
    }
}

/// Values read from a config file; `None` means "not set here".
#[derive(Debug, Clone, Default)]
pub struct FileConfig {
    pub mu: Option<f64>,
    pub alpha: Option<f64>,
    pub top_k_similar: Option<usize>,
    pub weights: Option<RoleWeights>,
    pub bulk_commit_threshold: Option<usize>,
    pub drop_bots: Option<bool>,
    pub drop_unresolved: Option<bool>,
    pub drop_self_reviews: Option<bool>,
    pub truncate_post_merge: Option<bool>,
    pub drop_empty_prs: Option<bool>,
    pub include_re: Option<bool>,
    pub include_ct: Option<bool>,
    pub include_ic: Option<bool>,
    pub include_rc: Option<bool>,
    pub include_creator: Option<bool>,
    pub include_prpr: Option<bool>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub max_distance: Option<usize>,
    pub jobs: Option<usize>,
}

/// Parse `a,b,c,d` into role weights.
pub fn parse_weights(raw: &str) -> Result<RoleWeights, String> {
    let parts: Vec<&str> = raw.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(format!(
            "expected 4 comma-separated weights, got {}",
            parts.len()
        ));
    }
    let mut values = [0.0f64; 4];
    for (slot, part) in values.iter_mut().zip(&parts) {
        *slot = part
            .parse()
            .map_err(|_| format!("invalid weight {part:?}"))?;
    }
    Ok(RoleWeights {
        reviewer: values[0],
        committer: values[1],
        review_commenter: values[2],
        issue_commenter: values[3],
    })
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        FileConfig::parse(&text).map_err(CliError::Usage)
    }

    /// Flat `key = value` lines; `#` comments; string values may be quoted.
    pub fn parse(text: &str) -> Result<FileConfig, String> {
        let mut cfg = FileConfig::default();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("config line {line_no}: expected key = value"))?;
            let key = key.trim();
            let value = value.trim().trim_matches('"');
            let bad = |what: &str| format!("config line {line_no}: invalid {what}: {value:?}");
            match key {
                "mu" => cfg.mu = Some(value.parse().map_err(|_| bad("mu"))?),
                "alpha" => cfg.alpha = Some(value.parse().map_err(|_| bad("alpha"))?),
                "top_k_similar" => {
                    cfg.top_k_similar = Some(value.parse().map_err(|_| bad("top_k_similar"))?)
                }
                "weights" => cfg.weights = Some(parse_weights(value)?),
                "bulk_commit_threshold" => {
                    cfg.bulk_commit_threshold =
                        Some(value.parse().map_err(|_| bad("bulk_commit_threshold"))?)
                }
                "drop_bots" => cfg.drop_bots = Some(value.parse().map_err(|_| bad("bool"))?),
                "drop_unresolved" => {
                    cfg.drop_unresolved = Some(value.parse().map_err(|_| bad("bool"))?)
                }
                "drop_self_reviews" => {
                    cfg.drop_self_reviews = Some(value.parse().map_err(|_| bad("bool"))?)
                }
                "truncate_post_merge" => {
                    cfg.truncate_post_merge = Some(value.parse().map_err(|_| bad("bool"))?)
                }
                "drop_empty_prs" => {
                    cfg.drop_empty_prs = Some(value.parse().map_err(|_| bad("bool"))?)
                }
                "include_re" => cfg.include_re = Some(value.parse().map_err(|_| bad("bool"))?),
                "include_ct" => cfg.include_ct = Some(value.parse().map_err(|_| bad("bool"))?),
                "include_ic" => cfg.include_ic = Some(value.parse().map_err(|_| bad("bool"))?),
                "include_rc" => cfg.include_rc = Some(value.parse().map_err(|_| bad("bool"))?),
                "include_creator" => {
                    cfg.include_creator = Some(value.parse().map_err(|_| bad("bool"))?)
                }
                "include_prpr" => cfg.include_prpr = Some(value.parse().map_err(|_| bad("bool"))?),
                "tol" => cfg.tol = Some(value.parse().map_err(|_| bad("tol"))?),
                "max_iter" => cfg.max_iter = Some(value.parse().map_err(|_| bad("max_iter"))?),
                "max_distance" => {
                    cfg.max_distance = Some(value.parse().map_err(|_| bad("max_distance"))?)
                }
                "jobs" => cfg.jobs = Some(value.parse().map_err(|_| bad("jobs"))?),
                other => return Err(format!("config line {line_no}: unknown key {other:?}")),
            }
        }
        Ok(cfg)
    }

    /// Apply file values over the defaults (flags are merged later, on top).
    pub fn apply_to(&self, cfg: &mut AppConfig) {
        macro_rules! set {
            ($field:expr, $target:expr) => {
                if let Some(v) = $field {
                    $target = v;
                }
            };
        }
        set!(self.mu, cfg.hyper.mu);
        set!(self.alpha, cfg.hyper.alpha);
        set!(self.top_k_similar, cfg.hyper.top_k_similar);
        set!(self.weights, cfg.hyper.role_weights);
        set!(self.bulk_commit_threshold, cfg.filter.bulk_commit_threshold);
        set!(self.drop_bots, cfg.filter.drop_bots);
        set!(self.drop_unresolved, cfg.filter.drop_unresolved);
        set!(self.drop_self_reviews, cfg.filter.drop_self_reviews);
        set!(self.truncate_post_merge, cfg.filter.truncate_post_merge);
        set!(self.drop_empty_prs, cfg.filter.drop_empty_prs);
        set!(self.include_re, cfg.mask.include_re);
        set!(self.include_ct, cfg.mask.include_ct);
        set!(self.include_ic, cfg.mask.include_ic);
        set!(self.include_rc, cfg.mask.include_rc);
        set!(self.include_creator, cfg.mask.include_creator);
        set!(self.include_prpr, cfg.mask.include_prpr);
        set!(self.tol, cfg.solver.tol);
        set!(self.max_iter, cfg.solver.max_iter);
        set!(self.max_distance, cfg.max_distance);
        if self.jobs.is_some() {
            cfg.jobs = self.jobs;
        }
    }
}

fn open_reader(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })
}

fn create_writer(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })
}

pub fn load_log(path: &Path, project: &str) -> Result<EventLog, CliError> {
    let reader = open_reader(path)?;
    events::parse_event_log(reader, project).map_err(|err| match err {
        EventLogError::Io(source) => CliError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => CliError::Parse(other),
    })
}

/// `login,email,name` rows; a leading header row is skipped; empty cells
/// mean "attribute absent".
pub fn load_overrides(path: &Path) -> Result<Vec<IdentityOverride>, CliError> {
    let mut text = String::new();
    open_reader(path)?
        .read_to_string(&mut text)
        .map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if idx == 0 && line.eq_ignore_ascii_case("login,email,name") {
            continue;
        }
        let mut cells = line.split(',').map(str::trim);
        let login = cells
            .next()
            .filter(|c| !c.is_empty())
            .ok_or_else(|| CliError::Usage(format!("overrides line {}: empty login", idx + 1)))?;
        let email = cells.next().filter(|c| !c.is_empty()).map(String::from);
        let name = cells.next().filter(|c| !c.is_empty()).map(String::from);
        rows.push(IdentityOverride {
            login: login.to_string(),
            email,
            name,
        });
    }
    Ok(rows)
}

#[derive(Debug, Serialize)]
pub struct IngestSummary {
    pub report: FilterReport,
    pub logins: usize,
    pub anon_ids: usize,
}

/// Parse, resolve identities, clean, and write the cleaned log.
pub fn cmd_ingest(
    input: &Path,
    output: &Path,
    project: &str,
    overrides_path: Option<&Path>,
    cfg: &AppConfig,
) -> Result<IngestSummary, CliError> {
    let log = load_log(input, project)?;
    let overrides = match overrides_path {
        Some(path) => load_overrides(path)?,
        None => Vec::new(),
    };
    let ids = build_identity_map_with_overrides(&log, cfg.max_distance, &overrides);
    let (cleaned, report) = apply_filters(&log, &ids, &cfg.filter);
    let writer = create_writer(output)?;
    events::write_event_log(&cleaned, writer).map_err(|err| match err {
        EventLogError::Io(source) => CliError::Io {
            path: output.to_path_buf(),
            source,
        },
        other => CliError::Parse(other),
    })?;
    Ok(IngestSummary {
        report,
        logins: ids.login_count(),
        anon_ids: ids.anon_count(),
    })
}

/// Where the query PR comes from.
pub enum QuerySource {
    PrId(String),
    PrJson(PathBuf),
}

fn identity_map_for(log: &EventLog, cfg: &AppConfig) -> IdentityMap {
    build_identity_map_with_overrides(log, cfg.max_distance, &[])
}

fn truncated_training_slice(log: &EventLog, cutoff: i64) -> EventLog {
    EventLog {
        project: log.project.clone(),
        t_start: log.t_start,
        t_end: cutoff,
        prs: log
            .prs
            .iter()
            .filter(|pr| pr.created_at < cutoff)
            .map(|pr| {
                let mut pr = pr.clone();
                pr.commits.retain(|c| c.timestamp < cutoff);
                pr.reviews.retain(|r| r.timestamp < cutoff);
                pr.comments.retain(|c| c.timestamp < cutoff);
                pr
            })
            .collect(),
    }
}

/// Rank reviewers for one query PR against the log's history before it.
pub fn cmd_recommend(
    log_path: &Path,
    query: QuerySource,
    k: usize,
    cfg: &AppConfig,
) -> Result<Recommendation, CliError> {
    let log = load_log(log_path, "project")?;
    let query_pr: PullRequest = match query {
        QuerySource::PrId(pr_id) => log
            .prs
            .iter()
            .find(|pr| pr.pr_id == pr_id)
            .cloned()
            .ok_or(CliError::UnknownPr(pr_id))?,
        QuerySource::PrJson(path) => {
            let mut text = String::new();
            open_reader(&path)?
                .read_to_string(&mut text)
                .map_err(|source| CliError::Io {
                    path: path.clone(),
                    source,
                })?;
            events::parse_pr_json(&text)?
        }
    };

    let ids = identity_map_for(&log, cfg);
    let training = truncated_training_slice(&log, query_pr.created_at);
    let system = build_hypergraph_masked(&training, &ids, &cfg.hyper, &cfg.mask)?;
    let recommendation = recommend(
        &system,
        &ids,
        &query_pr,
        &cfg.hyper,
        &cfg.mask,
        &cfg.solver,
        k,
        query_pr.created_at,
    )?;
    Ok(recommendation)
}

/// Sliding-window evaluation over a preprocessed log.
pub fn cmd_evaluate(
    log_path: &Path,
    n_rounds: usize,
    cfg: &AppConfig,
) -> Result<(EvalReport, serde_json::Value), CliError> {
    let log = load_log(log_path, "project")?;
    let ids = identity_map_for(&log, cfg);
    let report = eval::run_evaluation(
        &log,
        &ids,
        &cfg.hyper,
        &cfg.solver,
        &cfg.mask,
        n_rounds,
        &DEFAULT_KS,
    )?;
    let summary = serde_json::json!({
        "config": cfg.to_json(),
        "n_rounds_requested": n_rounds,
        "evaluation": report.to_json(),
    });
    Ok((report, summary))
}

/// Generate a synthetic log and write it as JSON-lines.
pub fn cmd_synth(params: &SynthParams, output: &Path) -> Result<usize, CliError> {
    let log = generate_log(params)?;
    let writer = create_writer(output)?;
    events::write_event_log(&log, writer).map_err(|err| match err {
        EventLogError::Io(source) => CliError::Io {
            path: output.to_path_buf(),
            source,
        },
        other => CliError::Parse(other),
    })?;
    Ok(log.prs.len())
}

/// Build the full-log hypergraph and dump it as JSON for inspection.
pub fn cmd_dump_graph(log_path: &Path, cfg: &AppConfig) -> Result<serde_json::Value, CliError> {
    let log = load_log(log_path, "project")?;
    let ids = identity_map_for(&log, cfg);
    let system = build_hypergraph_masked(&log, &ids, &cfg.hyper, &cfg.mask)?;
    Ok(system.to_debug_json())
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;

    #[test]
    fn config_file_round_trip() {
        let text = r#"
            # tuned run
            mu = 0.5
            alpha = 0.7
            top_k_similar = 3
            weights = 2,1,1,1
            include_rc = false
            tol = 1e-6
            max_iter = 500
            bulk_commit_threshold = 50
        "#;
        let file = FileConfig::parse(text).unwrap();
        let mut cfg = AppConfig::default();
        file.apply_to(&mut cfg);
        assert_eq!(cfg.hyper.mu, 0.5);
        assert_eq!(cfg.hyper.alpha, 0.7);
        assert_eq!(cfg.hyper.top_k_similar, 3);
        assert_eq!(cfg.hyper.role_weights.reviewer, 2.0);
        assert!(!cfg.mask.include_rc);
        assert_eq!(cfg.solver.tol, 1e-6);
        assert_eq!(cfg.solver.max_iter, 500);
        assert_eq!(cfg.filter.bulk_commit_threshold, 50);
    }

    #[test]
    fn unknown_config_key_rejected() {
        let err = FileConfig::parse("nope = 1").unwrap_err();
        assert!(err.contains("unknown key"));
    }

    #[test]
    fn weights_parser() {
        let w = parse_weights("4,3,1,1").unwrap();
        assert_eq!(
            (
                w.reviewer,
                w.committer,
                w.review_commenter,
                w.issue_commenter
            ),
            (4.0, 3.0, 1.0, 1.0)
        );
        assert!(parse_weights("1,2,3").is_err());
        assert!(parse_weights("a,b,c,d").is_err());
    }

    #[test]
    fn defaults_match_documented_operating_point() {
        let cfg = AppConfig::default();
        assert_eq!(cfg.hyper.mu, 0.9);
        assert_eq!(cfg.hyper.top_k_similar, 10);
        assert_eq!(cfg.hyper.alpha, 0.8);
        assert_eq!(cfg.hyper.role_weights.reviewer, 4.0);
        assert_eq!(cfg.hyper.role_weights.committer, 3.0);
        assert_eq!(cfg.hyper.role_weights.review_commenter, 1.0);
        assert_eq!(cfg.hyper.role_weights.issue_commenter, 1.0);
        assert_eq!(cfg.filter.bulk_commit_threshold, 100);
        assert_eq!(cfg.solver.tol, 1e-9);
        assert_eq!(cfg.solver.max_iter, 10_000);
        assert_eq!(cfg.max_distance, 2);
    }

    #[test]
    fn exit_codes_are_distinct() {
        let errors = [
            CliError::Usage("u".into()),
            CliError::Io {
                path: PathBuf::from("x"),
                source: std::io::Error::other("io"),
            },
            CliError::Parse(EventLogError::EmptyLog),
            CliError::Domain("d".into()),
            CliError::InsufficientSpan("s".into()),
            CliError::NoConvergence("n".into()),
        ];
        let codes: BTreeSet<i32> = errors.iter().map(CliError::exit_code).collect();
        assert_eq!(codes.len(), errors.len());
        assert!(!codes.contains(&0));
    }
}
