//! Sliding-window ACC/MRR evaluation.
//!
//! The log is split into calendar-month rounds: round `r` trains on months
//! `[r, r + 12)` and tests on month `r + 12`. Each round builds a hypergraph
//! from training-window events only (events at or after the test month are
//! cut), then replays every test PR as a query, scoring the ranked list
//! against the PR's recorded reviewer set. Per-round macro averages and a
//! per-PR micro average are both reported.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::calendar::Month;
use crate::events::{EventLog, PullRequest};
use crate::exec;
use crate::hypergraph::{
    build_hypergraph_masked, HypergraphError, HyperparamConfig, IncidenceSystem, RelationMask,
};
use crate::identity::{DeveloperId, IdentityMap};
use crate::ranker::{recommend, RankerError, SolverConfig};

/// Ranking depths the harness reports by default.
pub const DEFAULT_KS: [usize; 3] = [1, 3, 5];

/// Months of training data per round.
pub const TRAIN_MONTHS: i32 = 12;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("log spans fewer than {TRAIN_MONTHS} + 1 calendar months; no test month fits")]
    InsufficientSpan,
    #[error(transparent)]
    Hypergraph(#[from] HypergraphError),
    #[error(transparent)]
    Ranker(#[from] RankerError),
    #[error(
        "time hygiene violated in round {round}: edge {edge_id} depends on an event at \
         {latest_event}, at or after test start {test_start}"
    )]
    TimeHygiene {
        round: usize,
        edge_id: usize,
        latest_event: i64,
        test_start: i64,
    },
}

/// One train/test split: twelve training months followed by one test month.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EvalRound {
    pub train_start: i64,
    pub train_end: i64,
    pub test_start: i64,
    pub test_end: i64,
}

impl EvalRound {
    pub fn test_month(&self) -> Month {
        Month::containing(self.test_start)
    }
}

/// ACC@k and MRR@k for a set of scored queries.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    /// `k -> fraction of test PRs with a true reviewer in the top k`.
    pub acc: Vec<(usize, f64)>,
    /// `k -> mean reciprocal rank of the first true reviewer in the top k`.
    pub mrr: Vec<(usize, f64)>,
    pub n_test_prs: usize,
}

impl Metrics {
    pub fn acc_at(&self, k: usize) -> Option<f64> {
        self.acc.iter().find(|(kk, _)| *kk == k).map(|(_, v)| *v)
    }

    pub fn mrr_at(&self, k: usize) -> Option<f64> {
        self.mrr.iter().find(|(kk, _)| *kk == k).map(|(_, v)| *v)
    }
}

/// Outcome of one round; `metrics` is `None` when the round had no scorable
/// test PRs and was skipped.
#[derive(Debug, Clone, Serialize)]
pub struct RoundOutcome {
    pub round: usize,
    pub window: EvalRound,
    pub test_month: String,
    pub metrics: Option<Metrics>,
    pub skipped_queries: usize,
}

/// Full harness output: per-round outcomes plus macro (over rounds) and
/// micro (over PRs) averages.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub mask: String,
    pub ks: Vec<usize>,
    pub rounds: Vec<RoundOutcome>,
    pub macro_avg: Option<Metrics>,
    pub micro_avg: Option<Metrics>,
    pub skipped_rounds: usize,
    pub skipped_queries: usize,
}

/// 1 when any of `actual` appears in the first `k` ranked entries, else 0.
pub fn acc_at_k(ranked: &[DeveloperId], actual: &BTreeSet<DeveloperId>, k: usize) -> f64 {
    debug_assert!(k >= 1);
    if ranked.iter().take(k).any(|d| actual.contains(d)) {
        1.0
    } else {
        0.0
    }
}

/// Reciprocal rank of the first hit within the top `k`; 0 when none.
pub fn mrr_at_k(ranked: &[DeveloperId], actual: &BTreeSet<DeveloperId>, k: usize) -> f64 {
    debug_assert!(k >= 1);
    ranked
        .iter()
        .take(k)
        .position(|d| actual.contains(d))
        .map_or(0.0, |idx| 1.0 / (idx + 1) as f64)
}

/// Enumerate up to `n_rounds` sliding rounds over the log's span. The first
/// training month is the calendar month containing `t_start`; a round exists
/// while its test month begins before `t_end`.
pub fn make_rounds(log: &EventLog, n_rounds: usize) -> Result<Vec<EvalRound>, EvalError> {
    let base = Month::containing(log.t_start);
    let mut rounds = Vec::new();
    let mut r: i32 = 0;
    while rounds.len() < n_rounds {
        let test_start = base.plus(r + TRAIN_MONTHS).start_epoch();
        if test_start >= log.t_end {
            break;
        }
        rounds.push(EvalRound {
            train_start: base.plus(r).start_epoch(),
            train_end: test_start,
            test_start,
            test_end: base.plus(r + TRAIN_MONTHS + 1).start_epoch(),
        });
        r += 1;
    }
    if rounds.is_empty() {
        return Err(EvalError::InsufficientSpan);
    }
    Ok(rounds)
}

/// Every training edge must be fully explained by events before the test
/// month. Cheap (one pass over edges) and always on.
pub fn audit_time_hygiene(
    system: &IncidenceSystem,
    round: usize,
    test_start: i64,
) -> Result<(), EvalError> {
    for edge in system.edges() {
        if edge.latest_event >= test_start {
            return Err(EvalError::TimeHygiene {
                round,
                edge_id: edge.edge_id,
                latest_event: edge.latest_event,
                test_start,
            });
        }
    }
    Ok(())
}

fn truncate_events(pr: &PullRequest, cutoff: i64) -> PullRequest {
    let mut pr = pr.clone();
    pr.commits.retain(|c| c.timestamp < cutoff);
    pr.reviews.retain(|r| r.timestamp < cutoff);
    pr.comments.retain(|c| c.timestamp < cutoff);
    pr
}

/// The training slice for one round: PRs created inside the training window
/// with all events at or after `train_end` cut away.
fn training_slice(log: &EventLog, round: &EvalRound) -> EventLog {
    EventLog {
        project: log.project.clone(),
        t_start: round.train_start,
        t_end: round.train_end,
        prs: log
            .prs
            .iter()
            .filter(|pr| pr.created_at >= round.train_start && pr.created_at < round.train_end)
            .map(|pr| truncate_events(pr, round.train_end))
            .collect(),
    }
}

enum QueryOutcome {
    Skipped,
    Scored { acc: Vec<f64>, mrr: Vec<f64> },
}

#[allow(clippy::too_many_arguments)]
fn evaluate_query(
    system: &IncidenceSystem,
    ids: &IdentityMap,
    pr: &PullRequest,
    cfg: &HyperparamConfig,
    mask: &RelationMask,
    solver: &SolverConfig,
    ks: &[usize],
    window_end: i64,
) -> Result<QueryOutcome, RankerError> {
    let creator = ids.resolve(&pr.creator);
    if creator.is_invalid() {
        return Ok(QueryOutcome::Skipped);
    }
    let actual: BTreeSet<DeveloperId> = pr
        .reviews
        .iter()
        .map(|r| ids.resolve(&r.reviewer))
        .filter(|d| !d.is_invalid())
        .collect();
    if actual.is_empty() {
        return Ok(QueryOutcome::Skipped);
    }
    let max_k = ks.iter().copied().max().unwrap_or(5);
    let recommendation = recommend(system, ids, pr, cfg, mask, solver, max_k, window_end)?;
    let ranked: Vec<DeveloperId> = recommendation.ranked.into_iter().map(|(d, _)| d).collect();
    Ok(QueryOutcome::Scored {
        acc: ks.iter().map(|&k| acc_at_k(&ranked, &actual, k)).collect(),
        mrr: ks.iter().map(|&k| mrr_at_k(&ranked, &actual, k)).collect(),
    })
}

fn mean_metrics(ks: &[usize], acc_sums: &[f64], mrr_sums: &[f64], n: usize) -> Metrics {
    Metrics {
        acc: ks
            .iter()
            .zip(acc_sums)
            .map(|(&k, &s)| (k, s / n as f64))
            .collect(),
        mrr: ks
            .iter()
            .zip(mrr_sums)
            .map(|(&k, &s)| (k, s / n as f64))
            .collect(),
        n_test_prs: n,
    }
}

fn average_rounds(ks: &[usize], rounds: &[RoundOutcome]) -> (Option<Metrics>, Option<Metrics>) {
    let scored: Vec<&Metrics> = rounds.iter().filter_map(|r| r.metrics.as_ref()).collect();
    if scored.is_empty() {
        return (None, None);
    }
    let mut macro_acc = vec![0.0; ks.len()];
    let mut macro_mrr = vec![0.0; ks.len()];
    let mut micro_acc = vec![0.0; ks.len()];
    let mut micro_mrr = vec![0.0; ks.len()];
    let mut total_prs = 0usize;
    for metrics in &scored {
        for (i, &(_, v)) in metrics.acc.iter().enumerate() {
            macro_acc[i] += v;
            micro_acc[i] += v * metrics.n_test_prs as f64;
        }
        for (i, &(_, v)) in metrics.mrr.iter().enumerate() {
            macro_mrr[i] += v;
            micro_mrr[i] += v * metrics.n_test_prs as f64;
        }
        total_prs += metrics.n_test_prs;
    }
    let n_rounds = scored.len();
    let macro_avg = Metrics {
        acc: ks
            .iter()
            .zip(&macro_acc)
            .map(|(&k, &s)| (k, s / n_rounds as f64))
            .collect(),
        mrr: ks
            .iter()
            .zip(&macro_mrr)
            .map(|(&k, &s)| (k, s / n_rounds as f64))
            .collect(),
        n_test_prs: total_prs,
    };
    let micro_avg = mean_metrics(ks, &micro_acc, &micro_mrr, total_prs);
    (Some(macro_avg), Some(micro_avg))
}

/// Run the sliding-window harness on a preprocessed log.
pub fn run_evaluation(
    log: &EventLog,
    ids: &IdentityMap,
    cfg: &HyperparamConfig,
    solver: &SolverConfig,
    mask: &RelationMask,
    n_rounds: usize,
    ks: &[usize],
) -> Result<EvalReport, EvalError> {
    let rounds = make_rounds(log, n_rounds)?;
    let mut outcomes: Vec<RoundOutcome> = Vec::with_capacity(rounds.len());

    for (round_idx, round) in rounds.iter().enumerate() {
        let train_log = training_slice(log, round);
        let system = build_hypergraph_masked(&train_log, ids, cfg, mask)?;
        audit_time_hygiene(&system, round_idx, round.test_start)?;

        let test_prs: Vec<&PullRequest> = log
            .prs
            .iter()
            .filter(|pr| pr.created_at >= round.test_start && pr.created_at < round.test_end)
            .collect();

        // queries are independent against the shared immutable system
        let per_pr = exec::map(&test_prs, |pr| {
            evaluate_query(&system, ids, pr, cfg, mask, solver, ks, round.test_end)
        });

        let mut acc_sums = vec![0.0; ks.len()];
        let mut mrr_sums = vec![0.0; ks.len()];
        let mut scored = 0usize;
        let mut skipped = 0usize;
        for outcome in per_pr {
            match outcome? {
                QueryOutcome::Skipped => skipped += 1,
                QueryOutcome::Scored { acc, mrr } => {
                    for (sum, v) in acc_sums.iter_mut().zip(&acc) {
                        *sum += v;
                    }
                    for (sum, v) in mrr_sums.iter_mut().zip(&mrr) {
                        *sum += v;
                    }
                    scored += 1;
                }
            }
        }

        outcomes.push(RoundOutcome {
            round: round_idx,
            window: *round,
            test_month: round.test_month().to_string(),
            metrics: (scored > 0).then(|| mean_metrics(ks, &acc_sums, &mrr_sums, scored)),
            skipped_queries: skipped,
        });
    }

    let (macro_avg, micro_avg) = average_rounds(ks, &outcomes);
    Ok(EvalReport {
        mask: mask.label(),
        ks: ks.to_vec(),
        skipped_rounds: outcomes.iter().filter(|o| o.metrics.is_none()).count(),
        skipped_queries: outcomes.iter().map(|o| o.skipped_queries).sum(),
        rounds: outcomes,
        macro_avg,
        micro_avg,
    })
}

impl EvalReport {
    /// CSV rows `round,test_month,mask,k,acc,mrr,n_test_prs`, one line per
    /// scored round and depth.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("round,test_month,mask,k,acc,mrr,n_test_prs\n");
        for outcome in &self.rounds {
            let Some(metrics) = &outcome.metrics else {
                continue;
            };
            for (i, &k) in self.ks.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{},{},{:.6},{:.6},{}\n",
                    outcome.round,
                    outcome.test_month,
                    self.mask,
                    k,
                    metrics.acc[i].1,
                    metrics.mrr[i].1,
                    metrics.n_test_prs,
                ));
            }
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}
