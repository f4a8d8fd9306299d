//! Reviewer recommendation over a multi-relation weighted hypergraph.
//!
//! The pipeline has four stages:
//!
//! 1. [`events`] — parse a line-delimited JSON export of pull requests and
//!    their commit / review / comment events.
//! 2. [`identity`] + [`preprocess`] — unify developer identities across
//!    login / email / name attributes and scrub invalid interactions.
//! 3. [`hypergraph`] — build a weighted hypergraph over PR vertices and
//!    role-split developer vertices (creator, committer, reviewer, issue
//!    commenter, review commenter), with time- and size-sensitive edge
//!    weights plus file-path-similarity edges between PRs.
//! 4. [`ranker`] + [`eval`] — rank candidate reviewers for a query PR by
//!    solving the regularized propagation system `(I - mu * A) f = y`, and
//!    score the whole pipeline with a sliding-window ACC/MRR harness.
//!
//! [`testkit`] generates deterministic synthetic event logs with planted
//! ground truth and houses the brute-force oracles used to cross-check the
//! solver and the scoring rule.
//!
//! With the `parallel` feature (on by default) the per-PR inner loops run on
//! rayon; without it the same code paths run sequentially.

pub mod calendar;
pub mod eval;
pub mod events;
mod exec;
pub mod hypergraph;
pub mod identity;
pub mod preprocess;
pub mod ranker;
pub mod testkit;

/// Cap the worker pool used by the data-parallel loops. Call once, before
/// the first parallel operation; later calls fail. A no-op in sequential
/// builds (no `parallel` feature).
#[cfg(feature = "parallel")]
pub fn configure_parallelism(jobs: usize) -> Result<(), String> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build_global()
        .map_err(|e| e.to_string())
}

#[cfg(not(feature = "parallel"))]
pub fn configure_parallelism(_jobs: usize) -> Result<(), String> {
    Ok(())
}
