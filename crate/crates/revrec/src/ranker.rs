//! Reviewer ranking for a query PR.
//!
//! The query PR is spliced into an existing training hypergraph (creator and
//! committer edges plus PR-PR similarity edges; its reviews and comments are
//! ground truth and never consumed). Ranking solves `(I - mu * A) f = y` for
//! the one-hot query seed `y` by fixed-point iteration `f <- mu * A * f + y`
//! (the Neumann series), which converges because the normalized adjacency
//! has spectral radius at most one and `mu < 1`. Candidate scores combine
//! the developer's role-vertex entries of `f*` with the `(a, b, c, d)` role
//! weights; the query PR's creator is excluded.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::events::PullRequest;
use crate::hypergraph::{
    assemble_system, select_similar_profiles, EdgeKind, EdgeSpec, HypergraphError,
    HyperparamConfig, IncidenceSystem, PrProfile, Role, RoleWeights, Vertex,
};
use crate::identity::{DeveloperId, IdentityMap};

pub use crate::hypergraph::RelationMask;

#[derive(Debug, Error)]
pub enum RankerError {
    #[error(transparent)]
    Hypergraph(#[from] HypergraphError),
    #[error("query pr {0:?} is already in the system")]
    DuplicatePr(String),
    #[error("mu must be in [0, 1), got {0}")]
    MuOutOfRange(f64),
    #[error("solver did not converge after {max_iter} iterations (residual {residual:e})")]
    NoConvergence { max_iter: usize, residual: f64 },
}

/// Stopping criteria for the fixed-point solver.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct SolverConfig {
    /// Infinity-norm residual bound on `(I - mu A) f - y`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-9,
            max_iter: 10_000,
        }
    }
}

/// One-hot seed vector over the system's vertex indices.
#[derive(Debug, Clone)]
pub struct QueryVector {
    values: Vec<f64>,
    query_vertex: usize,
}

impl QueryVector {
    /// Seed at the PR vertex of `pr_id`; `None` when the PR is not a vertex.
    pub fn one_hot(system: &IncidenceSystem, pr_id: &str) -> Option<Self> {
        let query_vertex = system.pr_vertex(pr_id)?;
        let mut values = vec![0.0; system.vertex_count()];
        values[query_vertex] = 1.0;
        Some(QueryVector {
            values,
            query_vertex,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn query_vertex(&self) -> usize {
        self.query_vertex
    }
}

/// Solver output: the optimal vector over all vertices plus convergence
/// diagnostics.
#[derive(Debug, Clone)]
pub struct RankingResult {
    pub f_star: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Ranked reviewer candidates for one query PR, strictly sorted by
/// `(score desc, developer id asc)`; the query creator is excluded.
#[derive(Debug, Clone, PartialEq)]
pub struct Recommendation {
    pub query_pr: String,
    pub ranked: Vec<(DeveloperId, f64)>,
}

impl Recommendation {
    pub fn truncated(mut self, k: usize) -> Self {
        self.ranked.truncate(k);
        self
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "pr_id": self.query_pr,
            "candidates": self.ranked.iter().map(|(dev, score)| serde_json::json!({
                "dev": dev.as_str(),
                "score": score,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Splice a query PR into a training system, producing a new system.
///
/// Adds the query PR vertex, its creator and committer edges (when unmasked),
/// and PR-PR edges to the top-K most similar training PRs. New edge weights
/// are computed over `(t_start, window_end)` where `window_end` is the
/// evaluation-window end, so the creation-recency ratio stays in `[0, 1]`.
/// Existing edge weights are not recomputed; degrees and the adjacency are.
/// The query's reviews and comments are never consumed.
pub fn insert_query_pr(
    system: &IncidenceSystem,
    ids: &IdentityMap,
    pr: &PullRequest,
    cfg: &HyperparamConfig,
    mask: &RelationMask,
    window_end: i64,
) -> Result<IncidenceSystem, RankerError> {
    if system.pr_vertex(&pr.pr_id).is_some() {
        return Err(RankerError::DuplicatePr(pr.pr_id.clone()));
    }
    let (t_s, _) = system.window();
    if t_s >= window_end {
        return Err(RankerError::Hypergraph(HypergraphError::DegenerateWindow {
            t_s,
            t_e: window_end,
        }));
    }

    // Existing edges carry over verbatim (copy-on-extend).
    let mut specs: Vec<EdgeSpec> = system
        .edges()
        .iter()
        .map(|edge| EdgeSpec {
            kind: edge.kind,
            members: edge
                .members
                .iter()
                .map(|&v| system.vertices()[v].clone())
                .collect(),
            weight: edge.weight,
            latest_event: edge.latest_event,
        })
        .collect();

    let query_vertex = Vertex::Pr(pr.pr_id.clone());

    // Only the creator and committer families apply to a query: its reviews
    // and comments are the ground truth being predicted. Stripping them and
    // reusing the builder's per-PR derivation keeps the weight formulas in
    // one place.
    let stripped = PullRequest {
        reviews: Vec::new(),
        comments: Vec::new(),
        ..pr.clone()
    };
    specs.extend(crate::hypergraph::pr_family_specs(
        &stripped, ids, cfg, mask, t_s, window_end,
    )?);

    let query_profile = PrProfile::from(pr);
    if mask.include_prpr && cfg.top_k_similar > 0 {
        let picked = select_similar_profiles(
            &query_profile,
            system.pr_profiles(),
            cfg.top_k_similar,
            t_s,
            window_end,
        )?;
        let created_at_of: std::collections::HashMap<&str, i64> = system
            .pr_profiles()
            .iter()
            .map(|p| (p.pr_id.as_str(), p.created_at))
            .collect();
        for (other_id, weight) in picked {
            let other_created = created_at_of
                .get(other_id.as_str())
                .copied()
                .unwrap_or(pr.created_at);
            specs.push(EdgeSpec {
                kind: EdgeKind::PrPr,
                members: vec![query_vertex.clone(), Vertex::Pr(other_id)],
                weight,
                latest_event: pr.created_at.max(other_created),
            });
        }
    }

    let mut profiles = system.pr_profiles().to_vec();
    profiles.push(query_profile);

    Ok(assemble_system(
        (t_s, window_end),
        profiles,
        specs,
        vec![query_vertex],
    ))
}

/// Solve `(I - mu A) f = y` by fixed-point iteration from `f = y`.
///
/// Returns the iterate whose measured infinity-norm residual dropped to
/// `tol`. With `mu = 0` or an edgeless adjacency this is exactly `y`.
pub fn solve_ranking(
    system: &IncidenceSystem,
    query: &QueryVector,
    mu: f64,
    solver: &SolverConfig,
) -> Result<RankingResult, RankerError> {
    if !(0.0..1.0).contains(&mu) {
        return Err(RankerError::MuOutOfRange(mu));
    }
    assert!(solver.tol > 0.0, "solver tolerance must be positive");

    let y = query.values();
    let adjacency = system.adjacency();
    let mut f = y.to_vec();
    let mut af = vec![0.0; f.len()];
    let mut residual = f64::INFINITY;

    for iteration in 0..solver.max_iter {
        adjacency.apply(&f, &mut af);
        // next = mu * A f + y; the residual of the current iterate is
        // exactly ||f - next||_inf since (I - mu A) f - y = f - next.
        let mut diff: f64 = 0.0;
        for i in 0..f.len() {
            let next = mu * af[i] + y[i];
            diff = diff.max((f[i] - next).abs());
            af[i] = next;
        }
        residual = diff;
        if residual <= solver.tol {
            return Ok(RankingResult {
                f_star: f,
                iterations: iteration + 1,
                residual,
            });
        }
        std::mem::swap(&mut f, &mut af);
    }
    Err(RankerError::NoConvergence {
        max_iter: solver.max_iter,
        residual,
    })
}

const SCORED_ROLES: [Role; 4] = [
    Role::Reviewer,
    Role::Committer,
    Role::ReviewCommenter,
    Role::IssueCommenter,
];

/// Combine per-role `f*` entries into one score per candidate developer.
///
/// Candidates are developers with at least one vertex in a scored role
/// (reviewer, committer, review commenter, issue commenter); a missing role
/// vertex contributes zero. The query creator and the reserved invalid id
/// are excluded.
pub fn score_candidates(
    system: &IncidenceSystem,
    f_star: &[f64],
    weights: &RoleWeights,
    query_creator: &DeveloperId,
    query_pr: &str,
) -> Recommendation {
    let mut role_scores: BTreeMap<&DeveloperId, [f64; 4]> = BTreeMap::new();
    for (idx, vertex) in system.vertices().iter().enumerate() {
        if let Vertex::Dev(dev, role) = vertex {
            if dev == query_creator || dev.is_invalid() {
                continue;
            }
            if let Some(slot) = SCORED_ROLES.iter().position(|r| r == role) {
                role_scores.entry(dev).or_insert([0.0; 4])[slot] = f_star[idx];
            }
        }
    }

    let mut ranked: Vec<(DeveloperId, f64)> = role_scores
        .into_iter()
        .map(|(dev, [re, ct, rc, ic])| {
            let score = weights.reviewer * re
                + weights.committer * ct
                + weights.review_commenter * rc
                + weights.issue_commenter * ic;
            (dev.clone(), score)
        })
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

    Recommendation {
        query_pr: query_pr.to_string(),
        ranked,
    }
}

/// Full query pipeline: splice the PR in, seed, solve, score, truncate.
#[allow(clippy::too_many_arguments)]
pub fn recommend(
    system: &IncidenceSystem,
    ids: &IdentityMap,
    pr: &PullRequest,
    cfg: &HyperparamConfig,
    mask: &RelationMask,
    solver: &SolverConfig,
    k: usize,
    window_end: i64,
) -> Result<Recommendation, RankerError> {
    let extended = insert_query_pr(system, ids, pr, cfg, mask, window_end)?;
    let query =
        QueryVector::one_hot(&extended, &pr.pr_id).expect("query vertex exists after insertion");
    let result = solve_ranking(&extended, &query, cfg.mu, solver)?;
    let creator = ids.resolve(&pr.creator);
    let recommendation = score_candidates(
        &extended,
        &result.f_star,
        &cfg.role_weights,
        &creator,
        &pr.pr_id,
    );
    Ok(recommendation.truncated(k))
}
