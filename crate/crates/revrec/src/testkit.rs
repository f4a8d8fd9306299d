//! Synthetic event logs with planted ground truth, plus brute-force oracles
//! for cross-checking the solver and the scoring rule.
//!
//! The generator assigns each developer a home subtree and draws every PR's
//! files from one subtree; with `reviewer_affinity = 1` a PR is reviewed by
//! exactly the developers of its subtree, and the creator always comes from
//! outside the reviewer set (so cleaning removes nothing). That makes the
//! expected top-ranked candidate provable by hand and supports end-to-end
//! recovery tests without any real dataset.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::calendar::Month;
use crate::events::{
    ActorType, CommentEvent, CommentKind, CommitEvent, EventLog, FileChange, PullRequest, RawActor,
    ReviewEvent,
};
use crate::hypergraph::{
    assemble_system, EdgeKind, EdgeSpec, IncidenceSystem, Role, RoleWeights, Vertex,
};
use crate::identity::DeveloperId;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TestkitError {
    #[error("invalid synth params: {0}")]
    InvalidParams(&'static str),
    #[error("dense solve hit a near-zero pivot; the system is singular")]
    SingularMatrix,
}

/// Deterministic 64-bit generator (splitmix64). Stable across platforms and
/// releases, which keeps generated logs byte-identical forever.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `0..n` (n > 0).
    pub fn below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        (self.next_u64() % n as u64) as usize
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }
}

/// Parameters for the planted-subtree generator.
#[derive(Debug, Clone)]
pub struct SynthParams {
    pub seed: u64,
    /// Total developers; at least 2 so no PR has to be self-reviewed.
    pub n_devs: usize,
    pub n_prs: usize,
    pub n_subtrees: usize,
    /// Calendar months the PRs span, starting 2020-01.
    pub months: u32,
    /// Probability that each home-subtree developer reviews a subtree PR
    /// (a miss substitutes a uniformly random developer).
    pub reviewer_affinity: f64,
    /// Probability that a commit is authored by a home-subtree developer
    /// rather than the creator.
    pub committer_affinity: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            seed: 42,
            n_devs: 20,
            n_prs: 400,
            n_subtrees: 10,
            months: 14,
            reviewer_affinity: 1.0,
            committer_affinity: 0.0,
        }
    }
}

impl SynthParams {
    fn validate(&self) -> Result<(), TestkitError> {
        if self.n_devs < 2 {
            return Err(TestkitError::InvalidParams("n_devs must be >= 2"));
        }
        if self.n_prs < 1 {
            return Err(TestkitError::InvalidParams("n_prs must be >= 1"));
        }
        if self.n_subtrees < 1 {
            return Err(TestkitError::InvalidParams("n_subtrees must be >= 1"));
        }
        if self.months < 1 {
            return Err(TestkitError::InvalidParams("months must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.reviewer_affinity) {
            return Err(TestkitError::InvalidParams(
                "reviewer_affinity must be in [0, 1]",
            ));
        }
        if !(0.0..=1.0).contains(&self.committer_affinity) {
            return Err(TestkitError::InvalidParams(
                "committer_affinity must be in [0, 1]",
            ));
        }
        Ok(())
    }
}

fn dev_actor(index: usize) -> RawActor {
    RawActor {
        login: Some(format!("dev{index:03}")),
        email: Some(format!("dev{index:03}@example.com")),
        name: None,
        actor_type: ActorType::User,
    }
}

/// Canonical id the identity map will assign to generated developer `index`.
pub fn dev_id(index: usize) -> DeveloperId {
    DeveloperId::new(format!("dev{index:03}"))
}

/// Generate a deterministic planted log. Clean by construction: no bots, no
/// empty identities, no self-reviews, no bulk commits, no post-merge events,
/// and every PR has files and at least one review.
pub fn generate_log(params: &SynthParams) -> Result<EventLog, TestkitError> {
    params.validate()?;
    let mut rng = SplitMix64::new(params.seed);

    let base = Month::new(2020, 1);
    let span_start = base.start_epoch();
    let span_end = base.plus(params.months as i32).start_epoch();
    // leave room at the tail so every event stays inside the window
    let usable = span_end - span_start - 4 * 86_400;

    let subtree_devs: Vec<Vec<usize>> = (0..params.n_subtrees)
        .map(|s| {
            (0..params.n_devs)
                .filter(|d| d % params.n_subtrees == s)
                .collect()
        })
        .collect();

    let mut prs: Vec<PullRequest> = Vec::with_capacity(params.n_prs);
    for i in 0..params.n_prs {
        let created_at =
            span_start + (usable * i as i64) / params.n_prs as i64 + rng.below(1800) as i64;
        let subtree = rng.below(params.n_subtrees);

        // files from the home subtree
        let n_files = 1 + rng.below(3);
        let mut paths: BTreeSet<String> = BTreeSet::new();
        for _ in 0..n_files {
            paths.insert(format!(
                "s{subtree:02}/m{}/f{}.rs",
                rng.below(4),
                rng.below(6)
            ));
        }
        let files: Vec<FileChange> = paths
            .into_iter()
            .map(|path| FileChange {
                path,
                lines_changed: 1 + rng.below(120) as u32,
            })
            .collect();

        // reviewers: each home developer reviews with probability
        // reviewer_affinity, otherwise a uniform developer stands in
        let mut reviewer_set: BTreeSet<usize> = BTreeSet::new();
        for &home_dev in &subtree_devs[subtree] {
            if rng.chance(params.reviewer_affinity) {
                reviewer_set.insert(home_dev);
            } else {
                reviewer_set.insert(rng.below(params.n_devs));
            }
        }
        if reviewer_set.is_empty() {
            reviewer_set.insert(rng.below(params.n_devs));
        }
        if reviewer_set.len() == params.n_devs {
            let last = *reviewer_set.iter().next_back().unwrap();
            reviewer_set.remove(&last);
        }

        let non_reviewers: Vec<usize> = (0..params.n_devs)
            .filter(|d| !reviewer_set.contains(d))
            .collect();
        let creator = non_reviewers[rng.below(non_reviewers.len())];

        let reviews: Vec<ReviewEvent> = reviewer_set
            .iter()
            .map(|&d| ReviewEvent {
                reviewer: dev_actor(d),
                timestamp: created_at + 3_600 * (1 + rng.below(48) as i64),
            })
            .collect();

        let n_commits = 1 + rng.below(2);
        let commits: Vec<CommitEvent> = (0..n_commits)
            .map(|_| {
                let author = if params.committer_affinity > 0.0
                    && !subtree_devs[subtree].is_empty()
                    && rng.chance(params.committer_affinity)
                {
                    let home = &subtree_devs[subtree];
                    home[rng.below(home.len())]
                } else {
                    creator
                };
                CommitEvent {
                    author: dev_actor(author),
                    timestamp: created_at + rng.below(86_400) as i64,
                    files: files.clone(),
                }
            })
            .collect();

        let mut comments: Vec<CommentEvent> = Vec::new();
        if rng.chance(0.3) {
            comments.push(CommentEvent {
                commenter: dev_actor(rng.below(params.n_devs)),
                timestamp: created_at + 3_600 * (1 + rng.below(24) as i64),
                kind: CommentKind::Issue,
            });
        }
        if rng.chance(0.2) {
            let reviewers: Vec<usize> = reviewer_set.iter().copied().collect();
            comments.push(CommentEvent {
                commenter: dev_actor(reviewers[rng.below(reviewers.len())]),
                timestamp: created_at + 3_600 * (1 + rng.below(24) as i64),
                kind: CommentKind::ReviewComment,
            });
        }

        let merged_at = reviews
            .iter()
            .map(|r| r.timestamp)
            .chain(commits.iter().map(|c| c.timestamp))
            .chain(comments.iter().map(|c| c.timestamp))
            .max();

        prs.push(PullRequest {
            pr_id: format!("pr{i:05}"),
            created_at,
            creator: dev_actor(creator),
            merged_at,
            files,
            commits,
            reviews,
            comments,
        });
    }

    let mut log = EventLog {
        project: format!("synth-{}", params.seed),
        t_start: span_start,
        t_end: span_end,
        prs,
    };
    log.sort_prs();
    Ok(log)
}

/// Reference solver: materialize `I - mu * A` and run Gaussian elimination
/// with partial pivoting. Independent of the fixed-point path it checks.
pub fn dense_oracle_solve(
    system: &IncidenceSystem,
    y: &[f64],
    mu: f64,
) -> Result<Vec<f64>, TestkitError> {
    let n = system.vertex_count();
    assert!(n <= 2000, "dense oracle is limited to 2000 vertices");
    assert_eq!(y.len(), n);

    let mut matrix = system.adjacency().to_dense();
    for (row_idx, row) in matrix.iter_mut().enumerate() {
        for (col_idx, value) in row.iter_mut().enumerate() {
            *value = f64::from(row_idx == col_idx) - mu * *value;
        }
    }
    let mut rhs = y.to_vec();

    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&a, &b| matrix[a][col].abs().total_cmp(&matrix[b][col].abs()))
            .unwrap();
        if matrix[pivot_row][col].abs() < 1e-12 {
            return Err(TestkitError::SingularMatrix);
        }
        matrix.swap(col, pivot_row);
        rhs.swap(col, pivot_row);
        let pivot = matrix[col][col];
        let (upper, lower) = matrix.split_at_mut(col + 1);
        let pivot_vals = &upper[col];
        for (offset, row_vals) in lower.iter_mut().enumerate() {
            let factor = row_vals[col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for (value, pivot_value) in row_vals[col..].iter_mut().zip(&pivot_vals[col..]) {
                *value -= factor * pivot_value;
            }
            rhs[col + 1 + offset] -= factor * rhs[col];
        }
    }
    for col in (0..n).rev() {
        let mut acc = rhs[col];
        for k in col + 1..n {
            acc -= matrix[col][k] * rhs[k];
        }
        rhs[col] = acc / matrix[col][col];
    }
    Ok(rhs)
}

/// By-the-book scoring oracle: for every developer, scan the entire vertex
/// table for its four scored role entries and combine them with the weights.
/// No indexing structures; must agree exactly with the ranker's scoring.
pub fn brute_force_scores(
    system: &IncidenceSystem,
    f_star: &[f64],
    weights: &RoleWeights,
    creator: &DeveloperId,
) -> BTreeMap<DeveloperId, f64> {
    let mut devs: BTreeSet<DeveloperId> = BTreeSet::new();
    for vertex in system.vertices() {
        if let Vertex::Dev(dev, role) = vertex {
            let scored = matches!(
                role,
                Role::Reviewer | Role::Committer | Role::ReviewCommenter | Role::IssueCommenter
            );
            if scored && dev != creator && !dev.is_invalid() {
                devs.insert(dev.clone());
            }
        }
    }

    let mut scores = BTreeMap::new();
    for dev in devs {
        let role_value = |wanted: Role| -> f64 {
            for (idx, vertex) in system.vertices().iter().enumerate() {
                if let Vertex::Dev(d, role) = vertex {
                    if *d == dev && *role == wanted {
                        return f_star[idx];
                    }
                }
            }
            0.0
        };
        let re = role_value(Role::Reviewer);
        let ct = role_value(Role::Committer);
        let rc = role_value(Role::ReviewCommenter);
        let ic = role_value(Role::IssueCommenter);
        let score = weights.reviewer * re
            + weights.committer * ct
            + weights.review_commenter * rc
            + weights.issue_commenter * ic;
        scores.insert(dev, score);
    }
    scores
}

/// Test fixture: a system with a prescribed symmetric adjacency (given as
/// upper-triangle entries) over PR vertices `pr0..prN`, bypassing hyperedge
/// assembly. For solver checks that pin exact matrices.
pub fn system_from_upper_triangle(
    n: usize,
    upper: &BTreeMap<(usize, usize), f64>,
) -> IncidenceSystem {
    let specs: Vec<EdgeSpec> = Vec::new();
    let vertices: Vec<Vertex> = (0..n).map(|i| Vertex::Pr(format!("pr{i}"))).collect();
    let mut system = assemble_system((0, 100), vec![], specs, vertices);
    system.adjacency = crate::hypergraph::CsrMatrix::from_upper_triangle(n, upper);
    system
}

/// A random incidence structure for solver and scoring cross-checks:
/// `2..=max_vertices` vertices (the first always a PR named `pr0`), up to
/// `max_edges` edges over 2–5 distinct members with weights in `(0, 1]`.
pub fn random_system(
    rng: &mut SplitMix64,
    max_vertices: usize,
    max_edges: usize,
) -> IncidenceSystem {
    assert!(max_vertices >= 2);
    let n = 2 + rng.below(max_vertices - 1);
    let vertices: Vec<Vertex> = (0..n)
        .map(|i| {
            if i == 0 || rng.chance(0.4) {
                Vertex::Pr(format!("pr{i}"))
            } else {
                let role = Role::ALL[rng.below(Role::ALL.len())];
                Vertex::Dev(DeveloperId::new(format!("d{i:03}")), role)
            }
        })
        .collect();

    let n_edges = 1 + rng.below(max_edges);
    let specs: Vec<EdgeSpec> = (0..n_edges)
        .map(|_| {
            let size = 2 + rng.below(4.min(n - 1));
            let mut members: BTreeSet<usize> = BTreeSet::new();
            while members.len() < size {
                members.insert(rng.below(n));
            }
            EdgeSpec {
                kind: EdgeKind::PrReviewers,
                members: members.into_iter().map(|i| vertices[i].clone()).collect(),
                weight: 1.0 - rng.next_f64(),
                latest_event: 0,
            }
        })
        .collect();

    assemble_system((0, 100), vec![], specs, vec![vertices[0].clone()])
}
