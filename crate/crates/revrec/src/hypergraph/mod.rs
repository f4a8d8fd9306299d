//! The multi-relation hypergraph: PR vertices, role-split developer
//! vertices, six weighted hyperedge families, and the normalized adjacency
//! used for propagation.
//!
//! Per PR the builder emits one PR-Creator edge, one PR-Committers edge over
//! all committer role-vertices (when commits exist), one PR-Reviewers edge,
//! one PR-Issue-Commenters and one PR-Review-Commenters edge (when the events
//! exist), plus up to K two-vertex PR-PR edges to its most file-path-similar
//! peers. A developer gets one vertex per role in which they interacted, so
//! the downstream ranking can read per-role scores.

pub mod incidence;
pub mod weights;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::events::{CommentKind, EventLog, PullRequest};
use crate::exec;
use crate::identity::{DeveloperId, IdentityMap};

pub use incidence::{assemble_system, CsrMatrix};
pub use weights::{
    commenter_edge_weight, committer_edge_weight, creator_weight, file_path_similarity,
    path_set_similarity, reviewer_edge_weight,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HypergraphError {
    #[error("degenerate window: t_start {t_s} >= t_end {t_e}")]
    DegenerateWindow { t_s: i64, t_e: i64 },
}

/// The role a developer plays toward a specific PR. A developer active in
/// several roles owns one vertex per role.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Creator,
    Committer,
    Reviewer,
    IssueCommenter,
    ReviewCommenter,
}

impl Role {
    pub const ALL: [Role; 5] = [
        Role::Creator,
        Role::Committer,
        Role::Reviewer,
        Role::IssueCommenter,
        Role::ReviewCommenter,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Creator => "creator",
            Role::Committer => "committer",
            Role::Reviewer => "reviewer",
            Role::IssueCommenter => "issue_commenter",
            Role::ReviewCommenter => "review_commenter",
        }
    }
}

/// A hypergraph vertex: a PR or a (developer, role) pair.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Vertex {
    Pr(String),
    Dev(DeveloperId, Role),
}

impl std::fmt::Display for Vertex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Vertex::Pr(id) => write!(f, "pr:{id}"),
            Vertex::Dev(dev, role) => write!(f, "dev:{dev}:{}", role.as_str()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    PrCreator,
    PrCommitters,
    PrReviewers,
    PrIssueCommenters,
    PrReviewCommenters,
    PrPr,
}

/// An assembled hyperedge over interned vertex indices.
#[derive(Debug, Clone)]
pub struct Hyperedge {
    pub edge_id: usize,
    pub kind: EdgeKind,
    /// Sorted, deduplicated vertex indices.
    pub members: Vec<usize>,
    pub weight: f64,
    /// Latest contributing event timestamp; used by the time-hygiene audit.
    pub latest_event: i64,
}

impl Hyperedge {
    /// Hyperedge degree `delta(e)`: the member count.
    pub fn degree(&self) -> usize {
        self.members.len()
    }
}

/// An edge before vertex interning.
#[derive(Debug, Clone)]
pub struct EdgeSpec {
    pub kind: EdgeKind,
    pub members: Vec<Vertex>,
    pub weight: f64,
    pub latest_event: i64,
}

/// Which relation families take part in hypergraph construction. The four
/// developer relations mirror the ablation variants; creator and PR-PR edges
/// are structural and normally stay on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RelationMask {
    pub include_re: bool,
    pub include_ct: bool,
    pub include_ic: bool,
    pub include_rc: bool,
    pub include_creator: bool,
    pub include_prpr: bool,
}

impl Default for RelationMask {
    fn default() -> Self {
        RelationMask {
            include_re: true,
            include_ct: true,
            include_ic: true,
            include_rc: true,
            include_creator: true,
            include_prpr: true,
        }
    }
}

impl RelationMask {
    /// At least one relation must stay on.
    pub fn is_valid(&self) -> bool {
        self.include_re
            || self.include_ct
            || self.include_ic
            || self.include_rc
            || self.include_creator
            || self.include_prpr
    }

    /// Short label listing the active developer relations, e.g. the default
    /// mask is `re_ct_ic_rc`; disabled structural edges are suffixed.
    pub fn label(&self) -> String {
        let mut parts: Vec<&str> = Vec::new();
        if self.include_re {
            parts.push("re");
        }
        if self.include_ct {
            parts.push("ct");
        }
        if self.include_ic {
            parts.push("ic");
        }
        if self.include_rc {
            parts.push("rc");
        }
        if !self.include_creator {
            parts.push("nocreator");
        }
        if !self.include_prpr {
            parts.push("noprpr");
        }
        if parts.is_empty() {
            "none".to_string()
        } else {
            parts.join("_")
        }
    }
}

/// Weights `(a, b, c, d)` applied to the four scored roles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoleWeights {
    pub reviewer: f64,
    pub committer: f64,
    pub review_commenter: f64,
    pub issue_commenter: f64,
}

impl Default for RoleWeights {
    fn default() -> Self {
        RoleWeights {
            reviewer: 4.0,
            committer: 3.0,
            review_commenter: 1.0,
            issue_commenter: 1.0,
        }
    }
}

/// Model hyperparameters. Defaults follow the tuned operating point:
/// `alpha = 0.8`, `K = 10`, `mu = 0.9`, role weights `4:3:1:1`.
#[derive(Debug, Clone, Serialize)]
pub struct HyperparamConfig {
    /// Attenuation for repeat interactions within one PR, in `[0, 1]`.
    pub alpha: f64,
    /// Cap on PR-PR edges per PR.
    pub top_k_similar: usize,
    /// Propagation strength, in `[0, 1)` for the solver.
    pub mu: f64,
    pub role_weights: RoleWeights,
}

impl Default for HyperparamConfig {
    fn default() -> Self {
        HyperparamConfig {
            alpha: 0.8,
            top_k_similar: 10,
            mu: 0.9,
            role_weights: RoleWeights::default(),
        }
    }
}

impl HyperparamConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(format!("alpha must be in [0,1], got {}", self.alpha));
        }
        if !(0.0..=1.0).contains(&self.mu) {
            return Err(format!("mu must be in [0,1], got {}", self.mu));
        }
        Ok(())
    }
}

/// File paths and creation time of a PR, retained for later similarity
/// queries against the assembled system.
#[derive(Debug, Clone, Serialize)]
pub struct PrProfile {
    pub pr_id: String,
    pub created_at: i64,
    pub paths: Vec<String>,
}

impl From<&PullRequest> for PrProfile {
    fn from(pr: &PullRequest) -> Self {
        PrProfile {
            pr_id: pr.pr_id.clone(),
            created_at: pr.created_at,
            paths: pr.files.iter().map(|f| f.path.clone()).collect(),
        }
    }
}

/// The assembled hypergraph: interned vertices, the edge list (H and W),
/// weighted vertex degrees (Dv), and the normalized adjacency A. Immutable
/// once built; extension happens by rebuilding (see the ranker).
#[derive(Debug, Clone)]
pub struct IncidenceSystem {
    pub(crate) vertices: Vec<Vertex>,
    pub(crate) vertex_index: HashMap<Vertex, usize>,
    pub(crate) pr_vertex_of: HashMap<String, usize>,
    pub(crate) edges: Vec<Hyperedge>,
    pub(crate) degree: Vec<f64>,
    pub(crate) adjacency: CsrMatrix,
    pub(crate) pr_profiles: Vec<PrProfile>,
    pub(crate) window: (i64, i64),
}

impl IncidenceSystem {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Hyperedge] {
        &self.edges
    }

    pub fn vertex_id(&self, vertex: &Vertex) -> Option<usize> {
        self.vertex_index.get(vertex).copied()
    }

    pub fn pr_vertex(&self, pr_id: &str) -> Option<usize> {
        self.pr_vertex_of.get(pr_id).copied()
    }

    /// Weighted vertex degree `d(v) = sum_e w(e) h(v, e)`.
    pub fn degree(&self, vertex: usize) -> f64 {
        self.degree[vertex]
    }

    pub fn adjacency(&self) -> &CsrMatrix {
        &self.adjacency
    }

    pub fn pr_profiles(&self) -> &[PrProfile] {
        &self.pr_profiles
    }

    /// The `(t_start, t_end)` window the edge weights were computed over.
    pub fn window(&self) -> (i64, i64) {
        self.window
    }

    /// Latest event timestamp any edge depends on; `None` for an edgeless
    /// system.
    pub fn max_event_timestamp(&self) -> Option<i64> {
        self.edges.iter().map(|e| e.latest_event).max()
    }

    /// Debug dump of vertices, edges, and degrees for inspection and oracle
    /// cross-checks.
    pub fn to_debug_json(&self) -> serde_json::Value {
        serde_json::json!({
            "window": { "t_start": self.window.0, "t_end": self.window.1 },
            "vertices": self.vertices.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            "degrees": self.degree,
            "edges": self.edges.iter().map(|e| serde_json::json!({
                "edge_id": e.edge_id,
                "kind": e.kind,
                "weight": e.weight,
                "members": e.members,
                "latest_event": e.latest_event,
            })).collect::<Vec<_>>(),
        })
    }
}

/// PR similarity per the pairwise path-set formula. Zero when either file
/// set is empty.
pub fn pr_similarity(
    p_i: &PullRequest,
    p_j: &PullRequest,
    t_s: i64,
    t_e: i64,
) -> Result<f64, HypergraphError> {
    let a = PrProfile::from(p_i);
    let b = PrProfile::from(p_j);
    profile_similarity(&a, &b, t_s, t_e)
}

fn profile_similarity(
    a: &PrProfile,
    b: &PrProfile,
    t_s: i64,
    t_e: i64,
) -> Result<f64, HypergraphError> {
    weights::path_set_similarity(&a.paths, a.created_at, &b.paths, b.created_at, t_s, t_e)
}

/// The `k` most similar candidates with positive similarity, later-created
/// first on ties, then by pr_id. Candidates sharing the target's pr_id are
/// skipped.
pub fn select_similar_prs<'a, I>(
    target: &PullRequest,
    candidates: I,
    k: usize,
    t_s: i64,
    t_e: i64,
) -> Result<Vec<(String, f64)>, HypergraphError>
where
    I: IntoIterator<Item = &'a PullRequest>,
{
    let target_profile = PrProfile::from(target);
    let profiles: Vec<PrProfile> = candidates.into_iter().map(PrProfile::from).collect();
    select_similar_profiles(&target_profile, &profiles, k, t_s, t_e)
}

/// Profile-level variant of [`select_similar_prs`].
pub fn select_similar_profiles(
    target: &PrProfile,
    candidates: &[PrProfile],
    k: usize,
    t_s: i64,
    t_e: i64,
) -> Result<Vec<(String, f64)>, HypergraphError> {
    let mut scored: Vec<(f64, i64, &str)> = Vec::new();
    for candidate in candidates {
        if candidate.pr_id == target.pr_id {
            continue;
        }
        let sim = profile_similarity(target, candidate, t_s, t_e)?;
        if sim > 0.0 {
            scored.push((sim, candidate.created_at, candidate.pr_id.as_str()));
        }
    }
    scored.sort_by(|a, b| {
        b.0.total_cmp(&a.0)
            .then_with(|| b.1.cmp(&a.1))
            .then_with(|| a.2.cmp(b.2))
    });
    scored.truncate(k);
    Ok(scored
        .into_iter()
        .map(|(sim, _, id)| (id.to_string(), sim))
        .collect())
}

/// Edge specs for one PR's relation families (everything except PR-PR).
/// Returns an empty list for families without events; skips actors that
/// resolve to the reserved invalid id.
pub(crate) fn pr_family_specs(
    pr: &PullRequest,
    ids: &IdentityMap,
    cfg: &HyperparamConfig,
    mask: &RelationMask,
    t_s: i64,
    t_e: i64,
) -> Result<Vec<EdgeSpec>, HypergraphError> {
    let mut specs = Vec::new();
    let pr_vertex = Vertex::Pr(pr.pr_id.clone());

    if mask.include_creator {
        let creator = ids.resolve(&pr.creator);
        if !creator.is_invalid() {
            specs.push(EdgeSpec {
                kind: EdgeKind::PrCreator,
                members: vec![pr_vertex.clone(), Vertex::Dev(creator, Role::Creator)],
                weight: weights::creator_weight(pr.created_at, t_s, t_e)?,
                latest_event: pr.created_at,
            });
        }
    }

    if mask.include_ct && !pr.commits.is_empty() {
        let mut commits_by_dev: BTreeMap<DeveloperId, Vec<(i64, u32)>> = BTreeMap::new();
        for commit in &pr.commits {
            let dev = ids.resolve(&commit.author);
            if dev.is_invalid() {
                continue;
            }
            let lines: u32 = commit.files.iter().map(|f| f.lines_changed).sum();
            commits_by_dev
                .entry(dev)
                .or_default()
                .push((commit.timestamp, lines));
        }
        if !commits_by_dev.is_empty() {
            for list in commits_by_dev.values_mut() {
                list.sort_by_key(|&(t, _)| t);
            }
            let weight = weights::committer_edge_weight(&commits_by_dev, t_s, t_e, cfg.alpha)?;
            let latest = latest_of(commits_by_dev.values().flatten().map(|&(t, _)| t));
            let mut members = vec![pr_vertex.clone()];
            members.extend(
                commits_by_dev
                    .into_keys()
                    .map(|dev| Vertex::Dev(dev, Role::Committer)),
            );
            specs.push(EdgeSpec {
                kind: EdgeKind::PrCommitters,
                members,
                weight,
                latest_event: latest,
            });
        }
    }

    if mask.include_re && !pr.reviews.is_empty() {
        let mut times_by_dev: BTreeMap<DeveloperId, Vec<i64>> = BTreeMap::new();
        for review in &pr.reviews {
            let dev = ids.resolve(&review.reviewer);
            if dev.is_invalid() {
                continue;
            }
            times_by_dev.entry(dev).or_default().push(review.timestamp);
        }
        if let Some(spec) = commenter_like_spec(
            &pr_vertex,
            EdgeKind::PrReviewers,
            Role::Reviewer,
            times_by_dev,
            cfg,
            t_s,
            t_e,
        )? {
            specs.push(spec);
        }
    }

    for (kind, role, comment_kind, enabled) in [
        (
            EdgeKind::PrIssueCommenters,
            Role::IssueCommenter,
            CommentKind::Issue,
            mask.include_ic,
        ),
        (
            EdgeKind::PrReviewCommenters,
            Role::ReviewCommenter,
            CommentKind::ReviewComment,
            mask.include_rc,
        ),
    ] {
        if !enabled {
            continue;
        }
        let mut times_by_dev: BTreeMap<DeveloperId, Vec<i64>> = BTreeMap::new();
        for comment in pr.comments.iter().filter(|c| c.kind == comment_kind) {
            let dev = ids.resolve(&comment.commenter);
            if dev.is_invalid() {
                continue;
            }
            times_by_dev.entry(dev).or_default().push(comment.timestamp);
        }
        if let Some(spec) =
            commenter_like_spec(&pr_vertex, kind, role, times_by_dev, cfg, t_s, t_e)?
        {
            specs.push(spec);
        }
    }

    Ok(specs)
}

fn commenter_like_spec(
    pr_vertex: &Vertex,
    kind: EdgeKind,
    role: Role,
    mut times_by_dev: BTreeMap<DeveloperId, Vec<i64>>,
    cfg: &HyperparamConfig,
    t_s: i64,
    t_e: i64,
) -> Result<Option<EdgeSpec>, HypergraphError> {
    if times_by_dev.is_empty() {
        return Ok(None);
    }
    for times in times_by_dev.values_mut() {
        times.sort_unstable();
    }
    let weight = weights::reviewer_edge_weight(&times_by_dev, t_s, t_e, cfg.alpha)?;
    let latest = latest_of(times_by_dev.values().flatten().copied());
    let mut members = vec![pr_vertex.clone()];
    members.extend(times_by_dev.into_keys().map(|dev| Vertex::Dev(dev, role)));
    Ok(Some(EdgeSpec {
        kind,
        members,
        weight,
        latest_event: latest,
    }))
}

fn latest_of(times: impl Iterator<Item = i64>) -> i64 {
    times.max().unwrap_or(0)
}

/// Build the full hypergraph for a preprocessed log with every relation on.
pub fn build_hypergraph(
    log: &EventLog,
    ids: &IdentityMap,
    cfg: &HyperparamConfig,
) -> Result<IncidenceSystem, HypergraphError> {
    build_hypergraph_masked(log, ids, cfg, &RelationMask::default())
}

/// Build the hypergraph with a relation mask. Masking a relation only ever
/// removes vertices and edges relative to the full build.
pub fn build_hypergraph_masked(
    log: &EventLog,
    ids: &IdentityMap,
    cfg: &HyperparamConfig,
    mask: &RelationMask,
) -> Result<IncidenceSystem, HypergraphError> {
    let (t_s, t_e) = (log.t_start, log.t_end);
    if t_s >= t_e {
        return Err(HypergraphError::DegenerateWindow { t_s, t_e });
    }

    // Per-PR relation families, computed in parallel, assembled in log order.
    let family_results = exec::map(&log.prs, |pr| pr_family_specs(pr, ids, cfg, mask, t_s, t_e));
    let mut specs: Vec<EdgeSpec> = Vec::new();
    for result in family_results {
        specs.extend(result?);
    }

    let profiles: Vec<PrProfile> = log.prs.iter().map(PrProfile::from).collect();

    if mask.include_prpr && cfg.top_k_similar > 0 {
        let per_pr = exec::map(&profiles, |target| {
            select_similar_profiles(target, &profiles, cfg.top_k_similar, t_s, t_e)
        });
        let created_at_of: HashMap<&str, i64> = profiles
            .iter()
            .map(|p| (p.pr_id.as_str(), p.created_at))
            .collect();
        let mut seen_pairs: BTreeSet<(String, String)> = BTreeSet::new();
        for (target, result) in profiles.iter().zip(per_pr) {
            for (other_id, weight) in result? {
                let pair = if target.pr_id < other_id {
                    (target.pr_id.clone(), other_id.clone())
                } else {
                    (other_id.clone(), target.pr_id.clone())
                };
                // the same pair can be selected from both endpoints
                if !seen_pairs.insert(pair) {
                    continue;
                }
                let other_created = created_at_of
                    .get(other_id.as_str())
                    .copied()
                    .unwrap_or(target.created_at);
                specs.push(EdgeSpec {
                    kind: EdgeKind::PrPr,
                    members: vec![Vertex::Pr(target.pr_id.clone()), Vertex::Pr(other_id)],
                    weight,
                    latest_event: target.created_at.max(other_created),
                });
            }
        }
    }

    Ok(assemble_system((t_s, t_e), profiles, specs, vec![]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::{FileChange, RawActor, ReviewEvent};
    use crate::identity::build_identity_map;

    fn file(path: &str) -> FileChange {
        FileChange {
            path: path.into(),
            lines_changed: 1,
        }
    }

    fn pr(pr_id: &str, created_at: i64, creator: &str, reviewer: &str, path: &str) -> PullRequest {
        PullRequest {
            pr_id: pr_id.into(),
            created_at,
            creator: RawActor::with_login(creator),
            merged_at: None,
            files: vec![file(path)],
            commits: vec![],
            reviews: vec![ReviewEvent {
                reviewer: RawActor::with_login(reviewer),
                timestamp: created_at + 10,
            }],
            comments: vec![],
        }
    }

    fn log(prs: Vec<PullRequest>) -> EventLog {
        let mut log = EventLog {
            project: "t".into(),
            t_start: 0,
            t_end: 1000,
            prs,
        };
        log.sort_prs();
        log
    }

    #[test]
    fn single_pr_yields_two_edges_three_vertices() {
        let log = log(vec![pr("p1", 100, "alice", "bob", "src/a.rs")]);
        let ids = build_identity_map(&log, 2);
        let system = build_hypergraph(&log, &ids, &HyperparamConfig::default()).unwrap();
        assert_eq!(system.edge_count(), 2);
        assert_eq!(system.vertex_count(), 3);
    }

    #[test]
    fn identical_file_prs_get_a_prpr_edge() {
        let log = log(vec![
            pr("p1", 100, "alice", "bob", "src/a.rs"),
            pr("p2", 200, "carol", "dan", "src/a.rs"),
        ]);
        let ids = build_identity_map(&log, 2);
        let system = build_hypergraph(&log, &ids, &HyperparamConfig::default()).unwrap();
        let prpr: Vec<&Hyperedge> = system
            .edges()
            .iter()
            .filter(|e| e.kind == EdgeKind::PrPr)
            .collect();
        assert_eq!(prpr.len(), 1);
        assert_eq!(prpr[0].members.len(), 2);
    }

    #[test]
    fn masking_only_removes() {
        let log = log(vec![
            pr("p1", 100, "alice", "bob", "src/a.rs"),
            pr("p2", 200, "carol", "dan", "src/a.rs"),
        ]);
        let ids = build_identity_map(&log, 2);
        let cfg = HyperparamConfig::default();
        let full = build_hypergraph(&log, &ids, &cfg).unwrap();
        for masked in [
            RelationMask {
                include_re: false,
                ..RelationMask::default()
            },
            RelationMask {
                include_prpr: false,
                ..RelationMask::default()
            },
            RelationMask {
                include_creator: false,
                ..RelationMask::default()
            },
        ] {
            let system = build_hypergraph_masked(&log, &ids, &cfg, &masked).unwrap();
            assert!(system.vertex_count() <= full.vertex_count());
            assert!(system.edge_count() <= full.edge_count());
            for v in system.vertices() {
                assert!(full.vertex_id(v).is_some(), "mask added vertex {v}");
            }
        }
    }

    #[test]
    fn degenerate_window_propagates() {
        let mut bad = log(vec![pr("p1", 100, "alice", "bob", "src/a.rs")]);
        bad.t_start = 500;
        bad.t_end = 500;
        let ids = build_identity_map(&bad, 2);
        let err = build_hypergraph(&bad, &ids, &HyperparamConfig::default()).unwrap_err();
        assert!(matches!(err, HypergraphError::DegenerateWindow { .. }));
    }

    #[test]
    fn select_similar_prefers_later_created_on_ties() {
        let target = pr("q", 500, "alice", "bob", "x/y.rs");
        let c1 = pr("old", 100, "c", "d", "x/y.rs");
        let c2 = pr("new", 300, "e", "f", "x/y.rs");
        // give both candidates the same |t_i - t_j| so similarity ties
        let c1 = PullRequest {
            created_at: 400,
            ..c1
        };
        let c2 = PullRequest {
            created_at: 600,
            ..c2
        };
        let candidates = [c1, c2];
        let picked = select_similar_prs(&target, candidates.iter(), 10, 0, 1000).unwrap();
        assert_eq!(picked[0].0, "new");
    }

    #[test]
    fn select_similar_returns_fewer_when_scarce() {
        let target = pr("q", 500, "alice", "bob", "x/y.rs");
        let same = pr("a", 400, "c", "d", "x/y.rs");
        let unrelated = pr("b", 400, "c", "d", "z/w.rs");
        let candidates = [same, unrelated];
        let picked = select_similar_prs(&target, candidates.iter(), 10, 0, 1000).unwrap();
        assert_eq!(picked.len(), 1);
        assert_eq!(picked[0].0, "a");
    }

    #[test]
    fn select_similar_all_zero_is_empty() {
        let target = pr("q", 500, "alice", "bob", "x/y.rs");
        let unrelated = pr("b", 400, "c", "d", "z/w.rs");
        let candidates = [unrelated];
        let picked = select_similar_prs(&target, candidates.iter(), 10, 0, 1000).unwrap();
        assert!(picked.is_empty());
    }

    #[test]
    fn mask_labels() {
        assert_eq!(RelationMask::default().label(), "re_ct_ic_rc");
        let no_rc = RelationMask {
            include_rc: false,
            ..RelationMask::default()
        };
        assert_eq!(no_rc.label(), "re_ct_ic");
    }

    #[test]
    fn dense_random_walk_reconstruction_is_row_stochastic() {
        // P = Dv^{-1} H W De^{-1} H^T reconstructed densely from the edge
        // list has unit row sums wherever d(v) > 0.
        let log = log(vec![
            pr("p1", 100, "alice", "bob", "src/a.rs"),
            pr("p2", 200, "carol", "bob", "src/a.rs"),
            pr("p3", 300, "alice", "dan", "src/b.rs"),
        ]);
        let ids = build_identity_map(&log, 2);
        let system = build_hypergraph(&log, &ids, &HyperparamConfig::default()).unwrap();
        let n = system.vertex_count();
        let mut walk = vec![vec![0.0f64; n]; n];
        for edge in system.edges() {
            if edge.weight <= 0.0 {
                continue;
            }
            for &u in &edge.members {
                for &v in &edge.members {
                    walk[u][v] += edge.weight / (edge.degree() as f64 * system.degree(u));
                }
            }
        }
        for (u, walk_row) in walk.iter().enumerate() {
            if system.degree(u) == 0.0 {
                continue;
            }
            let sum: f64 = walk_row.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9, "row {u} sums to {sum}");
        }
    }
}
