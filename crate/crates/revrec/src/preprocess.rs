//! Event-log cleaning: bot and empty-identity events, self-reviews, bulk
//! commits, post-merge activity, and PRs left without files or reviews.
//!
//! Rules apply in a fixed order per PR:
//!
//! (a) drop events by `Bot` actors,
//! (b) drop events whose actor resolves to the reserved `invalid` id,
//! (c) drop reviews where the reviewer is the PR creator,
//! (d) drop commits touching at least `bulk_commit_threshold` files,
//! (e) drop events strictly after `merged_at`,
//! (f) drop PRs with no files or no surviving reviews.
//!
//! Events timestamped before the PR's creation are also dropped so that the
//! `created_at <= event timestamp` invariant holds on the output.
//! The pass is idempotent and only ever removes data.

use serde::Serialize;

use crate::events::{ActorType, EventLog, PullRequest};
use crate::identity::IdentityMap;

/// Tunables for the cleaning pass. Defaults match the standard pipeline:
/// every rule on, bulk threshold 100.
#[derive(Debug, Clone)]
pub struct FilterConfig {
    /// Commits touching at least this many files are dropped. Must be >= 1.
    pub bulk_commit_threshold: usize,
    pub drop_bots: bool,
    pub drop_unresolved: bool,
    pub drop_self_reviews: bool,
    pub truncate_post_merge: bool,
    pub drop_empty_prs: bool,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            bulk_commit_threshold: 100,
            drop_bots: true,
            drop_unresolved: true,
            drop_self_reviews: true,
            truncate_post_merge: true,
            drop_empty_prs: true,
        }
    }
}

/// Per-rule removal counts for one cleaning pass.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FilterReport {
    pub bot_events: usize,
    pub invalid_identity_events: usize,
    pub self_review_events: usize,
    pub bulk_commit_events: usize,
    pub post_merge_events: usize,
    pub pre_creation_events: usize,
    pub prs_dropped_no_files: usize,
    pub prs_dropped_no_reviews: usize,
    pub events_dropped_with_prs: usize,
    pub prs_in: usize,
    pub prs_out: usize,
    pub events_in: usize,
    pub events_out: usize,
}

impl FilterReport {
    pub fn prs_dropped(&self) -> usize {
        self.prs_dropped_no_files + self.prs_dropped_no_reviews
    }

    pub fn total_events_removed(&self) -> usize {
        self.bot_events
            + self.invalid_identity_events
            + self.self_review_events
            + self.bulk_commit_events
            + self.post_merge_events
            + self.pre_creation_events
            + self.events_dropped_with_prs
    }

    pub fn is_clean(&self) -> bool {
        self.total_events_removed() == 0 && self.prs_dropped() == 0
    }
}

/// Apply the cleaning rules to a parsed log. Output ordering and window
/// bounds are preserved; degenerate output (zero PRs) is legal.
pub fn apply_filters(
    log: &EventLog,
    ids: &IdentityMap,
    cfg: &FilterConfig,
) -> (EventLog, FilterReport) {
    let mut report = FilterReport {
        prs_in: log.prs.len(),
        events_in: log.prs.iter().map(PullRequest::event_count).sum(),
        ..FilterReport::default()
    };

    let mut prs: Vec<PullRequest> = Vec::with_capacity(log.prs.len());
    for pr in &log.prs {
        let mut pr = pr.clone();
        let creator_id = ids.resolve(&pr.creator);

        // (a) bot events
        if cfg.drop_bots {
            let keep = |t: ActorType| t != ActorType::Bot;
            let before = pr.event_count();
            pr.commits.retain(|c| keep(c.author.actor_type));
            pr.reviews.retain(|r| keep(r.reviewer.actor_type));
            pr.comments.retain(|c| keep(c.commenter.actor_type));
            report.bot_events += before - pr.event_count();
        }

        // (b) events whose actor has no usable identity
        if cfg.drop_unresolved {
            let before = pr.event_count();
            pr.commits.retain(|c| !ids.resolve(&c.author).is_invalid());
            pr.reviews
                .retain(|r| !ids.resolve(&r.reviewer).is_invalid());
            pr.comments
                .retain(|c| !ids.resolve(&c.commenter).is_invalid());
            report.invalid_identity_events += before - pr.event_count();
        }

        // (c) self-reviews
        if cfg.drop_self_reviews && !creator_id.is_invalid() {
            let before = pr.reviews.len();
            pr.reviews
                .retain(|r| ids.resolve(&r.reviewer) != creator_id);
            report.self_review_events += before - pr.reviews.len();
        }

        // (d) bulk commits
        let before = pr.commits.len();
        pr.commits
            .retain(|c| c.files.len() < cfg.bulk_commit_threshold);
        report.bulk_commit_events += before - pr.commits.len();

        // (e) activity after the merge closes the review
        if cfg.truncate_post_merge {
            if let Some(merged_at) = pr.merged_at {
                let before = pr.event_count();
                pr.commits.retain(|c| c.timestamp <= merged_at);
                pr.reviews.retain(|r| r.timestamp <= merged_at);
                pr.comments.retain(|c| c.timestamp <= merged_at);
                report.post_merge_events += before - pr.event_count();
            }
        }

        // events predating the PR violate the created_at invariant
        {
            let created = pr.created_at;
            let before = pr.event_count();
            pr.commits.retain(|c| c.timestamp >= created);
            pr.reviews.retain(|r| r.timestamp >= created);
            pr.comments.retain(|c| c.timestamp >= created);
            report.pre_creation_events += before - pr.event_count();
        }

        // (f) PRs with nothing left to learn from
        if cfg.drop_empty_prs {
            if pr.files.is_empty() {
                report.prs_dropped_no_files += 1;
                report.events_dropped_with_prs += pr.event_count();
                continue;
            }
            if pr.reviews.is_empty() {
                report.prs_dropped_no_reviews += 1;
                report.events_dropped_with_prs += pr.event_count();
                continue;
            }
        }
        prs.push(pr);
    }

    let out = EventLog {
        project: log.project.clone(),
        t_start: log.t_start,
        t_end: log.t_end,
        prs,
    };
    report.prs_out = out.prs.len();
    report.events_out = out.prs.iter().map(PullRequest::event_count).sum();
    (out, report)
}
