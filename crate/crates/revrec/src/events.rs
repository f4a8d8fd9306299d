//! Raw event-log data model and the line-delimited JSON interchange format.
//!
//! A log file is UTF-8 JSON-lines: an optional `{"kind":"header",...}` first
//! record carrying explicit window bounds, followed by one `{"kind":"pr",...}`
//! record per pull request. Parsed logs are immutable and safe to share
//! across threads.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Classification carried by the exporter for each actor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ActorType {
    User,
    Bot,
    /// Missing or unrecognized type information.
    #[default]
    Unknown,
}

/// An actor as recorded in the raw export: any subset of the identity
/// attributes may be present. An actor with no attribute at all is unusable
/// and resolves to the reserved `invalid` id.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RawActor {
    pub login: Option<String>,
    pub email: Option<String>,
    pub name: Option<String>,
    pub actor_type: ActorType,
}

impl RawActor {
    pub fn with_login(login: &str) -> Self {
        RawActor {
            login: Some(login.to_string()),
            ..RawActor::default()
        }
    }

    /// True when every identity attribute is absent or blank.
    pub fn is_empty(&self) -> bool {
        let blank = |s: &Option<String>| s.as_deref().is_none_or(|v| v.trim().is_empty());
        blank(&self.login) && blank(&self.email) && blank(&self.name)
    }
}

/// One file touched by a commit or by the PR as a whole.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileChange {
    /// Forward-slash-separated repository path, no leading slash.
    pub path: String,
    #[serde(default)]
    pub lines_changed: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommitEvent {
    pub author: RawActor,
    pub timestamp: i64,
    pub files: Vec<FileChange>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReviewEvent {
    pub reviewer: RawActor,
    pub timestamp: i64,
}

/// Whether a comment sits on the PR conversation (issue comment) or on a
/// code change inside the review (review comment).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CommentKind {
    Issue,
    ReviewComment,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommentEvent {
    pub commenter: RawActor,
    pub timestamp: i64,
    pub kind: CommentKind,
}

/// A pull request with its attached interaction events.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PullRequest {
    pub pr_id: String,
    pub created_at: i64,
    pub creator: RawActor,
    pub merged_at: Option<i64>,
    /// The PR's modified file set.
    pub files: Vec<FileChange>,
    pub commits: Vec<CommitEvent>,
    pub reviews: Vec<ReviewEvent>,
    /// Canonical order: all issue comments first, then all review comments,
    /// each block in recorded order. The wire format keeps the two kinds in
    /// separate arrays, so parsing always yields this order.
    pub comments: Vec<CommentEvent>,
}

impl PullRequest {
    /// Total number of attached events (commits + reviews + comments).
    pub fn event_count(&self) -> usize {
        self.commits.len() + self.reviews.len() + self.comments.len()
    }
}

/// A time-bounded collection of pull requests, ordered by
/// `(created_at, pr_id)` ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventLog {
    pub project: String,
    pub t_start: i64,
    pub t_end: i64,
    pub prs: Vec<PullRequest>,
}

impl EventLog {
    /// Restore the total ordering by `(created_at, pr_id)`.
    pub fn sort_prs(&mut self) {
        self.prs
            .sort_by(|a, b| (a.created_at, &a.pr_id).cmp(&(b.created_at, &b.pr_id)));
    }

    /// Check the structural invariants: strict window, unique ids, total
    /// ordering, and every PR inside the window.
    pub fn validate(&self) -> Result<(), EventLogError> {
        if self.t_start >= self.t_end {
            return Err(EventLogError::InvalidLog("t_start must be < t_end"));
        }
        for pair in self.prs.windows(2) {
            if (pair[0].created_at, &pair[0].pr_id) >= (pair[1].created_at, &pair[1].pr_id) {
                return Err(EventLogError::InvalidLog(
                    "prs not sorted by (created_at, pr_id)",
                ));
            }
        }
        let mut seen = HashSet::new();
        for pr in &self.prs {
            if !seen.insert(pr.pr_id.as_str()) {
                return Err(EventLogError::DuplicatePr(pr.pr_id.clone()));
            }
            if pr.created_at < self.t_start || pr.created_at > self.t_end {
                return Err(EventLogError::InvalidLog("pr created_at outside window"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum EventLogError {
    #[error("line {0}: malformed JSON: {1}")]
    MalformedLine(usize, String),
    #[error("line {0}: missing or invalid field `{1}`")]
    SchemaViolation(usize, String),
    #[error("duplicate pr_id {0:?}")]
    DuplicatePr(String),
    #[error("line {0}: header record must be the first line")]
    MisplacedHeader(usize),
    #[error("empty log: no header and no pr records")]
    EmptyLog,
    #[error("invalid event log: {0}")]
    InvalidLog(&'static str),
    #[error("io failure: {0}")]
    Io(#[from] std::io::Error),
}

// ---------------------------------------------------------------------------
// Wire format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "PascalCase")]
enum WireActorType {
    User,
    Bot,
    #[serde(other)]
    Unknown,
}

#[derive(Serialize, Deserialize, Default)]
struct ActorRecord {
    #[serde(default)]
    login: Option<String>,
    #[serde(default)]
    email: Option<String>,
    #[serde(default)]
    name: Option<String>,
    #[serde(rename = "type", default)]
    actor_type: Option<WireActorType>,
}

impl From<&RawActor> for ActorRecord {
    fn from(a: &RawActor) -> Self {
        ActorRecord {
            login: a.login.clone(),
            email: a.email.clone(),
            name: a.name.clone(),
            actor_type: match a.actor_type {
                ActorType::User => Some(WireActorType::User),
                ActorType::Bot => Some(WireActorType::Bot),
                ActorType::Unknown => None,
            },
        }
    }
}

impl From<ActorRecord> for RawActor {
    fn from(r: ActorRecord) -> Self {
        RawActor {
            login: r.login,
            email: r.email,
            name: r.name,
            actor_type: match r.actor_type {
                Some(WireActorType::User) => ActorType::User,
                Some(WireActorType::Bot) => ActorType::Bot,
                Some(WireActorType::Unknown) | None => ActorType::Unknown,
            },
        }
    }
}

#[derive(Serialize, Deserialize)]
struct CommitRecord {
    author: ActorRecord,
    timestamp: i64,
    #[serde(default)]
    files: Vec<FileChange>,
}

#[derive(Serialize, Deserialize)]
struct ReviewRecord {
    reviewer: ActorRecord,
    timestamp: i64,
}

#[derive(Serialize, Deserialize)]
struct CommentRecord {
    commenter: ActorRecord,
    timestamp: i64,
}

#[derive(Serialize, Deserialize)]
struct PrRecord {
    pr_id: String,
    created_at: i64,
    creator: ActorRecord,
    #[serde(default)]
    merged_at: Option<i64>,
    #[serde(default)]
    files: Vec<FileChange>,
    #[serde(default)]
    commits: Vec<CommitRecord>,
    #[serde(default)]
    reviews: Vec<ReviewRecord>,
    #[serde(default)]
    issue_comments: Vec<CommentRecord>,
    #[serde(default)]
    review_comments: Vec<CommentRecord>,
}

#[derive(Serialize, Deserialize)]
struct HeaderRecord {
    project: String,
    t_start: i64,
    t_end: i64,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Record {
    Header(HeaderRecord),
    Pr(Box<PrRecord>),
}

impl From<PrRecord> for PullRequest {
    fn from(r: PrRecord) -> Self {
        let mut comments: Vec<CommentEvent> = Vec::new();
        comments.extend(r.issue_comments.into_iter().map(|c| CommentEvent {
            commenter: c.commenter.into(),
            timestamp: c.timestamp,
            kind: CommentKind::Issue,
        }));
        comments.extend(r.review_comments.into_iter().map(|c| CommentEvent {
            commenter: c.commenter.into(),
            timestamp: c.timestamp,
            kind: CommentKind::ReviewComment,
        }));
        PullRequest {
            pr_id: r.pr_id,
            created_at: r.created_at,
            creator: r.creator.into(),
            merged_at: r.merged_at,
            files: r.files,
            commits: r
                .commits
                .into_iter()
                .map(|c| CommitEvent {
                    author: c.author.into(),
                    timestamp: c.timestamp,
                    files: c.files,
                })
                .collect(),
            reviews: r
                .reviews
                .into_iter()
                .map(|v| ReviewEvent {
                    reviewer: v.reviewer.into(),
                    timestamp: v.timestamp,
                })
                .collect(),
            comments,
        }
    }
}

impl From<&PullRequest> for PrRecord {
    fn from(pr: &PullRequest) -> Self {
        let comment_records = |kind: CommentKind| -> Vec<CommentRecord> {
            pr.comments
                .iter()
                .filter(|c| c.kind == kind)
                .map(|c| CommentRecord {
                    commenter: (&c.commenter).into(),
                    timestamp: c.timestamp,
                })
                .collect()
        };
        PrRecord {
            pr_id: pr.pr_id.clone(),
            created_at: pr.created_at,
            creator: (&pr.creator).into(),
            merged_at: pr.merged_at,
            files: pr.files.clone(),
            commits: pr
                .commits
                .iter()
                .map(|c| CommitRecord {
                    author: (&c.author).into(),
                    timestamp: c.timestamp,
                    files: c.files.clone(),
                })
                .collect(),
            reviews: pr
                .reviews
                .iter()
                .map(|v| ReviewRecord {
                    reviewer: (&v.reviewer).into(),
                    timestamp: v.timestamp,
                })
                .collect(),
            issue_comments: comment_records(CommentKind::Issue),
            review_comments: comment_records(CommentKind::ReviewComment),
        }
    }
}

fn schema_error(line_no: usize, err: &serde_json::Error) -> EventLogError {
    // serde_json reports missing struct fields as "missing field `x` ...";
    // surface those as schema violations, everything else as malformed JSON.
    let msg = err.to_string();
    if let Some(rest) = msg.strip_prefix("missing field `") {
        if let Some(field) = rest.split('`').next() {
            return EventLogError::SchemaViolation(line_no, field.to_string());
        }
    }
    EventLogError::MalformedLine(line_no, msg)
}

fn check_timestamps(line_no: usize, pr: &PullRequest) -> Result<(), EventLogError> {
    let bad = |field: &str| Err(EventLogError::SchemaViolation(line_no, field.to_string()));
    if pr.created_at <= 0 {
        return bad("created_at");
    }
    if pr.commits.iter().any(|c| c.timestamp <= 0) {
        return bad("commits.timestamp");
    }
    if pr.reviews.iter().any(|r| r.timestamp <= 0) {
        return bad("reviews.timestamp");
    }
    if pr.comments.iter().any(|c| c.timestamp <= 0) {
        return bad("comments.timestamp");
    }
    let bad_path = |f: &FileChange| f.path.is_empty() || f.path.starts_with('/');
    if pr.files.iter().any(bad_path) {
        return bad("files.path");
    }
    if pr.commits.iter().any(|c| c.files.iter().any(bad_path)) {
        return bad("commits.files.path");
    }
    Ok(())
}

/// Parse a JSON-lines event log.
///
/// PRs come back sorted by `(created_at, pr_id)`. The window is taken from
/// the header record when present, otherwise derived as the min/max
/// `created_at` over all PRs. A stream with neither header nor PRs is an
/// [`EventLogError::EmptyLog`].
pub fn parse_event_log<R: BufRead>(reader: R, project: &str) -> Result<EventLog, EventLogError> {
    let mut prs: Vec<PullRequest> = Vec::new();
    let mut header: Option<HeaderRecord> = None;
    let mut seen_ids: HashSet<String> = HashSet::new();

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: Record = serde_json::from_str(&line).map_err(|e| schema_error(line_no, &e))?;
        match record {
            Record::Header(h) => {
                if line_no != 1 {
                    return Err(EventLogError::MisplacedHeader(line_no));
                }
                if h.t_start >= h.t_end {
                    return Err(EventLogError::SchemaViolation(
                        line_no,
                        "t_start".to_string(),
                    ));
                }
                header = Some(h);
            }
            Record::Pr(r) => {
                if !seen_ids.insert(r.pr_id.clone()) {
                    return Err(EventLogError::DuplicatePr(r.pr_id));
                }
                let pr: PullRequest = (*r).into();
                check_timestamps(line_no, &pr)?;
                if let Some(h) = &header {
                    if pr.created_at < h.t_start || pr.created_at > h.t_end {
                        return Err(EventLogError::SchemaViolation(
                            line_no,
                            "created_at".to_string(),
                        ));
                    }
                }
                prs.push(pr);
            }
        }
    }

    if header.is_none() && prs.is_empty() {
        return Err(EventLogError::EmptyLog);
    }

    let (project_name, t_start, t_end) = match header {
        Some(h) => (h.project, h.t_start, h.t_end),
        None => (
            project.to_string(),
            prs.iter().map(|p| p.created_at).min().unwrap(),
            prs.iter().map(|p| p.created_at).max().unwrap(),
        ),
    };

    let mut log = EventLog {
        project: project_name,
        t_start,
        t_end,
        prs,
    };
    log.sort_prs();
    Ok(log)
}

/// Serialize a log back to JSON-lines, header first. The log must satisfy
/// [`EventLog::validate`]; round-tripping a valid log is the identity.
pub fn write_event_log<W: Write>(log: &EventLog, mut sink: W) -> Result<(), EventLogError> {
    log.validate()?;
    let header = Record::Header(HeaderRecord {
        project: log.project.clone(),
        t_start: log.t_start,
        t_end: log.t_end,
    });
    serde_json::to_writer(&mut sink, &header).map_err(io_error)?;
    sink.write_all(b"\n")?;
    for pr in &log.prs {
        let record = Record::Pr(Box::new(pr.into()));
        serde_json::to_writer(&mut sink, &record).map_err(io_error)?;
        sink.write_all(b"\n")?;
    }
    Ok(())
}

fn io_error(err: serde_json::Error) -> EventLogError {
    EventLogError::Io(std::io::Error::other(err))
}

/// Parse a single PR record from JSON, with or without the `"kind":"pr"`
/// envelope. Used for ad-hoc query PRs supplied outside a log file.
pub fn parse_pr_json(json: &str) -> Result<PullRequest, EventLogError> {
    let record: PrRecord = match serde_json::from_str::<Record>(json) {
        Ok(Record::Pr(r)) => *r,
        Ok(Record::Header(_)) => return Err(EventLogError::SchemaViolation(1, "kind".to_string())),
        Err(_) => serde_json::from_str(json).map_err(|e| schema_error(1, &e))?,
    };
    let pr: PullRequest = record.into();
    check_timestamps(1, &pr)?;
    Ok(pr)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pr_line(pr_id: &str, created_at: i64) -> String {
        format!(
            r#"{{"kind":"pr","pr_id":"{pr_id}","created_at":{created_at},"creator":{{"login":"alice","email":null,"name":null,"type":"User"}},"merged_at":null,"files":[{{"path":"src/a.rs","lines_changed":3}}],"commits":[],"reviews":[{{"reviewer":{{"login":"bob"}},"timestamp":{created_at}}}],"issue_comments":[],"review_comments":[]}}"#
        )
    }

    #[test]
    fn empty_stream_is_an_error() {
        let err = parse_event_log(&b""[..], "p").unwrap_err();
        assert!(matches!(err, EventLogError::EmptyLog));
    }

    #[test]
    fn prs_sorted_by_created_at() {
        let input = format!("{}\n{}\n", pr_line("b", 10), pr_line("a", 5));
        let log = parse_event_log(input.as_bytes(), "p").unwrap();
        let times: Vec<i64> = log.prs.iter().map(|p| p.created_at).collect();
        assert_eq!(times, vec![5, 10]);
        assert_eq!(log.t_start, 5);
        assert_eq!(log.t_end, 10);
    }

    #[test]
    fn created_at_tie_broken_by_pr_id() {
        let input = format!("{}\n{}\n", pr_line("z", 7), pr_line("a", 7));
        let log = parse_event_log(input.as_bytes(), "p").unwrap();
        let ids: Vec<&str> = log.prs.iter().map(|p| p.pr_id.as_str()).collect();
        assert_eq!(ids, vec!["a", "z"]);
    }

    #[test]
    fn duplicate_pr_id_rejected() {
        let input = format!("{}\n{}\n", pr_line("42", 5), pr_line("42", 9));
        let err = parse_event_log(input.as_bytes(), "p").unwrap_err();
        match err {
            EventLogError::DuplicatePr(id) => assert_eq!(id, "42"),
            other => panic!("expected DuplicatePr, got {other:?}"),
        }
    }

    #[test]
    fn missing_required_field_is_schema_violation() {
        let input = r#"{"kind":"pr","created_at":5,"creator":{"login":"a"}}"#;
        let err = parse_event_log(input.as_bytes(), "p").unwrap_err();
        match err {
            EventLogError::SchemaViolation(1, field) => assert_eq!(field, "pr_id"),
            other => panic!("expected SchemaViolation, got {other:?}"),
        }
    }

    #[test]
    fn malformed_json_reports_line_number() {
        let input = format!("{}\nnot json\n", pr_line("a", 5));
        let err = parse_event_log(input.as_bytes(), "p").unwrap_err();
        match err {
            EventLogError::MalformedLine(2, _) => {}
            other => panic!("expected MalformedLine(2), got {other:?}"),
        }
    }

    #[test]
    fn header_sets_window_beyond_observed_prs() {
        let input = format!(
            "{}\n{}\n",
            r#"{"kind":"header","project":"p","t_start":1,"t_end":100}"#,
            pr_line("a", 5)
        );
        let log = parse_event_log(input.as_bytes(), "x").unwrap();
        assert_eq!((log.t_start, log.t_end), (1, 100));
        assert_eq!(log.project, "p");
    }

    #[test]
    fn header_only_log_round_trips() {
        let input = r#"{"kind":"header","project":"p","t_start":1,"t_end":9}"#;
        let log = parse_event_log(input.as_bytes(), "x").unwrap();
        assert!(log.prs.is_empty());
        let mut buf = Vec::new();
        write_event_log(&log, &mut buf).unwrap();
        let back = parse_event_log(&buf[..], "x").unwrap();
        assert_eq!(back, log);
    }

    #[test]
    fn single_pr_round_trip_with_header() {
        let input = format!(
            "{}\n{}\n",
            r#"{"kind":"header","project":"p","t_start":1,"t_end":100}"#,
            pr_line("a", 5)
        );
        let log = parse_event_log(input.as_bytes(), "x").unwrap();
        let mut buf = Vec::new();
        write_event_log(&log, &mut buf).unwrap();
        let back = parse_event_log(&buf[..], "x").unwrap();
        assert_eq!(back, log);
    }

    #[test]
    fn write_rejects_unsorted_log() {
        let input = format!("{}\n{}\n", pr_line("a", 5), pr_line("b", 10));
        let mut log = parse_event_log(input.as_bytes(), "p").unwrap();
        log.prs.swap(0, 1);
        let err = write_event_log(&log, Vec::new()).unwrap_err();
        assert!(matches!(err, EventLogError::InvalidLog(_)));
    }

    #[test]
    fn misplaced_header_rejected() {
        let input = format!(
            "{}\n{}\n",
            pr_line("a", 5),
            r#"{"kind":"header","project":"p","t_start":1,"t_end":9}"#
        );
        let err = parse_event_log(input.as_bytes(), "p").unwrap_err();
        assert!(matches!(err, EventLogError::MisplacedHeader(2)));
    }

    #[test]
    fn comment_kinds_split_into_the_two_arrays() {
        let input = r#"{"kind":"pr","pr_id":"a","created_at":5,"creator":{"login":"x"},"merged_at":null,"files":[],"commits":[],"reviews":[],"issue_comments":[{"commenter":{"login":"i"},"timestamp":6}],"review_comments":[{"commenter":{"login":"r"},"timestamp":7}]}"#;
        let log = parse_event_log(input.as_bytes(), "p").unwrap();
        let pr = &log.prs[0];
        assert_eq!(pr.comments.len(), 2);
        assert_eq!(pr.comments[0].kind, CommentKind::Issue);
        assert_eq!(pr.comments[1].kind, CommentKind::ReviewComment);
        // and back out again
        let record = PrRecord::from(pr);
        assert_eq!(record.issue_comments.len(), 1);
        assert_eq!(record.review_comments.len(), 1);
    }

    #[test]
    fn unknown_actor_type_maps_to_unknown() {
        let input = r#"{"kind":"pr","pr_id":"a","created_at":5,"creator":{"login":"x","type":"Organization"},"files":[],"reviews":[{"reviewer":{"login":"r"},"timestamp":6}]}"#;
        let log = parse_event_log(input.as_bytes(), "p").unwrap();
        assert_eq!(log.prs[0].creator.actor_type, ActorType::Unknown);
    }
}
