//! Developer identity unification across login / email / name attributes.
//!
//! Logins are authoritative: the first pass registers every actor that has
//! one and indexes its email and name fragments. The second pass resolves
//! login-less actors by exact email, then exact name fragment, then nearest
//! neighbor under edit distance; whatever is left gets a fresh `anon:<n>` id.
//! Resolution is deterministic for a fixed `(log, max_distance)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::events::{EventLog, RawActor};

/// Reserved id for actors with no usable identity attribute.
pub const INVALID_ID: &str = "invalid";

/// Canonical developer identifier: a resolved login, an `anon:<n>` token, or
/// the reserved `invalid` id.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DeveloperId(pub String);

impl DeveloperId {
    pub fn new(s: impl Into<String>) -> Self {
        DeveloperId(s.into())
    }

    pub fn invalid() -> Self {
        DeveloperId(INVALID_ID.to_string())
    }

    pub fn is_invalid(&self) -> bool {
        self.0 == INVALID_ID
    }

    pub fn is_anon(&self) -> bool {
        self.0.starts_with("anon:")
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl std::fmt::Display for DeveloperId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// A forced `login,email,name` mapping applied before the automatic passes.
#[derive(Debug, Clone, Default)]
pub struct IdentityOverride {
    pub login: String,
    pub email: Option<String>,
    pub name: Option<String>,
}

/// Lookup tables from normalized attribute strings to canonical ids.
///
/// BTree maps keep candidate scans in lexicographic order, which together
/// with the distance tie-break makes nearest-neighbor resolution
/// deterministic.
#[derive(Debug, Clone, Default)]
pub struct IdentityMap {
    by_login: BTreeMap<String, DeveloperId>,
    by_email: BTreeMap<String, DeveloperId>,
    by_name: BTreeMap<String, DeveloperId>,
    anon_counter: usize,
    max_distance: usize,
}

/// Lowercase, trim, and collapse internal whitespace.
pub fn normalize(attr: &str) -> String {
    attr.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// Split a compound name on the separators `and` (word-boundary), `&`, `&&`,
/// `+`, and `|`. Fragments are trimmed; empty fragments are dropped; a name
/// with no separator comes back whole.
pub fn split_compound_names(name: &str) -> Vec<String> {
    let mut fragments = Vec::new();
    for piece in name.split(['&', '+', '|']) {
        split_on_word_and(piece, &mut fragments);
    }
    fragments
}

fn split_on_word_and(piece: &str, out: &mut Vec<String>) {
    let bytes = piece.as_bytes();
    let boundary = |i: Option<u8>| i.is_none_or(|b| !b.is_ascii_alphanumeric());
    let mut start = 0;
    let mut i = 0;
    while i + 3 <= bytes.len() {
        if &bytes[i..i + 3] == b"and"
            && boundary(if i == 0 { None } else { Some(bytes[i - 1]) })
            && boundary(bytes.get(i + 3).copied())
        {
            push_fragment(&piece[start..i], out);
            start = i + 3;
            i += 3;
        } else {
            i += 1;
        }
    }
    push_fragment(&piece[start..], out);
}

fn push_fragment(raw: &str, out: &mut Vec<String>) {
    let trimmed = raw.trim();
    if !trimmed.is_empty() {
        out.push(trimmed.to_string());
    }
}

/// Unit-cost insert/delete/substitute edit distance.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut curr = vec![0usize; b.len() + 1];
    for (i, &ca) in a.iter().enumerate() {
        curr[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            curr[j + 1] = sub.min(prev[j + 1] + 1).min(curr[j] + 1);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

impl IdentityMap {
    /// Number of distinct `anon:<n>` ids handed out.
    pub fn anon_count(&self) -> usize {
        self.anon_counter
    }

    /// Number of registered canonical logins.
    pub fn login_count(&self) -> usize {
        self.by_login.len()
    }

    fn register_login(&mut self, login_norm: &str) -> DeveloperId {
        if let Some(id) = self.by_login.get(login_norm) {
            return id.clone();
        }
        let id = DeveloperId::new(login_norm);
        self.by_login.insert(login_norm.to_string(), id.clone());
        id
    }

    fn index_attributes(&mut self, actor: &RawActor, id: &DeveloperId) {
        if let Some(email) = actor.email.as_deref() {
            let key = normalize(email);
            if !key.is_empty() {
                self.by_email.entry(key).or_insert_with(|| id.clone());
            }
        }
        if let Some(name) = actor.name.as_deref() {
            for fragment in split_compound_names(name) {
                let key = normalize(&fragment);
                if !key.is_empty() {
                    self.by_name.entry(key).or_insert_with(|| id.clone());
                }
            }
        }
    }

    /// Nearest registered email or name fragment within `max_distance` of any
    /// of the actor's own attributes. Ties prefer the smaller distance, then
    /// the lexicographically smaller canonical id.
    fn nearest_neighbor(&self, actor: &RawActor) -> Option<DeveloperId> {
        let mut probes: Vec<String> = Vec::new();
        if let Some(email) = actor.email.as_deref() {
            let p = normalize(email);
            if !p.is_empty() {
                probes.push(p);
            }
        }
        if let Some(name) = actor.name.as_deref() {
            for fragment in split_compound_names(name) {
                let p = normalize(&fragment);
                if !p.is_empty() {
                    probes.push(p);
                }
            }
        }
        let mut best: Option<(usize, &DeveloperId)> = None;
        for (candidate, id) in self.by_email.iter().chain(self.by_name.iter()) {
            for probe in &probes {
                let d = levenshtein(probe, candidate);
                if d > self.max_distance {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((bd, bid)) => d < bd || (d == bd && id < bid),
                };
                if better {
                    best = Some((d, id));
                }
            }
        }
        best.map(|(_, id)| id.clone())
    }

    fn lookup(&self, actor: &RawActor) -> Option<DeveloperId> {
        if let Some(login) = actor.login.as_deref() {
            let key = normalize(login);
            if !key.is_empty() {
                // Every login seen at build time is registered, so this hit
                // is authoritative; an unseen login resolves to itself.
                return Some(
                    self.by_login
                        .get(&key)
                        .cloned()
                        .unwrap_or_else(|| DeveloperId::new(key)),
                );
            }
        }
        if let Some(email) = actor.email.as_deref() {
            if let Some(id) = self.by_email.get(&normalize(email)) {
                return Some(id.clone());
            }
        }
        if let Some(name) = actor.name.as_deref() {
            for fragment in split_compound_names(name) {
                if let Some(id) = self.by_name.get(&normalize(&fragment)) {
                    return Some(id.clone());
                }
            }
        }
        self.nearest_neighbor(actor)
    }

    /// Resolve an actor to its canonical id. Deterministic: the same actor
    /// always yields the same id for a fixed map.
    pub fn resolve(&self, actor: &RawActor) -> DeveloperId {
        if actor.is_empty() {
            return DeveloperId::invalid();
        }
        self.lookup(actor).unwrap_or_else(DeveloperId::invalid)
    }
}

fn for_each_actor<F: FnMut(&RawActor)>(log: &EventLog, mut visit: F) {
    for pr in &log.prs {
        visit(&pr.creator);
        for commit in &pr.commits {
            visit(&commit.author);
        }
        for review in &pr.reviews {
            visit(&review.reviewer);
        }
        for comment in &pr.comments {
            visit(&comment.commenter);
        }
    }
}

/// Build the identity map for a log: override rows first, then the
/// login-registration pass, then resolution of login-less actors.
pub fn build_identity_map(log: &EventLog, max_distance: usize) -> IdentityMap {
    build_identity_map_with_overrides(log, max_distance, &[])
}

pub fn build_identity_map_with_overrides(
    log: &EventLog,
    max_distance: usize,
    overrides: &[IdentityOverride],
) -> IdentityMap {
    let mut map = IdentityMap {
        max_distance,
        ..IdentityMap::default()
    };

    for row in overrides {
        let login_norm = normalize(&row.login);
        if login_norm.is_empty() {
            continue;
        }
        let id = map.register_login(&login_norm);
        let as_actor = RawActor {
            login: Some(row.login.clone()),
            email: row.email.clone(),
            name: row.name.clone(),
            ..RawActor::default()
        };
        map.index_attributes(&as_actor, &id);
    }

    // Pass 1: every actor with a login anchors a canonical id.
    for_each_actor(log, |actor| {
        if let Some(login) = actor.login.as_deref() {
            let login_norm = normalize(login);
            if !login_norm.is_empty() {
                let id = map.register_login(&login_norm);
                map.index_attributes(actor, &id);
            }
        }
    });

    // Pass 2: login-less actors, in log order, resolve or become anon.
    let mut pending: Vec<RawActor> = Vec::new();
    for_each_actor(log, |actor| {
        let no_login = actor
            .login
            .as_deref()
            .is_none_or(|l| normalize(l).is_empty());
        if no_login && !actor.is_empty() {
            pending.push(actor.clone());
        }
    });
    for actor in pending {
        if map.lookup(&actor).is_some() {
            continue;
        }
        let id = DeveloperId::new(format!("anon:{}", map.anon_counter));
        map.anon_counter += 1;
        map.index_attributes(&actor, &id);
    }

    map
}
