//! Hyperedge weight formulas.
//!
//! All time factors are ratios over the dataset window `[t_s, t_e)`, so
//! weights are invariant under shifting every timestamp by a constant and
//! under proportional rescaling of the window. Repeat interactions by the
//! same developer within one PR attenuate geometrically by `alpha` in
//! chronological order (the first event gets `alpha^0`).

use std::collections::BTreeMap;

use crate::identity::DeveloperId;

use super::HypergraphError;

fn window_span(t_s: i64, t_e: i64) -> Result<f64, HypergraphError> {
    if t_s >= t_e {
        return Err(HypergraphError::DegenerateWindow { t_s, t_e });
    }
    Ok((t_e - t_s) as f64)
}

fn time_fraction(t: i64, t_s: i64, span: f64) -> f64 {
    (t - t_s) as f64 / span
}

/// Creation-recency weight for a PR-Creator edge: `(t_i - t_s) / (t_e - t_s)`.
pub fn creator_weight(t_i: i64, t_s: i64, t_e: i64) -> Result<f64, HypergraphError> {
    let span = window_span(t_s, t_e)?;
    Ok(time_fraction(t_i, t_s, span))
}

/// PR-Committers edge weight: per commit, the attenuated product of the
/// linear time fraction and a logistic shrink on the commit's modified line
/// count, summed over each developer's commits in chronological order.
pub fn committer_edge_weight(
    commits_by_dev: &BTreeMap<DeveloperId, Vec<(i64, u32)>>,
    t_s: i64,
    t_e: i64,
    alpha: f64,
) -> Result<f64, HypergraphError> {
    let span = window_span(t_s, t_e)?;
    let mut total = 0.0;
    for commits in commits_by_dev.values() {
        let mut attenuation = 1.0;
        for &(timestamp, lines) in commits {
            let shrink = 1.0 / (1.0 + (0.01 * f64::from(lines)).exp());
            total += attenuation * time_fraction(timestamp, t_s, span) * shrink;
            attenuation *= alpha;
        }
    }
    Ok(total)
}

/// PR-Reviewers edge weight: attenuated sum of `exp(fraction - 1)` recency
/// factors over each developer's reviews in chronological order.
pub fn reviewer_edge_weight(
    times_by_dev: &BTreeMap<DeveloperId, Vec<i64>>,
    t_s: i64,
    t_e: i64,
    alpha: f64,
) -> Result<f64, HypergraphError> {
    let span = window_span(t_s, t_e)?;
    let mut total = 0.0;
    for times in times_by_dev.values() {
        let mut attenuation = 1.0;
        for &timestamp in times {
            total += attenuation * (time_fraction(timestamp, t_s, span) - 1.0).exp();
            attenuation *= alpha;
        }
    }
    Ok(total)
}

/// PR-Issue-Commenters and PR-Review-Commenters edges share the reviewer
/// functional form.
pub fn commenter_edge_weight(
    times_by_dev: &BTreeMap<DeveloperId, Vec<i64>>,
    t_s: i64,
    t_e: i64,
    alpha: f64,
) -> Result<f64, HypergraphError> {
    reviewer_edge_weight(times_by_dev, t_s, t_e, alpha)
}

/// Path similarity: longest common prefix over `/`-separated components,
/// normalized by the longer component count. In `[0, 1]`.
pub fn file_path_similarity(f_m: &str, f_n: &str) -> f64 {
    let a: Vec<&str> = f_m.split('/').collect();
    let b: Vec<&str> = f_n.split('/').collect();
    let max_len = a.len().max(b.len());
    if max_len == 0 || f_m.is_empty() || f_n.is_empty() {
        return 0.0;
    }
    let lcp = a.iter().zip(b.iter()).take_while(|(x, y)| x == y).count();
    lcp as f64 / max_len as f64
}

/// Mean pairwise path similarity between two file sets, damped by the
/// creation-time gap: zero when either set is empty.
pub fn path_set_similarity(
    paths_i: &[String],
    t_i: i64,
    paths_j: &[String],
    t_j: i64,
    t_s: i64,
    t_e: i64,
) -> Result<f64, HypergraphError> {
    let span = window_span(t_s, t_e)?;
    if paths_i.is_empty() || paths_j.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for f_m in paths_i {
        for f_n in paths_j {
            total += file_path_similarity(f_m, f_n);
        }
    }
    let mean = total / (paths_i.len() * paths_j.len()) as f64;
    let decay = (-((t_i - t_j).abs() as f64) / span).exp();
    Ok(mean * decay)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    fn dev(n: &str) -> DeveloperId {
        DeveloperId::new(n)
    }

    fn one_dev_times(times: &[i64]) -> BTreeMap<DeveloperId, Vec<i64>> {
        let mut m = BTreeMap::new();
        m.insert(dev("d"), times.to_vec());
        m
    }

    #[test]
    fn creator_weight_endpoints() {
        assert!((creator_weight(100, 0, 100).unwrap() - 1.0).abs() < TOL);
        assert!(creator_weight(0, 0, 100).unwrap().abs() < TOL);
        assert!((creator_weight(25, 0, 100).unwrap() - 0.25).abs() < TOL);
    }

    #[test]
    fn creator_weight_degenerate_window() {
        assert!(matches!(
            creator_weight(5, 10, 10),
            Err(HypergraphError::DegenerateWindow { .. })
        ));
        assert!(matches!(
            creator_weight(5, 11, 10),
            Err(HypergraphError::DegenerateWindow { .. })
        ));
    }

    #[test]
    fn committer_weight_single_commit() {
        let mut commits = BTreeMap::new();
        commits.insert(dev("d"), vec![(100, 0u32)]);
        let w = committer_edge_weight(&commits, 0, 100, 0.8).unwrap();
        assert!((w - 0.5).abs() < TOL);

        commits.insert(dev("d"), vec![(100, 100u32)]);
        let w = committer_edge_weight(&commits, 0, 100, 0.8).unwrap();
        assert!((w - 1.0 / (1.0 + 1.0f64.exp())).abs() < TOL);
        assert!((w - 0.268_941_421_369_995_1).abs() < 1e-12);
    }

    #[test]
    fn committer_weight_attenuates_repeat_commits() {
        let mut commits = BTreeMap::new();
        commits.insert(dev("d"), vec![(100, 0u32), (100, 0u32)]);
        let w = committer_edge_weight(&commits, 0, 100, 0.8).unwrap();
        assert!((w - 0.9).abs() < TOL);
    }

    #[test]
    fn committer_weight_sums_over_developers() {
        let mut commits = BTreeMap::new();
        commits.insert(dev("a"), vec![(100, 0u32)]);
        commits.insert(dev("b"), vec![(100, 0u32)]);
        let w = committer_edge_weight(&commits, 0, 100, 0.8).unwrap();
        assert!((w - 1.0).abs() < TOL);
    }

    #[test]
    fn reviewer_weight_endpoints() {
        let w = reviewer_edge_weight(&one_dev_times(&[100]), 0, 100, 0.8).unwrap();
        assert!((w - 1.0).abs() < TOL);
        let w = reviewer_edge_weight(&one_dev_times(&[0]), 0, 100, 0.8).unwrap();
        assert!((w - (-1.0f64).exp()).abs() < TOL);
        assert!((w - 0.367_879_441_171_442_33).abs() < 1e-12);
    }

    #[test]
    fn reviewer_weight_attenuated_sum() {
        let w = reviewer_edge_weight(&one_dev_times(&[100, 100]), 0, 100, 0.8).unwrap();
        assert!((w - 1.8).abs() < TOL);
    }

    #[test]
    fn commenter_weight_matches_reviewer_form() {
        let w = commenter_edge_weight(&one_dev_times(&[100]), 0, 100, 0.5).unwrap();
        assert!((w - 1.0).abs() < TOL);
        let w = commenter_edge_weight(&one_dev_times(&[0]), 0, 100, 0.5).unwrap();
        assert!((w - (-1.0f64).exp()).abs() < TOL);
        let w = commenter_edge_weight(&one_dev_times(&[100, 100, 100]), 0, 100, 0.5).unwrap();
        assert!((w - 1.75).abs() < TOL);
    }

    #[test]
    fn path_similarity_shared_prefix() {
        let s = file_path_similarity("a/b/c.txt", "a/b/d.txt");
        assert!((s - 2.0 / 3.0).abs() < TOL);
        assert!((file_path_similarity("x/y/z", "x/y/z") - 1.0).abs() < TOL);
        assert!(file_path_similarity("x/y.c", "a/b.c").abs() < TOL);
    }

    #[test]
    fn path_similarity_different_depths() {
        let s = file_path_similarity("a/b", "a/b/c/d");
        assert!((s - 0.5).abs() < TOL);
    }

    #[test]
    fn pr_similarity_empty_set_is_zero() {
        let some = vec!["a/b/c".to_string()];
        let none: Vec<String> = vec![];
        assert_eq!(
            path_set_similarity(&none, 5, &some, 5, 0, 100).unwrap(),
            0.0
        );
        assert_eq!(
            path_set_similarity(&some, 5, &none, 5, 0, 100).unwrap(),
            0.0
        );
    }

    #[test]
    fn pr_similarity_identical_same_instant() {
        let files = vec!["a/b/c".to_string()];
        let s = path_set_similarity(&files, 50, &files, 50, 0, 100).unwrap();
        assert!((s - 1.0).abs() < TOL);
    }

    #[test]
    fn pr_similarity_full_window_gap_decays_to_inverse_e() {
        let files = vec!["a/b/c".to_string()];
        let s = path_set_similarity(&files, 0, &files, 100, 0, 100).unwrap();
        assert!((s - (-1.0f64).exp()).abs() < TOL);
    }

    #[test]
    fn weights_are_translation_invariant() {
        let shift = 1_000_000;
        let w1 = creator_weight(25, 0, 100).unwrap();
        let w2 = creator_weight(25 + shift, shift, 100 + shift).unwrap();
        assert_eq!(w1, w2);

        let a = reviewer_edge_weight(&one_dev_times(&[40, 70]), 0, 100, 0.8).unwrap();
        let b = reviewer_edge_weight(
            &one_dev_times(&[40 + shift, 70 + shift]),
            shift,
            100 + shift,
            0.8,
        )
        .unwrap();
        assert_eq!(a, b);
    }
}
