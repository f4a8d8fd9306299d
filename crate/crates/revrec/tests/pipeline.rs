//! Cross-module integration and property tests: serialization round-trips,
//! edit-distance metric laws, cleaning idempotence, weight invariances, and
//! solver convergence behavior.

use std::collections::BTreeSet;

use proptest::prelude::*;

use revrec::events::{
    parse_event_log, write_event_log, ActorType, CommentEvent, CommentKind, CommitEvent, EventLog,
    FileChange, PullRequest, RawActor, ReviewEvent,
};
use revrec::hypergraph::{
    build_hypergraph, build_hypergraph_masked, reviewer_edge_weight, HyperparamConfig, RelationMask,
};
use revrec::identity::{build_identity_map, levenshtein, DeveloperId};
use revrec::preprocess::{apply_filters, FilterConfig};
use revrec::ranker::{solve_ranking, QueryVector, SolverConfig};
use revrec::testkit::{generate_log, random_system, SplitMix64, SynthParams};

fn arb_actor() -> impl Strategy<Value = RawActor> {
    (
        proptest::option::of("[a-z]{1,6}"),
        proptest::option::of("[a-z]{1,6}@x\\.com"),
        proptest::option::of("[A-Za-z]{1,10}( [A-Za-z]{1,10})?"),
        prop_oneof![
            Just(ActorType::User),
            Just(ActorType::Bot),
            Just(ActorType::Unknown)
        ],
    )
        .prop_map(|(login, email, name, actor_type)| RawActor {
            login,
            email,
            name,
            actor_type,
        })
}

fn arb_file() -> impl Strategy<Value = FileChange> {
    ("[a-z]{1,5}(/[a-z]{1,5}){0,3}", 0u32..400).prop_map(|(path, lines_changed)| FileChange {
        path,
        lines_changed,
    })
}

fn arb_pr(index: usize) -> impl Strategy<Value = PullRequest> {
    let created_at = 1_000 + index as i64 * 10_000;
    (
        arb_actor(),
        proptest::option::of(created_at + 1..created_at + 9_000),
        proptest::collection::vec(arb_file(), 0..4),
        proptest::collection::vec(
            (
                arb_actor(),
                created_at..created_at + 9_000,
                proptest::collection::vec(arb_file(), 0..3),
            ),
            0..3,
        ),
        proptest::collection::vec((arb_actor(), created_at..created_at + 9_000), 0..3),
        proptest::collection::vec(
            (
                arb_actor(),
                created_at..created_at + 9_000,
                prop_oneof![Just(CommentKind::Issue), Just(CommentKind::ReviewComment)],
            ),
            0..3,
        ),
    )
        .prop_map(
            move |(creator, merged_at, files, commits, reviews, comments)| PullRequest {
                pr_id: format!("pr{index:04}"),
                created_at,
                creator,
                merged_at,
                files,
                commits: commits
                    .into_iter()
                    .map(|(author, timestamp, files)| CommitEvent {
                        author,
                        timestamp,
                        files,
                    })
                    .collect(),
                reviews: reviews
                    .into_iter()
                    .map(|(reviewer, timestamp)| ReviewEvent {
                        reviewer,
                        timestamp,
                    })
                    .collect(),
                comments: {
                    // wire-canonical order: issue comments before review
                    // comments
                    let mut events: Vec<CommentEvent> = comments
                        .into_iter()
                        .map(|(commenter, timestamp, kind)| CommentEvent {
                            commenter,
                            timestamp,
                            kind,
                        })
                        .collect();
                    events.sort_by_key(|c| c.kind == CommentKind::ReviewComment);
                    events
                },
            },
        )
}

fn arb_log() -> impl Strategy<Value = EventLog> {
    (0usize..8)
        .prop_flat_map(|n| {
            let prs: Vec<_> = (0..n).map(arb_pr).collect();
            (Just(n), prs)
        })
        .prop_map(|(_, prs)| EventLog {
            project: "prop".to_string(),
            t_start: 500,
            t_end: 200_000,
            prs,
        })
}

proptest! {
    #[test]
    fn round_trip_is_identity_on_valid_logs(log in arb_log()) {
        log.validate().expect("generated log is valid");
        let mut bytes = Vec::new();
        write_event_log(&log, &mut bytes).unwrap();
        let back = parse_event_log(&bytes[..], "prop").unwrap();
        prop_assert_eq!(back, log);
    }

    #[test]
    fn parsing_is_deterministic(log in arb_log()) {
        let mut bytes = Vec::new();
        write_event_log(&log, &mut bytes).unwrap();
        let a = parse_event_log(&bytes[..], "prop").unwrap();
        let b = parse_event_log(&bytes[..], "prop").unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn levenshtein_is_a_metric(a in "[a-c]{0,6}", b in "[a-c]{0,6}", c in "[a-c]{0,6}") {
        prop_assert_eq!(levenshtein(&a, &b), levenshtein(&b, &a));
        prop_assert_eq!(levenshtein(&a, &a), 0);
        if levenshtein(&a, &b) == 0 {
            prop_assert_eq!(&a, &b);
        }
        prop_assert!(levenshtein(&a, &c) <= levenshtein(&a, &b) + levenshtein(&b, &c));
    }

    #[test]
    fn filtering_is_idempotent_and_monotone(log in arb_log()) {
        let ids = build_identity_map(&log, 2);
        let cfg = FilterConfig::default();
        let (once, first) = apply_filters(&log, &ids, &cfg);
        let (twice, second) = apply_filters(&once, &ids, &cfg);
        prop_assert_eq!(&once, &twice);
        prop_assert!(second.is_clean());
        prop_assert!(first.events_out <= first.events_in);
        prop_assert!(first.prs_out <= first.prs_in);
        prop_assert_eq!(
            first.events_in - first.events_out,
            first.total_events_removed()
        );
        for pr in &once.prs {
            prop_assert!(!pr.files.is_empty());
            prop_assert!(!pr.reviews.is_empty());
        }
    }

    #[test]
    fn reviewer_weight_invariant_under_window_scaling(
        times in proptest::collection::vec(0i64..=1000, 1..5),
        scale in 2i64..50,
    ) {
        let mut sorted = times.clone();
        sorted.sort_unstable();
        let by_dev = |ts: Vec<i64>| {
            let mut m = std::collections::BTreeMap::new();
            m.insert(DeveloperId::new("d"), ts);
            m
        };
        let base = reviewer_edge_weight(&by_dev(sorted.clone()), 0, 1000, 0.8).unwrap();
        let stretched: Vec<i64> = sorted.iter().map(|t| t * scale).collect();
        let scaled = reviewer_edge_weight(&by_dev(stretched), 0, 1000 * scale, 0.8).unwrap();
        prop_assert!((base - scaled).abs() < 1e-9);
    }

    #[test]
    fn creator_and_committer_weights_invariant_under_window_scaling(
        t in 0i64..=1000,
        lines in 0u32..500,
        scale in 2i64..50,
    ) {
        let base = revrec::hypergraph::creator_weight(t, 0, 1000).unwrap();
        let scaled = revrec::hypergraph::creator_weight(t * scale, 0, 1000 * scale).unwrap();
        prop_assert!((base - scaled).abs() < 1e-9);

        let commits = |ts: i64| {
            let mut m = std::collections::BTreeMap::new();
            m.insert(DeveloperId::new("d"), vec![(ts, lines)]);
            m
        };
        let base =
            revrec::hypergraph::committer_edge_weight(&commits(t), 0, 1000, 0.8).unwrap();
        let scaled =
            revrec::hypergraph::committer_edge_weight(&commits(t * scale), 0, 1000 * scale, 0.8)
                .unwrap();
        prop_assert!((base - scaled).abs() < 1e-9);
    }
}

#[test]
fn residual_two_norm_is_monotone_under_iteration() {
    // r_{k+1} = mu * A * r_k, and the spectral norm of A is at most 1, so
    // the Euclidean residual norm contracts by at least mu per step.
    let mut rng = SplitMix64::new(77);
    for _ in 0..20 {
        let system = random_system(&mut rng, 40, 60);
        let n = system.vertex_count();
        let mut y = vec![0.0; n];
        y[0] = 1.0;
        for mu in [0.5, 0.9, 0.99] {
            let mut f = y.clone();
            let mut buf = vec![0.0; n];
            let mut prev_norm = f64::INFINITY;
            for _ in 0..60 {
                system.adjacency().apply(&f, &mut buf);
                let mut norm_sq = 0.0;
                for i in 0..n {
                    let next = mu * buf[i] + y[i];
                    let r = f[i] - next;
                    norm_sq += r * r;
                    buf[i] = next;
                }
                let norm = norm_sq.sqrt();
                if norm <= 1e-13 {
                    // numerical floor: below this the exact sequence is still
                    // monotone but float rounding dominates
                    break;
                }
                assert!(
                    norm <= prev_norm * (1.0 + 1e-12),
                    "residual grew: {norm} > {prev_norm} (mu {mu})"
                );
                prev_norm = norm;
                std::mem::swap(&mut f, &mut buf);
            }
        }
    }
}

#[test]
fn solver_residual_contract_holds_at_default_tolerance() {
    let mut rng = SplitMix64::new(5);
    for _ in 0..10 {
        let system = random_system(&mut rng, 30, 40);
        let query = QueryVector::one_hot(&system, "pr0").unwrap();
        let solver = SolverConfig::default();
        let result = solve_ranking(&system, &query, 0.9, &solver).unwrap();
        // recompute || (I - mu A) f - y ||_inf independently
        let n = system.vertex_count();
        let mut af = vec![0.0; n];
        system.adjacency().apply(&result.f_star, &mut af);
        let mut residual: f64 = 0.0;
        for ((f, a), y) in result.f_star.iter().zip(&af).zip(query.values()) {
            residual = residual.max((f - 0.9 * a - y).abs());
        }
        assert!(
            residual <= solver.tol,
            "reported {}, actual {residual}",
            result.residual
        );
        assert!(result.f_star.iter().all(|v| v.is_finite()));
    }
}

#[test]
fn planted_log_full_pipeline_recovers_reviewers() {
    let params = SynthParams {
        seed: 3,
        n_devs: 12,
        n_prs: 150,
        n_subtrees: 6,
        months: 14,
        reviewer_affinity: 1.0,
        committer_affinity: 0.0,
    };
    let log = generate_log(&params).unwrap();
    let ids = build_identity_map(&log, 2);
    let (clean, report) = apply_filters(&log, &ids, &FilterConfig::default());
    assert!(report.is_clean());

    let report = revrec::eval::run_evaluation(
        &clean,
        &ids,
        &HyperparamConfig::default(),
        &SolverConfig::default(),
        &RelationMask::default(),
        30,
        &revrec::eval::DEFAULT_KS,
    )
    .unwrap();
    let macro_avg = report.macro_avg.expect("scored rounds");
    assert!(macro_avg.acc_at(1).unwrap() > 0.8, "{:?}", macro_avg);
}

#[test]
fn masked_vertices_never_appear_in_any_relation_subset() {
    let params = SynthParams {
        seed: 8,
        n_devs: 8,
        n_prs: 60,
        n_subtrees: 4,
        months: 3,
        reviewer_affinity: 0.8,
        committer_affinity: 0.6,
    };
    let log = generate_log(&params).unwrap();
    let ids = build_identity_map(&log, 2);
    let cfg = HyperparamConfig::default();
    let full = build_hypergraph(&log, &ids, &cfg).unwrap();
    let full_vertices: BTreeSet<String> = full.vertices().iter().map(|v| v.to_string()).collect();

    let masks = [
        (
            "re",
            RelationMask {
                include_re: false,
                ..Default::default()
            },
        ),
        (
            "ct",
            RelationMask {
                include_ct: false,
                ..Default::default()
            },
        ),
        (
            "ic",
            RelationMask {
                include_ic: false,
                ..Default::default()
            },
        ),
        (
            "rc",
            RelationMask {
                include_rc: false,
                ..Default::default()
            },
        ),
        (
            "prpr",
            RelationMask {
                include_prpr: false,
                ..Default::default()
            },
        ),
    ];
    for (name, mask) in masks {
        let system = build_hypergraph_masked(&log, &ids, &cfg, &mask).unwrap();
        assert!(system.edge_count() <= full.edge_count(), "mask {name}");
        for vertex in system.vertices() {
            assert!(
                full_vertices.contains(&vertex.to_string()),
                "mask {name} invented vertex {vertex}"
            );
        }
    }
}
