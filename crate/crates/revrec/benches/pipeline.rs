//! Pipeline benchmarks for the hypergraph build (the O(n^2) similarity
//! search dominates), the fixed-point solver, and a full evaluation round.
//!
//! Benchmark ids carry the execution mode, so results from the default
//! (rayon) build and from `cargo bench --no-default-features` (sequential)
//! land side by side in the same criterion report:
//!
//! ```text
//! cargo bench -p revrec
//! cargo bench -p revrec --no-default-features
//! ```

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use revrec::eval::{run_evaluation, DEFAULT_KS};
use revrec::hypergraph::{build_hypergraph, HyperparamConfig, RelationMask};
use revrec::identity::build_identity_map;
use revrec::preprocess::{apply_filters, FilterConfig};
use revrec::ranker::{recommend, solve_ranking, QueryVector, SolverConfig};
use revrec::testkit::{generate_log, SynthParams};

const MODE: &str = if cfg!(feature = "parallel") {
    "parallel"
} else {
    "sequential"
};

fn planted(n_prs: usize, months: u32) -> (revrec::events::EventLog, revrec::identity::IdentityMap) {
    let log = generate_log(&SynthParams {
        seed: 99,
        n_devs: 30,
        n_prs,
        n_subtrees: 10,
        months,
        reviewer_affinity: 0.8,
        committer_affinity: 0.5,
    })
    .unwrap();
    let ids = build_identity_map(&log, 2);
    let (clean, _) = apply_filters(&log, &ids, &FilterConfig::default());
    (clean, ids)
}

fn bench_build(c: &mut Criterion) {
    let mut group = c.benchmark_group("build_hypergraph");
    group.sample_size(10);
    for n_prs in [400usize, 1200] {
        let (log, ids) = planted(n_prs, 14);
        let cfg = HyperparamConfig::default();
        group.bench_with_input(BenchmarkId::new(MODE, n_prs), &n_prs, |bencher, _| {
            bencher.iter(|| build_hypergraph(&log, &ids, &cfg).unwrap());
        });
    }
    group.finish();
}

fn bench_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_ranking");
    group.sample_size(20);
    let (log, ids) = planted(1200, 14);
    let system = build_hypergraph(&log, &ids, &HyperparamConfig::default()).unwrap();
    let seed_pr = &log.prs[0].pr_id;
    let query = QueryVector::one_hot(&system, seed_pr).unwrap();
    let solver = SolverConfig::default();
    group.bench_function(BenchmarkId::new(MODE, system.vertex_count()), |bencher| {
        bencher.iter(|| solve_ranking(&system, &query, 0.9, &solver).unwrap());
    });
    group.finish();
}

fn bench_query(c: &mut Criterion) {
    let mut group = c.benchmark_group("recommend_query");
    group.sample_size(10);
    let (log, ids) = planted(800, 14);
    let cfg = HyperparamConfig::default();
    let mask = RelationMask::default();
    let solver = SolverConfig::default();
    let query_pr = log.prs.last().unwrap().clone();
    let mut training = log.clone();
    training
        .prs
        .retain(|pr| pr.created_at < query_pr.created_at);
    training.t_end = query_pr.created_at;
    let system = build_hypergraph(&training, &ids, &cfg).unwrap();
    group.bench_function(BenchmarkId::new(MODE, training.prs.len()), |bencher| {
        bencher.iter(|| {
            recommend(
                &system,
                &ids,
                &query_pr,
                &cfg,
                &mask,
                &solver,
                5,
                query_pr.created_at,
            )
            .unwrap()
        });
    });
    group.finish();
}

fn bench_evaluation_round(c: &mut Criterion) {
    let mut group = c.benchmark_group("evaluation_round");
    group.sample_size(10);
    let (log, ids) = planted(400, 13);
    let cfg = HyperparamConfig::default();
    let solver = SolverConfig::default();
    let mask = RelationMask::default();
    group.bench_function(BenchmarkId::new(MODE, log.prs.len()), |bencher| {
        bencher.iter(|| run_evaluation(&log, &ids, &cfg, &solver, &mask, 1, &DEFAULT_KS).unwrap());
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_build,
    bench_solve,
    bench_query,
    bench_evaluation_round
);
criterion_main!(benches);
