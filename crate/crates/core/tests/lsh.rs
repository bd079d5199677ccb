use std::collections::BTreeSet;

use mebandit::baselines::{naive_topk, LshIndex};
use mebandit::data::{gen_vectors, DatasetSpec, Distribution};
use mebandit::metrics::precision;
use mebandit::Execution;

fn candidate_set(index: &LshIndex, q: &mebandit::Query) -> BTreeSet<usize> {
    index.candidates(q).into_iter().collect()
}

#[test]
fn candidates_grow_with_tables_and_shrink_with_bits() {
    let vectors = gen_vectors(
        &DatasetSpec::new(Distribution::Gaussian, 300, 64, 1),
        Execution::Parallel,
    )
    .unwrap();
    let queries = gen_vectors(
        &DatasetSpec::new(Distribution::Gaussian, 5, 64, 2),
        Execution::Parallel,
    )
    .unwrap();
    let full = LshIndex::build(&vectors, 12, 20, 3, Execution::Parallel).unwrap();
    for i in 0..queries.rows() {
        let q = queries.query(i);
        for bits in [1, 4, 8, 12] {
            let mut prev = BTreeSet::new();
            for tables in [1, 2, 5, 10, 20] {
                let cur = candidate_set(&full.restrict(bits, tables).unwrap(), &q);
                assert!(prev.is_subset(&cur), "bits {bits} tables {tables}");
                prev = cur;
            }
        }
        for tables in [1, 5, 20] {
            let mut prev: Option<BTreeSet<usize>> = None;
            for bits in 1..=12 {
                let cur = candidate_set(&full.restrict(bits, tables).unwrap(), &q);
                if let Some(p) = &prev {
                    assert!(cur.is_subset(p), "bits {bits} tables {tables}");
                }
                prev = Some(cur);
            }
        }
    }
}

#[test]
fn more_tables_do_not_lose_recall() {
    let vectors = gen_vectors(
        &DatasetSpec::new(Distribution::Gaussian, 500, 100, 4),
        Execution::Parallel,
    )
    .unwrap();
    let queries = gen_vectors(
        &DatasetSpec::new(Distribution::Gaussian, 10, 100, 5),
        Execution::Parallel,
    )
    .unwrap();
    let full = LshIndex::build(&vectors, 8, 50, 6, Execution::Parallel).unwrap();
    let one = full.restrict(8, 1).unwrap();
    let (mut p1, mut p50) = (0.0, 0.0);
    for i in 0..queries.rows() {
        let q = queries.query(i);
        let truth = naive_topk(&vectors, &q, 5, Execution::Sequential)
            .unwrap()
            .ids;
        let c1 = candidate_set(&one, &q);
        let c50 = candidate_set(&full, &q);
        let recall = |c: &BTreeSet<usize>| truth.iter().filter(|id| c.contains(id)).count();
        assert!(recall(&c50) >= recall(&c1));
        p1 += precision(&one.query(&vectors, &q, 5).unwrap().ids, &truth, 5).unwrap();
        p50 += precision(&full.query(&vectors, &q, 5).unwrap().ids, &truth, 5).unwrap();
    }
    assert!(
        p50 >= p1,
        "precision with 50 tables {p50} below 1 table {p1}"
    );
}

#[test]
fn op_count_audit() {
    let vectors = gen_vectors(
        &DatasetSpec::new(Distribution::Uniform, 1000, 1000, 7),
        Execution::Parallel,
    )
    .unwrap();
    let q = gen_vectors(
        &DatasetSpec::new(Distribution::Uniform, 1, 1000, 8),
        Execution::Parallel,
    )
    .unwrap()
    .query(0);
    let index = LshIndex::build(&vectors, 8, 16, 9, Execution::Parallel).unwrap();
    let out = index.query(&vectors, &q, 10).unwrap();
    let candidates = index.candidates(&q).len();
    assert_eq!(out.candidates, candidates);
    assert_eq!(out.ops, (16 * 8 * 1001 + candidates * 1000) as u64);
    assert_eq!(out.ids.len(), 10);
    assert_eq!(out.ids.iter().collect::<BTreeSet<_>>().len(), 10);
}

#[test]
fn build_is_independent_of_execution_mode() {
    let vectors = gen_vectors(
        &DatasetSpec::new(Distribution::Gaussian, 200, 32, 10),
        Execution::Parallel,
    )
    .unwrap();
    let q = gen_vectors(
        &DatasetSpec::new(Distribution::Gaussian, 1, 32, 11),
        Execution::Parallel,
    )
    .unwrap()
    .query(0);
    let a = LshIndex::build(&vectors, 6, 4, 12, Execution::Sequential).unwrap();
    let b = LshIndex::build(&vectors, 6, 4, 12, Execution::Parallel).unwrap();
    assert_eq!(a.query_keys(&q), b.query_keys(&q));
    assert_eq!(
        a.query(&vectors, &q, 5).unwrap(),
        b.query(&vectors, &q, 5).unwrap()
    );
}
