//! Allocation accounting for a search over lazily evaluated arms.

use std::alloc::{GlobalAlloc, Layout, System};
use std::sync::atomic::{AtomicUsize, Ordering};

use mebandit::data::{gen_vectors, DatasetSpec, Distribution};
use mebandit::mips::{mips_topk, SearchParams};
use mebandit::Execution;

struct Counting;

static CURRENT: AtomicUsize = AtomicUsize::new(0);
static PEAK: AtomicUsize = AtomicUsize::new(0);

unsafe impl GlobalAlloc for Counting {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        let p = System.alloc(layout);
        if !p.is_null() {
            let now = CURRENT.fetch_add(layout.size(), Ordering::SeqCst) + layout.size();
            PEAK.fetch_max(now, Ordering::SeqCst);
        }
        p
    }

    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        System.dealloc(ptr, layout);
        CURRENT.fetch_sub(layout.size(), Ordering::SeqCst);
    }
}

#[global_allocator]
static ALLOC: Counting = Counting;

#[test]
fn search_memory_tracks_pulls_not_list_size() {
    let (n, dim) = (400, 20_000);
    let spec = DatasetSpec::new(Distribution::Gaussian, n, dim, 5);
    let vectors = gen_vectors(&spec, Execution::Sequential).unwrap();
    let q = gen_vectors(
        &DatasetSpec::new(Distribution::Gaussian, 1, dim, 6),
        Execution::Sequential,
    )
    .unwrap()
    .query(0);

    let base = CURRENT.load(Ordering::SeqCst);
    PEAK.store(base, Ordering::SeqCst);
    let params = SearchParams::new(5, 40.0, 0.1, 7).with_execution(Execution::Sequential);
    let out = mips_topk(&vectors, &q, &params).unwrap();
    let extra = PEAK.load(Ordering::SeqCst) - base;

    let materialized = n * dim * std::mem::size_of::<f64>();
    let pulls = out.trace.total_pulls as usize;
    assert!(
        pulls < n * dim / 4,
        "tolerance too small for this check: {pulls} pulls"
    );
    assert!(
        extra < materialized / 8,
        "peak extra {extra} bytes vs {materialized} for materialized rewards"
    );
    assert!(
        extra <= 128 * pulls + 512 * n + 64 * dim,
        "peak extra {extra} bytes for {pulls} pulls"
    );
}
