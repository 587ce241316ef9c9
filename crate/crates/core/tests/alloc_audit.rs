//! Criterion 13: the solver's live vector storage is O(max(m, d)), not
//! O(iterations). A counting allocator shows that the number of vector-sized
//! allocations made during a run does not grow with the iteration budget.

use opnorm::linop::FnOperator;
use opnorm::sampling::RngStream;
use opnorm::solver::{run, RunConfig};
use std::alloc::{GlobalAlloc, Layout, System};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};

const DIM: usize = 64;
const VECTOR_BYTES: usize = DIM * std::mem::size_of::<f64>();

static COUNTING: AtomicBool = AtomicBool::new(false);
static LARGE_ALLOCS: AtomicUsize = AtomicUsize::new(0);

struct CountingAllocator;

unsafe impl GlobalAlloc for CountingAllocator {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        if COUNTING.load(Ordering::Relaxed) && layout.size() >= VECTOR_BYTES {
            LARGE_ALLOCS.fetch_add(1, Ordering::Relaxed);
        }
        unsafe { System.alloc(layout) }
    }

    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        unsafe { System.dealloc(ptr, layout) }
    }
}

#[global_allocator]
static ALLOCATOR: CountingAllocator = CountingAllocator;

fn large_allocs_during_run(max_iters: usize) -> usize {
    // a diagonal map with a spread-out spectrum; allocation-free apply
    let op = FnOperator::new(DIM, DIM, |v: &[f64], out: &mut [f64]| {
        for (i, (vi, oi)) in v.iter().zip(out.iter_mut()).enumerate() {
            *oi = (1.0 + i as f64 / DIM as f64) * vi;
        }
    });
    let cfg = RunConfig {
        eps: 1e-300,
        max_iters: Some(max_iters),
        record_trace: false,
        ..Default::default()
    };
    let mut rng = RngStream::from_seed(7);
    LARGE_ALLOCS.store(0, Ordering::SeqCst);
    COUNTING.store(true, Ordering::SeqCst);
    let report = run(&op, &cfg, &mut rng).unwrap();
    COUNTING.store(false, Ordering::SeqCst);
    assert!(report.norm_estimate.is_finite());
    LARGE_ALLOCS.load(Ordering::SeqCst)
}

#[test]
fn criterion_13_storage_audit() {
    let short = large_allocs_during_run(100);
    let long = large_allocs_during_run(2_000);
    assert_eq!(
        short, long,
        "vector allocations grew with the iteration budget ({short} vs {long})"
    );
    // v0, v, av, ax, the sampling buffer, and the returned report: a handful
    // of vectors in total, never per-iteration
    assert!(short <= 8, "run made {short} vector-sized allocations");
    println!("criterion 13 (storage audit): PASS ({short} vector allocations for any budget)");
}
