//! Wall-clock and allocation high-water measurement.
//!
//! Peak memory needs [`TrackingAllocator`] installed as the global
//! allocator of the final binary; otherwise [`measure_resources`] reports
//! `None` for it. Counters are per thread, so a measurement only sees
//! allocations made on the thread that runs the thunk.

use std::alloc::{GlobalAlloc, Layout, System};
use std::cell::Cell;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

/// How peak memory is measured; recorded in report manifests.
pub const MEMORY_METHOD: &str = "per-thread allocation high-water mark during synthesis (best effort)";

static INSTALLED: AtomicBool = AtomicBool::new(false);

thread_local! {
    static CURRENT: Cell<i64> = const { Cell::new(0) };
    static PEAK: Cell<i64> = const { Cell::new(0) };
}

fn record(delta: i64) {
    let _ = CURRENT.try_with(|c| {
        let v = c.get() + delta;
        c.set(v);
        let _ = PEAK.try_with(|p| {
            if v > p.get() {
                p.set(v);
            }
        });
    });
}

/// The system allocator plus per-thread byte counters.
///
/// ```ignore
/// #[global_allocator]
/// static ALLOC: dpgraph::harness::TrackingAllocator = dpgraph::harness::TrackingAllocator;
/// ```
pub struct TrackingAllocator;

unsafe impl GlobalAlloc for TrackingAllocator {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        let p = unsafe { System.alloc(layout) };
        if !p.is_null() {
            if !INSTALLED.load(Ordering::Relaxed) {
                INSTALLED.store(true, Ordering::Relaxed);
            }
            record(layout.size() as i64);
        }
        p
    }

    unsafe fn alloc_zeroed(&self, layout: Layout) -> *mut u8 {
        let p = unsafe { System.alloc_zeroed(layout) };
        if !p.is_null() {
            record(layout.size() as i64);
        }
        p
    }

    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        unsafe { System.dealloc(ptr, layout) };
        record(-(layout.size() as i64));
    }

    unsafe fn realloc(&self, ptr: *mut u8, layout: Layout, new_size: usize) -> *mut u8 {
        let p = unsafe { System.realloc(ptr, layout, new_size) };
        if !p.is_null() {
            record(new_size as i64 - layout.size() as i64);
        }
        p
    }
}

pub fn tracking_installed() -> bool {
    INSTALLED.load(Ordering::Relaxed)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measured<T> {
    pub value: T,
    pub wall_s: f64,
    /// Bytes allocated above the starting level at the high-water mark.
    pub peak_bytes: Option<u64>,
}

/// Runs `f`, timing it on the monotonic clock and tracking the allocation
/// high-water mark on this thread. Nested calls are allowed; the outer
/// peak still sees the inner allocations.
pub fn measure_resources<T>(f: impl FnOnce() -> T) -> Measured<T> {
    let base = CURRENT.with(Cell::get);
    let outer_peak = PEAK.with(|p| p.replace(base));
    let start = Instant::now();
    let value = f();
    let wall_s = start.elapsed().as_secs_f64();
    let peak = PEAK.with(Cell::get);
    PEAK.with(|p| p.set(outer_peak.max(peak)));
    Measured {
        value,
        wall_s,
        peak_bytes: tracking_installed().then(|| (peak - base).max(0) as u64),
    }
}
