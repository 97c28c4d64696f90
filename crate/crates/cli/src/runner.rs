//! Deterministic worker-pool helpers.
//!
//! Work is split into contiguous chunks, one per worker, and the per-chunk
//! results are combined in chunk order, so the output is identical for any
//! fixed worker count. Monte Carlo workers draw from disjoint ChaCha
//! substreams indexed by worker.

use std::num::NonZeroUsize;

/// Clamp a requested worker count to at least 1.
pub fn effective_workers(requested: usize) -> usize {
    NonZeroUsize::new(requested).map(NonZeroUsize::get).unwrap_or(1)
}

/// Apply `f` to each job, split across `workers` threads in contiguous
/// chunks; results come back concatenated in job order.
pub fn map_chunked<J: Sync, T: Send>(
    workers: usize,
    jobs: &[J],
    f: impl Fn(&J) -> T + Sync,
) -> Vec<T> {
    let workers = effective_workers(workers).min(jobs.len().max(1));
    if workers <= 1 || jobs.len() <= 1 {
        return jobs.iter().map(f).collect();
    }
    let chunk = jobs.len().div_ceil(workers);
    let mut out: Vec<Vec<T>> = Vec::new();
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for slice in jobs.chunks(chunk) {
            let fref = &f;
            handles.push(scope.spawn(move || slice.iter().map(fref).collect::<Vec<T>>()));
        }
        for h in handles {
            out.push(h.join().expect("worker panicked"));
        }
    });
    out.into_iter().flatten().collect()
}

/// Sum `f` over the jobs with worker `i` taking indices `i, i+W, i+2W, ..`
/// (strided assignment balances heavily skewed per-job costs); per-worker
/// subtotals are added in worker order, and integer addition is
/// order-independent anyway, so the result never depends on `workers`.
pub fn sum_strided<J: Sync>(workers: usize, jobs: &[J], f: impl Fn(&J) -> u64 + Sync) -> u64 {
    let workers = effective_workers(workers).min(jobs.len().max(1));
    if workers <= 1 {
        return jobs.iter().map(f).sum();
    }
    let mut subtotals: Vec<u64> = Vec::with_capacity(workers);
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for w in 0..workers {
            let fref = &f;
            handles.push(scope.spawn(move || {
                jobs.iter().skip(w).step_by(workers).map(fref).sum::<u64>()
            }));
        }
        for h in handles {
            subtotals.push(h.join().expect("worker panicked"));
        }
    });
    subtotals.iter().sum()
}

/// Split `samples` into per-worker shares: equal base plus one extra for
/// the first `samples % workers` workers. Workers with zero samples are
/// kept so stream indices stay stable.
pub fn sample_shares(samples: u64, workers: usize) -> Vec<u64> {
    let w = effective_workers(workers) as u64;
    let base = samples / w;
    let extra = samples % w;
    (0..w).map(|i| base + u64::from(i < extra)).collect()
}
