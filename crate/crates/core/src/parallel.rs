//! Deterministic fan-out over independent tasks.

use std::thread;

/// Evaluates `f(i)` for `i in 0..len` on up to `jobs` threads.
///
/// Work is split into contiguous static blocks by index and results are
/// returned in index order, so the output never depends on `jobs`.
pub fn map_indexed<T, F>(len: usize, jobs: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let jobs = jobs.clamp(1, len.max(1));
    if jobs == 1 {
        return (0..len).map(&f).collect();
    }
    let block = len.div_ceil(jobs);
    let f = &f;
    thread::scope(|scope| {
        let handles: Vec<_> = (0..jobs)
            .map(|j| {
                let lo = (j * block).min(len);
                let hi = ((j + 1) * block).min(len);
                scope.spawn(move || (lo..hi).map(f).collect::<Vec<T>>())
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker panicked"))
            .collect()
    })
}

/// Number of hardware threads, falling back to 1.
pub fn available_jobs() -> usize {
    thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_independent_of_width() {
        let f = |i: usize| (i as f64).sqrt().sin();
        let one = map_indexed(37, 1, f);
        for jobs in [2, 3, 8, 64] {
            assert_eq!(map_indexed(37, jobs, f), one);
        }
        assert!(map_indexed(0, 4, f).is_empty());
    }
}
