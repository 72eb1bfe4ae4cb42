//! Deterministic worker partitioning for exhaustive sweeps.
//!
//! A sweep over `[0, total)` is split into `workers` contiguous chunks; each
//! worker folds its chunk into a private accumulator and the results are
//! combined by integer addition. Addition is associative and commutative, so
//! the total is bit-identical for any worker count.

/// Contiguous chunk boundaries covering `[0, total)`.
pub fn chunk_bounds(total: u64, workers: usize) -> Vec<(u64, u64)> {
    let w = workers.max(1) as u64;
    let w = w.min(total.max(1));
    let base = total / w;
    let extra = total % w;
    let mut out = Vec::with_capacity(w as usize);
    let mut start = 0u64;
    for i in 0..w {
        let len = base + if i < extra { 1 } else { 0 };
        out.push((start, start + len));
        start += len;
    }
    out
}

/// Sums `f(i)` for `i` in `[0, total)` using up to `workers` threads.
///
/// `f` receives the index range of a chunk and returns that chunk's vector of
/// accumulators (all chunks must return the same length). Chunk results are
/// added componentwise in chunk order.
pub fn partitioned_sum<F>(total: u64, workers: usize, buckets: usize, f: F) -> Vec<u64>
where
    F: Fn(u64, u64) -> Vec<u64> + Sync,
{
    let chunks = chunk_bounds(total, workers);
    let partials: Vec<Vec<u64>> = if chunks.len() <= 1 {
        chunks.iter().map(|&(lo, hi)| f(lo, hi)).collect()
    } else {
        let f = &f;
        std::thread::scope(|scope| {
            let handles: Vec<_> = chunks
                .iter()
                .map(|&(lo, hi)| scope.spawn(move || f(lo, hi)))
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        })
    };
    let mut out = vec![0u64; buckets];
    for part in partials {
        assert_eq!(part.len(), buckets);
        for (slot, v) in out.iter_mut().zip(part) {
            *slot += v;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunks_cover_range() {
        for total in [0u64, 1, 7, 100, 101] {
            for workers in [1usize, 2, 3, 8, 200] {
                let chunks = chunk_bounds(total, workers);
                let mut expect = 0u64;
                for (lo, hi) in &chunks {
                    assert_eq!(*lo, expect);
                    assert!(hi >= lo);
                    expect = *hi;
                }
                assert_eq!(expect, total);
            }
        }
    }

    #[test]
    fn sum_independent_of_worker_count() {
        let count = |lo: u64, hi: u64| {
            let mut even = 0u64;
            let mut odd = 0u64;
            for i in lo..hi {
                if i % 2 == 0 {
                    even += 1;
                } else {
                    odd += 1;
                }
            }
            vec![even, odd]
        };
        let baseline = partitioned_sum(10_001, 1, 2, count);
        for workers in [2, 3, 8] {
            assert_eq!(partitioned_sum(10_001, workers, 2, count), baseline);
        }
        assert_eq!(baseline, vec![5001, 5000]);
    }
}
