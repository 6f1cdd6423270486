//! Data-parallel helpers with a sequential fallback.
//!
//! Every helper preserves input order in its output, so parallel and
//! sequential runs produce bit-identical results. The `parallel` feature
//! enables rayon; [`set_deterministic`] forces the sequential path at runtime.

use std::sync::atomic::{AtomicBool, Ordering};

static SEQUENTIAL: AtomicBool = AtomicBool::new(false);

/// Force (or release) sequential execution of all data-parallel loops.
pub fn set_deterministic(on: bool) {
    SEQUENTIAL.store(on, Ordering::SeqCst);
    #[cfg(feature = "parallel")]
    faer::set_global_parallelism(if on {
        faer::Par::Seq
    } else {
        faer::Par::rayon(0)
    });
    #[cfg(not(feature = "parallel"))]
    faer::set_global_parallelism(faer::Par::Seq);
}

/// Caps the number of worker threads. Call once, before any parallel work.
pub fn limit_threads(n: usize) -> crate::Result<()> {
    if n == 0 {
        return Err(crate::Error::InvalidConfig("thread count must be positive".into()));
    }
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| crate::Error::InvalidConfig(format!("thread pool: {e}")))?;
        if is_parallel() {
            faer::set_global_parallelism(faer::Par::rayon(n));
        }
    }
    Ok(())
}

/// Worker threads available to parallel loops.
pub fn threads() -> usize {
    #[cfg(feature = "parallel")]
    if is_parallel() {
        return rayon::current_num_threads();
    }
    1
}

/// Whether loops currently run on the rayon pool.
pub fn is_parallel() -> bool {
    cfg!(feature = "parallel") && !SEQUENTIAL.load(Ordering::SeqCst)
}

/// Ordered `map` over an index range.
pub fn map_range<T, F>(range: std::ops::Range<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if is_parallel() {
        use rayon::prelude::*;
        return range.into_par_iter().map(f).collect();
    }
    range.map(f).collect()
}

/// Ordered `map` over a slice.
pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    items.iter().map(f).collect()
}

/// Apply `f` to disjoint mutable chunks of `out`, passing the chunk index.
pub fn for_each_chunk_mut<T, F>(out: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    let chunk = chunk.max(1);
    #[cfg(feature = "parallel")]
    if is_parallel() {
        use rayon::prelude::*;
        out.par_chunks_mut(chunk)
            .enumerate()
            .for_each(|(i, c)| f(i, c));
        return;
    }
    out.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_range_preserves_order() {
        let v = map_range(0..1000, |i| i * i);
        assert!(v.iter().enumerate().all(|(i, &x)| x == i * i));
    }

    #[test]
    fn chunked_writes_cover_everything() {
        let mut out = vec![0usize; 103];
        for_each_chunk_mut(&mut out, 10, |c, s| {
            for (k, x) in s.iter_mut().enumerate() {
                *x = c * 10 + k;
            }
        });
        assert!(out.iter().enumerate().all(|(i, &x)| x == i));
    }
}
