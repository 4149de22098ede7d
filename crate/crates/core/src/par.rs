//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the loops below run on the rayon pool, unless
//! [`set_sequential`] has been switched on at runtime (used by the benches to
//! compare both paths in one binary). Reductions are always evaluated over
//! fixed-size chunks in index order, so the floating-point result does not
//! depend on the number of threads.

use std::sync::atomic::{AtomicBool, Ordering};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

static FORCE_SEQUENTIAL: AtomicBool = AtomicBool::new(false);

/// Chunk length for deterministic reductions.
pub const REDUCTION_CHUNK: usize = 4096;

/// Below this many items the parallel loops stay on the calling thread.
#[cfg(feature = "parallel")]
const MIN_PARALLEL_LEN: usize = 2048;

/// Force the sequential path even when the `parallel` feature is enabled.
pub fn set_sequential(on: bool) {
    FORCE_SEQUENTIAL.store(on, Ordering::SeqCst);
}

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel") && !FORCE_SEQUENTIAL.load(Ordering::SeqCst)
}

/// `out[i] = f(i)` for every index.
pub fn fill<T, F>(out: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if is_parallel() && out.len() >= MIN_PARALLEL_LEN {
        out.par_iter_mut()
            .enumerate()
            .with_min_len(256)
            .for_each(|(i, o)| *o = f(i));
        return;
    }
    for (i, o) in out.iter_mut().enumerate() {
        *o = f(i);
    }
}

/// Run `f(row_index, row)` over consecutive rows of length `row_len`.
pub fn for_each_row<T, F>(out: &mut [T], row_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    if row_len == 0 {
        return;
    }
    #[cfg(feature = "parallel")]
    if is_parallel() && out.len() >= MIN_PARALLEL_LEN && out.len() / row_len > 1 {
        out.par_chunks_mut(row_len)
            .enumerate()
            .for_each(|(i, row)| f(i, row));
        return;
    }
    for (i, row) in out.chunks_mut(row_len).enumerate() {
        f(i, row);
    }
}

/// Map `0..n` to a vector.
pub fn map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if is_parallel() && n > 1 {
        return (0..n).into_par_iter().map(f).collect();
    }
    (0..n).map(f).collect()
}

/// Sum of `f(i)` over `0..n` with a fixed reduction tree: each chunk of
/// [`REDUCTION_CHUNK`] indices is summed in order, then the chunk sums are
/// added in order.
pub fn sum<T, F>(n: usize, f: F) -> T
where
    T: Send + Copy + Default + std::ops::Add<Output = T>,
    F: Fn(usize) -> T + Sync + Send,
{
    let chunks = n.div_ceil(REDUCTION_CHUNK);
    let partial = |c: usize| {
        let start = c * REDUCTION_CHUNK;
        let end = (start + REDUCTION_CHUNK).min(n);
        (start..end).fold(T::default(), |acc, i| acc + f(i))
    };
    let partials: Vec<T> = if chunks > 1 { map(chunks, partial) } else { (0..chunks).map(partial).collect() };
    partials.into_iter().fold(T::default(), |acc, x| acc + x)
}
