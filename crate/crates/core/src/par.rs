//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the work is spread over the rayon pool;
//! without it the same code runs on one thread. Either way the work is cut
//! into fixed blocks whose partial results are combined in index order, so
//! outputs are bitwise identical regardless of thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Block length used for reductions.
pub const BLOCK: usize = 4096;

/// `sum f(x)` over `items`, reduced block by block in a fixed order.
pub fn sum_by_blocks<T, F>(items: &[T], f: F) -> f64
where
    T: Sync,
    F: Fn(&T) -> f64 + Sync + Send,
{
    if items.len() <= BLOCK {
        return items.iter().map(&f).sum();
    }
    let block_sum = |chunk: &[T]| chunk.iter().map(&f).sum::<f64>();
    #[cfg(feature = "parallel")]
    let partials: Vec<f64> = items.par_chunks(BLOCK).map(block_sum).collect();
    #[cfg(not(feature = "parallel"))]
    let partials: Vec<f64> = items.chunks(BLOCK).map(block_sum).collect();
    partials.iter().sum()
}

/// `[f(0), f(1), ..., f(n - 1)]`, evaluated in parallel when enabled.
pub fn map_indexed<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Like [`map_indexed`], with per-worker scratch state from `init`.
///
/// `f` must not let results depend on what earlier calls left in the state.
pub fn map_indexed_with<S, R, I, F>(n: usize, init: I, f: F) -> Vec<R>
where
    R: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map_init(init, f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let mut state = init();
        (0..n).map(|i| f(&mut state, i)).collect()
    }
}

/// Applies `f` to every element, in parallel when enabled.
pub fn map_slice<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Whether this build spreads work across threads.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
