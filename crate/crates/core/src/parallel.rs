//! Order-preserving fan-out over symbol indices.
//!
//! Each index owns its own RNG substream, so the output is identical whether
//! the closure runs on one thread or many.

#[cfg(feature = "parallel")]
pub(crate) fn map_indices<T, F>(count: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..count).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indices<T, F>(count: u64, f: F) -> Vec<T>
where
    F: Fn(u64) -> T,
{
    (0..count).map(f).collect()
}
