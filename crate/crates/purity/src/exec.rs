//! Execution shim: data-parallel map over an index range with a sequential
//! fallback. Results are collected in index order, so callers see identical
//! output whichever path runs.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `0..n`, collecting results in index order.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        map_indexed_parallel(n, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_indexed_serial(n, f)
    }
}

/// Sequential implementation; always available (benchmark baseline).
pub fn map_indexed_serial<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Rayon implementation.
#[cfg(feature = "parallel")]
pub fn map_indexed_parallel<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}
