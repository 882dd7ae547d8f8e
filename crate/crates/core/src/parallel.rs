//! Order-preserving data-parallel maps. With the `parallel` feature the work
//! is spread over the rayon pool; otherwise it runs sequentially. Results are
//! identical either way.

use crate::error::Result;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub fn map<I, T, F>(items: &[I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
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

pub fn try_map<I, T, F>(items: &[I], f: F) -> Result<Vec<T>>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> Result<T> + Sync + Send,
{
    map(items, f).into_iter().collect()
}

/// `f(0), …, f(n-1)` in index order.
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
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

/// Whether the crate was built with the rayon backend.
pub const fn enabled() -> bool {
    cfg!(feature = "parallel")
}
