//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (on by default) [`Execution::Parallel`] fans
//! work out over the rayon pool. Without it every path runs sequentially and
//! produces identical results.

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// Whether this build can actually run work in parallel.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Apply `f` to each `width`-long row of `data`, passing the row index.
pub fn try_for_each_row<T, F>(data: &mut [T], width: usize, exec: Execution, f: F) -> Result<()>
where
    T: Send,
    F: Fn(usize, &mut [T]) -> Result<()> + Send + Sync,
{
    if width == 0 {
        return Ok(());
    }
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return data
            .par_chunks_mut(width)
            .enumerate()
            .try_for_each(|(i, row)| f(i, row));
    }
    let _ = exec;
    data.chunks_mut(width)
        .enumerate()
        .try_for_each(|(i, row)| f(i, row))
}

/// `(0..count).map(f)` collected in index order.
pub fn map_indexed<T, F>(count: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..count).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..count).map(f).collect()
}
