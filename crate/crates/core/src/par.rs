//! Execution policy for the data-parallel inner loops.
//!
//! With the `parallel` feature (default) loops run on the rayon global pool;
//! without it, or with [`Exec::Sequential`], they run on the calling thread.
//! Both paths produce identical results because every task derives its own
//! random stream.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// Whether this policy will actually use worker threads in this build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    /// Maps `f` over `0..n`, preserving index order in the output.
    pub fn map_range<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Exec::Parallel {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Maps `f` over a slice, preserving order.
    pub fn map_slice<S, T, F>(self, items: &[S], f: F) -> Vec<T>
    where
        S: Sync,
        T: Send,
        F: Fn(&S) -> T + Sync + Send,
    {
        self.map_range(items.len(), |i| f(&items[i]))
    }

    /// Folds `0..n` into per-chunk accumulators, then merges them.
    ///
    /// `merge` must be associative and commutative for the result to be
    /// independent of chunking.
    pub fn fold_range<A, F, M, I>(self, n: usize, init: I, fold: F, merge: M) -> A
    where
        A: Send,
        I: Fn() -> A + Sync + Send,
        F: Fn(A, usize) -> A + Sync + Send,
        M: Fn(A, A) -> A + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Exec::Parallel {
            use rayon::prelude::*;
            return (0..n)
                .into_par_iter()
                .fold(&init, &fold)
                .reduce(&init, &merge);
        }
        let _ = &merge;
        (0..n).fold(init(), fold)
    }
}
