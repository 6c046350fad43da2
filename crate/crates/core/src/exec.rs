//! Batched map-reduce over trial indices, run on the rayon pool when the
//! `parallel` feature is enabled and sequentially otherwise.
//!
//! Work is split into fixed-size batches of consecutive indices. Every index
//! is mapped independently and results are combined with a commutative,
//! associative reducer, so the outcome does not depend on scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

const BATCH: u64 = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Falls back to sequential execution without the `parallel` feature.
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

pub(crate) fn fold_indices<T, I, F, R>(n: u64, exec: Execution, identity: I, fold: F, reduce: R) -> T
where
    T: Send,
    I: Fn() -> T + Sync + Send,
    F: Fn(T, u64) -> T + Sync + Send,
    R: Fn(T, T) -> T + Sync + Send,
{
    let batches = n.div_ceil(BATCH);
    let run_batch = |b: u64| (b * BATCH..((b + 1) * BATCH).min(n)).fold(identity(), &fold);
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => (0..batches).into_par_iter().map(run_batch).reduce(&identity, &reduce),
        _ => (0..batches).map(run_batch).fold(identity(), &reduce),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_strategies_agree() {
        for n in [0, 1, 1023, 1024, 1025, 5000] {
            let seq = fold_indices(n, Execution::Sequential, || 0u64, |acc, i| acc + i * i, |a, b| a + b);
            let par = fold_indices(n, Execution::Parallel, || 0u64, |acc, i| acc + i * i, |a, b| a + b);
            let want: u64 = (0..n).map(|i| i * i).sum();
            assert_eq!(seq, want);
            assert_eq!(par, want);
        }
    }
}
