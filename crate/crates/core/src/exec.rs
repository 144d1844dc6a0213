//! Trial execution.
//!
//! Every trial is a pure function of its index, so results are collected in
//! index order and reduced sequentially; the output does not depend on the
//! number of workers. With the `parallel` feature trials are spread over a
//! rayon pool, otherwise they run on the calling thread.

use std::num::NonZeroUsize;

/// How trials are scheduled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Executor {
    /// Run every trial on the calling thread.
    Sequential,
    /// Use the global rayon pool (falls back to sequential without the
    /// `parallel` feature).
    #[default]
    Parallel,
    /// Use a dedicated pool with the given number of threads.
    Workers(NonZeroUsize),
}

impl Executor {
    /// `0` selects the global pool, `1` runs sequentially.
    pub fn with_workers(workers: usize) -> Self {
        match workers {
            0 => Executor::Parallel,
            1 => Executor::Sequential,
            n => Executor::Workers(NonZeroUsize::new(n).expect("n > 1")),
        }
    }

    /// Evaluate `f(0), f(1), …, f(n - 1)` and return the results in order.
    pub fn map<T, F>(&self, n: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        match self {
            Executor::Sequential => (0..n).map(f).collect(),
            #[cfg(feature = "parallel")]
            Executor::Parallel => {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).collect()
            }
            #[cfg(feature = "parallel")]
            Executor::Workers(k) => {
                use rayon::prelude::*;
                match rayon::ThreadPoolBuilder::new().num_threads(k.get()).build() {
                    Ok(pool) => pool.install(|| (0..n).into_par_iter().map(f).collect()),
                    Err(_) => (0..n).map(f).collect(),
                }
            }
            #[cfg(not(feature = "parallel"))]
            _ => (0..n).map(f).collect(),
        }
    }

    /// Map then fold in index order.
    pub fn fold<T, A, F, G>(&self, n: u64, f: F, init: A, mut g: G) -> A
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
        G: FnMut(A, T) -> A,
    {
        let mut acc = init;
        for item in self.map(n, f) {
            acc = g(acc, item);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_independent_of_workers() {
        let f = |i: u64| i.wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 7;
        let a = Executor::Sequential.map(1000, f);
        let b = Executor::with_workers(3).map(1000, f);
        let c = Executor::Parallel.map(1000, f);
        assert_eq!(a, b);
        assert_eq!(a, c);
    }
}
