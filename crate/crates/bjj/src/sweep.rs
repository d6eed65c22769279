//! Parallel evaluation of independent grid points.

use rayon::prelude::*;
use rayon::ThreadPoolBuilder;

/// Caps sweep parallelism; unset or `0` lets rayon decide.
pub const THREADS_ENV: &str = "BJJ_THREADS";

pub fn thread_count() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(0)
}

/// Maps `f` over `items` in parallel. Results come back in input order.
pub fn par_map<T, R, E, F>(items: &[T], f: F) -> Result<Vec<R>, E>
where
    T: Sync,
    R: Send,
    E: Send,
    F: Fn(usize, &T) -> Result<R, E> + Sync + Send,
{
    let pool = ThreadPoolBuilder::new()
        .num_threads(thread_count())
        .build()
        .expect("thread pool");
    pool.install(|| items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect())
}
