//! Data-parallel helpers with a sequential fallback.
//!
//! Results are always merged by index, so both paths return identical output.

/// Execution strategy for the scan/map helpers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        {
            Exec::Parallel
        }
        #[cfg(not(feature = "parallel"))]
        {
            Exec::Sequential
        }
    }
}

/// Worker cap from `SG_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var("SG_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&t| t > 0)
}

#[cfg(feature = "parallel")]
fn install<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    use std::sync::OnceLock;
    static POOL: OnceLock<Option<rayon::ThreadPool>> = OnceLock::new();
    let pool = POOL.get_or_init(|| {
        thread_cap().and_then(|t| rayon::ThreadPoolBuilder::new().num_threads(t).build().ok())
    });
    match pool {
        Some(p) => p.install(f),
        None => f(),
    }
}

/// `(0..n).map(f)` collected in index order.
pub fn map_indexed<T, F>(exec: Exec, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        Exec::Sequential => (0..n).map(f).collect(),
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            install(|| (0..n).into_par_iter().map(f).collect())
        }
    }
}

/// Lowest index `k < n` with `f(k)` returning `Some`, and that value.
pub fn find_first<T, F>(exec: Exec, n: usize, f: F) -> Option<(usize, T)>
where
    T: Send,
    F: Fn(usize) -> Option<T> + Sync + Send,
{
    match exec {
        Exec::Sequential => (0..n).find_map(|k| f(k).map(|t| (k, t))),
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            install(|| (0..n).into_par_iter().find_map_first(|k| f(k).map(|t| (k, t))))
        }
    }
}
