//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature, work runs on a dedicated rayon pool sized to
//! the requested worker count. Without it, or with one worker, everything
//! runs on the calling thread. Results are always returned in input order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub(crate) struct Executor {
    #[cfg(feature = "parallel")]
    pool: Option<rayon::ThreadPool>,
}

impl Executor {
    pub(crate) fn new(workers: usize) -> Self {
        #[cfg(feature = "parallel")]
        {
            let pool = (workers > 1).then(|| {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(workers)
                    .thread_name(|i| format!("backdrop-worker-{i}"))
                    .build()
                    .expect("failed to start worker pool")
            });
            Self { pool }
        }
        #[cfg(not(feature = "parallel"))]
        {
            if workers > 1 {
                log::debug!(
                    "built without the `parallel` feature; running {workers} workers sequentially"
                );
            }
            Self {}
        }
    }

    pub(crate) fn is_parallel(&self) -> bool {
        #[cfg(feature = "parallel")]
        {
            self.pool.is_some()
        }
        #[cfg(not(feature = "parallel"))]
        {
            false
        }
    }

    /// Maps `f` over `items`, keeping input order. On failure the error of the
    /// lowest failing index is returned, whatever order the work finished in.
    pub(crate) fn try_map<T, U, E, F>(&self, items: &[T], f: F) -> Result<Vec<U>, E>
    where
        T: Sync,
        U: Send,
        E: Send,
        F: Fn(usize, &T) -> Result<U, E> + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            let results: Vec<Result<U, E>> = pool.install(|| {
                items
                    .par_iter()
                    .enumerate()
                    .map(|(i, item)| f(i, item))
                    .collect()
            });
            return results.into_iter().collect();
        }
        items
            .iter()
            .enumerate()
            .map(|(i, item)| f(i, item))
            .collect()
    }
}
