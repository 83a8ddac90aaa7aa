use rayon::prelude::*;
use squimld_core::exec::ShardExecutor;

/// Runs shards on a dedicated Rayon pool. Results come back in shard order,
/// so output does not depend on the thread count.
pub struct RayonExecutor {
    pool: rayon::ThreadPool,
}

impl RayonExecutor {
    /// `workers = 0` uses one thread per available core.
    pub fn new(workers: usize) -> Result<Self, rayon::ThreadPoolBuildError> {
        Ok(Self { pool: rayon::ThreadPoolBuilder::new().num_threads(workers).build()? })
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl ShardExecutor for RayonExecutor {
    fn map_shards<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool.install(|| (0..n).into_par_iter().map(f).collect())
    }
}
