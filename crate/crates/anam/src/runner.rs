use std::sync::Arc;

use anam_core::montecarlo::TrialRunner;
use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuildError, ThreadPoolBuilder};

/// Spreads trials over a dedicated rayon pool. Output order follows the
/// trial index, so results match [`anam_core::montecarlo::SerialRunner`].
#[derive(Clone)]
pub struct RayonRunner {
    pool: Arc<ThreadPool>,
    workers: usize,
}

impl RayonRunner {
    pub fn new(workers: usize) -> Result<Self, ThreadPoolBuildError> {
        let workers = workers.max(1);
        let pool = ThreadPoolBuilder::new().num_threads(workers).build()?;
        Ok(Self {
            pool: Arc::new(pool),
            workers,
        })
    }

    pub fn workers(&self) -> usize {
        self.workers
    }
}

impl std::fmt::Debug for RayonRunner {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RayonRunner").field("workers", &self.workers).finish()
    }
}

impl TrialRunner for RayonRunner {
    fn map_trials<T, F>(&self, trials: usize, kernel: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool
            .install(|| (0..trials).into_par_iter().map(kernel).collect())
    }
}
