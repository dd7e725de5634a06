//! Thread-pool backed corner executor.

use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};
use rram_core::designflow::CornerExecutor;

/// Runs jobs on a dedicated rayon pool. Results come back in index order, so
/// output does not depend on the thread count.
pub struct Parallel {
    pool: ThreadPool,
}

impl Parallel {
    pub fn new(threads: usize) -> Result<Self, rayon::ThreadPoolBuildError> {
        let pool = ThreadPoolBuilder::new().num_threads(threads.max(1)).build()?;
        Ok(Parallel { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl CornerExecutor for Parallel {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool.install(|| (0..n).into_par_iter().map(&f).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rram_core::designflow::Sequential;

    #[test]
    fn order_matches_sequential() {
        let par = Parallel::new(4).unwrap();
        let f = |k: usize| (k * 7919) % 101;
        assert_eq!(par.map(1000, f), Sequential.map(1000, f));
        assert_eq!(par.threads(), 4);
    }
}
