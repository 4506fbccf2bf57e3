//! Parallel replication runner.
//!
//! Replication `i` always draws from RNG stream `i`, and results are collected
//! in index order, so the batch does not depend on the thread count.

use rayon::prelude::*;
use sffm_core::simulate::{SampleBatch, Simulator};

/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "SFFM_THREADS";

pub fn run(sim: &Simulator, replications: u64) -> SampleBatch {
    let records = (0..replications).into_par_iter().map(|i| sim.replicate(i)).collect();
    sim.batch(records)
}

/// Sizes the global pool. Later calls have no effect.
pub fn configure(threads: Option<usize>) {
    if let Some(n) = threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use sffm_core::catalog;
    use sffm_core::simulate::{SimConfig, Target};

    #[test]
    fn same_as_sequential() {
        let (m, i) = catalog::example(1).unwrap();
        let cfg = SimConfig { seed: 11, replications: 500, ..SimConfig::default() };
        let sim = Simulator::new(&m, &i, Target::Omega { y: 1.0 }, cfg).unwrap();
        assert_eq!(run(&sim, 500), sim.run());
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        assert_eq!(pool.install(|| run(&sim, 500)), sim.run());
    }
}
