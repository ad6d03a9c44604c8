//! Experiment orchestration: configuration, deterministic parallel
//! scheduling, result tables and the matrix cache.

pub mod cache;
pub mod config;
pub mod experiments;
pub mod table;

use rayon::prelude::*;

use crate::error::{Error, Result};

pub use config::{Experiment, ExperimentConfig, FileConfig, Overrides};
pub use experiments::{run, Check, ExperimentOutput};
pub use table::{Cell, Provenance, ResultTable};

/// Map `f` over `items` on `workers` threads; results keep input order.
pub fn parallel_map<T, U, F>(workers: usize, items: &[T], f: F) -> Result<Vec<U>>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Result<U> + Sync + Send,
{
    if workers <= 1 {
        return items.iter().map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| items.par_iter().map(&f).collect::<Vec<_>>())
        .into_iter()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_independent_of_workers() {
        let items: Vec<u64> = (0..50).collect();
        let f = |x: &u64| -> Result<u64> { Ok(x * x + 1) };
        let a = parallel_map(1, &items, f).unwrap();
        let b = parallel_map(4, &items, f).unwrap();
        assert_eq!(a, b);
        let err = parallel_map(3, &items, |x: &u64| {
            if *x == 7 {
                Err(Error::Check("seven".into()))
            } else {
                Ok(*x)
            }
        });
        assert!(err.is_err());
    }
}
