//! Sample-loop driver: parallel when the `parallel` feature is on, serial
//! otherwise. Results always come back in index order, so reports do not
//! depend on the schedule.

use alloc::vec::Vec;

#[cfg(feature = "parallel")]
pub fn indexed_map<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..count).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn indexed_map<T, F>(count: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..count).map(f).collect()
}
