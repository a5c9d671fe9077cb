//! Parallel replicate execution. Replicate `i` always draws from stream
//! `(seed, tag, i)` and results come back in index order, so the output does
//! not depend on the size of the thread pool.

use rayon::prelude::*;
use stit_core::RandomStream;

use crate::error::Result;

pub fn replicate<T, F>(n: usize, seed: u64, tag: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, &mut RandomStream) -> Result<T> + Sync,
{
    (0..n as u64)
        .into_par_iter()
        .map(|i| f(i, &mut RandomStream::derived(seed, tag, i)))
        .collect()
}

/// A stable 64-bit tag for a named sub-sample (FNV-1a).
pub fn tag(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}
