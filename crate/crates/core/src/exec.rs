//! Execution policy for the data-parallel inner loops.
//!
//! Every solver loop that is independent per node (kernel quadrature per grid
//! point, the explicit stencil update, profile evaluation over a ξ-grid) goes
//! through [`Execution`]. With the `parallel` feature disabled, or with
//! [`Execution::Sequential`] selected, the same closures run on the calling
//! thread, so results never depend on the policy.
//!
//! Reductions are done over fixed-size chunks whose partial sums are combined
//! in order, which keeps floating-point results bit-identical across thread
//! counts.

use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Fixed chunk length for deterministic reductions.
const REDUCE_CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether work will actually be spread over the rayon pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// `out[i] = f(i)` for every index.
    pub fn fill<F>(self, out: &mut [f64], f: F)
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            out.par_iter_mut().enumerate().for_each(|(i, v)| *v = f(i));
            return;
        }
        for (i, v) in out.iter_mut().enumerate() {
            *v = f(i);
        }
    }

    /// Like [`Execution::fill`], but only splits work into pieces of at least
    /// `min_len` elements. Use for cheap per-element work.
    pub fn fill_chunked<F>(self, out: &mut [f64], min_len: usize, f: F)
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() && out.len() > min_len {
            out.par_chunks_mut(min_len)
                .enumerate()
                .for_each(|(c, chunk)| {
                    let base = c * min_len;
                    for (k, v) in chunk.iter_mut().enumerate() {
                        *v = f(base + k);
                    }
                });
            return;
        }
        let _ = min_len;
        for (i, v) in out.iter_mut().enumerate() {
            *v = f(i);
        }
    }

    pub fn map<F>(self, n: usize, f: F) -> Vec<f64>
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        let mut out = vec![0.0; n];
        self.fill(&mut out, f);
        out
    }

    /// Deterministic sum of `f(i)` for `i in 0..n`.
    pub fn sum<F>(self, n: usize, f: F) -> f64
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        let chunks = n.div_ceil(REDUCE_CHUNK);
        let partial = |c: usize| {
            let lo = c * REDUCE_CHUNK;
            let hi = (lo + REDUCE_CHUNK).min(n);
            (lo..hi).map(&f).sum::<f64>()
        };
        #[cfg(feature = "parallel")]
        if self.is_parallel() && chunks > 1 {
            let parts: Vec<f64> = (0..chunks).into_par_iter().map(partial).collect();
            return parts.iter().sum();
        }
        (0..chunks).map(partial).sum()
    }
}
