//! Runtime choice between the rayon data-parallel path and the sequential
//! fallback. With the `rayon` feature disabled only `Sequential` exists.

#[cfg(feature = "rayon")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parallelism {
    Sequential,
    #[cfg(feature = "rayon")]
    Rayon,
}

impl Default for Parallelism {
    fn default() -> Self {
        #[cfg(feature = "rayon")]
        {
            Parallelism::Rayon
        }
        #[cfg(not(feature = "rayon"))]
        {
            Parallelism::Sequential
        }
    }
}

impl Parallelism {
    /// Order-preserving map over `0..n`. The output is identical for both
    /// variants, so reductions over it are deterministic.
    pub fn map_indexed<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Parallelism::Sequential => (0..n).map(f).collect(),
            #[cfg(feature = "rayon")]
            Parallelism::Rayon => (0..n).into_par_iter().map(f).collect(),
        }
    }

    /// Order-preserving map over a slice.
    pub fn map_slice<S, T, F>(self, items: &[S], f: F) -> Vec<T>
    where
        S: Sync,
        T: Send,
        F: Fn(&S) -> T + Sync + Send,
    {
        match self {
            Parallelism::Sequential => items.iter().map(f).collect(),
            #[cfg(feature = "rayon")]
            Parallelism::Rayon => items.par_iter().map(f).collect(),
        }
    }
}
