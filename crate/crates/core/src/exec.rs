//! Data-parallel map helpers with a sequential fallback.
//!
//! The hot loops (per-worker round training, teacher decoding, corpus
//! scoring) are embarrassingly parallel over independent items. With the
//! `parallel` feature (default) they fan out on rayon; without it the same
//! code runs sequentially. Both paths collect results in input order, so
//! outputs are identical either way — the benches in `benches/parallel.rs`
//! compare the two.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Order-preserving map over a slice, always sequential.
pub fn map_seq<T, U>(items: &[T], f: impl Fn(&T) -> U) -> Vec<U> {
    items.iter().map(f).collect()
}

/// Order-preserving parallel map (rayon). Only built with `parallel`.
#[cfg(feature = "parallel")]
pub fn map_par<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync) -> Vec<U> {
    items.par_iter().map(f).collect()
}

/// Order-preserving map on the configured backend.
pub fn map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync) -> Vec<U> {
    #[cfg(feature = "parallel")]
    {
        map_par(items, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_seq(items, f)
    }
}

/// Indexed variant of [`map`]; `f` receives `(index, item)`.
pub fn map_indexed<T: Sync, U: Send>(items: &[T], f: impl Fn(usize, &T) -> U + Sync) -> Vec<U> {
    #[cfg(feature = "parallel")]
    {
        items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().enumerate().map(|(i, t)| f(i, t)).collect()
    }
}
