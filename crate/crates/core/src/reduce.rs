//! Deterministic chunked reductions.
//!
//! Work is cut into fixed-size chunks whose partial results are combined by
//! a pairwise tree in chunk order. The chunk boundaries do not depend on the
//! number of worker threads, so results are bit-identical with or without
//! the `parallel` feature.

pub(crate) const CHUNK: usize = 8192;

/// Combine partials pairwise: `((p0+p1)+(p2+p3))+…`.
pub(crate) fn tree_combine<T>(mut parts: Vec<T>, mut add: impl FnMut(T, T) -> T) -> Option<T> {
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(add(a, b)),
                None => next.push(a),
            }
        }
        parts = next;
    }
    parts.pop()
}

/// Map every chunk index in `0..chunks` to a partial result, in parallel
/// when the `parallel` feature is on; output is always in chunk order.
pub(crate) fn map_chunks<T, F>(chunks: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if chunks > 1 {
            return (0..chunks).into_par_iter().map(f).collect();
        }
    }
    (0..chunks).map(f).collect()
}

pub(crate) fn add_vecs(mut a: Vec<f64>, b: Vec<f64>) -> Vec<f64> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}
