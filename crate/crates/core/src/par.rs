//! Row-parallel map with per-worker scratch state. Falls back to a plain loop
//! without the `parallel` feature (e.g. on wasm32).

#[cfg(feature = "parallel")]
pub(crate) fn map_indices<T, S, I, F>(n: usize, init: I, f: F) -> Vec<T>
where
    T: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map_init(init, f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indices<T, S, I, F>(n: usize, init: I, f: F) -> Vec<T>
where
    I: Fn() -> S,
    F: Fn(&mut S, usize) -> T,
{
    let mut state = init();
    (0..n).map(|i| f(&mut state, i)).collect()
}
