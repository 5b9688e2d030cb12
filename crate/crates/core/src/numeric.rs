//! Deterministic reductions.
//!
//! Parallel sums split the index range into fixed-size chunks, sum each chunk
//! sequentially and combine the partial sums with a fixed binary tree, so the
//! result does not depend on the number of worker threads.

use std::ops::Add;

use rayon::prelude::*;

pub const CHUNK: usize = 4096;

/// Pairwise (binary tree) sum of a slice.
pub fn tree_sum<T>(xs: &[T]) -> T
where
    T: Copy + Default + Add<Output = T>,
{
    match xs.len() {
        0 => T::default(),
        1 => xs[0],
        len => {
            let (a, b) = xs.split_at(len / 2);
            tree_sum(a) + tree_sum(b)
        }
    }
}

/// Pairwise reduction of a slice with `combine`; `None` when empty.
pub fn tree_sum_by<T: Copy, F: Fn(&T, &T) -> T>(xs: &[T], combine: F) -> Option<T> {
    fn rec<T: Copy, F: Fn(&T, &T) -> T>(xs: &[T], f: &F) -> T {
        if xs.len() == 1 {
            return xs[0];
        }
        let (a, b) = xs.split_at(xs.len() / 2);
        f(&rec(a, f), &rec(b, f))
    }
    if xs.is_empty() {
        None
    } else {
        Some(rec(xs, &combine))
    }
}

/// `Σ_{i<len} f(i)` with a thread-count independent reduction order.
pub fn par_sum<T, F>(len: usize, f: F) -> T
where
    T: Copy + Default + Add<Output = T> + Send,
    F: Fn(usize) -> T + Sync,
{
    let partials: Vec<T> = (0..len.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let hi = ((c + 1) * CHUNK).min(len);
            (c * CHUNK..hi).fold(T::default(), |acc, i| acc + f(i))
        })
        .collect();
    tree_sum(&partials)
}
