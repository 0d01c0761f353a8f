//! Data-parallel kernels with a sequential fallback.
//!
//! With the `parallel` feature enabled (the default) the `*_par` entry
//! points run on the rayon thread pool; without it they degrade to the
//! sequential implementations. Outputs are collected in input order and the
//! reductions used here (min) are order-independent, so results do not
//! depend on the execution strategy or thread count.
//!
//! The `*_seq` variants are always available; the criterion bench suite
//! uses them to compare both strategies on identical workloads.

/// Maps `f` over `items` and collects results in input order.
pub fn map_collect<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_collect_seq(items, f)
    }
}

/// Sequential twin of [`map_collect`].
pub fn map_collect_seq<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// Minimum of `score(i, j)` over all index pairs `i < j < n`.
///
/// Returns `f64::INFINITY` when there are no pairs. `score` must not
/// produce NaN.
pub fn pairwise_min<F>(n: usize, score: F) -> f64
where
    F: Fn(usize, usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n)
            .into_par_iter()
            .map(|i| {
                let mut best = f64::INFINITY;
                for j in (i + 1)..n {
                    best = best.min(score(i, j));
                }
                best
            })
            .reduce(|| f64::INFINITY, f64::min)
    }
    #[cfg(not(feature = "parallel"))]
    {
        pairwise_min_seq(n, score)
    }
}

/// Sequential twin of [`pairwise_min`].
pub fn pairwise_min_seq<F>(n: usize, score: F) -> f64
where
    F: Fn(usize, usize) -> f64,
{
    let mut best = f64::INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            best = best.min(score(i, j));
        }
    }
    best
}

/// First index pair `i < j` for which `offending(i, j)` returns true,
/// scanning in lexicographic order. Deterministic regardless of strategy:
/// the parallel version searches per-row and keeps the smallest row hit.
pub fn pairwise_find<F>(n: usize, offending: F) -> Option<(usize, usize)>
where
    F: Fn(usize, usize) -> bool + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n)
            .into_par_iter()
            .filter_map(|i| ((i + 1)..n).find(|&j| offending(i, j)).map(|j| (i, j)))
            .min()
    }
    #[cfg(not(feature = "parallel"))]
    {
        pairwise_find_seq(n, offending)
    }
}

/// Sequential twin of [`pairwise_find`].
pub fn pairwise_find_seq<F>(n: usize, offending: F) -> Option<(usize, usize)>
where
    F: Fn(usize, usize) -> bool,
{
    for i in 0..n {
        for j in (i + 1)..n {
            if offending(i, j) {
                return Some((i, j));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_agree() {
        let items: Vec<f64> = (0..257).map(|i| (i as f64) * 0.37 - 40.0).collect();
        let a = map_collect(&items, |x| x * x + 1.0);
        let b = map_collect_seq(&items, |x| x * x + 1.0);
        assert_eq!(a, b);

        let score = |i: usize, j: usize| (items[i] - items[j]).abs() + (i + j) as f64 * 1e-3;
        assert_eq!(pairwise_min(items.len(), score), pairwise_min_seq(items.len(), score));

        let hit = |i: usize, j: usize| i * j == 42;
        assert_eq!(pairwise_find(100, hit), pairwise_find_seq(100, hit));
        assert_eq!(pairwise_find(100, hit), Some((1, 42)));
    }

    #[test]
    fn empty_pairs_is_infinite() {
        assert_eq!(pairwise_min(0, |_, _| 0.0), f64::INFINITY);
        assert_eq!(pairwise_min(1, |_, _| 0.0), f64::INFINITY);
    }
}
