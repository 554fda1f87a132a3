//! Batch execution helpers: data-parallel over items with rayon when the
//! `parallel` feature is on, plain iteration otherwise. The explicit
//! `*_seq` variants always run sequentially so benchmarks can compare the
//! two paths in one build.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map over a slice, in parallel when the `parallel` feature is enabled.
pub fn map_items<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Sequential map, regardless of features.
pub fn map_items_seq<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

/// True when this build runs batch work through rayon.
pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_matches_sequential() {
        let items: Vec<u64> = (0..100).collect();
        let par = map_items(&items, |x| x * x);
        let seq = map_items_seq(&items, |x| x * x);
        assert_eq!(par, seq);
    }
}
