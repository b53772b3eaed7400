//! Execution strategy for the data-parallel loops (pair scoring, subset
//! enumeration, instance sweeps).
//!
//! With the `parallel` feature (on by default) work is spread over the
//! rayon pool; without it every strategy runs sequentially. Results are
//! always returned in input order, so output never depends on the strategy.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Exec {
    #[cfg_attr(not(feature = "parallel"), default)]
    Sequential,
    #[cfg(feature = "parallel")]
    #[default]
    Parallel,
}

impl Exec {
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            Exec::Sequential => items.iter().map(f).collect(),
            #[cfg(feature = "parallel")]
            Exec::Parallel => items.par_iter().map(f).collect(),
        }
    }

    /// Maps `f` over `0..n` and keeps the `Some` results, in index order.
    pub fn filter_map_range<R, F>(self, n: u64, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(u64) -> Option<R> + Sync + Send,
    {
        match self {
            Exec::Sequential => (0..n).filter_map(f).collect(),
            #[cfg(feature = "parallel")]
            Exec::Parallel => (0..n).into_par_iter().filter_map(f).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategies_agree() {
        let items: Vec<u32> = (0..1000).collect();
        let seq = Exec::Sequential.map(&items, |x| x * 3);
        assert_eq!(seq, Exec::default().map(&items, |x| x * 3));
        let f = |i: u64| i.is_multiple_of(7).then_some(i);
        assert_eq!(
            Exec::Sequential.filter_map_range(500, f),
            Exec::default().filter_map_range(500, f)
        );
    }
}
