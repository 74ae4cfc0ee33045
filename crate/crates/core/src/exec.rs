//! Sequential/parallel execution switch for the data-parallel inner loops
//! (per-step cue scanning, batch annotation and validation).
//!
//! Without the `parallel` feature every mode runs sequentially.

/// Inputs at least this long go parallel under [`ExecMode::Auto`].
pub const AUTO_PARALLEL_MIN_ITEMS: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    Sequential,
    Parallel,
    #[default]
    Auto,
}

impl ExecMode {
    pub fn runs_parallel(self, items: usize) -> bool {
        cfg!(feature = "parallel")
            && match self {
                ExecMode::Sequential => false,
                ExecMode::Parallel => true,
                ExecMode::Auto => items >= AUTO_PARALLEL_MIN_ITEMS,
            }
    }
}

/// Order-preserving map.
pub fn map<T, R, F>(mode: ExecMode, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.runs_parallel(items.len()) {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = mode;
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let xs: Vec<u64> = (0..2000).collect();
        let seq = map(ExecMode::Sequential, &xs, |x| x * x);
        let par = map(ExecMode::Parallel, &xs, |x| x * x);
        let auto = map(ExecMode::Auto, &xs, |x| x * x);
        assert_eq!(seq, par);
        assert_eq!(seq, auto);
    }

    #[test]
    fn auto_threshold() {
        assert!(!ExecMode::Auto.runs_parallel(AUTO_PARALLEL_MIN_ITEMS - 1));
        assert_eq!(ExecMode::Auto.runs_parallel(AUTO_PARALLEL_MIN_ITEMS), cfg!(feature = "parallel"));
        assert!(!ExecMode::Sequential.runs_parallel(1 << 20));
    }
}
