//! Execution mode for the data-parallel kernels.
//!
//! Every parallel kernel partitions its output by rows (or by independent
//! work items) and each item is computed by the same sequential code, so the
//! parallel and sequential paths give bitwise identical results. Without the
//! `parallel` feature [`Execution::Parallel`] silently runs sequentially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// Rows handed to a single task; small graphs are not worth splitting.
const ROW_CHUNK: usize = 64;

/// Calls `f(row_index, row)` for every row of a row-major buffer with `width`
/// columns.
pub fn for_each_row<F>(data: &mut [f64], width: usize, exec: Execution, f: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    if width == 0 {
        return;
    }
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            data.par_chunks_mut(width * ROW_CHUNK)
                .enumerate()
                .for_each(|(chunk, rows)| {
                    for (offset, row) in rows.chunks_mut(width).enumerate() {
                        f(chunk * ROW_CHUNK + offset, row);
                    }
                });
        }
        _ => {
            for (i, row) in data.chunks_mut(width).enumerate() {
                f(i, row);
            }
        }
    }
}

/// Maps `f` over `0..len`, preserving index order in the output.
pub fn map_indices<T, F>(len: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => (0..len).into_par_iter().map(f).collect(),
        _ => (0..len).map(f).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_kernel_paths_agree() {
        let width = 3;
        let mut a = vec![0.0; width * 200];
        let mut b = a.clone();
        let fill = |i: usize, row: &mut [f64]| {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (i * 7 + j) as f64 * 0.5;
            }
        };
        for_each_row(&mut a, width, Execution::Sequential, fill);
        for_each_row(&mut b, width, Execution::Parallel, fill);
        assert_eq!(a, b);
        assert_eq!(a[width * 199 + 2], (199 * 7 + 2) as f64 * 0.5);
    }

    #[test]
    fn map_preserves_order() {
        let v = map_indices(1000, Execution::Parallel, |i| i * i);
        assert!(v.iter().enumerate().all(|(i, &x)| x == i * i));
    }
}
