//! Lock-free shared parameter matrix for asynchronous SGD.
//!
//! Every entry is an `AtomicU32` holding the bits of an `f32`. Loads and
//! stores are `Relaxed`, so concurrent workers may interleave at word
//! granularity and lose updates, but no access is a data race. With a single
//! worker the arithmetic is identical to plain `f32` code.

use std::sync::atomic::{AtomicU32, Ordering};

pub struct SharedMatrix {
    cols: usize,
    data: Vec<AtomicU32>,
}

impl SharedMatrix {
    pub fn from_vec(values: Vec<f32>, cols: usize) -> Self {
        debug_assert!(cols > 0 && values.len() % cols == 0);
        SharedMatrix {
            cols,
            data: values.into_iter().map(|x| AtomicU32::new(x.to_bits())).collect(),
        }
    }

    pub fn into_vec(self) -> Vec<f32> {
        self.data.into_iter().map(|x| f32::from_bits(x.into_inner())).collect()
    }

    pub fn rows(&self) -> usize {
        self.data.len() / self.cols
    }

    #[inline]
    fn row(&self, r: usize) -> &[AtomicU32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn load_row(&self, r: usize, out: &mut [f32]) {
        for (dst, src) in out.iter_mut().zip(self.row(r)) {
            *dst = f32::from_bits(src.load(Ordering::Relaxed));
        }
    }

    /// `row[r] += scale * x`, entry by entry.
    #[inline]
    pub fn axpy_row(&self, r: usize, scale: f32, x: &[f32]) {
        for (cell, &xi) in self.row(r).iter().zip(x) {
            let current = f32::from_bits(cell.load(Ordering::Relaxed));
            cell.store((current + scale * xi).to_bits(), Ordering::Relaxed);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_axpy() {
        let m = SharedMatrix::from_vec(vec![1.0, 2.0, 3.0, 4.0], 2);
        assert_eq!(m.rows(), 2);
        m.axpy_row(1, 0.5, &[2.0, 2.0]);
        let mut row = [0.0; 2];
        m.load_row(1, &mut row);
        assert_eq!(row, [4.0, 5.0]);
        assert_eq!(m.into_vec(), vec![1.0, 2.0, 4.0, 5.0]);
    }

    #[test]
    fn concurrent_writers_keep_values_finite() {
        let m = SharedMatrix::from_vec(vec![0.0; 8], 4);
        std::thread::scope(|s| {
            for t in 0..4 {
                let m = &m;
                s.spawn(move || {
                    for _ in 0..10_000 {
                        m.axpy_row(t % 2, 1e-3, &[1.0, 1.0, 1.0, 1.0]);
                    }
                });
            }
        });
        let values = m.into_vec();
        assert!(values.iter().all(|x| x.is_finite() && *x > 0.0 && *x <= 20.0 + 1e-3));
    }
}
