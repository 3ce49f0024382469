//! Compensated accumulation and a chunked reduction whose result does not
//! depend on the number of worker threads.

use num_complex::Complex64;

/// Kahan–Babuška (Neumaier) running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    /// Fold another accumulator in, keeping both compensation terms.
    #[inline]
    pub fn merge(&mut self, other: &KahanSum) {
        self.add(other.sum);
        self.add(other.compensation);
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }

    pub fn sum_iter<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
        let mut acc = Self::new();
        for v in iter {
            acc.add(v);
        }
        acc.value()
    }
}

/// Complex compensated sum (componentwise).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ComplexKahanSum {
    re: KahanSum,
    im: KahanSum,
}

impl ComplexKahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: Complex64) {
        self.re.add(value.re);
        self.im.add(value.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Map every chunk to a partial result and return them in chunk order.
///
/// Chunks are fixed by the caller, so folding the returned vector left to
/// right gives a result that is independent of how many threads ran.
pub fn map_chunks<C, T, F>(chunks: &[C], f: F) -> Vec<T>
where
    C: Sync,
    T: Send,
    F: Fn(&C) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        chunks.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        chunks.iter().map(f).collect()
    }
}

/// Pairwise (binary tree) reduction over a slice in fixed order.
pub fn tree_reduce<T: Clone, F: Fn(&T, &T) -> T>(items: &[T], identity: T, combine: &F) -> T {
    match items.len() {
        0 => identity,
        1 => items[0].clone(),
        n => {
            let (left, right) = items.split_at(n / 2);
            let l = tree_reduce(left, identity.clone(), combine);
            let r = tree_reduce(right, identity, combine);
            combine(&l, &r)
        }
    }
}
