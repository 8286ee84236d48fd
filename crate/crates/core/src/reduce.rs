//! Fixed-order pairwise summation.
//!
//! Terms are grouped into leaves of [`LEAF`] consecutive indices summed left
//! to right, and leaves are combined by a balanced binary tree over the index
//! range. The order depends only on the term count, so sums are bitwise
//! reproducible.

use core::ops::AddAssign;

pub const LEAF: usize = 32;

/// Pairwise sum of `term(0) + ... + term(n - 1)`.
pub fn pairwise_sum<T, F>(n: usize, term: F) -> T
where
    T: Copy + Default + AddAssign,
    F: Fn(usize) -> T,
{
    match try_pairwise_sum(n, |i| Ok::<T, core::convert::Infallible>(term(i))) {
        Ok(s) => s,
        Err(e) => match e {},
    }
}

/// [`pairwise_sum`] over fallible terms; stops at the first error in
/// summation order.
pub fn try_pairwise_sum<T, E, F>(n: usize, term: F) -> Result<T, E>
where
    T: Copy + Default + AddAssign,
    F: Fn(usize) -> Result<T, E>,
{
    if n == 0 {
        return Ok(T::default());
    }
    sum_range(0, n, &term)
}

fn sum_range<T, E, F>(lo: usize, hi: usize, term: &F) -> Result<T, E>
where
    T: Copy + Default + AddAssign,
    F: Fn(usize) -> Result<T, E>,
{
    if hi - lo <= LEAF {
        let mut acc = T::default();
        for i in lo..hi {
            acc += term(i)?;
        }
        Ok(acc)
    } else {
        let mid = lo + (hi - lo) / 2;
        let mut a = sum_range(lo, mid, term)?;
        a += sum_range(mid, hi, term)?;
        Ok(a)
    }
}

/// Pairwise reduction of vector-valued leaf sums. `leaf(lo, hi, acc)` adds the
/// terms of `lo..hi` into `acc` (a zeroed buffer of length `width`).
pub fn pairwise_fold<F>(n: usize, width: usize, leaf_size: usize, leaf: &F) -> alloc::vec::Vec<f64>
where
    F: Fn(usize, usize, &mut [f64]),
{
    let leaf_size = leaf_size.max(1);
    let mut out = alloc::vec![0.0; width];
    if n > 0 {
        fold_range(0, n, leaf_size, leaf, &mut out);
    }
    out
}

fn fold_range<F>(lo: usize, hi: usize, leaf_size: usize, leaf: &F, out: &mut [f64])
where
    F: Fn(usize, usize, &mut [f64]),
{
    if hi - lo <= leaf_size {
        leaf(lo, hi, out);
    } else {
        let mid = lo + (hi - lo) / 2;
        fold_range(lo, mid, leaf_size, leaf, out);
        let mut right = alloc::vec![0.0; out.len()];
        fold_range(mid, hi, leaf_size, leaf, &mut right);
        for (a, b) in out.iter_mut().zip(right.iter()) {
            *a += *b;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_exact_integer_sum() {
        let s: f64 = pairwise_sum(1000, |i| i as f64);
        assert_eq!(s, 499_500.0);
        let v = pairwise_fold(1000, 2, 16, &|lo, hi, acc: &mut [f64]| {
            for i in lo..hi {
                acc[0] += i as f64;
                acc[1] += 1.0;
            }
        });
        assert_eq!(v, alloc::vec![499_500.0, 1000.0]);
    }

    #[test]
    fn pairwise_beats_naive_on_cancellation() {
        let n = 1 << 20;
        let term = |i: usize| if i == 0 { 1.0 } else { 1e-16 };
        let s: f64 = pairwise_sum(n, term);
        let exact = 1.0 + (n - 1) as f64 * 1e-16;
        let naive: f64 = (0..n).map(term).sum();
        assert!((s - exact).abs() < 1e-14);
        assert!((naive - exact).abs() > 1e-11);
    }
}
