//! Dense Hermitian inversion for Gram matrices.
//!
//! Quaternion matrices are inverted through the complex embedding
//! `a + b j -> [[a, b], [-conj(b), conj(a)]]`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Quaternion, Result};

/// Row-major square complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct CMat {
    pub n: usize,
    pub a: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(n: usize) -> Self {
        Self { n, a: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.a[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.a[i * self.n + j] = v;
    }

    pub fn hermitize(&mut self) {
        for i in 0..self.n {
            let d = self.at(i, i).re;
            self.set(i, i, Complex64::new(d, 0.0));
            for j in i + 1..self.n {
                let v = (self.at(i, j) + self.at(j, i).conj()) * 0.5;
                self.set(i, j, v);
                self.set(j, i, v.conj());
            }
        }
    }

    pub fn norm1(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self.at(i, j).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Lower-triangular `L` with `A = L L^H`.
pub(crate) fn cholesky(m: &CMat) -> Result<CMat> {
    let n = m.n;
    let mut l = CMat::zeros(n);
    for j in 0..n {
        let mut d = m.at(j, j).re;
        for k in 0..j {
            d -= l.at(j, k).norm_sqr();
        }
        if !(d > 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        let djj = d.sqrt();
        l.set(j, j, Complex64::new(djj, 0.0));
        for i in j + 1..n {
            let mut s = m.at(i, j);
            for k in 0..j {
                s -= l.at(i, k) * l.at(j, k).conj();
            }
            l.set(i, j, s / djj);
        }
    }
    Ok(l)
}

/// Inverse of a Hermitian positive definite matrix and its 1-norm condition
/// number.
pub(crate) fn hpd_inverse(m: &CMat) -> Result<(CMat, f64)> {
    let n = m.n;
    let l = cholesky(m)?;
    // Invert L by forward substitution, then A^{-1} = L^{-H} L^{-1}.
    let mut li = CMat::zeros(n);
    for j in 0..n {
        li.set(j, j, Complex64::new(1.0 / l.at(j, j).re, 0.0));
        for i in j + 1..n {
            let mut s = Complex64::new(0.0, 0.0);
            for k in j..i {
                s -= l.at(i, k) * li.at(k, j);
            }
            li.set(i, j, s / l.at(i, i).re);
        }
    }
    let mut inv = CMat::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = Complex64::new(0.0, 0.0);
            for k in i..n {
                s += li.at(k, i).conj() * li.at(k, j);
            }
            inv.set(i, j, s);
            inv.set(j, i, s.conj());
        }
    }
    inv.hermitize();
    let cond = m.norm1() * inv.norm1();
    Ok((inv, cond))
}

/// Complex embedding of an `n x n` quaternion matrix.
pub(crate) fn embed_quaternion(q: &[Quaternion], n: usize) -> CMat {
    let mut m = CMat::zeros(2 * n);
    for i in 0..n {
        for j in 0..n {
            let (a, b) = q[i * n + j].complex_pair();
            m.set(i, j, a);
            m.set(i, n + j, b);
            m.set(n + i, j, -b.conj());
            m.set(n + i, n + j, a.conj());
        }
    }
    m
}

pub(crate) fn extract_quaternion(m: &CMat) -> Vec<Quaternion> {
    let n = m.n / 2;
    let mut q = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            q.push(Quaternion::from_complex_pair(m.at(i, j), m.at(i, n + j)));
        }
    }
    q
}

/// Inverse of a quaternion-Hermitian positive definite matrix.
pub(crate) fn quaternion_hpd_inverse(q: &[Quaternion], n: usize) -> Result<(Vec<Quaternion>, f64)> {
    let mut m = embed_quaternion(q, n);
    m.hermitize();
    let (inv, cond) = hpd_inverse(&m)?;
    Ok((extract_quaternion(&inv), cond))
}

/// Solves a small dense real system by Gaussian elimination with partial
/// pivoting.
pub(crate) fn solve_real(mut a: Vec<f64>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    if a.len() != n * n {
        return Err(Error::Dimension("matrix and right-hand side sizes differ"));
    }
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().partial_cmp(&a[j * n + col].abs()).unwrap_or(core::cmp::Ordering::Equal))
            .unwrap_or(col);
        if a[piv * n + col].abs() < 1e-300 {
            return Err(Error::NotPositiveDefinite);
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            b.swap(col, piv);
        }
        for r in col + 1..n {
            let f = a[r * n + col] / a[col * n + col];
            for k in col..n {
                a[r * n + k] -= f * a[col * n + k];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut s = b[r];
        for k in r + 1..n {
            s -= a[r * n + k] * x[k];
        }
        x[r] = s / a[r * n + r];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn complex_inverse() {
        let mut m = CMat::zeros(3);
        let rows = [
            [c(4.0, 0.0), c(1.0, 1.0), c(0.0, -0.5)],
            [c(1.0, -1.0), c(3.0, 0.0), c(0.2, 0.0)],
            [c(0.0, 0.5), c(0.2, 0.0), c(2.0, 0.0)],
        ];
        for i in 0..3 {
            for j in 0..3 {
                m.set(i, j, rows[i][j]);
            }
        }
        let (inv, cond) = hpd_inverse(&m).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let s: Complex64 = (0..3).map(|k| m.at(i, k) * inv.at(k, j)).sum();
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((s - c(e, 0.0)).norm() < 1e-14);
            }
        }
        assert!(cond >= 1.0);
    }

    #[test]
    fn rejects_indefinite() {
        let mut m = CMat::zeros(2);
        m.set(0, 0, c(1.0, 0.0));
        m.set(0, 1, c(2.0, 0.0));
        m.set(1, 0, c(2.0, 0.0));
        m.set(1, 1, c(1.0, 0.0));
        assert_eq!(hpd_inverse(&m), Err(Error::NotPositiveDefinite));
    }

    #[test]
    fn quaternion_inverse() {
        let q01 = Quaternion::new(0.3, -0.2, 0.5, 0.1);
        let g = [Quaternion::from_real(3.0), q01, q01.conj(), Quaternion::from_real(2.0)];
        let (inv, _) = quaternion_hpd_inverse(&g, 2).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let s = g[i * 2] * inv[j] + g[i * 2 + 1] * inv[2 + j];
                let e = if i == j { Quaternion::ONE } else { Quaternion::ZERO };
                assert!((s - e).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn real_solve() {
        let x = solve_real(vec![0.0, 2.0, 1.0, 1.0], vec![4.0, 3.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
    }
}
