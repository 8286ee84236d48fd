//! Hamilton quaternions, the complex-pair view `q = z1 + z2 j`, theta frames
//! and the theta pairing.

use core::f64::consts::TAU;
use core::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// Exponent magnitude above which [`exp_weight`] reports overflow.
pub const DEFAULT_EXP_BOUND: f64 = 700.0;

/// `x0 + x1 i + x2 j + x3 k`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Quaternion {
    pub x0: f64,
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl Quaternion {
    pub const ZERO: Self = Self::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Self = Self::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Self = Self::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Self = Self::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Self = Self::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(x0: f64, x1: f64, x2: f64, x3: f64) -> Self {
        Self { x0, x1, x2, x3 }
    }

    pub const fn from_real(r: f64) -> Self {
        Self::new(r, 0.0, 0.0, 0.0)
    }

    pub fn from_complex(z: Complex64) -> Self {
        Self::new(z.re, z.im, 0.0, 0.0)
    }

    /// `z1 + z2 j`.
    pub fn from_complex_pair(z1: Complex64, z2: Complex64) -> Self {
        Self::new(z1.re, z1.im, z2.re, z2.im)
    }

    pub fn complex_pair(self) -> (Complex64, Complex64) {
        (Complex64::new(self.x0, self.x1), Complex64::new(self.x2, self.x3))
    }

    pub const fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub const fn to_array(self) -> [f64; 4] {
        [self.x0, self.x1, self.x2, self.x3]
    }

    pub fn conj(self) -> Self {
        Self::new(self.x0, -self.x1, -self.x2, -self.x3)
    }

    pub fn norm_sqr(self) -> f64 {
        self.x0 * self.x0 + self.x1 * self.x1 + self.x2 * self.x2 + self.x3 * self.x3
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Euclidean inner product on R^4.
    pub fn dot(self, other: Self) -> f64 {
        self.x0 * other.x0 + self.x1 * other.x1 + self.x2 * other.x2 + self.x3 * other.x3
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn inverse(self) -> Option<Self> {
        let n = self.norm_sqr();
        if n == 0.0 || !n.is_finite() {
            None
        } else {
            Some(self.conj() / n)
        }
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(self.x0 * s, self.x1 * s, self.x2 * s, self.x3 * s)
    }

    pub fn is_finite(self) -> bool {
        self.x0.is_finite() && self.x1.is_finite() && self.x2.is_finite() && self.x3.is_finite()
    }

    /// Largest absolute component.
    pub fn max_abs(self) -> f64 {
        self.x0.abs().max(self.x1.abs()).max(self.x2.abs()).max(self.x3.abs())
    }
}

/// Hamilton product with `i j = k`, `j k = i`, `k i = j`.
pub fn mul(p: Quaternion, q: Quaternion) -> Quaternion {
    Quaternion::new(
        p.x0 * q.x0 - p.x1 * q.x1 - p.x2 * q.x2 - p.x3 * q.x3,
        p.x0 * q.x1 + p.x1 * q.x0 + p.x2 * q.x3 - p.x3 * q.x2,
        p.x0 * q.x2 - p.x1 * q.x3 + p.x2 * q.x0 + p.x3 * q.x1,
        p.x0 * q.x3 + p.x1 * q.x2 - p.x2 * q.x1 + p.x3 * q.x0,
    )
}

/// Product through the complex-pair rule
/// `(z1 + z2 j)(w1 + w2 j) = (z1 w1 - z2 conj(w2)) + (z1 w2 + z2 conj(w1)) j`.
pub fn complex_pair_mul(p: Quaternion, q: Quaternion) -> Quaternion {
    let (z1, z2) = p.complex_pair();
    let (w1, w2) = q.complex_pair();
    Quaternion::from_complex_pair(z1 * w1 - z2 * w2.conj(), z1 * w2 + z2 * w1.conj())
}

pub fn conj(q: Quaternion) -> Quaternion {
    q.conj()
}

impl Add for Quaternion {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x0 + o.x0, self.x1 + o.x1, self.x2 + o.x2, self.x3 + o.x3)
    }
}

impl Sub for Quaternion {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x0 - o.x0, self.x1 - o.x1, self.x2 - o.x2, self.x3 - o.x3)
    }
}

impl Neg for Quaternion {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x0, -self.x1, -self.x2, -self.x3)
    }
}

impl Mul for Quaternion {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        mul(self, o)
    }
}

impl Mul<f64> for Quaternion {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        self.scale(s)
    }
}

impl Mul<Quaternion> for f64 {
    type Output = Quaternion;
    fn mul(self, q: Quaternion) -> Quaternion {
        q.scale(self)
    }
}

impl Div<f64> for Quaternion {
    type Output = Self;
    fn div(self, s: f64) -> Self {
        self.scale(1.0 / s)
    }
}

impl AddAssign for Quaternion {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl SubAssign for Quaternion {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl MulAssign<f64> for Quaternion {
    fn mul_assign(&mut self, s: f64) {
        *self = self.scale(s);
    }
}

impl From<Complex64> for Quaternion {
    fn from(z: Complex64) -> Self {
        Self::from_complex(z)
    }
}

/// The structural set `psi = (1, i, i e^{i theta} j, e^{i theta} j)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaFrame {
    theta: f64,
    psi: [Quaternion; 4],
}

impl ThetaFrame {
    pub fn new(theta: f64) -> Self {
        let mut t = theta % TAU;
        if t < 0.0 {
            t += TAU;
        }
        let (s, c) = t.sin_cos();
        let psi = [
            Quaternion::ONE,
            Quaternion::I,
            Quaternion::new(0.0, 0.0, -s, c),
            Quaternion::new(0.0, 0.0, c, s),
        ];
        Self { theta: t, psi }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn psi(&self) -> &[Quaternion; 4] {
        &self.psi
    }

    pub fn basis(&self, k: usize) -> Quaternion {
        self.psi[k]
    }

    /// `e^{i theta}`.
    pub fn phase(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.theta)
    }

    /// `sum_k c_k psi_k`.
    pub fn embed(&self, c: &ThetaPoint) -> Quaternion {
        let c = c.c;
        let p = &self.psi;
        p[0] * c[0] + p[1] * c[1] + p[2] * c[2] + p[3] * c[3]
    }

    /// Inverse of [`ThetaFrame::embed`], by orthonormality of the frame.
    pub fn unembed(&self, q: Quaternion) -> ThetaPoint {
        ThetaPoint::new(
            q.dot(self.psi[0]),
            q.dot(self.psi[1]),
            q.dot(self.psi[2]),
            q.dot(self.psi[3]),
        )
    }

    /// Embeds through `z1 + i e^{i theta} j z2`.
    pub fn embed_pair(&self, z1: Complex64, z2: Complex64) -> Quaternion {
        let w2 = Complex64::i() * self.phase() * z2.conj();
        Quaternion::from_complex_pair(z1, w2)
    }

    /// Inverse of [`ThetaFrame::embed_pair`].
    pub fn unembed_pair(&self, q: Quaternion) -> (Complex64, Complex64) {
        let (z1, w2) = q.complex_pair();
        (z1, (w2 / (Complex64::i() * self.phase())).conj())
    }
}

impl Default for ThetaFrame {
    fn default() -> Self {
        Self::new(0.0)
    }
}

/// A point given by its psi-coordinates. The frame is supplied by the caller
/// whenever the point is embedded into H.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ThetaPoint {
    pub c: [f64; 4],
}

impl ThetaPoint {
    pub const ORIGIN: Self = Self { c: [0.0; 4] };

    pub const fn new(c0: f64, c1: f64, c2: f64, c3: f64) -> Self {
        Self { c: [c0, c1, c2, c3] }
    }

    pub const fn from_array(c: [f64; 4]) -> Self {
        Self { c }
    }

    /// `(z1, z2) = (c0 + c1 i, c2 + c3 i)`.
    pub fn from_complex(z1: Complex64, z2: Complex64) -> Self {
        Self::new(z1.re, z1.im, z2.re, z2.im)
    }

    pub fn z1(&self) -> Complex64 {
        Complex64::new(self.c[0], self.c[1])
    }

    pub fn z2(&self) -> Complex64 {
        Complex64::new(self.c[2], self.c[3])
    }

    pub fn embed(&self, frame: &ThetaFrame) -> Quaternion {
        frame.embed(self)
    }

    pub fn dot(&self, o: &Self) -> f64 {
        self.c[0] * o.c[0] + self.c[1] * o.c[1] + self.c[2] * o.c[2] + self.c[3] * o.c[3]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn distance(&self, o: &Self) -> f64 {
        (*self - *o).norm()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.c[0] * s, self.c[1] * s, self.c[2] * s, self.c[3] * s)
    }

    /// Shift along coordinate `k` by `h`.
    pub fn offset(&self, k: usize, h: f64) -> Self {
        let mut c = self.c;
        c[k] += h;
        Self { c }
    }
}

impl Add for ThetaPoint {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(
            self.c[0] + o.c[0],
            self.c[1] + o.c[1],
            self.c[2] + o.c[2],
            self.c[3] + o.c[3],
        )
    }
}

impl Sub for ThetaPoint {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(
            self.c[0] - o.c[0],
            self.c[1] - o.c[1],
            self.c[2] - o.c[2],
            self.c[3] - o.c[3],
        )
    }
}

/// `<u, z>_theta`: the Euclidean dot product of psi-coordinates.
pub fn theta_pairing(u: Quaternion, z: Quaternion, frame: &ThetaFrame) -> f64 {
    frame.unembed(u).dot(&frame.unembed(z))
}

/// `e^{scale <u, z>_theta}` with the default overflow bound.
pub fn exp_weight(u: Quaternion, z: Quaternion, frame: &ThetaFrame, scale: f64) -> Result<f64> {
    exp_weight_bounded(u, z, frame, scale, DEFAULT_EXP_BOUND)
}

pub fn exp_weight_bounded(
    u: Quaternion,
    z: Quaternion,
    frame: &ThetaFrame,
    scale: f64,
    bound: f64,
) -> Result<f64> {
    checked_exp(scale * theta_pairing(u, z, frame), bound)
}

pub(crate) fn checked_exp(exponent: f64, bound: f64) -> Result<f64> {
    if !(exponent.abs() <= bound) {
        return Err(Error::WeightOverflow { exponent, bound });
    }
    Ok(exponent.exp())
}
