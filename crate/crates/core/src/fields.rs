//! Evaluable field handles and generators of certified test functions.
//!
//! Residuals of the first-order systems are reported in Wirtinger units,
//! `d/dzbar = (d/dx + i d/dy) / 2`. The quaternionic operator is
//! `D = sum_k psi_k d/dc_k`, so a field is in the kernel of `D + u` exactly
//! when both residual components below vanish.

use alloc::sync::Arc;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::diffops::Stencil;
use crate::geometry::Ball;
use crate::quaternion::{checked_exp, DEFAULT_EXP_BOUND};
use crate::{Error, Quaternion, Result, ThetaFrame, ThetaPoint};

pub type Evaluator = Arc<dyn Fn(&ThetaPoint) -> Quaternion + Send + Sync>;
pub type Gradient = Arc<dyn Fn(&ThetaPoint) -> [Quaternion; 4] + Send + Sync>;
pub type ComplexEvaluator = Arc<dyn Fn(Complex64, Complex64) -> Complex64 + Send + Sync>;
pub type WirtingerEvaluator = Arc<dyn Fn(Complex64, Complex64) -> Wirtinger + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Smoothness {
    /// Real-analytic on all of C^2.
    Analytic,
    /// Smooth away from a known singular set.
    Smooth,
    /// Only C^1 is promised.
    C1,
}

/// Quaternion-valued function of psi-coordinates.
#[derive(Clone)]
pub struct Field {
    eval: Evaluator,
    grad: Option<Gradient>,
    pub frame: ThetaFrame,
    pub smoothness: Smoothness,
    /// Optional domain used for stencil margin checks.
    pub domain: Option<Ball>,
}

impl core::fmt::Debug for Field {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Field")
            .field("frame", &self.frame)
            .field("smoothness", &self.smoothness)
            .field("analytic_gradient", &self.grad.is_some())
            .field("domain", &self.domain)
            .finish()
    }
}

impl Field {
    pub fn new<F>(frame: ThetaFrame, f: F) -> Self
    where
        F: Fn(&ThetaPoint) -> Quaternion + Send + Sync + 'static,
    {
        Self { eval: Arc::new(f), grad: None, frame, smoothness: Smoothness::Smooth, domain: None }
    }

    pub fn with_gradient<G>(mut self, g: G) -> Self
    where
        G: Fn(&ThetaPoint) -> [Quaternion; 4] + Send + Sync + 'static,
    {
        self.grad = Some(Arc::new(g));
        self
    }

    pub fn without_gradient(mut self) -> Self {
        self.grad = None;
        self
    }

    pub fn with_smoothness(mut self, s: Smoothness) -> Self {
        self.smoothness = s;
        self
    }

    pub fn with_domain(mut self, domain: Ball) -> Self {
        self.domain = Some(domain);
        self
    }

    pub fn constant(frame: ThetaFrame, q: Quaternion) -> Self {
        Self::new(frame, move |_| q)
            .with_gradient(|_| [Quaternion::ZERO; 4])
            .with_smoothness(Smoothness::Analytic)
    }

    /// The coordinate function `c_k`.
    pub fn coordinate(frame: ThetaFrame, k: usize) -> Self {
        Self::new(frame, move |p| Quaternion::from_real(p.c[k]))
            .with_gradient(move |_| {
                let mut g = [Quaternion::ZERO; 4];
                g[k] = Quaternion::ONE;
                g
            })
            .with_smoothness(Smoothness::Analytic)
    }

    #[inline]
    pub fn eval(&self, p: &ThetaPoint) -> Quaternion {
        (self.eval)(p)
    }

    pub fn has_gradient(&self) -> bool {
        self.grad.is_some()
    }

    /// Analytic partials `d f / d c_k`, if attached.
    pub fn gradient(&self, p: &ThetaPoint) -> Option<[Quaternion; 4]> {
        self.grad.as_ref().map(|g| g(p))
    }

    pub fn evaluator(&self) -> Evaluator {
        self.eval.clone()
    }

    /// Pointwise right multiplication by a constant quaternion.
    pub fn right_mul(&self, q: Quaternion) -> Field {
        let e = self.eval.clone();
        let mut out = Field::new(self.frame, move |p| e(p) * q);
        if let Some(g) = self.grad.clone() {
            out = out.with_gradient(move |p| g(p).map(|d| d * q));
        }
        out.smoothness = self.smoothness;
        out.domain = self.domain;
        out
    }

    /// Pointwise left multiplication by a constant quaternion.
    pub fn left_mul(&self, q: Quaternion) -> Field {
        let e = self.eval.clone();
        let mut out = Field::new(self.frame, move |p| q * e(p));
        if let Some(g) = self.grad.clone() {
            out = out.with_gradient(move |p| g(p).map(|d| q * d));
        }
        out.smoothness = self.smoothness;
        out.domain = self.domain;
        out
    }

    /// Pointwise sum; the gradient is kept only if both summands carry one.
    pub fn add(&self, other: &Field) -> Field {
        let (a, b) = (self.eval.clone(), other.eval.clone());
        let mut out = Field::new(self.frame, move |p| a(p) + b(p));
        if let (Some(ga), Some(gb)) = (self.grad.clone(), other.grad.clone()) {
            out = out.with_gradient(move |p| {
                let (x, y) = (ga(p), gb(p));
                [x[0] + y[0], x[1] + y[1], x[2] + y[2], x[3] + y[3]]
            });
        }
        out.smoothness = weaker(self.smoothness, other.smoothness);
        out.domain = self.domain.or(other.domain);
        out
    }

    /// Pointwise product by a real scalar function with known gradient.
    pub fn scalar_mul<W, G>(&self, w: W, dw: G) -> Field
    where
        W: Fn(&ThetaPoint) -> f64 + Send + Sync + Clone + 'static,
        G: Fn(&ThetaPoint) -> [f64; 4] + Send + Sync + 'static,
    {
        let e = self.eval.clone();
        let w2 = w.clone();
        let mut out = Field::new(self.frame, move |p| e(p) * w2(p));
        if let Some(g) = self.grad.clone() {
            let e = self.eval.clone();
            out = out.with_gradient(move |p| {
                let (v, d, s, ds) = (e(p), g(p), w(p), dw(p));
                [0, 1, 2, 3].map(|k| d[k] * s + v * ds[k])
            });
        }
        out.smoothness = self.smoothness;
        out.domain = self.domain;
        out
    }
}

fn weaker(a: Smoothness, b: Smoothness) -> Smoothness {
    use Smoothness::*;
    match (a, b) {
        (C1, _) | (_, C1) => C1,
        (Smooth, _) | (_, Smooth) => Smooth,
        _ => Analytic,
    }
}

/// Wirtinger derivatives `(d/dz1, d/dzbar1, d/dz2, d/dzbar2)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Wirtinger {
    pub dz1: Complex64,
    pub dzb1: Complex64,
    pub dz2: Complex64,
    pub dzb2: Complex64,
}

/// Complex-valued function of `(z1, z2)`.
#[derive(Clone)]
pub struct ComplexField {
    pub(crate) eval: ComplexEvaluator,
    pub(crate) wirtinger: Option<WirtingerEvaluator>,
    pub domain: Option<Ball>,
}

impl core::fmt::Debug for ComplexField {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("ComplexField")
            .field("analytic_derivatives", &self.wirtinger.is_some())
            .field("domain", &self.domain)
            .finish()
    }
}

impl ComplexField {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(Complex64, Complex64) -> Complex64 + Send + Sync + 'static,
    {
        Self { eval: Arc::new(f), wirtinger: None, domain: None }
    }

    pub fn with_wirtinger<W>(mut self, w: W) -> Self
    where
        W: Fn(Complex64, Complex64) -> Wirtinger + Send + Sync + 'static,
    {
        self.wirtinger = Some(Arc::new(w));
        self
    }

    pub fn with_domain(mut self, domain: Ball) -> Self {
        self.domain = Some(domain);
        self
    }

    #[inline]
    pub fn eval(&self, z1: Complex64, z2: Complex64) -> Complex64 {
        (self.eval)(z1, z2)
    }

    pub fn eval_at(&self, p: &ThetaPoint) -> Complex64 {
        self.eval(p.z1(), p.z2())
    }

    pub fn wirtinger(&self, z1: Complex64, z2: Complex64) -> Option<Wirtinger> {
        self.wirtinger.as_ref().map(|w| w(z1, z2))
    }

    /// View as an H-valued field `f + 0 j`.
    pub fn to_field(&self, frame: ThetaFrame) -> Field {
        let e = self.eval.clone();
        let mut out = Field::new(frame, move |p| Quaternion::from_complex(e(p.z1(), p.z2())));
        if let Some(w) = self.wirtinger.clone() {
            out = out.with_gradient(move |p| {
                let d = w(p.z1(), p.z2());
                let i = Complex64::i();
                [d.dz1 + d.dzb1, i * (d.dz1 - d.dzb1), d.dz2 + d.dzb2, i * (d.dz2 - d.dzb2)]
                    .map(Quaternion::from_complex)
            });
        }
        out.domain = self.domain;
        out
    }

    /// Pointwise product.
    pub fn mul(&self, other: &ComplexField) -> ComplexField {
        let (a, b) = (self.eval.clone(), other.eval.clone());
        let mut out = ComplexField::new(move |z1, z2| a(z1, z2) * b(z1, z2));
        if let (Some(wa), Some(wb)) = (self.wirtinger.clone(), other.wirtinger.clone()) {
            let (a, b) = (self.eval.clone(), other.eval.clone());
            out = out.with_wirtinger(move |z1, z2| {
                let (fa, fb, da, db) = (a(z1, z2), b(z1, z2), wa(z1, z2), wb(z1, z2));
                Wirtinger {
                    dz1: da.dz1 * fb + fa * db.dz1,
                    dzb1: da.dzb1 * fb + fa * db.dzb1,
                    dz2: da.dz2 * fb + fa * db.dz2,
                    dzb2: da.dzb2 * fb + fa * db.dzb2,
                }
            });
        }
        out.domain = self.domain.or(other.domain);
        out
    }
}

/// `(z1, z2) -> z1^m z2^n` with exact Wirtinger derivatives.
pub fn holomorphic_monomial(m: u32, n: u32) -> ComplexField {
    ComplexField::new(move |z1, z2| z1.powu(m) * z2.powu(n)).with_wirtinger(move |z1, z2| {
        let zero = Complex64::new(0.0, 0.0);
        let dz1 = if m == 0 { zero } else { z1.powu(m - 1) * z2.powu(n) * m as f64 };
        let dz2 = if n == 0 { zero } else { z1.powu(m) * z2.powu(n - 1) * n as f64 };
        Wirtinger { dz1, dzb1: zero, dz2, dzb2: zero }
    })
}

/// Quaternion-valued holomorphic field `m1 + m2 j` from two monomial
/// exponent pairs and complex coefficients.
pub fn holomorphic_pair(frame: ThetaFrame, f1: &ComplexField, f2: &ComplexField) -> Field {
    let (a, b) = (f1.to_field(frame), f2.to_field(frame));
    a.add(&b.right_mul(Quaternion::J)).with_smoothness(Smoothness::Analytic)
}

/// `z -> e^{-<u, z>_theta} h(z)`, in the kernel of `D + u` whenever `h` is in
/// the kernel of `D`.
pub fn u_hyperholomorphic_from(h: &Field, u: Quaternion, frame: &ThetaFrame) -> Field {
    let uc = frame.unembed(u);
    let w = move |p: &ThetaPoint| (-uc.dot(p)).exp();
    let dw = move |p: &ThetaPoint| {
        let s = (-uc.dot(p)).exp();
        [0, 1, 2, 3].map(|k| -uc.c[k] * s)
    };
    let mut out = h.scalar_mul(w, dw);
    out.frame = *frame;
    out
}

/// `(z1, z2) -> e^{-(alpha zbar1 + beta zbar2)} h(z1, z2)`.
pub fn alpha_beta_holomorphic_from(h: &ComplexField, alpha: Complex64, beta: Complex64) -> ComplexField {
    let e = h.eval.clone();
    let mut out = ComplexField::new(move |z1, z2| (-(alpha * z1.conj() + beta * z2.conj())).exp() * e(z1, z2));
    if let Some(w) = h.wirtinger.clone() {
        let e = h.eval.clone();
        out = out.with_wirtinger(move |z1, z2| {
            let g = (-(alpha * z1.conj() + beta * z2.conj())).exp();
            let (v, d) = (e(z1, z2), w(z1, z2));
            Wirtinger {
                dz1: g * d.dz1,
                dzb1: g * (d.dzb1 - alpha * v),
                dz2: g * d.dz2,
                dzb2: g * (d.dzb2 - beta * v),
            }
        });
    }
    out.domain = h.domain;
    out
}

/// The (theta,u) parameter whose kernel class contains the Wirtinger
/// `(alpha, beta)` system: `u = 2 alpha + i e^{i theta} j 2 beta`.
pub fn alpha_beta_to_u(alpha: Complex64, beta: Complex64, frame: &ThetaFrame) -> Quaternion {
    frame.embed_pair(alpha * 2.0, beta * 2.0)
}

fn check_margin(domain: Option<Ball>, p: &ThetaPoint, reach: f64) -> Result<()> {
    if let Some(b) = domain {
        let d = b.margin(p);
        if d < reach {
            return Err(Error::BoundaryMargin { distance: d, required: reach });
        }
    }
    Ok(())
}

/// Central-difference partials of the complex pair `(f1, f2)` of a field.
fn pair_partials(f: &Field, p: &ThetaPoint, h: f64) -> [(Complex64, Complex64); 4] {
    let st = Stencil { h, order: 2 };
    st.partials_fd(|q| f.eval(q), p).map(|d| d.complex_pair())
}

/// Residual of the first-order system for `D + u` at `point`, by central
/// differences with step `h`: the larger modulus of the two equations,
/// in Wirtinger units.
pub fn cr_residual_theta_u(
    f: &Field,
    u: Quaternion,
    frame: &ThetaFrame,
    point: &ThetaPoint,
    h: f64,
) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidStencil("step must be positive"));
    }
    check_margin(f.domain, point, h)?;
    let d = pair_partials(f, point, h);
    let (f1, f2) = f.eval(point).complex_pair();
    let uc = frame.unembed(u);
    let (u1, u2) = (uc.z1(), uc.z2());
    let i = Complex64::i();
    // (d/dc0 + i d/dc1) and (d/dc2 + i d/dc3): twice the Wirtinger d/dzbar.
    let db1 = |k: usize| if k == 0 { d[0].0 + i * d[1].0 } else { d[0].1 + i * d[1].1 };
    let db2 = |k: usize| if k == 0 { d[2].0 + i * d[3].0 } else { d[2].1 + i * d[3].1 };
    let rot = i * frame.phase();
    let r1 = db1(0) + u1 * f1 - rot * (db2(1) + u2 * f2).conj();
    let r2 = db2(0) + u2 * f1 + rot * (db1(1) + u1 * f2).conj();
    Ok(0.5 * r1.norm().max(r2.norm()))
}

fn complex_partials(f: &ComplexField, p: &ThetaPoint, h: f64) -> Result<[Complex64; 4]> {
    if !(h > 0.0) {
        return Err(Error::InvalidStencil("step must be positive"));
    }
    check_margin(f.domain, p, h)?;
    Ok([0, 1, 2, 3].map(|k| (f.eval_at(&p.offset(k, h)) - f.eval_at(&p.offset(k, -h))) / (2.0 * h)))
}

/// Residual of `df/dzbar1 = -alpha f`, `df/dzbar2 = -beta f`.
pub fn cr_residual_alpha_beta(
    f: &ComplexField,
    alpha: Complex64,
    beta: Complex64,
    point: &ThetaPoint,
    h: f64,
) -> Result<f64> {
    let d = complex_partials(f, point, h)?;
    let v = f.eval_at(point);
    let i = Complex64::i();
    let r1 = (d[0] + i * d[1]) * 0.5 + alpha * v;
    let r2 = (d[2] + i * d[3]) * 0.5 + beta * v;
    Ok(r1.norm().max(r2.norm()))
}

/// Residual of the anti-system `dg/dzbar1 = -alpha g`, `dg/dz2 = -conj(beta) g`.
pub fn cr_residual_anti_alpha_beta(
    g: &ComplexField,
    alpha: Complex64,
    beta: Complex64,
    point: &ThetaPoint,
    h: f64,
) -> Result<f64> {
    let d = complex_partials(g, point, h)?;
    let v = g.eval_at(point);
    let i = Complex64::i();
    let r1 = (d[0] + i * d[1]) * 0.5 + alpha * v;
    let r2 = (d[2] - i * d[3]) * 0.5 + beta.conj() * v;
    Ok(r1.norm().max(r2.norm()))
}

/// Overflow-checked real exponential weight with the default bound.
pub fn checked_weight(exponent: f64) -> Result<f64> {
    checked_exp(exponent, DEFAULT_EXP_BOUND)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn monomial_values() {
        assert_eq!(holomorphic_monomial(0, 0).eval(c(2.0, 1.0), c(5.0, 0.0)), c(1.0, 0.0));
        assert_eq!(holomorphic_monomial(1, 0).eval(c(2.0, 1.0), c(5.0, 0.0)), c(2.0, 1.0));
        let a = holomorphic_monomial(2, 1).mul(&holomorphic_monomial(1, 3));
        let b = holomorphic_monomial(3, 4);
        let (z1, z2) = (c(0.3, -0.8), c(-0.5, 0.2));
        assert!((a.eval(z1, z2) - b.eval(z1, z2)).norm() < 1e-14);
    }

    #[test]
    fn monomial_is_in_kernel_for_all_frames() {
        let p = ThetaPoint::new(0.2, -0.1, 0.3, 0.15);
        for t in [0.0, 0.7, 2.5] {
            let fr = ThetaFrame::new(t);
            let f = holomorphic_monomial(3, 2).to_field(fr);
            let r = cr_residual_theta_u(&f, Quaternion::ZERO, &fr, &p, 1e-3).unwrap();
            assert!(r < 1e-5, "theta {t}: {r}");
        }
    }

    #[test]
    fn u_generator_certified() {
        let fr = ThetaFrame::new(0.4);
        let u = Quaternion::new(0.5, -0.3, 0.2, 0.7);
        let one = Field::constant(fr, Quaternion::ONE);
        let f = u_hyperholomorphic_from(&one, u, &fr);
        let p = ThetaPoint::new(0.1, 0.2, -0.3, 0.05);
        assert!(cr_residual_theta_u(&f, u, &fr, &p, 1e-3).unwrap() < 1e-6);
        let z1 = holomorphic_monomial(1, 0).to_field(fr);
        let g = u_hyperholomorphic_from(&z1, Quaternion::ONE, &fr);
        assert!(cr_residual_theta_u(&g, Quaternion::ONE, &fr, &p, 1e-3).unwrap() < 1e-6);
        let same = u_hyperholomorphic_from(&z1, Quaternion::ZERO, &fr);
        assert_eq!(same.eval(&p), z1.eval(&p));
    }

    #[test]
    fn non_members_have_unit_residual() {
        let fr = ThetaFrame::new(0.0);
        let p = ThetaPoint::new(0.1, 0.2, -0.3, 0.05);
        let zb1 = ComplexField::new(|z1, _| z1.conj());
        let r = cr_residual_theta_u(&zb1.to_field(fr), Quaternion::ZERO, &fr, &p, 1e-3).unwrap();
        assert!((r - 1.0).abs() < 1e-8);
        let zb2 = ComplexField::new(|_, z2| z2.conj());
        let r = cr_residual_alpha_beta(&zb2, c(0.0, 0.0), c(0.0, 0.0), &p, 1e-3).unwrap();
        assert!((r - 1.0).abs() < 1e-8);
        let zero = Field::constant(fr, Quaternion::ZERO);
        assert_eq!(cr_residual_theta_u(&zero, Quaternion::ONE, &fr, &p, 1e-3).unwrap(), 0.0);
    }

    #[test]
    fn alpha_beta_generator() {
        let one = holomorphic_monomial(0, 0);
        let f = alpha_beta_holomorphic_from(&one, c(1.0, 0.0), c(0.0, 0.0));
        let v = f.eval(c(1.0, 1.0), c(0.0, 0.0));
        assert!((v - (-c(1.0, -1.0)).exp()).norm() < 1e-15);
        let h = holomorphic_monomial(1, 1);
        let (a, b) = (c(1.0, 1.0), c(2.0, 0.0));
        let g = alpha_beta_holomorphic_from(&h, a, b);
        let p = ThetaPoint::new(0.2, 0.1, -0.1, 0.3);
        let r1 = cr_residual_alpha_beta(&g, a, b, &p, 1e-3).unwrap();
        let r2 = cr_residual_alpha_beta(&g, a, b, &p, 5e-4).unwrap();
        assert!(r1 < 1e-5 && r2 < r1 / 3.5, "{r1} {r2}");
        let same = alpha_beta_holomorphic_from(&h, c(0.0, 0.0), c(0.0, 0.0));
        assert_eq!(same.eval(p.z1(), p.z2()), h.eval(p.z1(), p.z2()));
    }

    #[test]
    fn anti_system_generator() {
        let (a, b) = (c(0.3, -0.2), c(-0.4, 0.5));
        // e^{-(alpha zbar1 + conj(beta) z2)} times a function of (z1, zbar2).
        let g = ComplexField::new(move |z1, z2| (-(a * z1.conj() + b.conj() * z2)).exp() * z1 * z2.conj());
        let p = ThetaPoint::new(0.2, 0.1, -0.1, 0.3);
        assert!(cr_residual_anti_alpha_beta(&g, a, b, &p, 1e-3).unwrap() < 1e-5);
        assert!(cr_residual_alpha_beta(&g, a, b, &p, 1e-3).unwrap() > 1e-2);
    }

    #[test]
    fn wirtinger_system_maps_to_u_class() {
        let fr = ThetaFrame::new(1.3);
        let (a, b) = (c(0.3, -0.2), c(-0.4, 0.5));
        let f = alpha_beta_holomorphic_from(&holomorphic_monomial(2, 1), a, b);
        let u = alpha_beta_to_u(a, b, &fr);
        let p = ThetaPoint::new(0.2, 0.1, -0.1, 0.3);
        assert!(cr_residual_theta_u(&f.to_field(fr), u, &fr, &p, 1e-3).unwrap() < 1e-5);
    }

    #[test]
    fn boundary_margin_is_enforced() {
        let fr = ThetaFrame::new(0.0);
        let f = Field::constant(fr, Quaternion::ONE).with_domain(Ball::unit());
        let p = ThetaPoint::new(0.9995, 0.0, 0.0, 0.0);
        assert!(matches!(
            cr_residual_theta_u(&f, Quaternion::ZERO, &fr, &p, 1e-3),
            Err(Error::BoundaryMargin { .. })
        ));
    }
}
