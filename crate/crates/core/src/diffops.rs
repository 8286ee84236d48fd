//! Finite-difference realizations of the frame operators `D`, `D_r`, their
//! conjugates, the `u`-perturbed versions and the Laplacian.
//!
//! `D f = sum_k psi_k df/dc_k` (left), `D_r f = sum_k df/dc_k psi_k` (right).
//! When a field carries analytic partials they are used instead of the stencil.

use crate::fields::Field;
use crate::{Error, Quaternion, Result, ThetaFrame, ThetaPoint};

pub const DEFAULT_STEP: f64 = 1e-3;

/// Central-difference stencil with step `h` and order 2 or 4.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stencil {
    pub h: f64,
    pub order: u8,
}

impl Default for Stencil {
    fn default() -> Self {
        Self { h: DEFAULT_STEP, order: 2 }
    }
}

impl Stencil {
    pub fn new(h: f64, order: u8) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidStencil("step must be positive and finite"));
        }
        if order != 2 && order != 4 {
            return Err(Error::InvalidStencil("order must be 2 or 4"));
        }
        Ok(Self { h, order })
    }

    /// Largest coordinate offset the stencil touches.
    pub fn reach(&self) -> f64 {
        if self.order == 4 {
            2.0 * self.h
        } else {
            self.h
        }
    }

    pub fn halved(&self) -> Self {
        Self { h: 0.5 * self.h, order: self.order }
    }

    /// First partials of `f` along each coordinate.
    pub fn partials_fd<F>(&self, f: F, p: &ThetaPoint) -> [Quaternion; 4]
    where
        F: Fn(&ThetaPoint) -> Quaternion,
    {
        let h = self.h;
        [0, 1, 2, 3].map(|k| {
            let d1 = f(&p.offset(k, h)) - f(&p.offset(k, -h));
            if self.order == 4 {
                let d2 = f(&p.offset(k, 2.0 * h)) - f(&p.offset(k, -2.0 * h));
                (d1 * 8.0 - d2) / (12.0 * h)
            } else {
                d1 / (2.0 * h)
            }
        })
    }

    /// Pure second partials `d^2 f / dc_k^2`.
    pub fn second_partials_fd<F>(&self, f: F, p: &ThetaPoint) -> [Quaternion; 4]
    where
        F: Fn(&ThetaPoint) -> Quaternion,
    {
        let h = self.h;
        let f0 = f(p);
        [0, 1, 2, 3].map(|k| {
            let s1 = f(&p.offset(k, h)) + f(&p.offset(k, -h));
            if self.order == 4 {
                let s2 = f(&p.offset(k, 2.0 * h)) + f(&p.offset(k, -2.0 * h));
                (s1 * 16.0 - s2 - f0 * 30.0) / (12.0 * h * h)
            } else {
                (s1 - f0 * 2.0) / (h * h)
            }
        })
    }

    fn check(&self, f: &Field, p: &ThetaPoint) -> Result<()> {
        if let Some(b) = f.domain {
            let d = b.margin(p);
            if d < self.reach() {
                return Err(Error::BoundaryMargin { distance: d, required: self.reach() });
            }
        }
        Ok(())
    }
}

/// Partials of a field: analytic when attached, otherwise by the stencil.
pub fn partials(f: &Field, point: &ThetaPoint, stencil: &Stencil) -> Result<[Quaternion; 4]> {
    stencil.check(f, point)?;
    Ok(match f.gradient(point) {
        Some(g) => g,
        None => stencil.partials_fd(|q| f.eval(q), point),
    })
}

/// Partials by the stencil even if an analytic gradient is attached.
pub fn partials_numeric(f: &Field, point: &ThetaPoint, stencil: &Stencil) -> Result<[Quaternion; 4]> {
    stencil.check(f, point)?;
    Ok(stencil.partials_fd(|q| f.eval(q), point))
}

fn left_sum(b: [Quaternion; 4], d: [Quaternion; 4]) -> Quaternion {
    b[0] * d[0] + b[1] * d[1] + b[2] * d[2] + b[3] * d[3]
}

fn right_sum(b: [Quaternion; 4], d: [Quaternion; 4]) -> Quaternion {
    d[0] * b[0] + d[1] * b[1] + d[2] * b[2] + d[3] * b[3]
}

fn conj_basis(frame: &ThetaFrame) -> [Quaternion; 4] {
    frame.psi().map(|q| q.conj())
}

pub fn d_left(f: &Field, frame: &ThetaFrame, point: &ThetaPoint, stencil: &Stencil) -> Result<Quaternion> {
    Ok(left_sum(*frame.psi(), partials(f, point, stencil)?))
}

pub fn d_right(f: &Field, frame: &ThetaFrame, point: &ThetaPoint, stencil: &Stencil) -> Result<Quaternion> {
    Ok(right_sum(*frame.psi(), partials(f, point, stencil)?))
}

/// `D f + u f`.
pub fn d_u_left(
    f: &Field,
    u: Quaternion,
    frame: &ThetaFrame,
    point: &ThetaPoint,
    stencil: &Stencil,
) -> Result<Quaternion> {
    Ok(d_left(f, frame, point, stencil)? + u * f.eval(point))
}

/// `D_r f + f u`.
pub fn d_r_u(
    f: &Field,
    u: Quaternion,
    frame: &ThetaFrame,
    point: &ThetaPoint,
    stencil: &Stencil,
) -> Result<Quaternion> {
    Ok(d_right(f, frame, point, stencil)? + f.eval(point) * u)
}

pub fn d_conj_left(f: &Field, frame: &ThetaFrame, point: &ThetaPoint, stencil: &Stencil) -> Result<Quaternion> {
    Ok(left_sum(conj_basis(frame), partials(f, point, stencil)?))
}

pub fn d_conj_right(f: &Field, frame: &ThetaFrame, point: &ThetaPoint, stencil: &Stencil) -> Result<Quaternion> {
    Ok(right_sum(conj_basis(frame), partials(f, point, stencil)?))
}

/// `conj(D) f + v f`.
pub fn d_conj_u_left(
    f: &Field,
    v: Quaternion,
    frame: &ThetaFrame,
    point: &ThetaPoint,
    stencil: &Stencil,
) -> Result<Quaternion> {
    Ok(d_conj_left(f, frame, point, stencil)? + v * f.eval(point))
}

/// Componentwise 4D Laplacian by second central differences.
pub fn laplacian(f: &Field, point: &ThetaPoint, stencil: &Stencil) -> Result<Quaternion> {
    stencil.check(f, point)?;
    let s = stencil.second_partials_fd(|q| f.eval(q), point);
    Ok(s[0] + s[1] + s[2] + s[3])
}

/// Which first-order operator [`apply`] builds as a new field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Operator {
    Left,
    Right,
    ConjLeft,
    ConjRight,
    /// `D + u`.
    LeftU(Quaternion),
    /// `D_r + .u`.
    RightU(Quaternion),
    /// `conj(D) + v`.
    ConjLeftU(Quaternion),
}

/// The image of `f` under `op`, as a field evaluated by the stencil. Points
/// violating the margin evaluate to NaN.
pub fn apply(op: Operator, f: &Field, frame: ThetaFrame, stencil: Stencil) -> Field {
    let g = f.clone();
    let mut out = Field::new(frame, move |p| {
        let r = match op {
            Operator::Left => d_left(&g, &frame, p, &stencil),
            Operator::Right => d_right(&g, &frame, p, &stencil),
            Operator::ConjLeft => d_conj_left(&g, &frame, p, &stencil),
            Operator::ConjRight => d_conj_right(&g, &frame, p, &stencil),
            Operator::LeftU(u) => d_u_left(&g, u, &frame, p, &stencil),
            Operator::RightU(u) => d_r_u(&g, u, &frame, p, &stencil),
            Operator::ConjLeftU(v) => d_conj_u_left(&g, v, &frame, p, &stencil),
        };
        r.unwrap_or(Quaternion::new(f64::NAN, f64::NAN, f64::NAN, f64::NAN))
    })
    .with_smoothness(f.smoothness);
    out.domain = f.domain;
    out
}

/// `|D(conj(D) f) - laplacian(f)|` with the same stencil for both sides.
pub fn factorization_gap(f: &Field, frame: &ThetaFrame, point: &ThetaPoint, stencil: &Stencil) -> Result<f64> {
    let inner = apply(Operator::ConjLeft, &f.clone().without_gradient(), *frame, *stencil);
    let lhs = d_left(&inner, frame, point, stencil)?;
    Ok((lhs - laplacian(f, point, stencil)?).norm())
}

/// Right-variant gap `|D_r(conj(D_r) f) - laplacian(f)|`.
pub fn factorization_gap_right(f: &Field, frame: &ThetaFrame, point: &ThetaPoint, stencil: &Stencil) -> Result<f64> {
    let inner = apply(Operator::ConjRight, &f.clone().without_gradient(), *frame, *stencil);
    let lhs = d_right(&inner, frame, point, stencil)?;
    Ok((lhs - laplacian(f, point, stencil)?).norm())
}

/// Gap `|conj(D)_{conj u}(D_u f) - (laplacian(f) + |u|^2 f)|`. Vanishes up to
/// discretization when `u` is real and `f` does not depend on `c0`.
pub fn helmholtz_gap(
    f: &Field,
    u: Quaternion,
    frame: &ThetaFrame,
    point: &ThetaPoint,
    stencil: &Stencil,
) -> Result<f64> {
    let inner = apply(Operator::LeftU(u), &f.clone().without_gradient(), *frame, *stencil);
    let lhs = d_conj_u_left(&inner, u.conj(), frame, point, stencil)?;
    let rhs = laplacian(f, point, stencil)? + f.eval(point) * u.norm_sqr();
    Ok((lhs - rhs).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{holomorphic_monomial, u_hyperholomorphic_from, ComplexField};
    use crate::geometry::Ball;

    fn p0() -> ThetaPoint {
        ThetaPoint::new(0.21, -0.13, 0.34, 0.07)
    }

    fn st() -> Stencil {
        Stencil::default()
    }

    #[test]
    fn constants_and_coordinates() {
        for t in [0.0, 1.1, 4.0] {
            let fr = ThetaFrame::new(t);
            let c = Field::constant(fr, Quaternion::new(1.0, 2.0, -3.0, 0.5)).without_gradient();
            for op in [d_left, d_right, d_conj_left, d_conj_right] {
                assert!(op(&c, &fr, &p0(), &st()).unwrap().norm() < 1e-12);
            }
            let c0 = Field::coordinate(fr, 0).without_gradient();
            assert!((d_left(&c0, &fr, &p0(), &st()).unwrap() - Quaternion::ONE).norm() < 1e-9);
            let c1 = Field::coordinate(fr, 1).without_gradient();
            assert!((d_conj_left(&c1, &fr, &p0(), &st()).unwrap() + Quaternion::I).norm() < 1e-9);
        }
    }

    #[test]
    fn holomorphic_in_kernel() {
        let fr = ThetaFrame::new(0.9);
        let f = holomorphic_monomial(1, 0).to_field(fr);
        assert!(d_left(&f, &fr, &p0(), &st()).unwrap().norm() < 1e-10);
        let g = holomorphic_monomial(2, 3).to_field(fr).without_gradient();
        assert!(d_left(&g, &fr, &p0(), &st()).unwrap().norm() < 1e-5);
    }

    #[test]
    fn right_operator_on_complex_coordinates() {
        let fr = ThetaFrame::new(0.6);
        let z1 = holomorphic_monomial(1, 0).to_field(fr);
        assert!(d_right(&z1, &fr, &p0(), &st()).unwrap().norm() < 1e-12);
        // d/dc2 + (d/dc3) i on the right gives psi2 + i psi3 = 2 psi2 for z2;
        // the right operator annihilates conj(z2) instead.
        let z2 = holomorphic_monomial(0, 1).to_field(fr);
        assert!((d_right(&z2, &fr, &p0(), &st()).unwrap() - fr.basis(2) * 2.0).norm() < 1e-12);
        assert!(d_left(&z2, &fr, &p0(), &st()).unwrap().norm() < 1e-12);
        let zb2 = ComplexField::new(|_, z2| z2.conj()).to_field(fr);
        assert!(d_right(&zb2, &fr, &p0(), &st()).unwrap().norm() < 1e-9);
    }

    #[test]
    fn perturbed_operators() {
        let fr = ThetaFrame::new(2.0);
        let u = Quaternion::new(0.3, -0.4, 0.1, 0.8);
        let one = Field::constant(fr, Quaternion::ONE);
        assert!((d_u_left(&one, u, &fr, &p0(), &st()).unwrap() - u).norm() < 1e-14);
        assert!((d_r_u(&one, u, &fr, &p0(), &st()).unwrap() - u).norm() < 1e-14);
        let h = holomorphic_monomial(1, 2).to_field(fr);
        let f = u_hyperholomorphic_from(&h, u, &fr).without_gradient();
        assert!(d_u_left(&f, u, &fr, &p0(), &st()).unwrap().norm() < 1e-5);
        let z = Field::coordinate(fr, 2);
        assert_eq!(
            d_u_left(&z, Quaternion::ZERO, &fr, &p0(), &st()).unwrap(),
            d_left(&z, &fr, &p0(), &st()).unwrap()
        );
    }

    #[test]
    fn laplacian_examples() {
        let fr = ThetaFrame::new(0.0);
        let harm = Field::new(fr, |p| Quaternion::from_real(p.c[0] * p.c[0] - p.c[1] * p.c[1]));
        assert!(laplacian(&harm, &p0(), &st()).unwrap().norm() < 1e-6);
        let sq = Field::new(fr, |p| Quaternion::from_real(p.c[0] * p.c[0]));
        assert!((laplacian(&sq, &p0(), &st()).unwrap().x0 - 2.0).abs() < 1e-6);
        let r2 = Field::new(fr, |p| Quaternion::from_real(p.norm_sqr()));
        assert!((laplacian(&r2, &p0(), &st()).unwrap().x0 - 8.0).abs() < 1e-6);
    }

    #[test]
    fn factorization_on_exponential() {
        let fr = ThetaFrame::new(0.3);
        let f = Field::new(fr, |p| {
            let v = p.c[0].exp() * p.c[1].sin();
            Quaternion::new(v, 2.0 * v, -v, 0.5 * v)
        });
        let a = factorization_gap(&f, &fr, &p0(), &st()).unwrap();
        let b = factorization_gap(&f, &fr, &p0(), &st().halved()).unwrap();
        assert!(a < 1e-5 && b < a / 3.0, "{a} {b}");
        let c = factorization_gap_right(&f, &fr, &p0(), &st()).unwrap();
        assert!(c < 1e-5);
    }

    #[test]
    fn order_four_is_more_accurate() {
        let fr = ThetaFrame::new(0.0);
        let f = Field::new(fr, |p| Quaternion::from_real((p.c[0] + 2.0 * p.c[3]).sin()));
        let exact = (p0().c[0] + 2.0 * p0().c[3]).cos();
        let e2 = (d_left(&f, &fr, &p0(), &Stencil::new(1e-2, 2).unwrap()).unwrap().x0 - exact).abs();
        let e4 = (d_left(&f, &fr, &p0(), &Stencil::new(1e-2, 4).unwrap()).unwrap().x0 - exact).abs();
        assert!(e4 < e2 * 1e-2, "{e2} {e4}");
    }

    #[test]
    fn helmholtz_special_case() {
        let fr = ThetaFrame::new(1.7);
        let f = Field::new(fr, |p| {
            Quaternion::new(p.c[1] * p.c[2], (p.c[3]).sin(), p.c[1] * p.c[1], 1.0 + p.c[2])
        });
        let g = helmholtz_gap(&f, Quaternion::from_real(0.7), &fr, &p0(), &st()).unwrap();
        assert!(g < 1e-5, "{g}");
        let f0 = Field::new(fr, |p| Quaternion::from_real(p.c[0] * p.c[0]));
        let g0 = helmholtz_gap(&f0, Quaternion::from_real(0.7), &fr, &p0(), &st()).unwrap();
        assert!(g0 > 0.1);
    }

    #[test]
    fn margin_and_stencil_errors() {
        assert!(Stencil::new(0.0, 2).is_err());
        assert!(Stencil::new(1e-3, 3).is_err());
        let fr = ThetaFrame::new(0.0);
        let f = ComplexField::new(|z1, _| z1).to_field(fr).with_domain(Ball::unit());
        let edge = ThetaPoint::new(0.0, 0.0, 0.0, 0.9995);
        assert!(matches!(d_left(&f, &fr, &edge, &st()), Err(Error::BoundaryMargin { .. })));
    }
}
