//! Quaternionic fractional-linear maps `T(z) = (az + b)(cz + d)^{-1}`, their
//! conformal weights, the covariance of `D + u` and the weighted L2 isometry.

#[allow(unused_imports)]
use num_traits::Float;

use crate::diffops::{self, Stencil};
use crate::fields::Field;
use crate::geometry::Ball;
use crate::linalg::solve_real;
use crate::quadrature::VolumeRule;
use crate::quaternion::{checked_exp, DEFAULT_EXP_BOUND};
use crate::reduce::try_pairwise_sum;
use crate::{Error, Quaternion, Result, ThetaFrame, ThetaPoint};

/// Coefficients are exactly zero or not; there is no tolerance on `c = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MoebiusMap {
    pub a: Quaternion,
    pub b: Quaternion,
    pub c: Quaternion,
    pub d: Quaternion,
    /// Length scale of the working domain; pole margins are `1e-3 * diam`.
    pub diam: f64,
}

const POLE_MARGIN: f64 = 1e-3;

fn inv(q: Quaternion) -> Result<Quaternion> {
    q.inverse().ok_or(Error::InvalidMoebius("non-invertible coefficient"))
}

impl MoebiusMap {
    pub fn new(a: Quaternion, b: Quaternion, c: Quaternion, d: Quaternion) -> Result<Self> {
        let t = Self { a, b, c, d, diam: 1.0 };
        t.validate()?;
        Ok(t)
    }

    pub fn identity() -> Self {
        Self { a: Quaternion::ONE, b: Quaternion::ZERO, c: Quaternion::ZERO, d: Quaternion::ONE, diam: 1.0 }
    }

    /// `z -> a z d^{-1} + b d^{-1}`.
    pub fn affine(a: Quaternion, b: Quaternion, d: Quaternion) -> Result<Self> {
        Self::new(a, b, Quaternion::ZERO, d)
    }

    pub fn with_diam(mut self, diam: f64) -> Self {
        self.diam = diam;
        self
    }

    pub fn is_affine(&self) -> bool {
        self.c == Quaternion::ZERO
    }

    /// `b - a c^{-1} d`, defined for `c != 0`.
    pub fn m(&self) -> Result<Quaternion> {
        Ok(self.b - self.a * inv(self.c)? * self.d)
    }

    fn validate(&self) -> Result<()> {
        if self.is_affine() {
            if (self.a * self.d).norm() == 0.0 {
                return Err(Error::InvalidMoebius("a d must be non-zero when c = 0"));
            }
        } else if self.m()?.norm() == 0.0 {
            return Err(Error::InvalidMoebius("b - a c^{-1} d must be non-zero when c != 0"));
        }
        Ok(())
    }

    /// The pole `-c^{-1} d`, if any.
    pub fn pole(&self) -> Option<Quaternion> {
        self.c.inverse().map(|ci| -(ci * self.d))
    }

    fn check_pole(&self, z: Quaternion) -> Result<()> {
        if let Some(p) = self.pole() {
            let dist = (z - p).norm();
            let margin = POLE_MARGIN * self.diam;
            if dist < margin {
                return Err(Error::PoleProximity { distance: dist, margin });
            }
        }
        Ok(())
    }

    pub fn apply(&self, z: Quaternion) -> Result<Quaternion> {
        self.check_pole(z)?;
        let den = inv(self.c * z + self.d).map_err(|_| Error::PoleProximity { distance: 0.0, margin: 0.0 })?;
        Ok((self.a * z + self.b) * den)
    }

    /// Map acting on psi-coordinates through `frame`.
    pub fn apply_point(&self, frame: &ThetaFrame, p: &ThetaPoint) -> Result<ThetaPoint> {
        Ok(frame.unembed(self.apply(frame.embed(p))?))
    }

    /// The map of the inverse coefficient matrix.
    pub fn inverse_map(&self) -> Result<Self> {
        let (a, b, c, d) = (self.a, self.b, self.c, self.d);
        let (na, nb, nc, nd) = if a.norm() > 0.0 {
            let ai = inv(a)?;
            let s = d - c * ai * b;
            let si = inv(s)?;
            (ai + ai * b * si * c * ai, -(ai * b * si), -(si * c * ai), si)
        } else {
            let (bi, ci) = (inv(b)?, inv(c)?);
            (-(ci * d * bi), ci, bi, Quaternion::ZERO)
        };
        let diam = self.diam;
        Ok(Self { a: na, b: nb, c: nc, d: nd, diam })
    }

    pub fn weights(&self) -> ConformalWeights {
        ConformalWeights { t: *self }
    }
}

/// Conformal weights `A_T`, `B_T`, `C_T`, `rho_T` in closed form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConformalWeights {
    pub t: MoebiusMap,
}

impl ConformalWeights {
    /// `w(z) = c z m^{-1} + d m^{-1}`.
    fn w(&self, z: Quaternion) -> Result<Quaternion> {
        self.t.check_pole(z)?;
        let mi = inv(self.t.m()?)?;
        Ok(self.t.c * z * mi + self.t.d * mi)
    }

    pub fn a_t(&self, z: Quaternion) -> Result<Quaternion> {
        if self.t.is_affine() {
            return Ok(self.t.d.conj());
        }
        let w = self.w(z)?;
        Ok(self.t.m()?.conj() * w.conj() / w.norm_sqr().powi(2))
    }

    pub fn b_t(&self, zeta: Quaternion) -> Result<Quaternion> {
        if self.t.is_affine() {
            return Ok(self.t.a.conj());
        }
        let s = zeta - self.t.a * inv(self.t.c)?;
        Ok(-(self.t.c.conj() * s.conj()) * s.norm_sqr().powi(2))
    }

    pub fn c_t(&self, z: Quaternion) -> Result<Quaternion> {
        let t = &self.t;
        if t.is_affine() {
            return Ok(inv(t.d)? * (t.a.norm_sqr() / t.d.norm()));
        }
        let m = t.m()?;
        let w = self.w(z)?;
        Ok(inv(m)? * w.conj() * (t.c.norm_sqr() / m.norm() / w.norm_sqr().powi(2)))
    }

    pub fn rho_t(&self, z: Quaternion) -> Result<f64> {
        if self.t.is_affine() {
            return Ok(1.0);
        }
        Ok(1.0 / self.w(z)?.norm_sqr())
    }

    /// The positive constant with `C_T = lambda A_T`.
    pub fn lambda(&self) -> Result<f64> {
        let t = &self.t;
        if t.is_affine() {
            Ok(t.a.norm_sqr() / t.d.norm().powi(3))
        } else {
            Ok(t.c.norm_sqr() / t.m()?.norm().powi(3))
        }
    }

    /// `|C_T|^2 rho_T`, the volume Jacobian of `T`.
    pub fn jacobian(&self, z: Quaternion) -> Result<f64> {
        Ok(self.c_t(z)?.norm_sqr() * self.rho_t(z)?)
    }

    /// `delta_T(zeta) = B_T(zeta)^{-1} v A_T(T^{-1} zeta)`.
    pub fn delta(&self, zeta: Quaternion, v: Quaternion) -> Result<Quaternion> {
        let z = self.t.inverse_map()?.apply(zeta)?;
        Ok(inv(self.b_t(zeta)?)? * v * self.a_t(z)?)
    }

    /// `gamma_T(z) = e^{-2<v - u, z>} rho_T(z)`.
    pub fn gamma(&self, frame: &ThetaFrame, z: Quaternion, u: Quaternion, v: Quaternion) -> Result<f64> {
        Ok(pair_exp(frame, v - u, z, -2.0)? * self.rho_t(z)?)
    }
}

fn pair_exp(frame: &ThetaFrame, w: Quaternion, z: Quaternion, scale: f64) -> Result<f64> {
    checked_exp(scale * frame.unembed(w).dot(&frame.unembed(z)), DEFAULT_EXP_BOUND)
}

/// `z -> e^{<v - u, z>} A_T(z) f(T(z))`.
pub fn membership_transport(t: &MoebiusMap, u: Quaternion, v: Quaternion, f: &Field) -> Field {
    let (t, f2, frame) = (*t, f.clone(), f.frame);
    let wts = t.weights();
    Field::new(frame, move |p| {
        let z = frame.embed(p);
        let val = (|| -> Result<Quaternion> {
            let e = pair_exp(&frame, v - u, z, 1.0)?;
            let zeta = frame.unembed(t.apply(z)?);
            Ok(wts.a_t(z)? * f2.eval(&zeta) * e)
        })();
        val.unwrap_or(Quaternion::new(f64::NAN, f64::NAN, f64::NAN, f64::NAN))
    })
}

/// `|(D + u)[e^{<v-u,z>} A_T f o T](z) - e^{<v-u,z>} B_T(T z) ((D + delta_T) f)(T z)|`.
pub fn covariance_residual(
    t: &MoebiusMap,
    u: Quaternion,
    v: Quaternion,
    f: &Field,
    z: &ThetaPoint,
    stencil: &Stencil,
) -> Result<f64> {
    let frame = f.frame;
    let zq = frame.embed(z);
    for k in 0..4 {
        for s in [-1.0, 1.0] {
            t.check_pole(frame.embed(&z.offset(k, s * stencil.reach())))?;
        }
    }
    let g = membership_transport(t, u, v, f);
    let lhs = diffops::d_u_left(&g, u, &frame, z, stencil)?;
    let w = t.weights();
    let zeta_q = t.apply(zq)?;
    let zeta = frame.unembed(zeta_q);
    let delta = w.delta(zeta_q, v)?;
    let inner = diffops::d_left(f, &frame, &zeta, stencil)? + delta * f.eval(&zeta);
    let rhs = w.b_t(zeta_q)? * inner * pair_exp(&frame, v - u, zq, 1.0)?;
    if !lhs.is_finite() {
        return Err(Error::PoleProximity { distance: 0.0, margin: POLE_MARGIN * t.diam });
    }
    Ok((lhs - rhs).norm())
}

/// `|int_Xi conj(e C f o T)(e C g o T) gamma dmu - int_Omega conj(f) g dmu|`
/// with `e = e^{<v-u, .>}`.
#[allow(clippy::too_many_arguments)]
pub fn l2_isometry_residual(
    t: &MoebiusMap,
    u: Quaternion,
    v: Quaternion,
    f: &Field,
    g: &Field,
    rule_xi: &VolumeRule,
    rule_omega: &VolumeRule,
) -> Result<f64> {
    let (lhs, rhs) = l2_isometry_sides(t, u, v, f, g, rule_xi, rule_omega)?;
    Ok((lhs - rhs).norm())
}

pub fn l2_isometry_sides(
    t: &MoebiusMap,
    u: Quaternion,
    v: Quaternion,
    f: &Field,
    g: &Field,
    rule_xi: &VolumeRule,
    rule_omega: &VolumeRule,
) -> Result<(Quaternion, Quaternion)> {
    let frame = f.frame;
    let w = t.weights();
    let lhs = try_pairwise_sum(rule_xi.len(), |i| {
        let z = frame.embed(&rule_xi.nodes[i]);
        let zeta = frame.unembed(t.apply(z)?);
        let c = w.c_t(z)? * pair_exp(&frame, v - u, z, 1.0)?;
        let a = c * f.eval(&zeta);
        let b = c * g.eval(&zeta);
        Ok::<_, Error>(a.conj() * b * (w.gamma(&frame, z, u, v)? * rule_xi.weights[i]))
    })?;
    let rhs = try_pairwise_sum(rule_omega.len(), |i| {
        let p = &rule_omega.nodes[i];
        Ok::<_, Error>(f.eval(p).conj() * g.eval(p) * rule_omega.weights[i])
    })?;
    Ok((lhs, rhs))
}

/// Pushes a rule on `Xi` to `T(Xi)` with the Jacobian `|C_T|^2 rho_T`.
pub fn pushforward_rule(t: &MoebiusMap, frame: &ThetaFrame, rule: &VolumeRule) -> Result<VolumeRule> {
    let w = t.weights();
    for p in &rule.nodes {
        t.check_pole(frame.embed(p))?;
    }
    Ok(rule.pushforward(
        |p| t.apply_point(frame, p).unwrap_or(*p),
        |p| w.jacobian(frame.embed(p)).unwrap_or(f64::NAN),
    ))
}

/// The ball `T(ball)`, for maps whose pole lies outside the closed ball.
pub fn image_ball(t: &MoebiusMap, frame: &ThetaFrame, ball: &Ball) -> Result<Ball> {
    if let Some(p) = t.pole() {
        let dist = ball.margin(&frame.unembed(p));
        if dist > -POLE_MARGIN * t.diam {
            return Err(Error::PoleProximity { distance: -dist, margin: POLE_MARGIN * t.diam });
        }
    }
    let r = ball.radius;
    let dirs: [[f64; 4]; 5] = [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [-0.5, -0.5, -0.5, -0.5],
    ];
    // |x|^2 = 2 <center, x> + k through five image points.
    let mut a = alloc::vec::Vec::with_capacity(25);
    let mut rhs = alloc::vec::Vec::with_capacity(5);
    for d in dirs {
        let p = ThetaPoint::from_array([0, 1, 2, 3].map(|k| ball.center.c[k] + r * d[k]));
        let x = t.apply_point(frame, &p)?;
        a.extend_from_slice(&[2.0 * x.c[0], 2.0 * x.c[1], 2.0 * x.c[2], 2.0 * x.c[3], 1.0]);
        rhs.push(x.norm_sqr());
    }
    let s = solve_real(a, rhs)?;
    let center = ThetaPoint::new(s[0], s[1], s[2], s[3]);
    let radius = (s[4] + center.norm_sqr()).sqrt();
    Ok(Ball::new(center, radius))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::ball4_volume_rule;

    fn q(a: f64, b: f64, c: f64, d: f64) -> Quaternion {
        Quaternion::new(a, b, c, d)
    }

    fn generic() -> MoebiusMap {
        MoebiusMap::new(q(1.0, 0.2, -0.1, 0.3), q(0.5, 0.1, 0.4, -0.2), q(0.1, -0.2, 0.15, 0.05), q(1.2, 0.1, 0.0, -0.3))
            .unwrap()
    }

    #[test]
    fn apply_examples() {
        let z = q(0.3, -0.2, 0.1, 0.4);
        assert_eq!(MoebiusMap::identity().apply(z).unwrap(), z);
        let s = MoebiusMap::affine(Quaternion::from_real(2.0), Quaternion::ZERO, Quaternion::ONE).unwrap();
        assert_eq!(s.apply(z).unwrap(), z * 2.0);
        let tr = MoebiusMap::affine(Quaternion::ONE, Quaternion::J, Quaternion::ONE).unwrap();
        assert_eq!(tr.apply(z).unwrap(), z + Quaternion::J);
        assert!((tr.inverse_map().unwrap().apply(z).unwrap() - (z - Quaternion::J)).norm() < 1e-15);
    }

    #[test]
    fn invalid_maps_rejected() {
        assert!(MoebiusMap::new(Quaternion::ZERO, Quaternion::ONE, Quaternion::ZERO, Quaternion::ONE).is_err());
        // b = a c^{-1} d.
        let (a, c, d) = (q(1.0, 1.0, 0.0, 0.0), q(0.0, 0.0, 1.0, 0.0), q(2.0, 0.0, 0.0, 1.0));
        let b = a * c.inverse().unwrap() * d;
        assert!(MoebiusMap::new(a, b, c, d).is_err());
    }

    #[test]
    fn inverse_round_trip() {
        let zero_a = MoebiusMap::new(Quaternion::ZERO, q(0.5, 0.1, 0.0, 0.2), q(1.0, 0.0, 0.3, 0.0), q(0.2, 0.0, 0.0, 1.0)).unwrap();
        for t in [generic(), zero_a, MoebiusMap::affine(q(1.0, 2.0, 0.0, 0.5), q(0.0, 1.0, 1.0, 0.0), q(0.5, 0.0, -1.0, 0.0)).unwrap()] {
            let ti = t.inverse_map().unwrap();
            for z in [q(0.3, -0.2, 0.1, 0.4), q(-0.5, 0.0, 0.2, 0.1)] {
                assert!((ti.apply(t.apply(z).unwrap()).unwrap() - z).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn pole_is_refused() {
        let t = generic();
        assert!(matches!(t.apply(t.pole().unwrap()), Err(Error::PoleProximity { .. })));
    }

    #[test]
    fn affine_weights() {
        let t = MoebiusMap::affine(Quaternion::ONE, Quaternion::ZERO, Quaternion::ONE).unwrap();
        let w = t.weights();
        let z = q(0.1, 0.2, 0.3, 0.4);
        assert_eq!(w.a_t(z).unwrap(), Quaternion::ONE);
        assert_eq!(w.b_t(z).unwrap(), Quaternion::ONE);
        assert_eq!(w.c_t(z).unwrap(), Quaternion::ONE);
        assert_eq!(w.rho_t(z).unwrap(), 1.0);
        let t = MoebiusMap::affine(q(1.0, 1.0, 0.0, 0.0), Quaternion::ZERO, Quaternion::from_real(2.0)).unwrap();
        let w = t.weights();
        let (a, c) = (w.a_t(z).unwrap(), w.c_t(z).unwrap());
        assert_eq!(a, Quaternion::from_real(2.0));
        assert!((c - a * w.lambda().unwrap()).norm() < 1e-15 && w.lambda().unwrap() > 0.0);
    }

    #[test]
    fn general_weights_are_proportional_with_jacobian() {
        let t = generic();
        let w = t.weights();
        let z = q(0.1, -0.2, 0.05, 0.3);
        let lam = w.lambda().unwrap();
        assert!((w.c_t(z).unwrap() - w.a_t(z).unwrap() * lam).norm() < 1e-12 * w.c_t(z).unwrap().norm());
        // Finite-difference volume Jacobian of T against |C|^2 rho.
        let fr = ThetaFrame::new(0.0);
        let p = fr.unembed(z);
        let h = 1e-5;
        let mut m = [[0.0; 4]; 4];
        for k in 0..4 {
            let a = t.apply_point(&fr, &p.offset(k, h)).unwrap();
            let b = t.apply_point(&fr, &p.offset(k, -h)).unwrap();
            for r in 0..4 {
                m[r][k] = (a.c[r] - b.c[r]) / (2.0 * h);
            }
        }
        let det = det4(m);
        assert!((det.abs() - w.jacobian(z).unwrap()).abs() < 1e-6 * det.abs());
    }

    fn det4(m: [[f64; 4]; 4]) -> f64 {
        let mut a = m;
        let mut det = 1.0;
        for c in 0..4 {
            let p = (c..4).max_by(|&i, &j| a[i][c].abs().partial_cmp(&a[j][c].abs()).unwrap()).unwrap();
            if p != c {
                a.swap(p, c);
                det = -det;
            }
            det *= a[c][c];
            for r in c + 1..4 {
                let f = a[r][c] / a[c][c];
                for k in c..4 {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
        det
    }

    #[test]
    fn delta_of_identity_is_v() {
        let v = q(0.3, -0.1, 0.2, 0.7);
        let d = MoebiusMap::identity().weights().delta(q(0.1, 0.2, 0.0, 0.0), v).unwrap();
        assert_eq!(d, v);
    }

    #[test]
    fn chain_rule_both_branches() {
        let fr = ThetaFrame::new(0.7);
        let f = Field::new(fr, |p| {
            Quaternion::new(p.c[0] * p.c[1], 1.0 + p.c[2] * p.c[2], p.c[3] - p.c[0], 0.5 * p.c[1] * p.c[3])
        });
        let z = ThetaPoint::new(0.1, -0.2, 0.15, 0.05);
        let st = Stencil::default();
        let (u, v) = (q(0.2, 0.1, -0.3, 0.1), q(-0.1, 0.4, 0.0, 0.2));
        let aff = MoebiusMap::affine(q(1.0, 0.5, 0.0, -0.2), q(0.1, 0.0, 0.3, 0.0), q(0.8, 0.0, 0.2, 0.1)).unwrap();
        let r = covariance_residual(&aff, u, v, &f, &z, &st).unwrap();
        assert!(r < 1e-5, "affine {r}");
        let r = covariance_residual(&MoebiusMap::identity(), u, u, &f, &z, &st).unwrap();
        assert!(r < 1e-6, "identity {r}");
        let r = covariance_residual(&generic(), u, v, &f, &z, &st).unwrap();
        assert!(r < 1e-3, "generic {r}");
    }

    #[test]
    fn isometry_identity_and_scaling() {
        let fr = ThetaFrame::new(0.0);
        let f = Field::new(fr, |p| Quaternion::new(1.0 + p.c[0], p.c[1], 0.0, p.c[2]));
        let xi = ball4_volume_rule(ThetaPoint::ORIGIN, 0.5, 2).unwrap();
        let id = MoebiusMap::identity();
        let u = q(0.1, 0.0, 0.2, 0.0);
        assert_eq!(l2_isometry_residual(&id, u, u, &f, &f, &xi, &xi).unwrap(), 0.0);
        let s = MoebiusMap::affine(Quaternion::from_real(2.0), Quaternion::ZERO, Quaternion::ONE).unwrap();
        let one = Field::constant(fr, Quaternion::ONE);
        let omega = ball4_volume_rule(ThetaPoint::ORIGIN, 1.0, 2).unwrap();
        let (l, r) = l2_isometry_sides(&s, Quaternion::ZERO, Quaternion::ZERO, &one, &one, &xi, &omega).unwrap();
        assert!((l - r).norm() < 1e-12 && (r.x0 - core::f64::consts::PI.powi(2) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn image_ball_of_generic_map() {
        let fr = ThetaFrame::new(0.3);
        let t = generic();
        let b = Ball::new(ThetaPoint::ORIGIN, 0.5);
        let img = image_ball(&t, &fr, &b).unwrap();
        let p = ThetaPoint::new(0.3, 0.3, 0.1, -0.1).scale(0.5 / ThetaPoint::new(0.3, 0.3, 0.1, -0.1).norm());
        let x = t.apply_point(&fr, &p).unwrap();
        assert!((x.distance(&img.center) - img.radius).abs() < 1e-12);
    }
}
