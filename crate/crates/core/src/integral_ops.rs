//! Cauchy kernels, the Cauchy / Borel-Pompieu / Stokes identities and the
//! volume transform that right-inverts `D + u`.
//!
//! The kernel is `K_u(d) = e^{<u, d>} conj(d) / (2 pi^2 |d|^4)` with `d`
//! embedded through the frame. For `f` in the kernel of `D + u` and `z`
//! inside a sphere, `f(z) = sum K_u(zeta - z) sigma(zeta) f(zeta)`.
//! The volume transform is `T_u f(z) = -int K_u(zeta - z) f(zeta) dmu`, so
//! that `(D + u) T_u f = f`.

use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::diffops::{self, Stencil};
use crate::fields::{ComplexField, Field};
use crate::geometry::Ball;
use crate::quadrature::{ball4_polar_rule, punctured_ball_rule, sigma_at, SurfaceRule, VolumeRule};
use crate::quaternion::{checked_exp, DEFAULT_EXP_BOUND};
use crate::reduce::try_pairwise_sum;
use crate::{Error, Quaternion, Result, ThetaFrame, ThetaPoint};

const TWO_PI2: f64 = 2.0 * PI * PI;

/// Frame and perturbation. The complex parameters `(alpha, beta)` correspond
/// to `u = alpha + i e^{i theta} j beta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelSpec {
    pub frame: ThetaFrame,
    pub u: Quaternion,
}

impl KernelSpec {
    pub fn new(frame: ThetaFrame, u: Quaternion) -> Self {
        Self { frame, u }
    }

    pub fn unweighted(frame: ThetaFrame) -> Self {
        Self { frame, u: Quaternion::ZERO }
    }

    pub fn from_alpha_beta(frame: ThetaFrame, alpha: Complex64, beta: Complex64) -> Self {
        Self { frame, u: frame.embed_pair(alpha, beta) }
    }

    /// Inverse of [`KernelSpec::from_alpha_beta`].
    pub fn alpha_beta(&self) -> (Complex64, Complex64) {
        let c = self.frame.unembed(self.u);
        (c.z1(), c.z2())
    }

    /// psi-coordinates of `u`.
    pub fn u_coords(&self) -> ThetaPoint {
        self.frame.unembed(self.u)
    }

    fn weight(&self, d: &ThetaPoint, scale: f64) -> Result<f64> {
        checked_exp(scale * self.u_coords().dot(d), DEFAULT_EXP_BOUND)
    }
}

/// Which exponential weight multiplies the unperturbed kernel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightConvention {
    /// `e^{<u, zeta - z>}`.
    Difference,
    /// `e^{-<u, zeta + z>}`.
    Sum,
}

/// Unperturbed kernel `conj(d) / (2 pi^2 |d|^4)`.
pub fn theta_kernel(frame: &ThetaFrame, zeta: &ThetaPoint, z: &ThetaPoint) -> Result<Quaternion> {
    let d = *zeta - *z;
    let r2 = d.norm_sqr();
    if !(r2 > 0.0) {
        return Err(Error::CoincidentPoints);
    }
    Ok(frame.embed(&d).conj() / (TWO_PI2 * r2 * r2))
}

pub fn cauchy_kernel(spec: &KernelSpec, zeta: &ThetaPoint, z: &ThetaPoint) -> Result<Quaternion> {
    let k = theta_kernel(&spec.frame, zeta, z)?;
    Ok(k * spec.weight(&(*zeta - *z), 1.0)?)
}

/// Kernel with a selectable weight convention.
pub fn cauchy_kernel_with(
    spec: &KernelSpec,
    convention: WeightConvention,
    zeta: &ThetaPoint,
    z: &ThetaPoint,
) -> Result<Quaternion> {
    match convention {
        WeightConvention::Difference => cauchy_kernel(spec, zeta, z),
        WeightConvention::Sum => Ok(theta_kernel(&spec.frame, zeta, z)? * spec.weight(&(*zeta + *z), -1.0)?),
    }
}

/// The kernel with the second component phase written as `e^{-i theta}`
/// instead of `e^{i theta}`. Agrees with [`cauchy_kernel`] only for
/// `theta` in `{0, pi}`; kept to document the difference.
pub fn cauchy_kernel_conjugate_phase(spec: &KernelSpec, zeta: &ThetaPoint, z: &ThetaPoint) -> Result<Quaternion> {
    let d = *zeta - *z;
    let r2 = d.norm_sqr();
    if !(r2 > 0.0) {
        return Err(Error::CoincidentPoints);
    }
    let w = spec.weight(&d, 1.0)? / (TWO_PI2 * r2 * r2);
    let second = -Complex64::i() * spec.frame.phase().conj() * d.z2().conj();
    Ok(Quaternion::from_complex_pair(d.z1().conj(), second) * w)
}

/// Complex components `(K1, K2)` with `K = K1 - i e^{i theta} K2 j`.
pub fn kernel_k1_k2(
    spec: &KernelSpec,
    zeta: (Complex64, Complex64),
    z: (Complex64, Complex64),
) -> Result<(Complex64, Complex64)> {
    let d = ThetaPoint::from_complex(zeta.0 - z.0, zeta.1 - z.1);
    let r2 = d.norm_sqr();
    if !(r2 > 0.0) {
        return Err(Error::CoincidentPoints);
    }
    let s = spec.weight(&d, 1.0)? / (TWO_PI2 * r2 * r2);
    Ok((d.z1().conj() * s, d.z2().conj() * s))
}

/// Assembles `K1 - i e^{i theta} K2 j`.
pub fn assemble_k1_k2(frame: &ThetaFrame, k1: Complex64, k2: Complex64) -> Quaternion {
    Quaternion::from_complex_pair(k1, -Complex64::i() * frame.phase() * k2)
}

fn check_surface_distance(surface: &SurfaceRule, z: &ThetaPoint) -> Result<()> {
    if let Some((c, r)) = surface.center_radius() {
        let dist = (z.distance(&c) - r).abs();
        let spacing = surface.spacing();
        if dist <= spacing {
            return Err(Error::NearSurface { distance: dist, spacing });
        }
    }
    Ok(())
}

fn surface_sum<F>(surface: &SurfaceRule, frame: &ThetaFrame, z: &ThetaPoint, term: F) -> Result<Quaternion>
where
    F: Fn(&ThetaPoint, Quaternion) -> Result<Quaternion>,
{
    check_surface_distance(surface, z)?;
    try_pairwise_sum(surface.len(), |i| term(&surface.nodes[i], sigma_at(surface, i, frame)?))
}

/// `sum K_u(zeta - z) sigma(zeta) f(zeta)` over the surface rule.
pub fn cauchy_integral(spec: &KernelSpec, f: &Field, surface: &SurfaceRule, z: &ThetaPoint) -> Result<Quaternion> {
    cauchy_integral_with(spec, WeightConvention::Difference, f, surface, z)
}

pub fn cauchy_integral_with(
    spec: &KernelSpec,
    convention: WeightConvention,
    f: &Field,
    surface: &SurfaceRule,
    z: &ThetaPoint,
) -> Result<Quaternion> {
    surface_sum(surface, &spec.frame, z, |zeta, sigma| {
        Ok(cauchy_kernel_with(spec, convention, zeta, z)? * sigma * f.eval(zeta))
    })
}

/// How a weakly singular volume integral about `z` is discretized.
#[derive(Clone, Copy, Debug)]
pub enum VolumeScheme<'a> {
    /// A fixed rule with nodes within `epsilon` of `z` dropped, then
    /// Richardson extrapolation from `epsilon` and `epsilon / 2`. With
    /// `epsilon = 0` the plain rule sum.
    Excised { rule: &'a VolumeRule, epsilon: f64 },
    /// Polar rule about `z`; with `epsilon > 0` the same two-radius
    /// extrapolation, with `epsilon = 0` a single rule reaching `z`.
    Polar { ball: Ball, level: u32, epsilon: f64 },
}

fn rule_sum<F>(rule: &VolumeRule, term: &F) -> Result<Quaternion>
where
    F: Fn(&ThetaPoint) -> Result<Quaternion>,
{
    try_pairwise_sum(rule.len(), |i| Ok(term(&rule.nodes[i])? * rule.weights[i]))
}

fn richardson(coarse: Quaternion, fine: Quaternion) -> Quaternion {
    (fine * 4.0 - coarse) / 3.0
}

/// `int term(zeta) dmu` for an integrand singular like `|zeta - z|^{-3}`.
pub fn singular_volume_integral<F>(scheme: VolumeScheme<'_>, z: &ThetaPoint, term: F) -> Result<Quaternion>
where
    F: Fn(&ThetaPoint) -> Result<Quaternion>,
{
    match scheme {
        VolumeScheme::Excised { rule, epsilon } => {
            if epsilon == 0.0 {
                return rule_sum(rule, &term);
            }
            let coarse = rule_sum(&punctured_ball_rule(rule, *z, epsilon)?, &term)?;
            let fine = rule_sum(&punctured_ball_rule(rule, *z, 0.5 * epsilon)?, &term)?;
            Ok(richardson(coarse, fine))
        }
        VolumeScheme::Polar { ball, level, epsilon } => {
            let rule = |inner| ball4_polar_rule(ball.center, ball.radius, *z, inner, level);
            if epsilon == 0.0 {
                return rule_sum(&rule(0.0)?, &term);
            }
            let coarse = rule_sum(&rule(epsilon)?, &term)?;
            let fine = rule_sum(&rule(0.5 * epsilon)?, &term)?;
            Ok(richardson(coarse, fine))
        }
    }
}

/// `T_u f(z) = -int K_u(zeta - z) f(zeta) dmu` on a fixed rule.
pub fn teodorescu(spec: &KernelSpec, f: &Field, volume: &VolumeRule, z: &ThetaPoint, epsilon: f64) -> Result<Quaternion> {
    teodorescu_scheme(spec, f, VolumeScheme::Excised { rule: volume, epsilon }, z)
}

/// [`teodorescu`] on polar rules about `z`.
pub fn teodorescu_polar(
    spec: &KernelSpec,
    f: &Field,
    ball: Ball,
    level: u32,
    z: &ThetaPoint,
    epsilon: f64,
) -> Result<Quaternion> {
    teodorescu_scheme(spec, f, VolumeScheme::Polar { ball, level, epsilon }, z)
}

pub fn teodorescu_scheme(spec: &KernelSpec, f: &Field, scheme: VolumeScheme<'_>, z: &ThetaPoint) -> Result<Quaternion> {
    singular_volume_integral(scheme, z, |zeta| Ok(-(cauchy_kernel(spec, zeta, z)? * f.eval(zeta))))
}

/// Unperturbed transform through [`theta_kernel`] only.
pub fn theta_teodorescu(frame: &ThetaFrame, f: &Field, scheme: VolumeScheme<'_>, z: &ThetaPoint) -> Result<Quaternion> {
    singular_volume_integral(scheme, z, |zeta| Ok(-(theta_kernel(frame, zeta, z)? * f.eval(zeta))))
}

/// The transform as a field in `z`.
pub fn teodorescu_field(spec: KernelSpec, f: &Field, ball: Ball, level: u32, epsilon: f64) -> Field {
    let g = f.clone();
    Field::new(spec.frame, move |z| {
        teodorescu_polar(&spec, &g, ball, level, z, epsilon)
            .unwrap_or(Quaternion::new(f64::NAN, f64::NAN, f64::NAN, f64::NAN))
    })
    .with_domain(ball)
}

/// Componentwise transform of `f = f1 + f2 j`: returns `(T1, T2)` with
/// `T_u f = T1 + T2 j`, where
/// `T1 = -int w [conj(d1) f1 + i e^{i theta} conj(d2) conj(f2)] / (2 pi^2 |d|^4)` and
/// `T2 = -int w [conj(d1) f2 - i e^{i theta} conj(d2) conj(f1)] / (2 pi^2 |d|^4)`.
pub fn t1_t2(spec: &KernelSpec, f: &Field, scheme: VolumeScheme<'_>, z: &ThetaPoint) -> Result<(Complex64, Complex64)> {
    let rot = Complex64::i() * spec.frame.phase();
    let q = singular_volume_integral(scheme, z, |zeta| {
        let (k1, k2) = kernel_k1_k2(spec, (zeta.z1(), zeta.z2()), (z.z1(), z.z2()))?;
        let (f1, f2) = f.eval(zeta).complex_pair();
        let t1 = k1 * f1 + rot * k2 * f2.conj();
        let t2 = k1 * f2 - rot * k2 * f1.conj();
        Ok(-Quaternion::from_complex_pair(t1, t2))
    })?;
    Ok(q.complex_pair())
}

/// For complex-valued `f`: `(T1, T2) = (-int K1 f, -int K2 conj(f))`, so that
/// `T_u f = T1 - i e^{i theta} T2 j`.
pub fn t1_t2_complex(
    spec: &KernelSpec,
    f: &ComplexField,
    scheme: VolumeScheme<'_>,
    z: &ThetaPoint,
) -> Result<(Complex64, Complex64)> {
    let q = singular_volume_integral(scheme, z, |zeta| {
        let (k1, k2) = kernel_k1_k2(spec, (zeta.z1(), zeta.z2()), (z.z1(), z.z2()))?;
        let v = f.eval_at(zeta);
        Ok(-Quaternion::from_complex_pair(k1 * v, k2 * v.conj()))
    })?;
    Ok(q.complex_pair())
}

/// `|(D + u)(T_u f)(z) - f(z)| / |f(z)|` with polar rules and stencil `h`.
pub fn left_inverse_residual(
    spec: &KernelSpec,
    f: &Field,
    ball: Ball,
    level: u32,
    z: &ThetaPoint,
    epsilon: f64,
    stencil: &Stencil,
) -> Result<f64> {
    let t = teodorescu_field(*spec, f, ball, level, epsilon);
    let lhs = diffops::d_u_left(&t, spec.u, &spec.frame, z, stencil)?;
    let fz = f.eval(z);
    Ok((lhs - fz).norm() / fz.norm().max(f64::MIN_POSITIVE))
}

/// Residuals of the complex first-order system satisfied by the components
/// of `T_u f` for complex `f`, with `u = alpha + i e^{i theta} j beta`:
/// `(dbar1 + alpha) T1 + (d2 + conj(beta)) conj(T2) = f` and
/// `-(dbar1 + alpha) T2 + (d2 + conj(beta)) conj(T1) = 0`, where
/// `dbar1 = d/dc0 + i d/dc1`, `d2 = d/dc2 - i d/dc3`. Both are divided by `|f(z)|`.
pub fn system_inverse_residual(
    spec: &KernelSpec,
    f: &ComplexField,
    ball: Ball,
    level: u32,
    z: &ThetaPoint,
    epsilon: f64,
    stencil: &Stencil,
) -> Result<(f64, f64)> {
    let scheme_at = |p: &ThetaPoint| t1_t2_complex(spec, f, VolumeScheme::Polar { ball, level, epsilon }, p);
    let (alpha, beta) = spec.alpha_beta();
    let h = stencil.h;
    let mut d = [(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)); 4];
    for (k, dk) in d.iter_mut().enumerate() {
        let (p1, p2) = scheme_at(&z.offset(k, h))?;
        let (m1, m2) = scheme_at(&z.offset(k, -h))?;
        *dk = ((p1 - m1) / (2.0 * h), (p2 - m2) / (2.0 * h));
    }
    let (t1, t2) = scheme_at(z)?;
    let i = Complex64::i();
    let dbar1 = |c: usize| if c == 0 { d[0].0 + i * d[1].0 } else { d[0].1 + i * d[1].1 };
    // d2 applied to conj(T): (d/dc2 - i d/dc3) conj(T) = conj((d/dc2 + i d/dc3) T).
    let d2c = |c: usize| if c == 0 { (d[2].0 + i * d[3].0).conj() } else { (d[2].1 + i * d[3].1).conj() };
    let fz = f.eval_at(z);
    let e1 = dbar1(0) + alpha * t1 + d2c(1) + beta.conj() * t2.conj() - fz;
    let e2 = -(dbar1(1) + alpha * t2) + d2c(0) + beta.conj() * t1.conj();
    let s = fz.norm().max(f64::MIN_POSITIVE);
    Ok((e1.norm() / s, e2.norm() / s))
}

/// `|surface term - volume term - f(z)|` for the Borel-Pompieu formula:
/// `f(z) = sum K_u sigma f - int K_u (D + u) f dmu`.
pub fn borel_pompieu_residual(
    spec: &KernelSpec,
    f: &Field,
    surface: &SurfaceRule,
    volume: VolumeScheme<'_>,
    z: &ThetaPoint,
    stencil: &Stencil,
) -> Result<f64> {
    let terms = borel_pompieu_terms(spec, f, surface, volume, z, stencil)?;
    Ok((terms.0 - terms.1 - f.eval(z)).norm())
}

/// `(surface term, volume term)` of the Borel-Pompieu formula.
pub fn borel_pompieu_terms(
    spec: &KernelSpec,
    f: &Field,
    surface: &SurfaceRule,
    volume: VolumeScheme<'_>,
    z: &ThetaPoint,
    stencil: &Stencil,
) -> Result<(Quaternion, Quaternion)> {
    let s = cauchy_integral(spec, f, surface, z)?;
    let v = singular_volume_integral(volume, z, |zeta| {
        let du = diffops::d_u_left(f, spec.u, &spec.frame, zeta, stencil)?;
        Ok(cauchy_kernel(spec, zeta, z)? * du)
    })?;
    Ok((s, v))
}

/// `|int_bd f nu_u g - int (D_{r,u} f g + f D_u g) e^{2<u,.>} dmu|` with
/// `nu_u = e^{2<u,.>} sigma`.
pub fn stokes_residual(
    spec: &KernelSpec,
    f: &Field,
    g: &Field,
    surface: &SurfaceRule,
    volume: &VolumeRule,
    stencil: &Stencil,
) -> Result<f64> {
    let (lhs, rhs) = stokes_sides(spec, f, g, surface, volume, stencil)?;
    Ok((lhs - rhs).norm())
}

pub fn stokes_sides(
    spec: &KernelSpec,
    f: &Field,
    g: &Field,
    surface: &SurfaceRule,
    volume: &VolumeRule,
    stencil: &Stencil,
) -> Result<(Quaternion, Quaternion)> {
    let fr = &spec.frame;
    let lhs = try_pairwise_sum(surface.len(), |i| {
        let zeta = &surface.nodes[i];
        Ok::<_, Error>(f.eval(zeta) * sigma_at(surface, i, fr)? * g.eval(zeta) * spec.weight(zeta, 2.0)?)
    })?;
    let rhs = rule_sum(volume, &|zeta: &ThetaPoint| {
        let a = diffops::d_r_u(f, spec.u, fr, zeta, stencil)? * g.eval(zeta);
        let b = f.eval(zeta) * diffops::d_u_left(g, spec.u, fr, zeta, stencil)?;
        Ok((a + b) * spec.weight(zeta, 2.0)?)
    })?;
    Ok((lhs, rhs))
}

/// `k_eps = e^{|u| eps} / sqrt(pi^2 eps^4 / 2)`: bound of point evaluation by
/// the L2 norm over `B(z, eps)` on the kernel class.
pub fn valuation_bound(u: Quaternion, epsilon: f64) -> f64 {
    (u.norm() * epsilon).exp() / (PI * PI * epsilon.powi(4) / 2.0).sqrt()
}

/// `|f(z)| / (k_eps ||f||_{L2(B(z, eps))})`, at most 1 on the kernel class.
/// `rule` must discretize `B(z, eps)`.
pub fn valuation_ratio(spec: &KernelSpec, f: &Field, rule: &VolumeRule, z: &ThetaPoint, epsilon: f64) -> f64 {
    let l2 = rule.integrate(|p| f.eval(p).norm_sqr()).sqrt();
    f.eval(z).norm() / (valuation_bound(spec.u, epsilon) * l2)
}
