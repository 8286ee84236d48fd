//! Discrete Bergman kernels and projections on finite spans.
//!
//! A basis is a set of functions in the kernel class of `D + u`; the kernel
//! of its span is `B(z, w) = sum_jk phi_j(z) C_jk conj(phi_k(w))` with `C` the
//! inverse of the quadrature Gram matrix `G_jk = int conj(phi_j) phi_k w dmu`.
//! Bases are complex-valued, so their right-H span already contains every
//! `phi q`; listing `phi j` separately would make `G` singular.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::fields::{checked_weight, ComplexField, Field, Wirtinger};
use crate::geometry::Domain;
use crate::linalg::quaternion_hpd_inverse;
use crate::moebius::MoebiusMap;
use crate::quadrature::{RuleDescriptor, VolumeRule};
use crate::quaternion::exp_weight;
use crate::reduce::pairwise_fold;
use crate::{Error, Quaternion, Result, ThetaFrame, ThetaPoint};

/// Default refusal threshold for the 1-norm condition number of `G`.
pub const COND_LIMIT: f64 = 1e10;

/// Relative Gram mismatch above which two kernels are treated as built on
/// different spans.
pub const ALIGNMENT_TOL: f64 = 1e-8;

const LEAF_NODES: usize = 128;

/// Kernel class of a basis, as the perturbation `u` of `D + u`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family {
    /// `e^{-<u,z>} m(z1, z2)` over holomorphic monomials `m`.
    Theta { u: Quaternion },
    /// `e^{-Re(conj(alpha) z1 + conj(beta) z2)} m(z1, z2)`: the same class
    /// with `u = alpha + i e^{i theta} j beta`, read as complex functions.
    AlphaBeta { alpha: Complex64, beta: Complex64 },
}

impl Family {
    pub fn u(&self, frame: &ThetaFrame) -> Quaternion {
        match *self {
            Family::Theta { u } => u,
            Family::AlphaBeta { alpha, beta } => frame.embed_pair(alpha, beta),
        }
    }
}

/// Pullback `phi -> e^{<v-u,z>} C_T(z) phi(T z)` applied to every element.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transport {
    pub map: MoebiusMap,
    pub u: Quaternion,
    pub v: Quaternion,
}

/// Monomials `z1^a z2^b` with `a + b <= degree`, graded, `a` descending.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BasisSpec {
    pub family: Family,
    pub theta: f64,
    pub degree: u32,
    pub transport: Option<Transport>,
}

impl BasisSpec {
    pub fn theta_u(u: Quaternion, theta: f64, degree: u32) -> Self {
        Self { family: Family::Theta { u }, theta, degree, transport: None }
    }

    pub fn alpha_beta(alpha: Complex64, beta: Complex64, theta: f64, degree: u32) -> Self {
        Self { family: Family::AlphaBeta { alpha, beta }, theta, degree, transport: None }
    }

    pub fn with_transport(mut self, t: Transport) -> Self {
        self.transport = Some(t);
        self
    }

    pub fn frame(&self) -> ThetaFrame {
        ThetaFrame::new(self.theta)
    }

    pub fn monomials(&self) -> Vec<(u32, u32)> {
        (0..=self.degree).flat_map(|d| (0..=d).rev().map(move |a| (a, d - a))).collect()
    }

    pub fn len(&self) -> usize {
        let d = self.degree as usize;
        (d + 1) * (d + 2) / 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The class parameter `u` of the span: the family's own parameter, or
    /// the target parameter of the transport.
    pub fn class_u(&self) -> Quaternion {
        match self.transport {
            Some(t) => t.u,
            None => self.family.u(&self.frame()),
        }
    }

    fn eval_plain(&self, frame: &ThetaFrame, p: &ThetaPoint) -> Result<Vec<Quaternion>> {
        let u = self.family.u(frame);
        let e = exp_weight(u, frame.embed(p), frame, -1.0)?;
        let d = self.degree as usize;
        let (z1, z2) = (p.z1(), p.z2());
        let mut pw1 = vec![Complex64::new(1.0, 0.0); d + 1];
        let mut pw2 = pw1.clone();
        for k in 1..=d {
            pw1[k] = pw1[k - 1] * z1;
            pw2[k] = pw2[k - 1] * z2;
        }
        Ok(self
            .monomials()
            .into_iter()
            .map(|(a, b)| Quaternion::from_complex(pw1[a as usize] * pw2[b as usize] * e))
            .collect())
    }

    /// All basis values at `p`.
    pub fn eval_all(&self, p: &ThetaPoint) -> Result<Vec<Quaternion>> {
        let frame = self.frame();
        match self.transport {
            None => self.eval_plain(&frame, p),
            Some(t) => {
                let z = frame.embed(p);
                let zeta = frame.unembed(t.map.apply(z)?);
                let pre = t.map.weights().c_t(z)? * exp_weight(t.v - t.u, z, &frame, 1.0)?;
                Ok(self.eval_plain(&frame, &zeta)?.into_iter().map(|q| pre * q).collect())
            }
        }
    }

    /// Element `k` as a field (NaN where evaluation fails).
    pub fn element(&self, k: usize) -> Field {
        let s = *self;
        Field::new(self.frame(), move |p| s.eval_all(p).map(|v| v[k]).unwrap_or_else(|_| nan()))
    }
}

fn nan() -> Quaternion {
    Quaternion::new(f64::NAN, f64::NAN, f64::NAN, f64::NAN)
}

/// Measure density of an inner product.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Weight {
    Unit,
    /// `e^{2<u,z>}`.
    Lambda(Quaternion),
    /// `e^{2 Re(conj(alpha) z1 + conj(beta) z2)}`, the density that makes
    /// `P_{alpha,beta}` isometric.
    T { alpha: Complex64, beta: Complex64 },
    /// `e^{Re(conj(alpha) z1 + conj(beta) z2)}`, without the factor 2.
    TSingle { alpha: Complex64, beta: Complex64 },
    /// `e^{-2<v-u,z>} rho_T(z)`.
    Gamma { map: MoebiusMap, u: Quaternion, v: Quaternion },
}

impl Weight {
    pub fn eval(&self, frame: &ThetaFrame, p: &ThetaPoint) -> Result<f64> {
        let z = frame.embed(p);
        match *self {
            Weight::Unit => Ok(1.0),
            Weight::Lambda(u) => exp_weight(u, z, frame, 2.0),
            Weight::T { alpha, beta } => exp_weight(frame.embed_pair(alpha, beta), z, frame, 2.0),
            Weight::TSingle { alpha, beta } => exp_weight(frame.embed_pair(alpha, beta), z, frame, 1.0),
            Weight::Gamma { map, u, v } => map.weights().gamma(frame, z, u, v),
        }
    }
}

fn node_weights(rule: &VolumeRule, weight: &Weight, frame: &ThetaFrame) -> Result<Vec<f64>> {
    rule.nodes.iter().zip(&rule.weights).map(|(p, w)| Ok(w * weight.eval(frame, p)?)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix {
    pub spec: BasisSpec,
    pub weight: Weight,
    pub rule: RuleDescriptor,
    pub n: usize,
    /// Row-major `n x n`, Hermitian.
    pub entries: Vec<Quaternion>,
}

impl GramMatrix {
    pub fn at(&self, j: usize, k: usize) -> Quaternion {
        self.entries[j * self.n + k]
    }

    /// `max |G - H| / max |G|`.
    pub fn mismatch(&self, other: &GramMatrix) -> f64 {
        if self.n != other.n {
            return f64::INFINITY;
        }
        let scale = self.entries.iter().map(|q| q.norm()).fold(0.0, f64::max);
        let diff = self.entries.iter().zip(&other.entries).map(|(a, b)| (*a - *b).norm()).fold(0.0, f64::max);
        diff / scale
    }
}

fn accumulate(out: &mut [f64], at: usize, q: Quaternion) {
    let a = q.to_array();
    for (o, v) in out[at..at + 4].iter_mut().zip(a) {
        *o += v;
    }
}

fn read(buf: &[f64], at: usize) -> Quaternion {
    Quaternion::new(buf[at], buf[at + 1], buf[at + 2], buf[at + 3])
}

/// Quadrature Gram matrix of `spec` under `weight`.
pub fn gram(spec: &BasisSpec, rule: &VolumeRule, weight: &Weight) -> Result<GramMatrix> {
    let frame = spec.frame();
    let n = spec.len();
    let w = node_weights(rule, weight, &frame)?;
    let values = rule.nodes.iter().map(|p| spec.eval_all(p)).collect::<Result<Vec<_>>>()?;
    let buf = pairwise_fold(rule.len(), 4 * n * n, LEAF_NODES, &|lo, hi, acc: &mut [f64]| {
        for i in lo..hi {
            let phi = &values[i];
            for j in 0..n {
                let cj = phi[j].conj() * w[i];
                for k in j..n {
                    accumulate(acc, 4 * (j * n + k), cj * phi[k]);
                }
            }
        }
    });
    let mut entries = vec![Quaternion::ZERO; n * n];
    for j in 0..n {
        for k in j..n {
            let g = read(&buf, 4 * (j * n + k));
            entries[j * n + k] = g;
            entries[k * n + j] = g.conj();
        }
        let d = entries[j * n + j];
        entries[j * n + j] = Quaternion::from_real(d.x0);
    }
    Ok(GramMatrix { spec: *spec, weight: *weight, rule: rule.descriptor, n, entries })
}

/// Quadrature inner product `int conj(f) g w dmu`.
pub fn inner(f: &Field, g: &Field, rule: &VolumeRule, weight: &Weight) -> Result<Quaternion> {
    let w = node_weights(rule, weight, &f.frame)?;
    let buf = pairwise_fold(rule.len(), 4, LEAF_NODES, &|lo, hi, acc: &mut [f64]| {
        for i in lo..hi {
            let p = &rule.nodes[i];
            accumulate(acc, 0, f.eval(p).conj() * g.eval(p) * w[i]);
        }
    });
    Ok(read(&buf, 0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteKernel {
    pub spec: BasisSpec,
    pub weight: Weight,
    pub rule: RuleDescriptor,
    pub gram: Vec<Quaternion>,
    /// `G^{-1}`, row-major.
    pub coeffs: Vec<Quaternion>,
    pub cond: f64,
}

/// Kernel of the span with the default condition guard.
pub fn kernel(g: &GramMatrix) -> Result<DiscreteKernel> {
    kernel_with_guard(g, COND_LIMIT)
}

pub fn kernel_with_guard(g: &GramMatrix, limit: f64) -> Result<DiscreteKernel> {
    let (coeffs, cond) = quaternion_hpd_inverse(&g.entries, g.n)?;
    if !(cond <= limit) {
        return Err(Error::IllConditioned { cond, limit });
    }
    Ok(DiscreteKernel { spec: g.spec, weight: g.weight, rule: g.rule, gram: g.entries.clone(), coeffs, cond })
}

impl DiscreteKernel {
    pub fn len(&self) -> usize {
        self.spec.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn frame(&self) -> ThetaFrame {
        self.spec.frame()
    }

    fn c(&self, j: usize, k: usize) -> Quaternion {
        self.coeffs[j * self.len() + k]
    }

    /// `sum_k C_jk conj(phi_k(zeta))` for every `j`.
    fn right_factor(&self, zeta: &ThetaPoint) -> Result<Vec<Quaternion>> {
        let n = self.len();
        let pz = self.spec.eval_all(zeta)?;
        Ok((0..n).map(|j| (0..n).fold(Quaternion::ZERO, |s, k| s + self.c(j, k) * pz[k].conj())).collect())
    }

    pub fn eval(&self, z: &ThetaPoint, zeta: &ThetaPoint) -> Result<Quaternion> {
        let pz = self.spec.eval_all(z)?;
        let r = self.right_factor(zeta)?;
        Ok(pz.iter().zip(&r).fold(Quaternion::ZERO, |s, (a, b)| s + *a * *b))
    }

    /// `B(z, z)`, real up to roundoff.
    pub fn diagonal(&self, z: &ThetaPoint) -> Result<f64> {
        Ok(self.eval(z, z)?.x0)
    }

    /// `z -> B(z, zeta)`.
    pub fn in_first(&self, zeta: &ThetaPoint) -> Result<Field> {
        let r = self.right_factor(zeta)?;
        let spec = self.spec;
        Ok(Field::new(self.frame(), move |p| match spec.eval_all(p) {
            Ok(v) => v.iter().zip(&r).fold(Quaternion::ZERO, |s, (a, b)| s + *a * *b),
            Err(_) => nan(),
        }))
    }

    /// `zeta -> B(z, zeta)`.
    pub fn in_second(&self, z: &ThetaPoint) -> Result<Field> {
        let k = self.clone();
        let z = *z;
        Ok(Field::new(self.frame(), move |p| k.eval(&z, p).unwrap_or_else(|_| nan())))
    }
}

/// Coefficients `c = C m` of the projection, `m_k = int conj(phi_k) f w dmu`.
pub fn project_coefficients(k: &DiscreteKernel, f: &Field, rule: &VolumeRule) -> Result<Vec<Quaternion>> {
    let n = k.len();
    let frame = k.frame();
    let w = node_weights(rule, &k.weight, &frame)?;
    let values = rule.nodes.iter().map(|p| k.spec.eval_all(p)).collect::<Result<Vec<_>>>()?;
    let buf = pairwise_fold(rule.len(), 4 * n, LEAF_NODES, &|lo, hi, acc: &mut [f64]| {
        for i in lo..hi {
            let fi = f.eval(&rule.nodes[i]) * w[i];
            for (j, phi) in values[i].iter().enumerate() {
                accumulate(acc, 4 * j, phi.conj() * fi);
            }
        }
    });
    let m: Vec<Quaternion> = (0..n).map(|j| read(&buf, 4 * j)).collect();
    Ok((0..n).map(|j| (0..n).fold(Quaternion::ZERO, |s, l| s + k.c(j, l) * m[l])).collect())
}

/// Discrete Bergman projection `z -> int B(z, zeta) f(zeta) w dmu`.
pub fn project(k: &DiscreteKernel, f: &Field, rule: &VolumeRule) -> Result<Field> {
    let c = project_coefficients(k, f, rule)?;
    let spec = k.spec;
    Ok(Field::new(k.frame(), move |p| match spec.eval_all(p) {
        Ok(v) => v.iter().zip(&c).fold(Quaternion::ZERO, |s, (a, b)| s + *a * *b),
        Err(_) => nan(),
    }))
}

/// `z -> e^{<u,z>} f(z)`; NaN where the weight overflows.
pub fn s_transform(f: &Field, u: Quaternion, frame: &ThetaFrame) -> Field {
    let (f2, fr) = (f.clone(), *frame);
    Field::new(fr, move |p| match exp_weight(u, fr.embed(p), &fr, 1.0) {
        Ok(e) => f2.eval(p) * e,
        Err(_) => nan(),
    })
}

/// `(z1, z2) -> e^{Re(conj(alpha) z1 + conj(beta) z2)} f`; NaN on overflow.
pub fn p_transform(f: &ComplexField, alpha: Complex64, beta: Complex64) -> ComplexField {
    let e = f.eval.clone();
    let weight = move |z1: Complex64, z2: Complex64| checked_weight((alpha.conj() * z1 + beta.conj() * z2).re);
    let mut out = ComplexField::new(move |z1, z2| match weight(z1, z2) {
        Ok(w) => e(z1, z2) * w,
        Err(_) => Complex64::new(f64::NAN, f64::NAN),
    });
    if let Some(wd) = f.wirtinger.clone() {
        let e = f.eval.clone();
        out = out.with_wirtinger(move |z1, z2| {
            let w = weight(z1, z2).unwrap_or(f64::NAN);
            let (v, d) = (e(z1, z2), wd(z1, z2));
            Wirtinger {
                dz1: (d.dz1 + alpha.conj() * v * 0.5) * w,
                dzb1: (d.dzb1 + alpha * v * 0.5) * w,
                dz2: (d.dz2 + beta.conj() * v * 0.5) * w,
                dzb2: (d.dzb2 + beta * v * 0.5) * w,
            }
        });
    }
    out.domain = f.domain;
    out
}

fn max_pair_residual<F>(probes: &[ThetaPoint], f: F) -> Result<f64>
where
    F: Fn(&ThetaPoint, &ThetaPoint) -> Result<f64>,
{
    let mut worst = 0.0f64;
    for z in probes {
        for w in probes {
            worst = worst.max(f(z, w)?);
        }
    }
    Ok(worst)
}

fn check_aligned(a: &[Quaternion], b: &[Quaternion]) -> Result<()> {
    let scale = a.iter().map(|q| q.norm()).fold(0.0, f64::max);
    let diff = a.iter().zip(b).map(|(x, y)| (*x - *y).norm()).fold(0.0, f64::max);
    let mismatch = if a.len() == b.len() { diff / scale } else { f64::INFINITY };
    if !(mismatch <= ALIGNMENT_TOL) {
        return Err(Error::MisalignedBases { mismatch });
    }
    Ok(())
}

/// `max |B_v(z,w) - e^{<u-v, z+w>} B_u(z,w)|` over probe pairs, for kernels
/// of the `e^{2<u,.>}` and `e^{2<v,.>}` weighted spaces.
pub fn kernel_relation_weighted(
    ku: &DiscreteKernel,
    kv: &DiscreteKernel,
    u: Quaternion,
    v: Quaternion,
    probes: &[ThetaPoint],
) -> Result<f64> {
    if ku.weight != Weight::Lambda(u) || kv.weight != Weight::Lambda(v) || ku.len() != kv.len() {
        return Err(Error::MisalignedBases { mismatch: f64::INFINITY });
    }
    check_aligned(&ku.gram, &kv.gram)?;
    let frame = ku.frame();
    max_pair_residual(probes, |z, w| {
        let e = exp_weight(u - v, frame.embed(&(*z + *w)), &frame, 1.0)?;
        Ok((kv.eval(z, w)? - ku.eval(z, w)? * e).norm())
    })
}

/// Which second-variable combination enters the t-weighted kernel law.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SecondSlot {
    /// `z2 + zeta2`.
    Sum,
    /// `z2 - zeta2`.
    Difference,
}

/// `max |B_{chi,xi}(z,w) - e^{Re(conj(alpha-chi)(z1+w1) + conj(beta-xi)(z2 +/- w2))} B_{alpha,beta}(z,w)|`
/// for kernels of the `t`-weighted complex spaces.
pub fn kernel_relation_t_weight(
    k_ab: &DiscreteKernel,
    k_cx: &DiscreteKernel,
    slot: SecondSlot,
    probes: &[ThetaPoint],
) -> Result<f64> {
    let (Weight::T { alpha, beta }, Weight::T { alpha: chi, beta: xi }) = (k_ab.weight, k_cx.weight) else {
        return Err(Error::MisalignedBases { mismatch: f64::INFINITY });
    };
    check_aligned(&k_ab.gram, &k_cx.gram)?;
    max_pair_residual(probes, |z, w| {
        let s2 = match slot {
            SecondSlot::Sum => z.z2() + w.z2(),
            SecondSlot::Difference => z.z2() - w.z2(),
        };
        let ex = ((alpha - chi).conj() * (z.z1() + w.z1()) + (beta - xi).conj() * s2).re;
        let e = checked_weight(ex)?;
        Ok((k_cx.eval(z, w)? - k_ab.eval(z, w)? * e).norm())
    })
}

/// Bases for the conformal kernel law under an affine `T`: the span on
/// `Omega = T(Xi)` in the class of `D + delta_T`, and its transport to `Xi`.
pub fn conformal_bases(
    map: &MoebiusMap,
    u: Quaternion,
    v: Quaternion,
    theta: f64,
    degree: u32,
    complex: bool,
) -> Result<(BasisSpec, BasisSpec)> {
    if !map.is_affine() {
        return Err(Error::InvalidMoebius("conformal bases need an affine map"));
    }
    let frame = ThetaFrame::new(theta);
    // delta_T is constant when c = 0.
    let delta = map.weights().delta(Quaternion::ZERO, v)?;
    let omega = if complex {
        let (d1, d2) = frame.unembed_pair(delta);
        BasisSpec::alpha_beta(d1, d2, theta, degree)
    } else {
        BasisSpec::theta_u(delta, theta, degree)
    };
    Ok((omega, omega.with_transport(Transport { map: *map, u, v })))
}

/// `max |B_Xi(z,w) - e^{<v-u,z+w>} C_T(z) B_Omega(Tz, Tw) conj(C_T(w))|` over
/// probe pairs in `Xi`.
pub fn kernel_relation_conformal(
    k_omega: &DiscreteKernel,
    k_xi: &DiscreteKernel,
    probes: &[ThetaPoint],
) -> Result<f64> {
    let Some(t) = k_xi.spec.transport else {
        return Err(Error::MisalignedBases { mismatch: f64::INFINITY });
    };
    if k_xi.spec.family != k_omega.spec.family || k_xi.len() != k_omega.len() {
        return Err(Error::MisalignedBases { mismatch: f64::INFINITY });
    }
    check_aligned(&k_omega.gram, &k_xi.gram)?;
    let frame = k_xi.frame();
    let w8 = t.map.weights();
    max_pair_residual(probes, |z, w| {
        let (zq, wq) = (frame.embed(z), frame.embed(w));
        let (tz, tw) = (frame.unembed(t.map.apply(zq)?), frame.unembed(t.map.apply(wq)?));
        let e = exp_weight(t.v - t.u, zq + wq, &frame, 1.0)?;
        let rhs = w8.c_t(zq)? * k_omega.eval(&tz, &tw)? * w8.c_t(wq)?.conj() * e;
        Ok((k_xi.eval(z, w)? - rhs).norm())
    })
}

/// `(2 / pi^2) (1 - z1 conj(w1) - z2 conj(w2))^{-3}`, the kernel of the
/// unweighted holomorphic Bergman space of the unit ball in C^2.
pub fn unit_ball_kernel(z: &ThetaPoint, w: &ThetaPoint) -> Complex64 {
    let s = Complex64::new(1.0, 0.0) - z.z1() * w.z1().conj() - z.z2() * w.z2().conj();
    s.powi(-3) * (2.0 / core::f64::consts::PI.powi(2))
}

/// Set relation between the unweighted and `e^{2<u,.>}`-weighted spaces,
/// from the range of `<u, z>` over the domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InclusionReport {
    /// `<u,z>` bounded on both sides: the spaces coincide.
    Equal { pairing_min: f64, pairing_max: f64 },
    /// `<u,z> <= pairing_max`: unweighted members are weighted members.
    UnweightedInWeighted { pairing_max: f64 },
    /// `<u,z> >= pairing_min`: weighted members are unweighted members.
    WeightedInUnweighted { pairing_min: f64 },
    Inconclusive,
}

/// Range of `<u, z>_theta` over the domain, by interval bounds on the
/// psi-coordinates.
pub fn pairing_range(domain: &Domain, u: Quaternion, frame: &ThetaFrame) -> (f64, f64) {
    let uc = frame.unembed(u);
    match domain {
        Domain::Ball(b) => {
            let c = uc.dot(&b.center);
            let r = uc.norm() * b.radius;
            (c - r, c + r)
        }
        Domain::Box(bx) => {
            let (mut lo, mut hi) = (0.0, 0.0);
            for k in 0..4 {
                let uk = uc.c[k];
                if uk == 0.0 {
                    continue;
                }
                let (a, b) = (uk * bx.lo[k], uk * bx.hi[k]);
                lo += a.min(b);
                hi += a.max(b);
            }
            (lo, hi)
        }
    }
}

pub fn inclusion_report(domain: &Domain, u: Quaternion, frame: &ThetaFrame) -> InclusionReport {
    let (lo, hi) = pairing_range(domain, u, frame);
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => InclusionReport::Equal { pairing_min: lo, pairing_max: hi },
        (false, true) => InclusionReport::UnweightedInWeighted { pairing_max: hi },
        (true, false) => InclusionReport::WeightedInUnweighted { pairing_min: lo },
        (false, false) => InclusionReport::Inconclusive,
    }
}
