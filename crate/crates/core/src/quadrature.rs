//! Deterministic product rules on 4-balls, boxes and 3-spheres, plus
//! singularity-aware variants.
//!
//! Hyperspherical coordinates:
//! `x = c + r (cos chi, sin chi cos t, sin chi sin t cos phi, sin chi sin t sin phi)`
//! with Jacobian `r^3 sin^2 chi sin t`. At level `L` every direction uses
//! `n = 4L` nodes except `phi`, which uses `2n` equispaced midpoints; the rule
//! integrates polynomials of total degree `8L - 4` exactly. No node ever sits
//! at the center, on the boundary or on a coordinate axis.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::reduce::pairwise_sum;
use crate::{Error, Quaternion, Result, ThetaFrame, ThetaPoint};

/// Gauss-Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = alloc::vec![0.0; n];
    let mut w = alloc::vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j - 1) as f64 * z * p2 - (j - 1) as f64 * p3) / j as f64;
            }
            dp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Gauss-Legendre mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
    (x.iter().map(|t| m + h * t).collect(), w.iter().map(|v| h * v).collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RuleKind {
    Ball { center: ThetaPoint, radius: f64 },
    Box { lo: [f64; 4], hi: [f64; 4] },
    /// Ball rule centered at an interior pole.
    Polar { center: ThetaPoint, radius: f64, pole: ThetaPoint, inner: f64 },
    Sphere { center: ThetaPoint, radius: f64 },
    /// Nodes of another rule pushed through a map.
    Pushforward,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RuleDescriptor {
    pub kind: RuleKind,
    pub level: u32,
    /// Excision point and radius, if nodes were dropped.
    pub excision: Option<(ThetaPoint, f64)>,
}

impl RuleDescriptor {
    pub fn new(kind: RuleKind, level: u32) -> Self {
        Self { kind, level, excision: None }
    }

    /// Total degree integrated exactly by the unmodified rule.
    pub fn exact_degree(&self) -> u32 {
        (8 * self.level).saturating_sub(4)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VolumeRule {
    pub nodes: Vec<ThetaPoint>,
    pub weights: Vec<f64>,
    pub descriptor: RuleDescriptor,
    /// Weight mass removed by excision.
    pub excised_volume: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceRule {
    pub nodes: Vec<ThetaPoint>,
    pub weights: Vec<f64>,
    pub normals: Vec<ThetaPoint>,
    pub descriptor: RuleDescriptor,
}

/// Unit 3-sphere rule: directions and weights summing to `2 pi^2`.
fn unit_sphere(level: u32) -> (Vec<[f64; 4]>, Vec<f64>) {
    let n = 4 * level.max(1) as usize;
    let m = 2 * n;
    let (s, ws) = gauss_legendre(n);
    let mut dirs = Vec::with_capacity(n * n * m);
    let mut wts = Vec::with_capacity(n * n * m);
    for kc in 1..=n {
        let chi = kc as f64 * PI / (n as f64 + 1.0);
        let (sc, cc) = chi.sin_cos();
        // Gauss-Chebyshev (second kind) weight already includes sin^2 chi.
        let wc = PI / (n as f64 + 1.0) * sc * sc;
        for (st, wt) in s.iter().zip(&ws) {
            let sin_t = (1.0 - st * st).sqrt();
            for kp in 0..m {
                let phi = (kp as f64 + 0.5) * 2.0 * PI / m as f64;
                let (sp, cp) = phi.sin_cos();
                dirs.push([cc, sc * st, sc * sin_t * cp, sc * sin_t * sp]);
                wts.push(wc * wt * 2.0 * PI / m as f64);
            }
        }
    }
    (dirs, wts)
}

pub fn ball4_volume_rule(center: ThetaPoint, radius: f64, level: u32) -> Result<VolumeRule> {
    if !(radius > 0.0) || level == 0 {
        return Err(Error::InvalidRule("radius must be positive and level at least 1"));
    }
    let n = 4 * level as usize;
    let (r, wr) = gauss_legendre_on(n, 0.0, radius);
    let (dirs, wd) = unit_sphere(level);
    let mut nodes = Vec::with_capacity(n * dirs.len());
    let mut weights = Vec::with_capacity(n * dirs.len());
    for (ri, wri) in r.iter().zip(&wr) {
        let wrad = wri * ri * ri * ri;
        for (d, w) in dirs.iter().zip(&wd) {
            nodes.push(ThetaPoint::from_array([0, 1, 2, 3].map(|k| center.c[k] + ri * d[k])));
            weights.push(wrad * w);
        }
    }
    Ok(VolumeRule {
        nodes,
        weights,
        descriptor: RuleDescriptor::new(RuleKind::Ball { center, radius }, level),
        excised_volume: 0.0,
    })
}

/// Ball rule in polar coordinates about `pole`, restricted to radii
/// `[inner, rho_max(direction)]`. With `inner = 0` it covers the full ball.
pub fn ball4_polar_rule(
    center: ThetaPoint,
    radius: f64,
    pole: ThetaPoint,
    inner: f64,
    level: u32,
) -> Result<VolumeRule> {
    if !(radius > 0.0) || level == 0 || !(inner >= 0.0) {
        return Err(Error::InvalidRule("radius must be positive, level at least 1, inner radius non-negative"));
    }
    let off = pole - center;
    let d2 = off.norm_sqr();
    if d2.sqrt() + inner >= radius {
        return Err(Error::EmptyRule { epsilon: inner });
    }
    let n = 4 * level as usize;
    let (x, wx) = gauss_legendre(n);
    let (dirs, wd) = unit_sphere(level);
    let mut nodes = Vec::with_capacity(n * dirs.len());
    let mut weights = Vec::with_capacity(n * dirs.len());
    for (d, w) in dirs.iter().zip(&wd) {
        let b = off.c[0] * d[0] + off.c[1] * d[1] + off.c[2] * d[2] + off.c[3] * d[3];
        let rho_max = -b + (b * b + radius * radius - d2).sqrt();
        let (m, h) = (0.5 * (rho_max + inner), 0.5 * (rho_max - inner));
        for (t, wt) in x.iter().zip(&wx) {
            let rho = m + h * t;
            nodes.push(ThetaPoint::from_array([0, 1, 2, 3].map(|k| pole.c[k] + rho * d[k])));
            weights.push(w * h * wt * rho * rho * rho);
        }
    }
    let excised = inner.powi(4) * PI * PI / 2.0;
    Ok(VolumeRule {
        nodes,
        weights,
        descriptor: RuleDescriptor {
            kind: RuleKind::Polar { center, radius, pole, inner },
            level,
            excision: if inner > 0.0 { Some((pole, inner)) } else { None },
        },
        excised_volume: excised,
    })
}

/// Tensor Gauss-Legendre rule on a bounded coordinate box, `4L` nodes per axis.
pub fn box4_volume_rule(lo: [f64; 4], hi: [f64; 4], level: u32) -> Result<VolumeRule> {
    if level == 0 || (0..4).any(|k| !(hi[k] > lo[k]) || !lo[k].is_finite() || !hi[k].is_finite()) {
        return Err(Error::InvalidRule("box must be bounded with lo < hi and level at least 1"));
    }
    let n = 4 * level as usize;
    let axes: Vec<(Vec<f64>, Vec<f64>)> = (0..4).map(|k| gauss_legendre_on(n, lo[k], hi[k])).collect();
    let mut nodes = Vec::with_capacity(n.pow(4));
    let mut weights = Vec::with_capacity(n.pow(4));
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    nodes.push(ThetaPoint::new(axes[0].0[a], axes[1].0[b], axes[2].0[c], axes[3].0[d]));
                    weights.push(axes[0].1[a] * axes[1].1[b] * axes[2].1[c] * axes[3].1[d]);
                }
            }
        }
    }
    Ok(VolumeRule {
        nodes,
        weights,
        descriptor: RuleDescriptor::new(RuleKind::Box { lo, hi }, level),
        excised_volume: 0.0,
    })
}

pub fn sphere3_surface_rule(center: ThetaPoint, radius: f64, level: u32) -> Result<SurfaceRule> {
    if !(radius > 0.0) || level == 0 {
        return Err(Error::InvalidRule("radius must be positive and level at least 1"));
    }
    let (dirs, wd) = unit_sphere(level);
    let r3 = radius * radius * radius;
    Ok(SurfaceRule {
        nodes: dirs.iter().map(|d| ThetaPoint::from_array([0, 1, 2, 3].map(|k| center.c[k] + radius * d[k]))).collect(),
        weights: wd.iter().map(|w| w * r3).collect(),
        normals: dirs.iter().map(|d| ThetaPoint::from_array(*d)).collect(),
        descriptor: RuleDescriptor::new(RuleKind::Sphere { center, radius }, level),
    })
}

impl VolumeRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        pairwise_sum(self.len(), |i| self.weights[i])
    }

    pub fn integrate<F: Fn(&ThetaPoint) -> f64>(&self, f: F) -> f64 {
        pairwise_sum(self.len(), |i| self.weights[i] * f(&self.nodes[i]))
    }

    pub fn integrate_q<F: Fn(&ThetaPoint) -> Quaternion>(&self, f: F) -> Quaternion {
        pairwise_sum(self.len(), |i| f(&self.nodes[i]) * self.weights[i])
    }

    /// Pushes nodes through `map`, scaling weights by `jacobian` at the
    /// original node.
    pub fn pushforward<M, J>(&self, map: M, jacobian: J) -> VolumeRule
    where
        M: Fn(&ThetaPoint) -> ThetaPoint,
        J: Fn(&ThetaPoint) -> f64,
    {
        VolumeRule {
            nodes: self.nodes.iter().map(&map).collect(),
            weights: self.nodes.iter().zip(&self.weights).map(|(p, w)| w * jacobian(p)).collect(),
            descriptor: RuleDescriptor { kind: RuleKind::Pushforward, ..self.descriptor },
            excised_volume: 0.0,
        }
    }
}

impl SurfaceRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        pairwise_sum(self.len(), |i| self.weights[i])
    }

    pub fn integrate<F: Fn(&ThetaPoint) -> f64>(&self, f: F) -> f64 {
        pairwise_sum(self.len(), |i| self.weights[i] * f(&self.nodes[i]))
    }

    /// Largest gap between neighbouring nodes, an upper bound for the
    /// distance below which surface sums lose accuracy.
    pub fn spacing(&self) -> f64 {
        let r = match self.descriptor.kind {
            RuleKind::Sphere { radius, .. } => radius,
            _ => 1.0,
        };
        r * PI / (4.0 * self.descriptor.level.max(1) as f64)
    }

    pub fn center_radius(&self) -> Option<(ThetaPoint, f64)> {
        match self.descriptor.kind {
            RuleKind::Sphere { center, radius } => Some((center, radius)),
            _ => None,
        }
    }
}

/// Discretized surface form at node `index`: `(sum_k n_k psi_k) dS`.
pub fn sigma_at(rule: &SurfaceRule, index: usize, frame: &ThetaFrame) -> Result<Quaternion> {
    if index >= rule.len() {
        return Err(Error::IndexOutOfRange { index, len: rule.len() });
    }
    Ok(frame.embed(&rule.normals[index]) * rule.weights[index])
}

/// Drops nodes closer than `epsilon` to `singularity`.
pub fn punctured_ball_rule(rule: &VolumeRule, singularity: ThetaPoint, epsilon: f64) -> Result<VolumeRule> {
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidRule("epsilon must be non-negative"));
    }
    let mut nodes = Vec::with_capacity(rule.len());
    let mut weights = Vec::with_capacity(rule.len());
    let mut dropped = Vec::new();
    for (p, w) in rule.nodes.iter().zip(&rule.weights) {
        if p.distance(&singularity) < epsilon {
            dropped.push(*w);
        } else {
            nodes.push(*p);
            weights.push(*w);
        }
    }
    if nodes.is_empty() {
        return Err(Error::EmptyRule { epsilon });
    }
    let excised = pairwise_sum(dropped.len(), |i| dropped[i]);
    Ok(VolumeRule {
        nodes,
        weights,
        descriptor: RuleDescriptor { excision: Some((singularity, epsilon)), ..rule.descriptor },
        excised_volume: rule.excised_volume + excised,
    })
}
