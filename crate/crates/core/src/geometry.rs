//! Domain descriptors shared by fields, rules and reports.

#[allow(unused_imports)]
use num_traits::Float;

use crate::ThetaPoint;

/// Closed 4-ball in psi-coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ball {
    pub center: ThetaPoint,
    pub radius: f64,
}

impl Ball {
    pub const fn new(center: ThetaPoint, radius: f64) -> Self {
        Self { center, radius }
    }

    pub const fn unit() -> Self {
        Self::new(ThetaPoint::ORIGIN, 1.0)
    }

    /// Signed distance to the boundary, positive inside.
    pub fn margin(&self, p: &ThetaPoint) -> f64 {
        self.radius - p.distance(&self.center)
    }

    pub fn contains(&self, p: &ThetaPoint) -> bool {
        self.margin(p) > 0.0
    }

    pub fn diameter(&self) -> f64 {
        2.0 * self.radius
    }

    pub fn volume(&self) -> f64 {
        core::f64::consts::PI.powi(2) * self.radius.powi(4) / 2.0
    }

    pub fn area(&self) -> f64 {
        2.0 * core::f64::consts::PI.powi(2) * self.radius.powi(3)
    }
}

/// Axis-aligned box in psi-coordinates. Bounds may be infinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoordBox {
    pub lo: [f64; 4],
    pub hi: [f64; 4],
}

impl CoordBox {
    pub const fn new(lo: [f64; 4], hi: [f64; 4]) -> Self {
        Self { lo, hi }
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.iter().chain(self.hi.iter()).all(|v| v.is_finite())
    }
}

/// Region descriptor used by inclusion reports and configs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Domain {
    Ball(Ball),
    Box(CoordBox),
}
