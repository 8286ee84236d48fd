//! Deterministic low-discrepancy probe sets (Halton sequence, bases 2, 3, 5, 7).

use alloc::vec::Vec;

use crate::geometry::Ball;
use crate::ThetaPoint;

const BASES: [u64; 4] = [2, 3, 5, 7];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// Halton point in `[-1, 1]^4`. The seed shifts the starting index.
pub fn halton_cube(index: u64, seed: u64) -> [f64; 4] {
    let i = index + 1 + seed.wrapping_mul(1_000_003) % (1 << 30);
    let mut p = [0.0; 4];
    for (k, b) in BASES.iter().enumerate() {
        p[k] = 2.0 * radical_inverse(i, *b) - 1.0;
    }
    p
}

/// `count` points with `|p - center| <= radius`, by rejection from the cube.
pub fn ball_probes(ball: &Ball, count: usize, seed: u64) -> Vec<ThetaPoint> {
    let mut out = Vec::with_capacity(count);
    let mut i = 0u64;
    while out.len() < count {
        let c = halton_cube(i, seed);
        i += 1;
        let p = ThetaPoint::from_array(c);
        let r = p.norm();
        if r <= 1.0 && r > 1e-3 {
            out.push(ball.center + p.scale(ball.radius));
        }
    }
    out
}

/// `count` points with `r_min <= |p - center| <= r_max`.
pub fn shell_probes(center: &ThetaPoint, r_min: f64, r_max: f64, count: usize, seed: u64) -> Vec<ThetaPoint> {
    let mut out = Vec::with_capacity(count);
    let mut i = 0u64;
    while out.len() < count {
        let c = halton_cube(i, seed);
        i += 1;
        let p = ThetaPoint::from_array(c);
        let r = p.norm();
        if r <= 1.0 && r > 0.05 {
            let t = radical_inverse(i + 17, 11);
            let rad = r_min + (r_max - r_min) * t;
            out.push(*center + p.scale(rad / r));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probes_stay_in_region_and_repeat() {
        let b = Ball::new(ThetaPoint::new(0.1, 0.0, -0.2, 0.0), 0.5);
        let p = ball_probes(&b, 50, 3);
        assert!(p.iter().all(|q| q.distance(&b.center) <= 0.5 + 1e-15));
        assert_eq!(p, ball_probes(&b, 50, 3));
        assert_ne!(p, ball_probes(&b, 50, 4));
        let s = shell_probes(&ThetaPoint::ORIGIN, 1.5, 2.0, 30, 0);
        assert!(s.iter().all(|q| (1.5 - 1e-12..=2.0 + 1e-12).contains(&q.norm())));
    }
}
