use hyperbergman_core::diffops::Stencil;
use hyperbergman_core::geometry::Ball;
use hyperbergman_core::moebius::{covariance_residual, image_ball, l2_isometry_sides, pushforward_rule, MoebiusMap};
use hyperbergman_core::probes::ball_probes;
use hyperbergman_core::quadrature::ball4_volume_rule;
use hyperbergman_core::{Quaternion, ThetaFrame};
use rayon::prelude::*;

use super::{frame, generic_field, random_quaternion, report, rng, RunResult, FIELD_NAMES};
use crate::config::ExperimentConfig;
use crate::report::Row;

type CoreResult<T> = hyperbergman_core::Result<T>;

fn q(a: f64, b: f64, c: f64, d: f64) -> Quaternion {
    Quaternion::new(a, b, c, d)
}

/// Three affine maps (real scaling, a quaternion rotation-dilation with a
/// shift, a complex one) and one map with a pole well outside the unit ball.
pub fn default_maps() -> (Vec<(&'static str, MoebiusMap)>, (&'static str, MoebiusMap)) {
    let affine = vec![
        ("scale2", MoebiusMap::affine(q(2.0, 0.0, 0.0, 0.0), Quaternion::ZERO, Quaternion::ONE).unwrap()),
        ("quat_affine", MoebiusMap::affine(q(1.5, 0.2, -0.3, 0.1), q(0.1, 0.0, 0.2, 0.0), q(0.9, 0.0, 0.1, -0.2)).unwrap()),
        ("complex_affine", MoebiusMap::affine(q(0.8, 0.6, 0.0, 0.0), q(-0.2, 0.1, 0.0, 0.0), q(1.0, -0.5, 0.0, 0.0)).unwrap()),
    ];
    let general = ("general", MoebiusMap::new(Quaternion::ONE, q(0.2, 0.0, -0.1, 0.0), q(0.3, 0.1, -0.2, 0.1), q(1.0, 0.0, 0.0, 0.2)).unwrap());
    (affine, general)
}

/// `(u, v)` pairs: both zero, `u` only, both random.
fn parameter_pairs(seed: u64) -> Vec<(Quaternion, Quaternion)> {
    let mut r = rng(seed ^ 0x5eed);
    let (u1, u2, v2) = (random_quaternion(&mut r, 0.5), random_quaternion(&mut r, 0.5), random_quaternion(&mut r, 0.5));
    vec![(Quaternion::ZERO, Quaternion::ZERO), (u1, Quaternion::ZERO), (u2, v2)]
}

fn configured_maps(cfg: &ExperimentConfig) -> CoreResult<Vec<(String, MoebiusMap)>> {
    if let Some(m) = cfg.moebius_map().map_err(|_| hyperbergman_core::Error::InvalidMoebius("configured map"))? {
        return Ok(vec![("configured".to_string(), m)]);
    }
    let (affine, general) = default_maps();
    Ok(affine.into_iter().chain([general]).map(|(n, m)| (n.to_string(), m)).collect())
}

/// Covariance of `D + u` under the transport by `T`, at probes in the ball.
pub fn verify_covariance(cfg: &ExperimentConfig) -> RunResult {
    let fr = frame(cfg);
    let st = Stencil::new(cfg.steps_or(&[1e-3])[0], 2)?;
    let probes = ball_probes(&cfg.ball_or(0.4), 3, cfg.seed);
    let (ta, tg) = (cfg.tol("covariance_affine"), cfg.tol("covariance_general"));
    let maps = configured_maps(cfg)?;
    let pairs = match cfg.u_quaternion() {
        Some(u) => vec![(u, Quaternion::ZERO)],
        None => parameter_pairs(cfg.seed),
    };
    let mut jobs = Vec::new();
    for (mi, _) in maps.iter().enumerate() {
        for (pi, _) in pairs.iter().enumerate() {
            jobs.push((mi, pi));
        }
    }
    let f = generic_field(fr, 2);
    let rows: Vec<Vec<Row>> = jobs
        .par_iter()
        .map(|&(mi, pi)| -> CoreResult<Vec<Row>> {
            let (name, t) = &maps[mi];
            let (u, v) = pairs[pi];
            let tol = if t.is_affine() { ta } else { tg };
            let case = format!("{name}/uv{pi}");
            probes
                .iter()
                .enumerate()
                .map(|(k, z)| Ok(Row::new(&case, "covariance", covariance_residual(t, u, v, &f, z, &st)?).h(st.h).probe(k).at_most(tol)))
                .collect()
        })
        .collect::<CoreResult<_>>()?;
    let mut rep = report(cfg);
    rep.extend(rows.into_iter().flatten());
    Ok(rep)
}

fn isometry_residual(
    t: &MoebiusMap,
    u: Quaternion,
    v: Quaternion,
    fr: &ThetaFrame,
    rule_xi: &hyperbergman_core::quadrature::VolumeRule,
    rule_omega: &hyperbergman_core::quadrature::VolumeRule,
    pair: (usize, usize),
) -> CoreResult<f64> {
    let (f, g) = (generic_field(*fr, pair.0), generic_field(*fr, pair.1));
    let (lhs, rhs) = l2_isometry_sides(t, u, v, &f, &g, rule_xi, rule_omega)?;
    let nf = l2_isometry_sides(t, u, v, &f, &f, rule_xi, rule_omega)?.1.x0.sqrt();
    let ng = l2_isometry_sides(t, u, v, &g, &g, rule_xi, rule_omega)?.1.x0.sqrt();
    Ok((lhs - rhs).norm() / (nf * ng))
}

/// L2 isometry of the transport: the weighted integral over `Xi` against the
/// plain integral over `T(Xi)`, normalized by the two `L2(T(Xi))` norms. The
/// `T(Xi)` side uses both the pushed-forward rule and an independent ball
/// rule on the image ball. Maps with a pole are reported without a check.
pub fn verify_isometry(cfg: &ExperimentConfig) -> RunResult {
    let fr = frame(cfg);
    let xi = cfg.ball_or(0.5);
    let levels = cfg.levels_or(&[3]);
    let top = *levels.iter().max().unwrap();
    let tol = cfg.tol("isometry");
    let maps = configured_maps(cfg)?;
    let pairs = match cfg.u_quaternion() {
        Some(u) => vec![(u, Quaternion::ZERO)],
        None => parameter_pairs(cfg.seed),
    };
    let field_pairs = [(2usize, 3usize), (4, 4)];
    let mut rep = report(cfg);
    for l in &levels {
        let rule_xi = ball4_volume_rule(xi.center, xi.radius, *l)?;
        let rows: Vec<Vec<Row>> = maps
            .par_iter()
            .map(|(name, t)| -> CoreResult<Vec<Row>> {
                let image: Ball = image_ball(t, &fr, &xi)?;
                let pushed = pushforward_rule(t, &fr, &rule_xi)?;
                let ball_rule = ball4_volume_rule(image.center, image.radius, *l)?;
                let mut rows = Vec::new();
                for (pi, (u, v)) in pairs.iter().enumerate() {
                    for fp in field_pairs {
                        let case = format!("{name}/uv{pi}/{}*{}", FIELD_NAMES[fp.0], FIELD_NAMES[fp.1]);
                        for (metric, omega) in [("isometry_pushforward", &pushed), ("isometry_image_ball", &ball_rule)] {
                            let r = isometry_residual(t, *u, *v, &fr, &rule_xi, omega, fp)?;
                            let row = Row::new(&case, metric, r).level(*l);
                            rows.push(if t.is_affine() && *l == top { row.at_most(tol) } else { row });
                        }
                    }
                }
                Ok(rows)
            })
            .collect::<CoreResult<_>>()?;
        rep.extend(rows.into_iter().flatten());
    }
    Ok(rep)
}
