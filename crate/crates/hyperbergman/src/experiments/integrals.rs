use hyperbergman_core::diffops::Stencil;
use hyperbergman_core::fields::{holomorphic_monomial, holomorphic_pair, u_hyperholomorphic_from, ComplexField, Field};
use hyperbergman_core::geometry::Ball;
use hyperbergman_core::integral_ops::{
    borel_pompieu_residual, cauchy_integral, left_inverse_residual, stokes_residual, system_inverse_residual, KernelSpec,
    VolumeScheme,
};
use hyperbergman_core::probes::{ball_probes, shell_probes};
use hyperbergman_core::quadrature::{ball4_volume_rule, sphere3_surface_rule};
use hyperbergman_core::{Complex64, Quaternion, ThetaFrame, ThetaPoint};
use rayon::prelude::*;

use super::{frame, generic_field, level_ratio, max_of, report, u_or, RunResult, FIELD_NAMES};
use crate::config::ExperimentConfig;
use crate::report::{Report, Row};

type CoreResult<T> = hyperbergman_core::Result<T>;

/// Ratios below this are treated as converged to roundoff.
pub const ROUNDOFF_FLOOR: f64 = 1e-13;

/// Levels from this one up carry the tolerance check; with none configured,
/// the finest level does.
pub const CHECK_LEVEL: u32 = 3;

fn checked(level: u32, levels: &[u32]) -> bool {
    level >= CHECK_LEVEL || levels.iter().all(|l| *l < CHECK_LEVEL) && level == *levels.iter().max().unwrap()
}

fn certified_fields(fr: ThetaFrame, u: Quaternion) -> Vec<(&'static str, Field)> {
    let zero = ComplexField::new(|_, _| Complex64::new(0.0, 0.0));
    let exp_pair = ComplexField::new(|z1: Complex64, z2: Complex64| (z1 + z2 * 0.5).exp());
    let cos2 = ComplexField::new(|_: Complex64, z2: Complex64| z2.cos());
    let m = holomorphic_monomial;
    let pairs: Vec<(&'static str, Field)> = vec![
        ("one", holomorphic_pair(fr, &m(0, 0), &zero)),
        ("z1+z2j", holomorphic_pair(fr, &m(1, 0), &m(0, 1))),
        ("z1z2+z1^2j", holomorphic_pair(fr, &m(1, 1), &m(2, 0))),
        ("z2^3+z1z2^2j", holomorphic_pair(fr, &m(0, 3), &m(1, 2))),
        ("exp+cos_j", holomorphic_pair(fr, &exp_pair, &cos2)),
    ];
    pairs.into_iter().map(|(n, h)| (n, u_hyperholomorphic_from(&h, u, &fr))).collect()
}

fn surface_scale(f: &Field, center: ThetaPoint, radius: f64) -> CoreResult<f64> {
    let s = sphere3_surface_rule(center, radius, 3)?;
    Ok(max_of(s.nodes.iter().map(|p| f.eval(p).norm())))
}

/// Level-to-level ratios of the worst value, checked to be at most 1.
fn decrease_rows(case: &str, metric: &str, levels: &[u32], worst: &[f64]) -> Vec<Row> {
    (1..levels.len())
        .map(|k| Row::new(case, metric, level_ratio(worst[k - 1], worst[k], ROUNDOFF_FLOOR)).level(levels[k]).at_most(1.0))
        .collect()
}

/// Cauchy reproduction on the sphere: interior error relative to the field
/// scale on the sphere, and the exterior value over the same scale.
pub fn verify_cauchy(cfg: &ExperimentConfig) -> RunResult {
    let fr = frame(cfg);
    let ball = cfg.ball_or(0.8);
    let spec = KernelSpec::new(fr, u_or(cfg, Quaternion::ZERO));
    let levels = cfg.levels_or(&[2, 3, 4]);
    let inner = ball_probes(&Ball::new(ball.center, 0.5 * ball.radius), 20, cfg.seed);
    let outer = shell_probes(&ball.center, 1.5 * ball.radius, 2.0 * ball.radius, 20, cfg.seed);
    let surfaces = levels.iter().map(|l| sphere3_surface_rule(ball.center, ball.radius, *l)).collect::<CoreResult<Vec<_>>>()?;
    let (tin, tout) = (cfg.tol("cauchy_interior"), cfg.tol("cauchy_exterior"));
    let fields = certified_fields(fr, spec.u);
    let parts: Vec<Vec<Row>> = fields
        .par_iter()
        .map(|(name, f)| -> CoreResult<Vec<Row>> {
            let scale = surface_scale(f, ball.center, ball.radius)?;
            let mut rows = Vec::new();
            let mut worst = Vec::new();
            for (l, s) in levels.iter().zip(&surfaces) {
                let mut w = 0.0f64;
                for (pi, z) in inner.iter().enumerate() {
                    let err = (cauchy_integral(&spec, f, s, z)? - f.eval(z)).norm() / scale;
                    w = w.max(err);
                    let row = Row::new(*name, "cauchy_interior", err).level(*l).probe(pi);
                    rows.push(if checked(*l, &levels) { row.at_most(tin) } else { row });
                }
                worst.push(w);
                for (pi, z) in outer.iter().enumerate() {
                    let v = cauchy_integral(&spec, f, s, z)?.norm() / scale;
                    let row = Row::new(*name, "cauchy_exterior", v).level(*l).probe(inner.len() + pi);
                    rows.push(if checked(*l, &levels) { row.at_most(tout) } else { row });
                }
            }
            rows.extend(decrease_rows(name, "cauchy_level_ratio", &levels, &worst));
            rows.push(Row::new(*name, "scale", scale));
            Ok(rows)
        })
        .collect::<CoreResult<_>>()?;
    let mut rep = report(cfg);
    rep.extend(parts.into_iter().flatten());
    Ok(rep)
}

fn stencil(cfg: &ExperimentConfig, default: f64) -> CoreResult<Stencil> {
    Stencil::new(cfg.steps_or(&[default])[0], 2)
}

/// Borel-Pompieu residual over the field scale, with surface and polar
/// volume rules refined together.
pub fn verify_borel_pompieu(cfg: &ExperimentConfig) -> RunResult {
    let fr = frame(cfg);
    let ball = cfg.ball_or(0.8);
    let spec = KernelSpec::new(fr, u_or(cfg, Quaternion::new(0.3, -0.2, 0.1, 0.4)));
    let levels = cfg.levels_or(&[2, 3]);
    let probes = ball_probes(&Ball::new(ball.center, 0.5 * ball.radius), 5, cfg.seed);
    let st = stencil(cfg, 1e-4)?;
    let tol = cfg.tol("borel_pompieu");
    let surfaces = levels.iter().map(|l| sphere3_surface_rule(ball.center, ball.radius, *l)).collect::<CoreResult<Vec<_>>>()?;
    let parts: Vec<Vec<Row>> = (0..5)
        .into_par_iter()
        .map(|k| -> CoreResult<Vec<Row>> {
            let f = generic_field(fr, k);
            let scale = surface_scale(&f, ball.center, ball.radius)?;
            let mut rows = Vec::new();
            let mut worst = Vec::new();
            for (l, s) in levels.iter().zip(&surfaces) {
                let mut w = 0.0f64;
                for (pi, z) in probes.iter().enumerate() {
                    let scheme = VolumeScheme::Polar { ball, level: *l, epsilon: 0.0 };
                    let r = borel_pompieu_residual(&spec, &f, s, scheme, z, &st)? / scale;
                    w = w.max(r);
                    let row = Row::new(FIELD_NAMES[k], "borel_pompieu", r).level(*l).h(st.h).probe(pi);
                    rows.push(if checked(*l, &levels) { row.at_most(tol) } else { row });
                }
                worst.push(w);
            }
            rows.extend(decrease_rows(FIELD_NAMES[k], "borel_pompieu_level_ratio", &levels, &worst));
            Ok(rows)
        })
        .collect::<CoreResult<_>>()?;
    let mut rep = report(cfg);
    rep.extend(parts.into_iter().flatten());
    Ok(rep)
}

/// Difference steps paired with levels: one per level, or a single step for all.
fn steps_per_level(cfg: &ExperimentConfig, levels: &[u32], default: &[f64]) -> CoreResult<Vec<Stencil>> {
    let steps = cfg.steps_or(default);
    (0..levels.len()).map(|k| Stencil::new(if steps.len() == levels.len() { steps[k] } else { steps[0] }, 2)).collect()
}

/// Relative error of `(D + u) T_u f - f` and of the complex component system,
/// with the polar-rule level and the difference step refined together.
pub fn verify_teodorescu(cfg: &ExperimentConfig) -> RunResult {
    let fr = frame(cfg);
    let ball = cfg.ball_or(0.8);
    let u = u_or(cfg, Quaternion::new(0.3, -0.2, 0.1, 0.4));
    let spec = KernelSpec::new(fr, u);
    let (alpha, beta) = cfg.alpha_beta_pair().unwrap_or((Complex64::new(0.3, -0.2), Complex64::new(0.1, 0.4)));
    let cspec = KernelSpec::from_alpha_beta(fr, alpha, beta);
    let levels = cfg.levels_or(&[1, 2, 3]);
    let probes = ball_probes(&Ball::new(ball.center, 0.5 * ball.radius), 3, cfg.seed);
    let stencils = steps_per_level(cfg, &levels, &[4e-3, 2e-3, 1e-3])?;
    let (tol, tsys) = (cfg.tol("teodorescu"), cfg.tol("component_system"));
    let complex_fields: [(&str, ComplexField); 2] = [
        ("one_plus_conj_z1", ComplexField::new(|z1: Complex64, _| Complex64::new(1.0, 0.0) + z1.conj())),
        ("exp_z2_mod", ComplexField::new(|z1: Complex64, z2: Complex64| (z2 * 0.5).exp() + z1 * z1.conj())),
    ];
    let mut jobs: Vec<(usize, usize, usize)> = Vec::new();
    for case in 0..6 {
        for li in 0..levels.len() {
            for pi in 0..probes.len() {
                jobs.push((case, li, pi));
            }
        }
    }
    let values: Vec<Vec<Row>> = jobs
        .par_iter()
        .map(|&(case, li, pi)| -> CoreResult<Vec<Row>> {
            let (z, l, st) = (&probes[pi], levels[li], stencils[li]);
            let mark = |row: Row, t: f64| if checked(l, &levels) { row.at_most(t) } else { row };
            if case < 4 {
                let f = generic_field(fr, case + 1);
                let r = left_inverse_residual(&spec, &f, ball, l, z, 0.0, &st)?;
                Ok(vec![mark(Row::new(FIELD_NAMES[case + 1], "left_inverse", r).level(l).h(st.h).probe(pi), tol)])
            } else {
                let (name, f) = &complex_fields[case - 4];
                let (r1, r2) = system_inverse_residual(&cspec, f, ball, l, z, 0.0, &st)?;
                Ok(vec![
                    mark(Row::new(*name, "component_system_first", r1).level(l).h(st.h).probe(pi), tsys),
                    mark(Row::new(*name, "component_system_second", r2).level(l).h(st.h).probe(pi), tsys),
                ])
            }
        })
        .collect::<CoreResult<_>>()?;
    let mut rep = report(cfg);
    rep.extend(values.into_iter().flatten());
    add_decrease(&mut rep, &levels, &["left_inverse", "component_system_first", "component_system_second"]);
    Ok(rep)
}

/// Appends level ratios of the worst value for every `(case, metric)` seen.
fn add_decrease(rep: &mut Report, levels: &[u32], metrics: &[&str]) {
    let mut extra = Vec::new();
    for metric in metrics {
        let mut cases: Vec<String> = rep.rows.iter().filter(|r| r.metric == *metric).map(|r| r.case.clone()).collect();
        cases.dedup();
        for case in cases {
            let worst: Vec<f64> = levels
                .iter()
                .map(|l| max_of(rep.rows.iter().filter(|r| r.metric == *metric && r.case == case && r.level == Some(*l)).map(|r| r.value)))
                .collect();
            extra.extend(decrease_rows(&case, &format!("{metric}_level_ratio"), levels, &worst));
        }
    }
    rep.extend(extra);
}

/// Weighted Stokes identity on the ball for pairs of test fields.
pub fn verify_stokes(cfg: &ExperimentConfig) -> RunResult {
    let fr = frame(cfg);
    let ball = cfg.ball_or(0.8);
    let spec = KernelSpec::new(fr, u_or(cfg, Quaternion::new(0.3, -0.2, 0.1, 0.4)));
    let levels = cfg.levels_or(&[1, 2, 3]);
    let st = stencil(cfg, 1e-4)?;
    let tol = cfg.tol("stokes");
    let mut rep = report(cfg);
    for (a, b) in [(2, 3), (4, 1), (0, 2)] {
        let (f, g) = (generic_field(fr, a), generic_field(fr, b));
        let case = format!("{}*{}", FIELD_NAMES[a], FIELD_NAMES[b]);
        for l in &levels {
            let s = sphere3_surface_rule(ball.center, ball.radius, *l)?;
            let v = ball4_volume_rule(ball.center, ball.radius, *l)?;
            let r = stokes_residual(&spec, &f, &g, &s, &v, &st)?;
            let row = Row::new(&case, "stokes", r).level(*l).h(st.h);
            rep.push(if checked(*l, &levels) { row.at_most(tol) } else { row });
        }
    }
    Ok(rep)
}
