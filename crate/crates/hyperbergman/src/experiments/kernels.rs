use std::f64::consts::PI;

use hyperbergman_core::bergman::{
    conformal_bases, gram, inclusion_report, inner, kernel, kernel_relation_conformal, kernel_relation_t_weight,
    kernel_relation_weighted, p_transform, pairing_range, project, s_transform, unit_ball_kernel, BasisSpec, InclusionReport,
    SecondSlot, Weight,
};
use hyperbergman_core::fields::{holomorphic_monomial, ComplexField};
use hyperbergman_core::geometry::{Ball, Domain};
use hyperbergman_core::moebius::pushforward_rule;
use hyperbergman_core::probes::ball_probes;
use hyperbergman_core::quadrature::ball4_volume_rule;
use hyperbergman_core::{Complex64, Quaternion, ThetaPoint};
use rayon::prelude::*;

use super::conformal::default_maps;
use super::{frame, generic_field, random_complex, random_quaternion, report, rng, u_or, RunResult};
use crate::config::ExperimentConfig;
use crate::report::Row;

type CoreResult<T> = hyperbergman_core::Result<T>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Discrete kernel of the complex `(alpha, beta)` class for each degree. On
/// the unit ball with `alpha = beta = 0` the top degree is checked against
/// `(2 / pi^2)(1 - <z, w>)^{-3}`.
pub fn bergman_kernel(cfg: &ExperimentConfig) -> RunResult {
    let ball = cfg.ball_or(1.0);
    let (alpha, beta) = cfg.alpha_beta_pair().unwrap_or((c(0.0, 0.0), c(0.0, 0.0)));
    let level = cfg.levels_or(&[3]).into_iter().max().unwrap();
    let degrees = cfg.degrees_or(&[2, 4, 6, 8]);
    let top = *degrees.iter().max().unwrap();
    let rule = ball4_volume_rule(ball.center, ball.radius, level)?;
    let probes = ball_probes(&Ball::new(ball.center, 0.5 * ball.radius), 8, cfg.seed);
    let closed_form = alpha == c(0.0, 0.0) && beta == c(0.0, 0.0) && ball == Ball::unit();
    let (tcf, t0) = (cfg.tol("closed_form"), cfg.tol("origin"));
    let rows: Vec<Vec<Row>> = degrees
        .par_iter()
        .map(|&d| -> CoreResult<Vec<Row>> {
            let spec = BasisSpec::alpha_beta(alpha, beta, cfg.theta, d);
            let k = kernel(&gram(&spec, &rule, &Weight::Unit)?)?;
            let mut rows = vec![
                Row::new("gram", "condition_number", k.cond).level(level).degree(d),
                Row::new("gram", "basis_size", k.len() as f64).level(level).degree(d),
            ];
            let mark = |row: Row, t: f64| if d == top { row.at_most(t) } else { row };
            if closed_form {
                let mut worst = 0.0f64;
                for z in &probes {
                    for w in &probes {
                        let exact = Quaternion::from_complex(unit_ball_kernel(z, w));
                        worst = worst.max((k.eval(z, w)? - exact).norm() / exact.norm());
                    }
                }
                rows.push(mark(Row::new("unit_ball", "closed_form_max_relative", worst).level(level).degree(d), tcf));
                let b00 = k.diagonal(&ThetaPoint::ORIGIN)?;
                let exact = 2.0 / (PI * PI);
                rows.push(mark(Row::new("unit_ball", "origin_relative", (b00 - exact).abs() / exact).level(level).degree(d), t0));
            }
            for (pi, z) in probes.iter().enumerate() {
                rows.push(Row::new("diagonal", "kernel_diagonal", k.diagonal(z)?).level(level).degree(d).probe(pi));
            }
            Ok(rows)
        })
        .collect::<CoreResult<_>>()?;
    let mut rep = report(cfg);
    rep.extend(rows.into_iter().flatten());
    Ok(rep)
}

fn max_over<F: Fn(&ThetaPoint) -> CoreResult<f64>>(probes: &[ThetaPoint], f: F) -> CoreResult<f64> {
    probes.iter().try_fold(0.0f64, |a, p| Ok(a.max(f(p)?)))
}

/// Hermitian symmetry, projection idempotence and symmetry, the weighted and
/// `t`-weighted relations on aligned bases, and the conformal relation for
/// affine maps.
pub fn kernel_laws(cfg: &ExperimentConfig) -> RunResult {
    let fr = frame(cfg);
    let ball = cfg.ball_or(1.0);
    let u = u_or(cfg, Quaternion::new(0.3, -0.2, 0.1, 0.4));
    let degree = cfg.degrees_or(&[4])[0];
    let level = cfg.levels_or(&[2])[0];
    let rule = ball4_volume_rule(ball.center, ball.radius, level)?;
    let probes = ball_probes(&Ball::new(ball.center, 0.5 * ball.radius), 6, cfg.seed);
    let mut rep = report(cfg);
    let push = |rep: &mut crate::report::Report, case: &str, metric: &str, v: f64, tol: f64| {
        rep.push(Row::new(case, metric, v).level(level).degree(degree).at_most(tol));
    };

    let k = kernel(&gram(&BasisSpec::theta_u(u, cfg.theta, degree), &rule, &Weight::Unit)?)?;
    let mut herm = 0.0f64;
    for z in &probes {
        for w in &probes {
            herm = herm.max((k.eval(z, w)? - k.eval(w, z)?.conj()).norm());
        }
    }
    push(&mut rep, "theta_u", "hermitian", herm, cfg.tol("hermitian"));

    let member = k.spec.element(k.len() / 2).right_mul(Quaternion::new(0.5, 0.0, -1.0, 0.3));
    let pm = project(&k, &member, &rule)?;
    let repro = max_over(&probes, |z| Ok((pm.eval(z) - member.eval(z)).norm()))?;
    push(&mut rep, "theta_u", "reproduces_members", repro, cfg.tol("idempotence"));
    let (f, g) = (generic_field(fr, 2), generic_field(fr, 3));
    let pf = project(&k, &f, &rule)?;
    let ppf = project(&k, &pf, &rule)?;
    let idem = max_over(&probes, |z| Ok((pf.eval(z) - ppf.eval(z)).norm()))?;
    push(&mut rep, "theta_u", "idempotence", idem, cfg.tol("idempotence"));
    let pg = project(&k, &g, &rule)?;
    let sym = (inner(&pf, &g, &rule, &Weight::Unit)? - inner(&f, &pg, &rule, &Weight::Unit)?).norm();
    push(&mut rep, "theta_u", "projection_symmetry", sym, cfg.tol("symmetry"));

    let v = Quaternion::ZERO;
    let ku = kernel(&gram(&BasisSpec::theta_u(u, cfg.theta, degree), &rule, &Weight::Lambda(u))?)?;
    let kv = kernel(&gram(&BasisSpec::theta_u(v, cfg.theta, degree), &rule, &Weight::Lambda(v))?)?;
    push(&mut rep, "theta_u", "weighted_relation", kernel_relation_weighted(&ku, &kv, u, v, &probes)?, cfg.tol("weighted"));

    let mut r = rng(cfg.seed ^ 0xab);
    let (al, be, ch, xi) = (random_complex(&mut r, 0.4), random_complex(&mut r, 0.4), random_complex(&mut r, 0.4), random_complex(&mut r, 0.4));
    let kab = kernel(&gram(&BasisSpec::alpha_beta(al, be, cfg.theta, degree), &rule, &Weight::T { alpha: al, beta: be })?)?;
    let kcx = kernel(&gram(&BasisSpec::alpha_beta(ch, xi, cfg.theta, degree), &rule, &Weight::T { alpha: ch, beta: xi })?)?;
    push(&mut rep, "alpha_beta", "t_weight_relation", kernel_relation_t_weight(&kab, &kcx, SecondSlot::Sum, &probes)?, cfg.tol("weighted"));
    let diff = kernel_relation_t_weight(&kab, &kcx, SecondSlot::Difference, &probes)?;
    rep.push(Row::new("alpha_beta", "t_weight_difference_slot", diff).level(level).degree(degree));

    let xi_ball = Ball::new(ball.center, 0.5 * ball.radius);
    let xi_rule = ball4_volume_rule(xi_ball.center, xi_ball.radius, level)?;
    let xi_probes = ball_probes(&Ball::new(ball.center, 0.25 * ball.radius), 5, cfg.seed);
    let (maps, _) = default_maps();
    let (u2, v2) = (random_quaternion(&mut r, 0.4), random_quaternion(&mut r, 0.4));
    let conformal: Vec<Row> = maps
        .par_iter()
        .map(|(name, t)| -> CoreResult<Row> {
            let complex = *name == "complex_affine";
            let (so, sx) = conformal_bases(t, u2, v2, cfg.theta, degree.min(3), complex)?;
            let omega_rule = pushforward_rule(t, &fr, &xi_rule)?;
            let ko = kernel(&gram(&so, &omega_rule, &Weight::Unit)?)?;
            let kx = kernel(&gram(&sx, &xi_rule, &Weight::Gamma { map: *t, u: u2, v: v2 })?)?;
            let res = kernel_relation_conformal(&ko, &kx, &xi_probes)?;
            Ok(Row::new(*name, "conformal_relation", res).level(level).degree(degree.min(3)).at_most(cfg.tol("conformal")))
        })
        .collect::<CoreResult<_>>()?;
    rep.extend(conformal);
    Ok(rep)
}

/// Inverse and composition laws of the exponential multipliers at probes,
/// relative to the field value, and their isometry under quadrature.
pub fn sp_laws(cfg: &ExperimentConfig) -> RunResult {
    let fr = frame(cfg);
    let ball = cfg.ball_or(1.0);
    let level = cfg.levels_or(&[2])[0];
    let mut r = rng(cfg.seed ^ 0x51);
    let (u, v) = (random_quaternion(&mut r, 1.0), random_quaternion(&mut r, 1.0));
    let (al, be, ch, xi) = (random_complex(&mut r, 1.0), random_complex(&mut r, 1.0), random_complex(&mut r, 1.0), random_complex(&mut r, 1.0));
    let probes = ball_probes(&ball, 20, cfg.seed);
    let (tl, ti) = (cfg.tol("sp_laws"), cfg.tol("sp_isometry"));
    let mut rep = report(cfg);

    let f = generic_field(fr, 4);
    let s_inv = s_transform(&s_transform(&f, u, &fr), -u, &fr);
    let s_lhs = s_transform(&f, u - v, &fr);
    let s_rhs = s_transform(&s_transform(&f, u, &fr), -v, &fr);
    let (mut si, mut sc) = (0.0f64, 0.0f64);
    for z in &probes {
        si = si.max((s_inv.eval(z) - f.eval(z)).norm() / f.eval(z).norm());
        sc = sc.max((s_lhs.eval(z) - s_rhs.eval(z)).norm() / s_lhs.eval(z).norm());
    }
    rep.push(Row::new("S", "inverse", si).at_most(tl));
    rep.push(Row::new("S", "composition", sc).at_most(tl));

    let h: ComplexField = holomorphic_monomial(2, 1).mul(&ComplexField::new(|z1: Complex64, _| z1 + 1.5));
    let p_inv = p_transform(&p_transform(&h, al, be), -al, -be);
    let p_lhs = p_transform(&h, al - ch, be - xi);
    let p_rhs = p_transform(&p_transform(&h, al, be), -ch, -xi);
    let (mut pi_, mut pc) = (0.0f64, 0.0f64);
    for z in &probes {
        let (z1, z2) = (z.z1(), z.z2());
        pi_ = pi_.max((p_inv.eval(z1, z2) - h.eval(z1, z2)).norm() / h.eval(z1, z2).norm());
        pc = pc.max((p_lhs.eval(z1, z2) - p_rhs.eval(z1, z2)).norm() / p_lhs.eval(z1, z2).norm());
    }
    rep.push(Row::new("P", "inverse", pi_).at_most(tl));
    rep.push(Row::new("P", "composition", pc).at_most(tl));

    let rule = ball4_volume_rule(ball.center, ball.radius, level)?;
    let g = generic_field(fr, 2);
    let a = inner(&s_transform(&f, u, &fr), &s_transform(&g, u, &fr), &rule, &Weight::Unit)?;
    let b = inner(&f, &g, &rule, &Weight::Lambda(u))?;
    rep.push(Row::new("S", "quadrature_isometry", (a - b).norm() / b.norm()).level(level).at_most(ti));
    let k2 = ComplexField::new(|z1: Complex64, z2: Complex64| z2 * z2 - z1 * 0.5);
    let a = inner(&p_transform(&h, al, be).to_field(fr), &p_transform(&k2, al, be).to_field(fr), &rule, &Weight::Unit)?;
    let b = inner(&h.to_field(fr), &k2.to_field(fr), &rule, &Weight::T { alpha: al, beta: be })?;
    rep.push(Row::new("P", "quadrature_isometry", (a - b).norm() / b.norm()).level(level).at_most(ti));
    Ok(rep)
}

/// Inclusion between the weighted and unweighted spaces on the configured ball.
pub fn inclusion(cfg: &ExperimentConfig) -> RunResult {
    let fr = frame(cfg);
    let u = u_or(cfg, Quaternion::ONE);
    let domain = Domain::Ball(cfg.ball_or(1.0));
    let (lo, hi) = pairing_range(&domain, u, &fr);
    let verdict = match inclusion_report(&domain, u, &fr) {
        InclusionReport::Equal { .. } => "equal",
        InclusionReport::UnweightedInWeighted { .. } => "unweighted_in_weighted",
        InclusionReport::WeightedInUnweighted { .. } => "weighted_in_unweighted",
        InclusionReport::Inconclusive => "inconclusive",
    };
    let mut rep = report(cfg);
    rep.push(Row::new(verdict, "pairing_min", lo));
    rep.push(Row::new(verdict, "pairing_max", hi));
    Ok(rep)
}
