use hyperbergman_core::diffops::{factorization_gap, Stencil};
use hyperbergman_core::fields::{
    alpha_beta_holomorphic_from, cr_residual_alpha_beta, cr_residual_theta_u, holomorphic_monomial,
    u_hyperholomorphic_from, ComplexField, Field,
};
use hyperbergman_core::geometry::Ball;
use hyperbergman_core::probes::ball_probes;
use hyperbergman_core::{Complex64, Quaternion, ThetaFrame, ThetaPoint};
use rand::Rng;
use rayon::prelude::*;

use super::{frame, random_complex, random_quaternion, report, rng, RunResult};
use crate::config::ExperimentConfig;
use crate::report::{observed_order, Row};

pub const ALGEBRA_SAMPLES: usize = 10_000;

/// Associativity, norm multiplicativity, conjugation reversal and `a j = j conj(a)`
/// on random samples, as relative errors.
pub fn verify_algebra(cfg: &ExperimentConfig) -> RunResult {
    let mut r = rng(cfg.seed);
    let tol = cfg.tol("algebra");
    let (mut assoc, mut norm, mut conj, mut jrule) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..ALGEBRA_SAMPLES {
        let (p, q, s) = (random_quaternion(&mut r, 2.0), random_quaternion(&mut r, 2.0), random_quaternion(&mut r, 2.0));
        let scale3 = p.norm() * q.norm() * s.norm();
        let scale2 = p.norm() * q.norm();
        assoc = assoc.max(((p * q) * s - p * (q * s)).norm() / scale3);
        norm = norm.max(((p * q).norm() - scale2).abs() / scale2);
        conj = conj.max(((p * q).conj() - q.conj() * p.conj()).norm() / scale2);
        let a = Quaternion::from_complex(random_complex(&mut r, 2.0));
        jrule = jrule.max((a * Quaternion::J - Quaternion::J * a.conj()).norm() / a.norm());
    }
    let mut rep = report(cfg);
    for (case, v) in [("associativity", assoc), ("norm_multiplicative", norm), ("conj_reverses", conj), ("j_commutation", jrule)] {
        rep.push(Row::new(case, "max_relative_error", v).at_most(tol));
    }
    rep.push(Row::new("samples", "count", ALGEBRA_SAMPLES as f64));
    Ok(rep)
}

enum Generator {
    Theta { name: String, field: Field, u: Quaternion },
    AlphaBeta { name: String, field: ComplexField, alpha: Complex64, beta: Complex64 },
}

impl Generator {
    fn name(&self) -> &str {
        match self {
            Generator::Theta { name, .. } | Generator::AlphaBeta { name, .. } => name,
        }
    }

    fn residual(&self, frame: &ThetaFrame, p: &ThetaPoint, h: f64) -> hyperbergman_core::Result<f64> {
        match self {
            Generator::Theta { field, u, .. } => cr_residual_theta_u(field, *u, frame, p, h),
            Generator::AlphaBeta { field, alpha, beta, .. } => cr_residual_alpha_beta(field, *alpha, *beta, p, h),
        }
    }
}

fn monomials(max_degree: u32) -> Vec<(u32, u32)> {
    (0..=max_degree).flat_map(|d| (0..=d).rev().map(move |m| (m, d - m))).collect()
}

fn generators(frame: ThetaFrame, seed: u64) -> Vec<Generator> {
    let mut r = rng(seed);
    let us: Vec<Quaternion> = (0..5).map(|_| random_quaternion(&mut r, 1.0)).collect();
    let abs: Vec<(Complex64, Complex64)> = (0..5).map(|_| (random_complex(&mut r, 0.5), random_complex(&mut r, 0.5))).collect();
    let mut out = Vec::new();
    for (m, n) in monomials(5) {
        let h = holomorphic_monomial(m, n).to_field(frame);
        out.push(Generator::Theta { name: format!("z1^{m}z2^{n}"), field: h, u: Quaternion::ZERO });
    }
    for (k, u) in us.iter().enumerate() {
        for (m, n) in monomials(5) {
            let h = holomorphic_monomial(m, n).to_field(frame);
            let field = u_hyperholomorphic_from(&h, *u, &frame);
            out.push(Generator::Theta { name: format!("S_u{k}[z1^{m}z2^{n}]"), field, u: *u });
        }
    }
    for (k, (alpha, beta)) in abs.iter().enumerate() {
        for (m, n) in monomials(5) {
            let field = alpha_beta_holomorphic_from(&holomorphic_monomial(m, n), *alpha, *beta);
            out.push(Generator::AlphaBeta { name: format!("ab{k}[z1^{m}z2^{n}]"), field, alpha: *alpha, beta: *beta });
        }
    }
    out
}

/// Membership residuals of certified generators at two step sizes, with the
/// observed order, and residuals of two non-members.
pub fn cr_generators(cfg: &ExperimentConfig) -> RunResult {
    let fr = frame(cfg);
    let steps = cfg.steps_or(&[1e-2, 5e-3]);
    let probes = ball_probes(&Ball::new(cfg.center_point(), cfg.radius.unwrap_or(0.5)), 3, cfg.seed);
    let (floor, min_order) = (cfg.tol("cr_floor"), cfg.tol("cr_order"));
    let gens = generators(fr, cfg.seed);
    let rows: Vec<Vec<Row>> = gens
        .par_iter()
        .map(|g| -> hyperbergman_core::Result<Vec<Row>> {
            let mut rows = Vec::new();
            for (pi, p) in probes.iter().enumerate() {
                let res = steps.iter().map(|h| g.residual(&fr, p, *h)).collect::<hyperbergman_core::Result<Vec<_>>>()?;
                for (k, (h, v)) in steps.iter().zip(&res).enumerate() {
                    let mut row = Row::new(g.name(), "cr_residual", *v).h(*h).probe(pi);
                    if k > 0 {
                        row = row.order(observed_order(res[k - 1], *v) / (steps[k - 1] / h).log2());
                    }
                    rows.push(row);
                }
                for k in 1..res.len() {
                    let ord = observed_order(res[k - 1], res[k]) / (steps[k - 1] / steps[k]).log2();
                    rows.push(if res[k - 1] > floor {
                        Row::new(g.name(), "cr_order", ord).h(steps[k]).probe(pi).at_least(min_order)
                    } else {
                        Row::new(g.name(), "cr_at_floor", res[k - 1]).h(steps[k - 1]).probe(pi).at_most(floor)
                    });
                }
            }
            Ok(rows)
        })
        .collect::<hyperbergman_core::Result<_>>()?;
    let mut rep = report(cfg);
    rep.extend(rows.into_iter().flatten());
    let non_members = [
        ("conj_z1", Field::new(fr, |p: &ThetaPoint| Quaternion::from_complex(p.z1().conj()))),
        ("conj_z2", Field::new(fr, |p: &ThetaPoint| Quaternion::from_complex(p.z2().conj()))),
    ];
    for (name, f) in non_members {
        for (pi, p) in probes.iter().enumerate() {
            let v = cr_residual_theta_u(&f, Quaternion::ZERO, &fr, p, steps[0])?;
            rep.push(Row::new(name, "non_member_residual", v).h(steps[0]).probe(pi).at_least(cfg.tol("non_member")));
        }
    }
    Ok(rep)
}

/// Random polynomial with each component of total degree at most `degree`;
/// the coefficient of `c^a` is uniform in `[-0.5, 0.5]` divided by `a!`.
#[derive(Clone)]
struct Polynomial {
    terms: Vec<([u32; 4], [f64; 4])>,
}

impl Polynomial {
    fn random(r: &mut rand_chacha::ChaCha8Rng, degree: u32) -> Self {
        let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
        let mut terms = Vec::new();
        for a in 0..=degree {
            for b in 0..=degree - a {
                for c in 0..=degree - a - b {
                    for d in 0..=degree - a - b - c {
                        let den = fact(a) * fact(b) * fact(c) * fact(d);
                        let coef = [0; 4].map(|_| r.gen_range(-0.5..0.5) / den);
                        terms.push(([a, b, c, d], coef));
                    }
                }
            }
        }
        Self { terms }
    }

    fn eval(&self, p: &ThetaPoint) -> Quaternion {
        let mut acc = [0.0; 4];
        for (e, coef) in &self.terms {
            let m: f64 = (0..4).map(|k| p.c[k].powi(e[k] as i32)).product();
            for (a, c) in acc.iter_mut().zip(coef) {
                *a += c * m;
            }
        }
        Quaternion::from_array(acc)
    }
}

pub const LAPLACIAN_FIELDS: usize = 10;

/// `|D(conj(D) f) - laplacian f|` on random degree-5 polynomial fields at
/// `h` and `h / 2`, with the halving ratio.
pub fn laplacian_factorization(cfg: &ExperimentConfig) -> RunResult {
    let fr = frame(cfg);
    let h = cfg.steps_or(&[1e-2])[0];
    let degree = cfg.degrees_or(&[5])[0];
    let mut r = rng(cfg.seed ^ 0x9e37_79b9);
    let polys: Vec<Polynomial> = (0..LAPLACIAN_FIELDS).map(|_| Polynomial::random(&mut r, degree)).collect();
    let probes = ball_probes(&Ball::new(cfg.center_point(), 0.3), 3, cfg.seed);
    let (tol, ratio_tol) = (cfg.tol("factorization"), cfg.tol("factorization_ratio"));
    let st = Stencil::new(h, 2)?;
    let rows: Vec<Vec<Row>> = polys
        .par_iter()
        .enumerate()
        .map(|(i, poly)| -> hyperbergman_core::Result<Vec<Row>> {
            let pc = poly.clone();
            let f = Field::new(fr, move |p: &ThetaPoint| pc.eval(p));
            let name = format!("poly{i}");
            let mut rows = Vec::new();
            for (pi, p) in probes.iter().enumerate() {
                let g1 = factorization_gap(&f, &fr, p, &st)?;
                let g2 = factorization_gap(&f, &fr, p, &st.halved())?;
                rows.push(Row::new(&name, "factorization_gap", g1).h(h).degree(degree).probe(pi).at_most(tol));
                rows.push(Row::new(&name, "factorization_gap", g2).h(h / 2.0).degree(degree).probe(pi).order(observed_order(g1, g2)));
                rows.push(Row::new(&name, "factorization_ratio_deviation", (g1 / g2 - 4.0).abs()).h(h).probe(pi).at_most(ratio_tol));
            }
            Ok(rows)
        })
        .collect::<hyperbergman_core::Result<_>>()?;
    let mut rep = report(cfg);
    rep.extend(rows.into_iter().flatten());
    Ok(rep)
}
