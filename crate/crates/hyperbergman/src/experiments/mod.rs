//! Verification experiments. Each returns a [`Report`]; all numerics come
//! from `hyperbergman_core`.

mod conformal;
mod integrals;
mod kernels;
mod operators;

use hyperbergman_core::{Complex64, Quaternion, ThetaFrame, ThetaPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{Experiment, ExperimentConfig};
use crate::report::Report;

pub use conformal::{verify_covariance, verify_isometry};
pub use integrals::{verify_borel_pompieu, verify_cauchy, verify_stokes, verify_teodorescu};
pub use kernels::{bergman_kernel, inclusion, kernel_laws, sp_laws};
pub use operators::{cr_generators, laplacian_factorization, verify_algebra};

pub type RunResult = Result<Report, hyperbergman_core::Error>;

pub fn run(cfg: &ExperimentConfig) -> RunResult {
    match cfg.experiment {
        Experiment::VerifyAlgebra => verify_algebra(cfg),
        Experiment::VerifyCr => merge(cfg, [cr_generators(cfg)?, laplacian_factorization(cfg)?]),
        Experiment::VerifyCauchy => verify_cauchy(cfg),
        Experiment::VerifyBorelPompieu => verify_borel_pompieu(cfg),
        Experiment::VerifyTeodorescu => verify_teodorescu(cfg),
        Experiment::VerifyStokes => verify_stokes(cfg),
        Experiment::VerifyCovariance => verify_covariance(cfg),
        Experiment::VerifyIsometry => verify_isometry(cfg),
        Experiment::BergmanKernel => bergman_kernel(cfg),
        Experiment::KernelRelations => merge(cfg, [kernel_laws(cfg)?, sp_laws(cfg)?]),
        Experiment::InclusionReport => inclusion(cfg),
    }
}

fn merge<const N: usize>(cfg: &ExperimentConfig, parts: [Report; N]) -> RunResult {
    let mut r = Report::new(cfg.experiment.name());
    for p in parts {
        r.extend(p.rows);
    }
    Ok(r)
}

pub(crate) fn report(cfg: &ExperimentConfig) -> Report {
    Report::new(cfg.experiment.name())
}

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn random_quaternion(rng: &mut ChaCha8Rng, r: f64) -> Quaternion {
    Quaternion::new(rng.gen_range(-r..r), rng.gen_range(-r..r), rng.gen_range(-r..r), rng.gen_range(-r..r))
}

pub(crate) fn random_complex(rng: &mut ChaCha8Rng, r: f64) -> Complex64 {
    Complex64::new(rng.gen_range(-r..r), rng.gen_range(-r..r))
}

pub(crate) fn frame(cfg: &ExperimentConfig) -> ThetaFrame {
    ThetaFrame::new(cfg.theta)
}

/// The configured perturbation as a quaternion; `(alpha, beta)` map to
/// `u = embed_pair(alpha, beta)`.
pub(crate) fn u_or(cfg: &ExperimentConfig, default: Quaternion) -> Quaternion {
    match (cfg.u_quaternion(), cfg.alpha_beta_pair()) {
        (Some(u), _) => u,
        (None, Some((a, b))) => frame(cfg).embed_pair(a, b),
        (None, None) => default,
    }
}

/// `max_fine / max_coarse` with both clamped to `floor`, so that refinement
/// below roundoff does not register as growth.
pub(crate) fn level_ratio(coarse: f64, fine: f64, floor: f64) -> f64 {
    fine.max(floor) / coarse.max(floor)
}

pub(crate) fn max_of(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |a: f64, x| if x.is_nan() || a.is_nan() { f64::NAN } else { a.max(x) })
}

/// A smooth non-hyperholomorphic test field.
pub(crate) fn generic_field(frame: ThetaFrame, k: usize) -> hyperbergman_core::fields::Field {
    use hyperbergman_core::fields::Field;
    let f: fn(&ThetaPoint) -> Quaternion = match k % 5 {
        0 => |p| Quaternion::from_complex(p.z1().conj()),
        1 => |p| Quaternion::new(1.0 + p.norm_sqr(), 0.0, 0.0, 0.0),
        2 => |p| Quaternion::new(p.c[0].sin() + 1.0, p.c[1] * p.c[2], p.c[3].cos(), p.c[0] * p.c[3]),
        3 => |p| Quaternion::new((0.5 * p.c[0]).exp(), 0.0, 1.0 + p.c[1], p.c[2] * p.c[2]),
        _ => |p| Quaternion::new(p.c[0].powi(3) - p.c[1] * p.c[2] * p.c[2], 0.5, p.c[3] - p.c[0] * p.c[1], p.c[2]),
    };
    Field::new(frame, f)
}

pub(crate) const FIELD_NAMES: [&str; 5] = ["conj_z1", "one_plus_norm2", "trig_mix", "exp_mix", "cubic_mix"];
