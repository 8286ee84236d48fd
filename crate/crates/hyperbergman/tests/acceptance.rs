//! Acceptance suite: one PASS/FAIL line per criterion, with every tolerance
//! and runtime limit pinned here rather than taken from experiment defaults.
//! Runs single-threaded so the timings are comparable across machines.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use hyperbergman::config::{Experiment, ExperimentConfig};
use hyperbergman::experiments as ex;
use hyperbergman::report::{Check, Report};

struct Criterion {
    id: u32,
    title: &'static str,
    limit: Duration,
    experiment: Experiment,
    tolerances: &'static [(&'static str, f64)],
    setup: fn(&mut ExperimentConfig),
    run: fn(&ExperimentConfig) -> ex::RunResult,
    /// Metrics whose worst value goes on the summary line.
    headline: &'static [&'static str],
}

fn no_setup(_: &mut ExperimentConfig) {}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn criteria() -> Vec<Criterion> {
    vec![
        Criterion {
            id: 1,
            title: "algebra suite, 1e4 random samples",
            limit: secs(1),
            experiment: Experiment::VerifyAlgebra,
            tolerances: &[("algebra", 1e-12)],
            setup: no_setup,
            run: ex::verify_algebra,
            headline: &["max_relative_error"],
        },
        Criterion {
            id: 2,
            title: "CR residuals of certified generators, order between h=1e-2 and 5e-3",
            limit: secs(10),
            experiment: Experiment::VerifyCr,
            tolerances: &[("cr_order", 1.9), ("cr_floor", 1e-9), ("non_member", 0.1)],
            setup: |c| c.steps = Some(vec![1e-2, 5e-3]),
            run: ex::cr_generators,
            headline: &["cr_order", "cr_at_floor", "non_member_residual"],
        },
        Criterion {
            id: 3,
            title: "Laplacian factorization on 10 random polynomial fields",
            limit: secs(5),
            experiment: Experiment::VerifyCr,
            tolerances: &[("factorization", 1e-4), ("factorization_ratio", 0.5)],
            setup: |c| c.steps = Some(vec![1e-2]),
            run: ex::laplacian_factorization,
            headline: &["factorization_gap", "factorization_ratio_deviation"],
        },
        Criterion {
            id: 4,
            title: "Cauchy reproduction on the sphere r=0.8",
            limit: secs(60),
            experiment: Experiment::VerifyCauchy,
            tolerances: &[("cauchy_interior", 1e-4), ("cauchy_exterior", 1e-4)],
            setup: |c| {
                c.theta = 0.7;
                c.u = Some([0.3, -0.2, 0.1, 0.4]);
                c.radius = Some(0.8);
                c.levels = Some(vec![2, 3, 4]);
            },
            run: ex::verify_cauchy,
            headline: &["cauchy_interior", "cauchy_exterior", "cauchy_level_ratio"],
        },
        Criterion {
            id: 5,
            title: "Borel-Pompieu on 5 non-member fields",
            limit: secs(120),
            experiment: Experiment::VerifyBorelPompieu,
            tolerances: &[("borel_pompieu", 5e-3)],
            setup: |c| {
                c.theta = 0.7;
                c.levels = Some(vec![2, 3]);
            },
            run: ex::verify_borel_pompieu,
            headline: &["borel_pompieu", "borel_pompieu_level_ratio"],
        },
        Criterion {
            id: 6,
            title: "Teodorescu left inverse and component system",
            limit: secs(300),
            experiment: Experiment::VerifyTeodorescu,
            tolerances: &[("teodorescu", 5e-2), ("component_system", 5e-2)],
            setup: |c| {
                c.theta = 0.7;
                c.levels = Some(vec![1, 2, 3]);
                c.steps = Some(vec![4e-3, 2e-3, 1e-3]);
            },
            run: ex::verify_teodorescu,
            headline: &["left_inverse", "component_system_first", "component_system_second"],
        },
        Criterion {
            id: 7,
            title: "conformal covariance, 3 affine maps x 3 (u,v) pairs and a general map",
            limit: secs(30),
            experiment: Experiment::VerifyCovariance,
            tolerances: &[("covariance_affine", 1e-5), ("covariance_general", 1e-3)],
            setup: |c| {
                c.theta = 0.7;
                c.steps = Some(vec![1e-3]);
            },
            run: ex::verify_covariance,
            headline: &["covariance"],
        },
        Criterion {
            id: 8,
            title: "L2 isometry for affine maps at level 3",
            limit: secs(30),
            experiment: Experiment::VerifyIsometry,
            tolerances: &[("isometry", 1e-6)],
            setup: |c| {
                c.theta = 0.7;
                c.levels = Some(vec![3]);
            },
            run: ex::verify_isometry,
            headline: &["isometry_pushforward", "isometry_image_ball"],
        },
        Criterion {
            id: 9,
            title: "Bergman kernel of the unit ball, degree 8, against the closed form",
            limit: secs(120),
            experiment: Experiment::BergmanKernel,
            tolerances: &[("closed_form", 1e-2), ("origin", 1e-3)],
            setup: |c| {
                c.levels = Some(vec![3]);
                c.degrees = Some(vec![8]);
            },
            run: ex::bergman_kernel,
            headline: &["closed_form_max_relative", "origin_relative"],
        },
        Criterion {
            id: 10,
            title: "kernel laws: hermitian, projection, weighted and conformal relations",
            limit: secs(120),
            experiment: Experiment::KernelRelations,
            tolerances: &[("hermitian", 1e-12), ("idempotence", 1e-9), ("symmetry", 1e-9), ("weighted", 1e-9), ("conformal", 1e-8)],
            setup: |c| c.theta = 0.7,
            run: ex::kernel_laws,
            headline: &["hermitian", "idempotence", "weighted_relation", "t_weight_relation", "conformal_relation"],
        },
        Criterion {
            id: 11,
            title: "S and P multipliers: inverse, composition, quadrature isometry",
            limit: secs(10),
            experiment: Experiment::KernelRelations,
            tolerances: &[("sp_laws", 1e-14), ("sp_isometry", 1e-10)],
            setup: |c| c.theta = 0.7,
            run: ex::sp_laws,
            headline: &["inverse", "composition", "quadrature_isometry"],
        },
    ]
}

/// Worst checked value per headline metric: the minimum for `>=` checks, the maximum otherwise.
fn summary(rep: &Report, headline: &[&str]) -> String {
    headline
        .iter()
        .map(|m| {
            let rows = rep.rows.iter().filter(|r| r.check != Check::None && r.metric == *m);
            let worst = rows.fold(None::<f64>, |acc, r| {
                let v = r.value;
                Some(match (acc, r.check) {
                    (None, _) => v,
                    (Some(a), _) if a.is_nan() || v.is_nan() => f64::NAN,
                    (Some(a), Check::AtLeast(_)) => a.min(v),
                    (Some(a), _) => a.max(v),
                })
            });
            let worst = worst.unwrap_or(f64::NAN);
            format!("{m}={worst:.2e}")
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn main() -> ExitCode {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().expect("thread pool");
    let mut failed = 0;
    for c in criteria() {
        let mut cfg = ExperimentConfig::new(c.experiment);
        for (name, v) in c.tolerances {
            cfg.set_tolerance(name, *v).expect("pinned tolerance name");
        }
        (c.setup)(&mut cfg);
        let start = Instant::now();
        let result = pool.install(|| (c.run)(&cfg));
        let elapsed = start.elapsed();
        let (ok, detail) = match result {
            Ok(rep) => {
                let checks = rep.rows.iter().filter(|r| r.check != Check::None).count();
                let bad = rep.failures().count();
                let first = rep.failures().next().map(|r| format!(" first failure: {} {} = {:e}", r.case, r.metric, r.value)).unwrap_or_default();
                (bad == 0 && checks > 0, format!("{}/{checks} checks pass; {}{first}", checks - bad, summary(&rep, c.headline)))
            }
            Err(e) => (false, format!("refused: {e}")),
        };
        let in_time = elapsed <= c.limit;
        let pass = ok && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "{} [{:>2}] {}: {}; {:.2} s (limit {} s{})",
            if pass { "PASS" } else { "FAIL" },
            c.id,
            c.title,
            detail,
            elapsed.as_secs_f64(),
            c.limit.as_secs(),
            if in_time { "" } else { ", exceeded" }
        );
    }
    println!("acceptance: {} of 11 criteria pass", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
