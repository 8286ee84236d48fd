use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use hyperbergman::config::{parse_tolerance, Experiment, ExperimentConfig};
use hyperbergman::experiments;

const AFTER_HELP: &str = "\
CSV columns (every experiment):
  experiment  experiment name
  case        generator, field, map or kernel under test
  level       quadrature level, if any
  h           finite-difference step, if any
  degree      basis or polynomial degree, if any
  probe       probe index, if any
  metric      quantity in `value`
  value       residual or measured quantity
  order       observed convergence order against the previous row's step
  check       `<=` or `>=` when `value` is checked, empty otherwise
  bound       tolerance of the check
  pass        true or false

Metrics per experiment:
  verify-algebra        max_relative_error, count
  verify-cr             cr_residual, cr_order, cr_at_floor, non_member_residual,
                        factorization_gap, factorization_ratio_deviation
  verify-cauchy         cauchy_interior, cauchy_exterior (both over the field scale
                        on the sphere), cauchy_level_ratio, scale
  verify-borel-pompieu  borel_pompieu, borel_pompieu_level_ratio
  verify-teodorescu     left_inverse, component_system_first, component_system_second
                        and their _level_ratio rows
  verify-stokes         stokes
  verify-covariance     covariance
  verify-isometry       isometry_pushforward, isometry_image_ball
  bergman-kernel        condition_number, basis_size, closed_form_max_relative,
                        origin_relative, kernel_diagonal
  kernel-relations      hermitian, reproduces_members, idempotence, projection_symmetry,
                        weighted_relation, t_weight_relation, t_weight_difference_slot,
                        conformal_relation, inverse, composition, quadrature_isometry
  inclusion-report      pairing_min, pairing_max (case holds the verdict)

Exit status: 0 when every check passes, 1 on a failed check or a numerical
refusal, 2 on configuration or output errors. Errors print one line to stderr:
  error kind=<config|numerical|output|tolerance> message=\"...\"";

/// Verification experiments for (theta,u)-hyperholomorphic function theory.
#[derive(Parser, Debug)]
#[command(version, about, after_help = AFTER_HELP)]
struct Cli {
    /// Plain `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Experiment to run; overrides the config file.
    #[arg(long, value_enum)]
    experiment: Option<Experiment>,
    /// CSV output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Probe and sampling seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Tolerance override, repeatable.
    #[arg(long = "tol", value_name = "NAME=VALUE", value_parser = parse_tolerance)]
    tol: Vec<(String, f64)>,
}

fn fail(kind: &str, message: impl std::fmt::Display, code: u8) -> ExitCode {
    let msg = message.to_string().replace('"', "'");
    eprintln!("error kind={kind} message=\"{msg}\"");
    ExitCode::from(code)
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig, String> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            ExperimentConfig::parse(&text, cli.experiment).map_err(|e| e.to_string())?
        }
        None => ExperimentConfig::new(cli.experiment.ok_or("give --experiment or --config")?),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out = Some(out.clone());
    }
    for (name, value) in &cli.tol {
        cfg.set_tolerance(name, *value).map_err(|e| e.to_string())?;
    }
    if cli.workers == 0 {
        return Err("--workers must be at least 1".into());
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => return fail("config", e, 2),
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.workers).build() {
        Ok(p) => p,
        Err(e) => return fail("config", e, 2),
    };
    let report = match pool.install(|| experiments::run(&cfg)) {
        Ok(r) => r,
        Err(e) => return fail("numerical", e, 1),
    };
    let written = match &cfg.out {
        Some(path) => fs::File::create(path).map_err(csv::Error::from).and_then(|f| report.write_csv(io::BufWriter::new(f))),
        None => report.write_csv(io::stdout().lock()),
    };
    if let Err(e) = written {
        return fail("output", e, 2);
    }
    let failed: Vec<_> = report.failures().collect();
    if failed.is_empty() {
        return ExitCode::SUCCESS;
    }
    let first = failed[0];
    let _ = io::stdout().flush();
    fail(
        "tolerance",
        format!("{} of {} checks failed; first: case={} metric={} value={:e}", failed.len(), report.rows.len(), first.case, first.metric, first.value),
        1,
    )
}
