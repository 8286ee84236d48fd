//! Plain `key = value` experiment configuration.
//!
//! ```text
//! # comment
//! experiment = verify-cauchy
//! center = 0 0 0 0
//! radius = 0.8
//! theta = 0.3
//! u = 0.1 0 0.2 0
//! levels = 1 2 3
//! tol.cauchy_interior = 1e-4
//! ```
//!
//! Lists are separated by spaces or commas. `moebius` takes sixteen numbers,
//! the coefficients `a b c d` in order, four components each.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::ValueEnum;
use hyperbergman_core::geometry::Ball;
use hyperbergman_core::moebius::MoebiusMap;
use hyperbergman_core::{Complex64, Quaternion, ThetaPoint};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("key `{key}` given twice")]
    Duplicate { key: String },
    #[error("key `{key}`: {message}")]
    Value { key: String, message: String },
    #[error("no experiment given")]
    MissingExperiment,
    #[error("unknown tolerance `{name}` for experiment {experiment}")]
    UnknownTolerance { name: String, experiment: Experiment },
}

impl ConfigError {
    fn value(key: &str, message: impl Into<String>) -> Self {
        ConfigError::Value { key: key.to_string(), message: message.into() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, ValueEnum)]
pub enum Experiment {
    VerifyAlgebra,
    VerifyCr,
    VerifyCauchy,
    VerifyBorelPompieu,
    VerifyTeodorescu,
    VerifyStokes,
    VerifyCovariance,
    VerifyIsometry,
    BergmanKernel,
    KernelRelations,
    InclusionReport,
}

impl Experiment {
    pub const ALL: [Experiment; 11] = [
        Experiment::VerifyAlgebra,
        Experiment::VerifyCr,
        Experiment::VerifyCauchy,
        Experiment::VerifyBorelPompieu,
        Experiment::VerifyTeodorescu,
        Experiment::VerifyStokes,
        Experiment::VerifyCovariance,
        Experiment::VerifyIsometry,
        Experiment::BergmanKernel,
        Experiment::KernelRelations,
        Experiment::InclusionReport,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::VerifyAlgebra => "verify-algebra",
            Experiment::VerifyCr => "verify-cr",
            Experiment::VerifyCauchy => "verify-cauchy",
            Experiment::VerifyBorelPompieu => "verify-borel-pompieu",
            Experiment::VerifyTeodorescu => "verify-teodorescu",
            Experiment::VerifyStokes => "verify-stokes",
            Experiment::VerifyCovariance => "verify-covariance",
            Experiment::VerifyIsometry => "verify-isometry",
            Experiment::BergmanKernel => "bergman-kernel",
            Experiment::KernelRelations => "kernel-relations",
            Experiment::InclusionReport => "inclusion-report",
        }
    }

    /// Tolerance names and defaults accepted by the experiment.
    pub fn default_tolerances(self) -> &'static [(&'static str, f64)] {
        match self {
            Experiment::VerifyAlgebra => &[("algebra", 1e-12)],
            Experiment::VerifyCr => &[
                ("cr_floor", 1e-9),
                ("cr_order", 1.9),
                ("non_member", 0.1),
                ("factorization", 1e-4),
                ("factorization_ratio", 0.5),
            ],
            Experiment::VerifyCauchy => &[("cauchy_interior", 1e-4), ("cauchy_exterior", 1e-4)],
            Experiment::VerifyBorelPompieu => &[("borel_pompieu", 5e-3)],
            Experiment::VerifyTeodorescu => &[("teodorescu", 5e-2), ("component_system", 5e-2)],
            Experiment::VerifyStokes => &[("stokes", 1e-3)],
            Experiment::VerifyCovariance => &[("covariance_affine", 1e-5), ("covariance_general", 1e-3)],
            Experiment::VerifyIsometry => &[("isometry", 1e-6)],
            Experiment::BergmanKernel => &[("closed_form", 1e-2), ("origin", 1e-3)],
            Experiment::KernelRelations => &[
                ("hermitian", 1e-12),
                ("idempotence", 1e-9),
                ("symmetry", 1e-9),
                ("weighted", 1e-9),
                ("conformal", 1e-8),
                ("sp_laws", 1e-14),
                ("sp_isometry", 1e-10),
            ],
            Experiment::InclusionReport => &[],
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| ConfigError::value("experiment", format!("unknown experiment `{s}`")))
    }
}

/// Everything one invocation needs. Unset options take per-experiment defaults.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub center: [f64; 4],
    pub radius: Option<f64>,
    pub theta: f64,
    pub u: Option<[f64; 4]>,
    /// `(Re alpha, Im alpha, Re beta, Im beta)`.
    pub alpha_beta: Option<[f64; 4]>,
    pub moebius: Option<[f64; 16]>,
    pub levels: Option<Vec<u32>>,
    pub steps: Option<Vec<f64>>,
    pub degrees: Option<Vec<u32>>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub tolerances: BTreeMap<String, f64>,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            center: [0.0; 4],
            radius: None,
            theta: 0.0,
            u: None,
            alpha_beta: None,
            moebius: None,
            levels: None,
            steps: None,
            degrees: None,
            seed: 1,
            out: None,
            tolerances: BTreeMap::new(),
        }
    }

    pub fn center_point(&self) -> ThetaPoint {
        ThetaPoint::from_array(self.center)
    }

    pub fn ball_or(&self, radius: f64) -> Ball {
        Ball::new(self.center_point(), self.radius.unwrap_or(radius))
    }

    pub fn u_quaternion(&self) -> Option<Quaternion> {
        self.u.map(Quaternion::from_array)
    }

    pub fn alpha_beta_pair(&self) -> Option<(Complex64, Complex64)> {
        self.alpha_beta.map(|a| (Complex64::new(a[0], a[1]), Complex64::new(a[2], a[3])))
    }

    pub fn moebius_map(&self) -> Result<Option<MoebiusMap>, ConfigError> {
        let Some(m) = self.moebius else { return Ok(None) };
        let q = |k: usize| Quaternion::new(m[4 * k], m[4 * k + 1], m[4 * k + 2], m[4 * k + 3]);
        MoebiusMap::new(q(0), q(1), q(2), q(3)).map(Some).map_err(|e| ConfigError::value("moebius", e.to_string()))
    }

    pub fn levels_or(&self, default: &[u32]) -> Vec<u32> {
        self.levels.clone().unwrap_or_else(|| default.to_vec())
    }

    pub fn steps_or(&self, default: &[f64]) -> Vec<f64> {
        self.steps.clone().unwrap_or_else(|| default.to_vec())
    }

    pub fn degrees_or(&self, default: &[u32]) -> Vec<u32> {
        self.degrees.clone().unwrap_or_else(|| default.to_vec())
    }

    /// Configured tolerance, or the experiment default. Panics on names the
    /// experiment does not declare.
    pub fn tol(&self, name: &str) -> f64 {
        if let Some(v) = self.tolerances.get(name) {
            return *v;
        }
        self.experiment
            .default_tolerances()
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, v)| *v)
            .unwrap_or_else(|| panic!("experiment {} has no tolerance `{name}`", self.experiment))
    }

    pub fn set_tolerance(&mut self, name: &str, value: f64) -> Result<(), ConfigError> {
        if !self.experiment.default_tolerances().iter().any(|(n, _)| *n == name) {
            return Err(ConfigError::UnknownTolerance { name: name.to_string(), experiment: self.experiment });
        }
        if !(value.is_finite() && value >= 0.0) {
            return Err(ConfigError::value(&format!("tol.{name}"), "must be finite and non-negative"));
        }
        self.tolerances.insert(name.to_string(), value);
        Ok(())
    }

    /// Parses a config file. `experiment` may be left out when `fallback`
    /// supplies it (the `--experiment` flag).
    pub fn parse(text: &str, fallback: Option<Experiment>) -> Result<Self, ConfigError> {
        let mut entries: Vec<(usize, String, String)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(ConfigError::Syntax { line: i + 1 });
            }
            if entries.iter().any(|(_, key, _)| key == k) {
                return Err(ConfigError::Duplicate { key: k.to_string() });
            }
            entries.push((i + 1, k.to_string(), v.to_string()));
        }
        let named = entries.iter().find(|(_, k, _)| k == "experiment").map(|(_, _, v)| v.parse::<Experiment>());
        let experiment = match (fallback, named) {
            (Some(e), _) => e,
            (None, Some(e)) => e?,
            (None, None) => return Err(ConfigError::MissingExperiment),
        };
        let mut cfg = ExperimentConfig::new(experiment);
        for (line, k, v) in &entries {
            cfg.set(*line, k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, line: usize, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "experiment" => {
                value.parse::<Experiment>()?;
            }
            "center" => self.center = fixed(key, value)?,
            "radius" => self.radius = Some(scalar(key, value)?),
            "theta" => self.theta = scalar(key, value)?,
            "u" => self.u = Some(fixed(key, value)?),
            "alpha_beta" => self.alpha_beta = Some(fixed(key, value)?),
            "moebius" => self.moebius = Some(fixed(key, value)?),
            "levels" => self.levels = Some(list(key, value)?),
            "steps" => self.steps = Some(list(key, value)?),
            "degrees" => self.degrees = Some(list(key, value)?),
            "seed" => self.seed = value.parse().map_err(|_| ConfigError::value(key, "expected an unsigned integer"))?,
            "out" => self.out = Some(PathBuf::from(value)),
            _ => match key.strip_prefix("tol.") {
                Some(name) => self.set_tolerance(name, scalar(key, value)?)?,
                None => return Err(ConfigError::UnknownKey { line, key: key.to_string() }),
            },
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if let Some(r) = self.radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(ConfigError::value("radius", "must be positive"));
            }
        }
        if self.levels.as_ref().is_some_and(|l| l.is_empty() || l.contains(&0)) {
            return Err(ConfigError::value("levels", "levels must be positive"));
        }
        if self.degrees.as_ref().is_some_and(|d| d.is_empty() || d.contains(&0)) {
            return Err(ConfigError::value("degrees", "degrees must be positive"));
        }
        if self.steps.as_ref().is_some_and(|s| s.is_empty() || s.iter().any(|h| !(*h > 0.0 && h.is_finite()))) {
            return Err(ConfigError::value("steps", "steps must be positive"));
        }
        if self.u.is_some() && self.alpha_beta.is_some() {
            return Err(ConfigError::value("u", "give either u or alpha_beta, not both"));
        }
        self.moebius_map()?;
        Ok(())
    }
}

fn numbers<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, ConfigError> {
    value
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|_| ConfigError::value(key, format!("cannot parse `{s}`"))))
        .collect()
}

fn scalar(key: &str, value: &str) -> Result<f64, ConfigError> {
    let [v] = fixed::<1>(key, value)?;
    Ok(v)
}

fn fixed<const N: usize>(key: &str, value: &str) -> Result<[f64; N], ConfigError> {
    let v: Vec<f64> = numbers(key, value)?;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(ConfigError::value(key, "values must be finite"));
    }
    v.try_into().map_err(|v: Vec<f64>| ConfigError::value(key, format!("expected {N} numbers, got {}", v.len())))
}

fn list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, ConfigError> {
    numbers(key, value)
}

/// Parses a `NAME=VALUE` tolerance override.
pub fn parse_tolerance(s: &str) -> Result<(String, f64), String> {
    let (n, v) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got `{s}`"))?;
    let v = v.trim().parse::<f64>().map_err(|_| format!("cannot parse tolerance value `{v}`"))?;
    Ok((n.trim().to_string(), v))
}
