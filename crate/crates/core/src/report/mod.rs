//! Scenario runs: configuration, concurrent point evaluation and the JSON
//! report.

pub mod catalog;
pub mod checks;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use catalog::{explain, lookup, CheckSpec, Suite, CHECKS};
pub use checks::{Check, Relation};

use crate::diffgeo::{Backend, DiffSettings};
use crate::error::{GeomError, Result};
use crate::geometry::PointGeometry;
use crate::scenarios::{self, Scenario, Tolerances};

pub const SCHEMA_VERSION: u32 = 1;
pub const THREADS_ENV: &str = "GTORSION_THREADS";
pub const DEFAULT_PROBES: usize = 100;
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Process exit statuses of a run.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const CHECK_FAILURE: i32 = 1;
    pub const CONFIG_ERROR: i32 = 2;
    pub const NUMERICAL_ERROR: i32 = 3;
}

/// Per-scenario settings read from a config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioOverride {
    pub points: Option<usize>,
    pub seed: Option<u64>,
    pub backend: Option<Backend>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Scenario ids; empty means the whole catalogue.
    pub scenarios: Vec<String>,
    /// Points per scenario; `None` uses each scenario's default.
    pub points: Option<usize>,
    pub seed: u64,
    pub backend: Option<Backend>,
    pub fd_step: f64,
    /// Overrides keyed by tolerance class or by check name.
    pub tolerances: BTreeMap<String, f64>,
    pub suites: Vec<Suite>,
    /// Random probe tuples per point for the identity suite.
    pub probes: usize,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(rename = "scenario")]
    pub overrides: BTreeMap<String, ScenarioOverride>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenarios: Vec::new(),
            points: None,
            seed: 0,
            backend: None,
            fd_step: DEFAULT_FD_STEP,
            tolerances: BTreeMap::new(),
            suites: Suite::all().to_vec(),
            probes: DEFAULT_PROBES,
            out: None,
            overrides: BTreeMap::new(),
        }
    }
}

const TOLERANCE_CLASSES: [&str; 6] = ["diff", "curv", "frame", "structure", "gate", "gate_second"];

fn check_tolerances(map: &BTreeMap<String, f64>) -> Result<()> {
    for (name, v) in map {
        if !TOLERANCE_CLASSES.contains(&name.as_str()) && lookup(name).is_none() {
            return Err(GeomError::Config(format!("unknown tolerance or check `{name}`")));
        }
        if !(v.is_finite() && *v >= 0.0) {
            return Err(GeomError::Config(format!("tolerance `{name}` must be finite and non-negative, got {v}")));
        }
    }
    Ok(())
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| GeomError::Config(format!("invalid config file: {e}")))
    }

    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| GeomError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Everything that can be rejected before computing.
    pub fn validate(&self) -> Result<()> {
        if !(self.fd_step > 0.0 && self.fd_step <= 1e-2) {
            return Err(GeomError::Config(format!("fd step must lie in (0, 1e-2], got {}", self.fd_step)));
        }
        if self.points == Some(0) {
            return Err(GeomError::Config("points must be at least 1".into()));
        }
        if self.probes == 0 {
            return Err(GeomError::Config("probes must be at least 1".into()));
        }
        if self.suites.is_empty() {
            return Err(GeomError::Config("no suite selected".into()));
        }
        let known = scenarios::ids();
        for id in self.scenarios.iter().chain(self.overrides.keys()) {
            if !known.contains(&id.as_str()) {
                return Err(GeomError::Config(format!("unknown scenario `{id}` (known: {})", known.join(", "))));
            }
        }
        check_tolerances(&self.tolerances)?;
        for (id, o) in &self.overrides {
            if o.points == Some(0) {
                return Err(GeomError::Config(format!("scenario `{id}`: points must be at least 1")));
            }
            check_tolerances(&o.tolerances)?;
        }
        Ok(())
    }

    fn selected(&self) -> Vec<Scenario> {
        let all = scenarios::catalogue();
        if self.scenarios.is_empty() {
            return all;
        }
        // catalogue order, duplicates dropped
        all.into_iter().filter(|s| self.scenarios.iter().any(|id| id == s.id)).collect()
    }
}

/// Reads `GTORSION_THREADS`; unset or empty means rayon's default.
pub fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) if v.trim().is_empty() => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(GeomError::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointError {
    pub numerical: bool,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointReport {
    pub index: usize,
    pub coords: Vec<f64>,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<PointError>,
}

impl PointReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Largest value of one check over a scenario's points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub max: f64,
    pub points: usize,
    pub failures: usize,
    pub gated: bool,
}

/// A check on the scenario as a whole, with how many points satisfy it
/// on their own.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioCheck {
    #[serde(flatten)]
    pub check: Check,
    pub points_passing: usize,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub id: String,
    pub description: String,
    pub backend: Backend,
    pub fd_step: f64,
    pub seed: u64,
    pub expectations: Vec<&'static str>,
    pub tolerances: Tolerances,
    pub points: Vec<PointReport>,
    pub aggregates: BTreeMap<String, Aggregate>,
    /// Expectations about the structure as a whole (e.g. non-minimality).
    pub expectation_checks: Vec<ScenarioCheck>,
    pub numerical_errors: usize,
    pub pass: bool,
}

impl ScenarioReport {
    /// True when every gated check passed and no point failed to evaluate.
    fn compute_pass(&self) -> bool {
        self.numerical_errors == 0
            && self.aggregates.values().all(|a| !a.gated || a.failures == 0)
            && self.expectation_checks.iter().all(|c| c.check.pass)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Generator {
    pub name: &'static str,
    pub version: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub generator: Generator,
    pub config: RunConfig,
    pub scenarios: Vec<ScenarioReport>,
    pub pass: bool,
    pub exit_code: i32,
}

impl Report {
    pub fn scenario(&self, id: &str) -> Option<&ScenarioReport> {
        self.scenarios.iter().find(|s| s.id == id)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())
            .map_err(|e| GeomError::Config(format!("cannot write report to {}: {e}", path.display())))
    }
}

/// Points are seeded independently so results do not depend on scheduling.
fn point_rng(seed: u64, id: &str, index: usize) -> ChaCha8Rng {
    let h = id.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3));
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ h);
    rng.set_stream(index as u64 + 1);
    rng
}

fn aggregate(points: &[PointReport]) -> BTreeMap<String, Aggregate> {
    let mut out: BTreeMap<String, Aggregate> = BTreeMap::new();
    for p in points {
        for c in &p.checks {
            let a = out
                .entry(c.name.to_string())
                .or_insert(Aggregate { max: f64::NEG_INFINITY, points: 0, failures: 0, gated: false });
            a.max = if c.value.is_nan() || a.max.is_nan() { f64::NAN } else { a.max.max(c.value) };
            a.points += 1;
            a.gated |= c.gated;
            if c.gated && !c.pass {
                a.failures += 1;
            }
        }
    }
    out
}

fn run_scenario(sc: &Scenario, config: &RunConfig) -> Result<ScenarioReport> {
    let o = config.overrides.get(sc.id).cloned().unwrap_or_default();
    let backend = o.backend.or(config.backend).unwrap_or(sc.backend);
    let seed = o.seed.unwrap_or(config.seed);
    let count = o.points.or(config.points).unwrap_or(sc.default_points);
    let settings = DiffSettings { backend, fd_step: config.fd_step };

    let mut tolerances = sc.tolerances(backend);
    let mut by_check = BTreeMap::new();
    for (name, v) in config.tolerances.iter().chain(&o.tolerances) {
        if TOLERANCE_CLASSES.contains(&name.as_str()) {
            tolerances.set(name, *v)?;
        } else {
            by_check.insert(name.clone(), *v);
        }
    }

    let pts = scenarios::sample(sc, count, seed)?;
    let ctx = checks::PointContext {
        tolerances: &tolerances,
        overrides: &by_check,
        expectations: sc.expectations,
        probes: config.probes,
        suites: &config.suites,
    };
    let points: Vec<PointReport> = pts
        .par_iter()
        .enumerate()
        .map(|(index, pt)| {
            let coords = pt.coords().to_vec();
            match PointGeometry::compute(pt, &sc.projector, &settings) {
                Ok(geo) => {
                    let mut rng = point_rng(seed, sc.id, index);
                    let checks = checks::evaluate(&geo, &ctx, &mut rng);
                    PointReport { index, coords, checks, error: None }
                }
                Err(e) => PointReport {
                    index,
                    coords,
                    checks: Vec::new(),
                    error: Some(PointError { numerical: e.is_numerical(), message: e.to_string() }),
                },
            }
        })
        .collect();

    let aggregates = aggregate(&points);
    let mut expectation_checks = Vec::new();
    if sc.expectations.non_minimal && config.suites.contains(&Suite::Minimality) {
        let value_of = |p: &PointReport, names: &[&str]| {
            names.iter().filter_map(|n| p.check(n)).map(|c| c.value).fold(f64::NEG_INFINITY, f64::max)
        };
        for (name, parts) in [("expect.non_minimal", &["min_residual"][..]), ("expect.non_harmonic", &["h1", "h2"][..])] {
            let values: Vec<f64> = points.iter().filter(|p| p.error.is_none()).map(|p| value_of(p, parts)).collect();
            let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let check = checks::scenario_check(name, max, &tolerances, &by_check, Relation::Exceeds);
            let points_passing = values.iter().filter(|v| **v > check.tol).count();
            expectation_checks.push(ScenarioCheck { check, points_passing, points: values.len() });
        }
    }
    let numerical_errors = points.iter().filter(|p| p.error.is_some()).count();
    let mut rep = ScenarioReport {
        id: sc.id.to_string(),
        description: sc.description.to_string(),
        backend,
        fd_step: config.fd_step,
        seed,
        expectations: sc.expectations.flags(),
        tolerances,
        points,
        aggregates,
        expectation_checks,
        numerical_errors,
        pass: false,
    };
    rep.pass = rep.compute_pass();
    Ok(rep)
}

/// Validates `config`, evaluates every selected scenario and assembles the
/// report in catalogue order. Only configuration problems are returned as
/// errors; check failures and numerical failures are recorded in the report.
pub fn run(config: &RunConfig) -> Result<Report> {
    config.validate()?;
    let threads = thread_cap()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| GeomError::Config(format!("cannot start worker pool: {e}")))?;

    let selected = config.selected();
    let scenarios = pool.install(|| selected.iter().map(|sc| run_scenario(sc, config)).collect::<Result<Vec<_>>>())?;

    let numerical = scenarios.iter().any(|s| s.numerical_errors > 0);
    let pass = scenarios.iter().all(|s| s.pass);
    let exit_code = if numerical {
        exit::NUMERICAL_ERROR
    } else if !pass {
        exit::CHECK_FAILURE
    } else {
        exit::PASS
    };
    let mut echo = config.clone();
    echo.suites.sort();
    echo.suites.dedup();
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        generator: Generator { name: "gtorsion", version: env!("CARGO_PKG_VERSION") },
        config: echo,
        scenarios,
        pass,
        exit_code,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(id: &str) -> RunConfig {
        RunConfig { scenarios: vec![id.into()], points: Some(2), probes: 5, ..RunConfig::default() }
    }

    #[test]
    fn rejects_bad_configs() {
        let mut c = small("flat4-const");
        c.fd_step = 0.02;
        assert!(matches!(run(&c), Err(GeomError::Config(_))));
        let mut c = small("nope");
        c.points = Some(1);
        assert!(matches!(run(&c), Err(GeomError::Config(_))));
        let mut c = small("flat4-const");
        c.points = Some(0);
        assert!(c.validate().is_err());
        let mut c = small("flat4-const");
        c.tolerances.insert("bogus".into(), 1.0);
        assert!(c.validate().is_err());
    }

    #[test]
    fn aggregates_are_pointwise_maxima() {
        let rep = run(&small("s3-reeb")).unwrap();
        let sc = &rep.scenarios[0];
        for (name, agg) in &sc.aggregates {
            let max = sc.points.iter().filter_map(|p| p.check(name)).map(|c| c.value).fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(agg.max, max, "{name}");
        }
        assert_eq!(rep.exit_code, exit::PASS, "{}", rep.to_json());
    }

    #[test]
    fn check_override_beats_class() {
        let mut c = small("s3-reeb");
        c.suites = vec![Suite::Minimality];
        c.tolerances.insert("gate".into(), 1e-3);
        c.tolerances.insert("h2".into(), 1e-20);
        let rep = run(&c).unwrap();
        let p = &rep.scenarios[0].points[0];
        assert_eq!(p.check("h1").unwrap().tol, 1e-3);
        assert_eq!(p.check("h2").unwrap().tol, 1e-20);
    }

    #[test]
    fn config_file_round_trip() {
        let text = r#"
seed = 9
points = 3
suites = ["minimality"]
[tolerances]
gate = 1e-5
[scenario.s3-reeb]
points = 4
backend = "fd"
"#;
        let c = RunConfig::from_toml_str(text).unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.overrides["s3-reeb"].backend, Some(Backend::Fd));
        c.validate().unwrap();
        assert!(RunConfig::from_toml_str("colour = 1").is_err());
    }
}
