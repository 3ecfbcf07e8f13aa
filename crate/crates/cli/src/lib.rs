//! Batch experiment runner for `equiheat`.
//!
//! A run reads a flat TOML file of documented keys, dispatches to the
//! library, and writes `<kind>.json` plus a plot-ready `<kind>.csv` into the
//! output directory.
//!
//! | key | kinds | meaning |
//! |-----|-------|---------|
//! | `model` | trace, oscillatory, gaussian-volume: `t1 t2 s2 su2`; probes: `u1 t2 su2 so3` | model name |
//! | `sigma` | trace, probes | `K`-irrep label (weight, or spin as a half-integer) |
//! | `charge` | selberg (isotypic), bundle-heat | circle charge |
//! | `lattice` | selberg | `e`, `z2`, `z3`, ... |
//! | `kernel` | selberg | `heat` or `isotypic` |
//! | `grid` | trace, selberg, bundle-heat | list of `t` values |
//! | `mu_grid` | oscillatory | list of `μ` values |
//! | `t` | probes | time for the cutoff probe |
//! | `radius` | probes | cutoff radius |
//! | `amplitude` | oscillatory | `standard` or `random` |
//! | `method` | gaussian-volume | `quadrature` or `monte-carlo` |
//! | `budget` | trace, gaussian-volume, bundle-heat | quadrature or sample budget |
//! | `tolerance` | all | overrides the default tolerance of the primary check |
//! | `seed` | all | RNG seed (default 1) |
//! | `out` | all | output directory (default `.`) |

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use equiheat::export::{write_csv, write_json};
use equiheat::group::{GroupKind, GroupModel, HalfInt, IrrepInfo, IrrepLabel};
use equiheat::oscillatory::probes::{
    b_amplitude_probe, cutoff_insensitivity, symbol_probe, BAmplitudeConfig, SymbolProbeConfig,
};
use equiheat::oscillatory::{
    asymptotic_compare, default_mu_grid, OscillatorySpec, ProductAmplitude,
};
use equiheat::selberg::{
    bundle_heat_trace, bundle_leading_fit, bundle_prediction, selberg_sides, BundleRoute,
    FiniteLattice, SelbergKernel,
};
use equiheat::space::{SpaceKind, SpaceModel};
use equiheat::symplectic::{
    critical_geometry, gaussian_volume, gaussian_volume_reference, VolumeMethod,
};
use equiheat::traces::{
    default_grid, fit_small_time, predicted_leading, trace_curve, FitModel, TracePoint,
};
use equiheat::EquiheatError;

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config key `{key}`: {message}")]
    Config { key: String, message: String },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("I/O error on {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error(transparent)]
    Numeric(#[from] EquiheatError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Parse(_) => 2,
            CliError::Io { .. } | CliError::Numeric(_) => 3,
        }
    }
}

fn bad(key: &str, message: impl Into<String>) -> CliError {
    CliError::Config {
        key: key.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Trace,
    Oscillatory,
    GaussianVolume,
    Selberg,
    BundleHeat,
    Probes,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Trace => "trace",
            ExperimentKind::Oscillatory => "oscillatory",
            ExperimentKind::GaussianVolume => "gaussian-volume",
            ExperimentKind::Selberg => "selberg",
            ExperimentKind::BundleHeat => "bundle-heat",
            ExperimentKind::Probes => "probes",
        }
    }
}

impl std::str::FromStr for ExperimentKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "trace" => ExperimentKind::Trace,
            "oscillatory" => ExperimentKind::Oscillatory,
            "gaussian-volume" => ExperimentKind::GaussianVolume,
            "selberg" => ExperimentKind::Selberg,
            "bundle-heat" => ExperimentKind::BundleHeat,
            "probes" => ExperimentKind::Probes,
            other => return Err(bad("kind", format!("unknown experiment kind `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<ExperimentKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub charge: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parse(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    fn grid_or(
        &self,
        key: &str,
        values: &Option<Vec<f64>>,
        default: Vec<f64>,
    ) -> Result<Vec<f64>, CliError> {
        match values {
            None => Ok(default),
            Some(v) if v.is_empty() => Err(bad(key, "grid is empty")),
            Some(v) => match v.iter().find(|x| !(**x > 0.0) || !x.is_finite()) {
                Some(x) => Err(bad(key, format!("grid values must be positive, got {x}"))),
                None => Ok(v.clone()),
            },
        }
    }

    fn sigma(&self) -> Result<HalfInt, CliError> {
        let s = self.sigma.unwrap_or(0.0);
        let twice = 2.0 * s;
        if !s.is_finite() || (twice - twice.round()).abs() > 1e-12 {
            return Err(bad("sigma", format!("{s} is not a half-integer")));
        }
        Ok(HalfInt::from_twice(twice.round() as i64))
    }

    fn space(&self) -> Result<SpaceModel, CliError> {
        let name = self
            .model
            .as_deref()
            .ok_or_else(|| bad("model", "missing"))?;
        SpaceModel::by_name(name)
            .map_err(|_| bad("model", format!("`{name}` is not a bundled space")))
    }

    fn group(&self) -> Result<GroupModel, CliError> {
        let name = self
            .model
            .as_deref()
            .ok_or_else(|| bad("model", "missing"))?;
        GroupModel::by_name(name)
            .map_err(|_| bad("model", format!("`{name}` is not a bundled group")))
    }

    fn tolerance(&self, default: f64) -> Result<f64, CliError> {
        match self.tolerance {
            None => Ok(default),
            Some(t) if t > 0.0 && t.is_finite() => Ok(t),
            Some(t) => Err(bad("tolerance", format!("must be positive, got {t}"))),
        }
    }

    fn budget(&self, default: usize) -> Result<usize, CliError> {
        match self.budget {
            None => Ok(default),
            Some(0) => Err(bad("budget", "must be positive")),
            Some(b) => Ok(b),
        }
    }
}

/// A pass/fail verdict against a declared tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
    /// Numerical error estimate attached to `value`.
    pub error: f64,
    pub passed: bool,
}

impl Check {
    /// `|value − target| ≤ tolerance`.
    fn absolute(name: &str, value: f64, target: f64, tolerance: f64, error: f64) -> Self {
        Check {
            name: name.into(),
            value,
            target,
            tolerance,
            error,
            passed: (value - target).abs() <= tolerance,
        }
    }

    /// `|value/target − 1| ≤ tolerance`.
    fn relative(name: &str, value: f64, target: f64, tolerance: f64, error: f64) -> Self {
        Check {
            name: name.into(),
            value,
            target,
            tolerance,
            error,
            passed: (value / target - 1.0).abs() <= tolerance,
        }
    }

    /// `value ≤ tolerance`.
    fn below(name: &str, value: f64, tolerance: f64, error: f64) -> Self {
        Check {
            name: name.into(),
            value,
            target: 0.0,
            tolerance,
            error,
            passed: value <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timestamp {
    pub unix_seconds: u64,
    pub wall_clock_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub kind: ExperimentKind,
    pub inputs: ExperimentConfig,
    pub outputs: Value,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub versions: Value,
    /// The only field that differs between identical runs.
    pub timestamp: Timestamp,
    #[serde(skip)]
    pub csv: Option<CsvTable>,
}

/// A CSV payload with its header row.
#[derive(Debug, Clone, PartialEq)]
pub enum CsvTable {
    Trace(Vec<TracePoint>),
    Oscillatory(Vec<equiheat::oscillatory::OscRow>),
    Selberg(Vec<SelbergRow>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelbergRow {
    pub t: f64,
    pub spectral: f64,
    pub geometric: f64,
    pub residual: f64,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

struct Outcome {
    outputs: Value,
    checks: Vec<Check>,
    csv: Option<CsvTable>,
}

/// Runs the experiment of `kind` (which must agree with a `kind` key in the
/// config, if present). Does not write files.
pub fn run_experiment(
    kind: ExperimentKind,
    config: &ExperimentConfig,
) -> Result<ExperimentReport, CliError> {
    if let Some(k) = config.kind {
        if k != kind {
            return Err(bad(
                "kind",
                format!("config declares {}, command line {}", k.name(), kind.name()),
            ));
        }
    }
    let mut inputs = config.clone();
    inputs.kind = Some(kind);
    inputs.seed = Some(config.seed.unwrap_or(DEFAULT_SEED));
    let start = Instant::now();
    let outcome = match kind {
        ExperimentKind::Trace => run_trace(&inputs)?,
        ExperimentKind::Oscillatory => run_oscillatory(&inputs)?,
        ExperimentKind::GaussianVolume => run_gaussian_volume(&inputs)?,
        ExperimentKind::Selberg => run_selberg(&inputs)?,
        ExperimentKind::BundleHeat => run_bundle(&inputs)?,
        ExperimentKind::Probes => run_probes(&inputs)?,
    };
    let wall = start.elapsed().as_secs_f64();
    let unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    Ok(ExperimentReport {
        kind,
        passed: outcome.checks.iter().all(|c| c.passed),
        inputs,
        outputs: outcome.outputs,
        checks: outcome.checks,
        versions: json!({
            "equiheat": env!("CARGO_PKG_VERSION"),
            "report_schema": 1,
        }),
        timestamp: Timestamp {
            unix_seconds: unix,
            wall_clock_seconds: wall,
        },
        csv: outcome.csv,
    })
}

fn run_trace(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let space = cfg.space()?;
    let sigma = cfg.sigma()?;
    let grid = cfg.grid_or("grid", &cfg.grid, default_grid())?;
    let budget = cfg.budget(20_000)?;
    let seed = cfg.seed.unwrap_or(DEFAULT_SEED);
    let curve = trace_curve(&space, sigma, &grid)?;
    let fit = fit_small_time(&curve, FitModel::WithCorrections { log_power: 0 })?;
    let geometry = critical_geometry(&space, budget, seed)?;
    let prediction = predicted_leading(&space, sigma, &geometry)?;
    let exp_tol = cfg.tolerance(match space.kind {
        SpaceKind::Su2BothSided => 0.01,
        _ => 0.02,
    })?;
    let checks = vec![
        Check::absolute(
            "exponent",
            fit.exponent,
            prediction.exponent,
            exp_tol,
            fit.exponent_err,
        ),
        Check::relative(
            "leading_coefficient",
            fit.coefficient,
            prediction.coefficient,
            0.02,
            fit.coefficient_err,
        ),
    ];
    Ok(Outcome {
        outputs: json!({
            "fit": to_value(&fit),
            "prediction": to_value(&prediction),
            "geometry": to_value(&geometry),
            "curve": to_value(&curve),
        }),
        checks,
        csv: Some(CsvTable::Trace(curve.points)),
    })
}

fn run_oscillatory(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let space = cfg.space()?;
    if !matches!(space.kind, SpaceKind::Torus1 | SpaceKind::Sphere2) {
        return Err(bad(
            "model",
            "direct oscillatory integrals are bundled for t1 and s2",
        ));
    }
    let amplitude = match cfg.amplitude.as_deref().unwrap_or("standard") {
        "standard" => ProductAmplitude::standard(&space),
        "random" => ProductAmplitude::random(&space, cfg.seed.unwrap_or(DEFAULT_SEED)),
        other => {
            return Err(bad(
                "amplitude",
                format!("`{other}` is neither standard nor random"),
            ))
        }
    };
    let mut spec = OscillatorySpec::new(space, amplitude);
    spec.mu_grid = cfg.grid_or("mu_grid", &cfg.mu_grid, default_mu_grid())?;
    if spec.mu_grid.len() < 2 {
        return Err(bad("mu_grid", "needs at least two values"));
    }
    let r = asymptotic_compare(&spec)?;
    let smallest = r
        .rows
        .iter()
        .min_by(|a, b| a.mu.total_cmp(&b.mu))
        .expect("nonempty grid");
    let tol = cfg.tolerance(1e-3)?;
    let checks = vec![
        Check::absolute(
            "ratio_at_smallest_mu",
            smallest.ratio,
            1.0,
            tol,
            smallest.err,
        ),
        Check::absolute("log_log_slope", r.slope, r.kappa as f64, 0.01, 0.0),
    ];
    Ok(Outcome {
        outputs: to_value(&r),
        checks,
        csv: Some(CsvTable::Oscillatory(r.rows.clone())),
    })
}

fn run_gaussian_volume(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let space = cfg.space()?;
    let method = match cfg.method.as_deref().unwrap_or("quadrature") {
        "quadrature" => VolumeMethod::Quadrature,
        "monte-carlo" => VolumeMethod::MonteCarlo {
            seed: cfg.seed.unwrap_or(DEFAULT_SEED),
        },
        other => {
            return Err(bad(
                "method",
                format!("`{other}` is neither quadrature nor monte-carlo"),
            ))
        }
    };
    let v = gaussian_volume(&space, method, cfg.budget(20_000)?, 1.0)?;
    let reference = gaussian_volume_reference(&space);
    let tol = cfg.tolerance(match space.kind {
        SpaceKind::Su2BothSided => 0.01,
        _ => 0.02,
    })?;
    Ok(Outcome {
        outputs: json!({ "volume": to_value(&v), "reference": reference }),
        checks: vec![Check::relative(
            "gaussian_volume",
            v.estimate,
            reference,
            tol,
            v.error_bar,
        )],
        csv: None,
    })
}

fn run_selberg(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let name = cfg.lattice.as_deref().unwrap_or("z2");
    let lattice = FiniteLattice::by_name(name)
        .map_err(|_| bad("lattice", format!("`{name}` is not e or zN")))?;
    let kernel = match cfg.kernel.as_deref().unwrap_or("heat") {
        "heat" => SelbergKernel::Heat,
        "isotypic" => SelbergKernel::Isotypic {
            charge: HalfInt::from_int(cfg.charge.unwrap_or(0)),
        },
        other => {
            return Err(bad(
                "kernel",
                format!("`{other}` is neither heat nor isotypic"),
            ))
        }
    };
    let grid = cfg.grid_or("grid", &cfg.grid, vec![0.3, 0.5, 1.0])?;
    let tol = cfg.tolerance(1e-8)?;
    let mut reports = Vec::new();
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for &t in &grid {
        let r = selberg_sides(&lattice, kernel, t)?;
        checks.push(Check::below(
            &format!("residual_t{t}"),
            r.residual,
            tol,
            (r.spectral_bound + r.geometric_error) / r.spectral.abs(),
        ));
        rows.push(SelbergRow {
            t,
            spectral: r.spectral,
            geometric: r.geometric,
            residual: r.residual,
        });
        reports.push(r);
    }
    Ok(Outcome {
        outputs: to_value(&reports),
        checks,
        csv: Some(CsvTable::Selberg(rows)),
    })
}

fn run_bundle(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let charge = cfg.charge.unwrap_or(0);
    let grid = cfg.grid_or("grid", &cfg.grid, default_grid())?;
    let nodes = cfg.budget(12)?;
    let mut checks = Vec::new();
    let mut routes = Vec::new();
    for t in [0.05, 0.3, 1.0] {
        let a = bundle_heat_trace(charge, t, BundleRoute::Spectral)?;
        let b = bundle_heat_trace(charge, t, BundleRoute::Kernel)?;
        let diff = (a.value - b.value).abs() / a.value;
        checks.push(Check::below(
            &format!("route_difference_t{t}"),
            diff,
            1e-6,
            (a.bound + b.bound) / a.value,
        ));
        routes.push(json!({ "t": t, "spectral": to_value(&a), "kernel": to_value(&b) }));
    }
    let fit = bundle_leading_fit(charge, Some(&grid))?;
    let prediction = bundle_prediction(charge, nodes)?;
    let tol = cfg.tolerance(0.02)?;
    checks.push(Check::absolute(
        "exponent",
        fit.fit.exponent,
        prediction.exponent,
        tol,
        fit.fit.exponent_err,
    ));
    checks.push(Check::absolute(
        "coefficient",
        fit.fit.coefficient,
        1.0,
        tol,
        fit.fit.coefficient_err,
    ));
    checks.push(Check::relative(
        "predicted_coefficient",
        fit.fit.coefficient,
        prediction.coefficient,
        tol,
        prediction.gaussian_volume_error / prediction.gaussian_volume,
    ));
    Ok(Outcome {
        outputs: json!({
            "routes": routes,
            "fit": to_value(&fit.fit),
            "prediction": to_value(&prediction),
            "curve": to_value(&fit.curve),
        }),
        checks,
        csv: Some(CsvTable::Trace(fit.curve.points)),
    })
}

fn group_irrep(model: &GroupModel, sigma: HalfInt) -> Result<IrrepInfo, CliError> {
    let label = match model.kind {
        GroupKind::U1 if sigma.is_integer() => IrrepLabel::Weight(sigma.twice() / 2),
        GroupKind::T2 if sigma.is_integer() => IrrepLabel::Weight2(sigma.twice() / 2, 0),
        GroupKind::Su2 => IrrepLabel::Spin(sigma.abs()),
        GroupKind::So3 if sigma.is_integer() => IrrepLabel::Spin(sigma.abs()),
        _ => {
            return Err(bad(
                "sigma",
                format!("{sigma} is not an irrep of {}", model.name()),
            ))
        }
    };
    Ok(model.irrep(label)?)
}

fn run_probes(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let model = cfg.group()?;
    let sigma = group_irrep(&model, cfg.sigma()?)?;
    let t = cfg.t.unwrap_or(0.01);
    if !(t > 0.0 && t <= 0.05) {
        return Err(bad(
            "t",
            format!("cutoff probe needs 0 < t ≤ 0.05, got {t}"),
        ));
    }
    let radius = cfg.radius.unwrap_or(match model.kind {
        GroupKind::Su2 => 6.0,
        _ => 3.0,
    });
    if !(radius > 0.0 && radius < model.injectivity_radius) {
        return Err(bad(
            "radius",
            format!("must lie in (0, {})", model.injectivity_radius),
        ));
    }
    let tol = cfg.tolerance(1e-10)?;
    let cutoff = cutoff_insensitivity(&model, &sigma, t, radius)?;
    let mut checks = vec![Check::below(
        "cutoff_difference",
        cutoff.difference,
        tol,
        0.0,
    )];
    let mut outputs = json!({ "cutoff": to_value(&cutoff) });
    let sym = symbol_probe(&model, &SymbolProbeConfig::new(&model, 0.5, 10.0, 4))?;
    for f in &sym.fits {
        checks.push(Check {
            name: format!("symbol_decay_order_{}", f.order),
            value: f.outer_max,
            target: 0.0,
            tolerance: f.inner_max,
            error: 0.0,
            passed: f.passed,
        });
    }
    let b = b_amplitude_probe(&model, &BAmplitudeConfig::new(&model))?;
    checks.push(Check {
        name: "b_amplitude_bounded".into(),
        value: b.sup,
        target: 0.0,
        tolerance: 1.0,
        error: 0.0,
        passed: b.sup <= 1.0 + 1e-9,
    });
    outputs["symbol"] = to_value(&sym);
    outputs["b_amplitude"] = to_value(&b);
    Ok(Outcome {
        outputs,
        checks,
        csv: None,
    })
}

/// Writes `<kind>.json` and, when the report has one, `<kind>.csv` into
/// `dir`. Returns the written paths.
pub fn emit_report(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let stem = report.kind.name();
    let json_path = dir.join(format!("{stem}.json"));
    write_json(&json_path, report)?;
    let mut paths = vec![json_path];
    if let Some(table) = &report.csv {
        let csv_path = dir.join(format!("{stem}.csv"));
        match table {
            CsvTable::Trace(rows) => write_csv(&csv_path, rows)?,
            CsvTable::Oscillatory(rows) => write_csv(&csv_path, rows)?,
            CsvTable::Selberg(rows) => write_csv(&csv_path, rows)?,
        }
        paths.push(csv_path);
    }
    Ok(paths)
}

/// Thread count from `EQUIHEAT_THREADS`, if set.
pub fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var("EQUIHEAT_THREADS") {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(bad(
                "EQUIHEAT_THREADS",
                format!("`{s}` is not a positive integer"),
            )),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let e = ExperimentConfig::parse("modle = \"s2\"\n").unwrap_err();
        assert!(
            matches!(e, CliError::Parse(ref m) if m.contains("modle")),
            "{e}"
        );
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn nested_tables_are_rejected() {
        assert!(ExperimentConfig::parse("[model]\nname = \"s2\"\n").is_err());
    }

    #[test]
    fn empty_grid_names_the_key() {
        let cfg = ExperimentConfig::parse("model = \"s2\"\ngrid = []\n").unwrap();
        match run_experiment(ExperimentKind::Trace, &cfg) {
            Err(CliError::Config { key, .. }) => assert_eq!(key, "grid"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn half_integer_sigma() {
        let cfg = ExperimentConfig {
            sigma: Some(0.5),
            ..Default::default()
        };
        assert_eq!(cfg.sigma().unwrap(), HalfInt::from_twice(1));
        let cfg = ExperimentConfig {
            sigma: Some(0.3),
            ..Default::default()
        };
        assert!(cfg.sigma().is_err());
    }

    #[test]
    fn kind_mismatch() {
        let cfg = ExperimentConfig::parse("kind = \"selberg\"\n").unwrap();
        assert!(run_experiment(ExperimentKind::Trace, &cfg).is_err());
        assert!("bundle-heat".parse::<ExperimentKind>().is_ok());
        assert!("nope".parse::<ExperimentKind>().is_err());
    }
}
