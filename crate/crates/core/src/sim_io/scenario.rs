//! Scenario files.
//!
//! Scenarios are TOML documents. Fuzzy literals are arrays of
//! `[value, grade]` pairs, e.g. `v_max = [[4, 0.2], [5, 1.0], [6, 0.2]]`.
//! A fleet entry with `count = k` places `k` vehicles, the `i`-th shifted
//! downstream by `i * spacing` cells.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fcm::{FcmParams, FcmState, GapMode, ModelError, VehicleClass};
use crate::fuzzy::{FuzzyError, FuzzyInt};
use crate::nasch::{NaschError, NaschParams, NaschState};
use crate::road::{Boundary, Road};

pub type FuzzySpec = Vec<(i64, f64)>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    #[default]
    Fcm,
    Nasch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassSpec {
    pub name: String,
    pub length: FuzzySpec,
    pub v_max: FuzzySpec,
    pub accel: FuzzySpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FleetSpec {
    pub class: String,
    pub position: FuzzySpec,
    #[serde(default = "standstill")]
    pub velocity: FuzzySpec,
    #[serde(default = "one")]
    pub count: usize,
    #[serde(default = "one_cell")]
    pub spacing: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NaschSpec {
    pub v_max: i64,
    pub p: f64,
    pub runs: usize,
    pub base_seed: u64,
}

impl Default for NaschSpec {
    fn default() -> Self {
        Self {
            v_max: 3,
            p: 0.2,
            runs: 200,
            base_seed: 42,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FlowEstimator {
    /// Sum of velocities divided by the road length.
    #[default]
    VelocitySum,
    /// Vehicles passing the boundary after cell 0 per step (NaSch only).
    SiteCount,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FundamentalSpec {
    pub densities: Vec<f64>,
    pub warmup: usize,
    pub window: usize,
    /// Alpha-cut level for the fuzzy flow band.
    pub cut_threshold: f64,
    /// Empirical probability at which a NaSch state counts as a dot.
    pub probability_threshold: f64,
    pub estimator: FlowEstimator,
    /// Class used for the ring fleet; defaults to the first fleet entry's class.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
}

impl Default for FundamentalSpec {
    fn default() -> Self {
        Self {
            densities: (1..=19).map(|k| k as f64 * 0.05).collect(),
            warmup: 100,
            window: 500,
            cut_threshold: 0.99,
            probability_threshold: 0.1,
            estimator: FlowEstimator::VelocitySum,
            class: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputKind {
    Spacetime,
    Queue,
    Fundamental,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub kind: OutputKind,
    pub path: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub model: ModelKind,
    pub road_length: i64,
    #[serde(default)]
    pub boundary: Boundary,
    pub steps: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub gap_mode: GapMode,
    pub classes: Vec<ClassSpec>,
    #[serde(default)]
    pub fleet: Vec<FleetSpec>,
    #[serde(default)]
    pub nasch: NaschSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fundamental: Option<FundamentalSpec>,
    #[serde(default)]
    pub outputs: Vec<OutputSpec>,
}

fn standstill() -> FuzzySpec {
    vec![(0, 1.0)]
}

fn one() -> usize {
    1
}

fn one_cell() -> i64 {
    1
}

fn default_alpha() -> f64 {
    0.9
}

fn default_epsilon() -> f64 {
    0.01
}

#[derive(Debug, Error)]
pub enum Invalid {
    #[error(transparent)]
    Fuzzy(#[from] FuzzyError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Nasch(#[from] NaschError),
    #[error("unknown vehicle class `{0}`")]
    UnknownClass(String),
    #[error("{0}")]
    Range(String),
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid `{field}`: {reason}")]
    Validation {
        field: String,
        #[source]
        reason: Invalid,
    },
}

fn invalid(field: impl Into<String>, reason: impl Into<Invalid>) -> ConfigError {
    ConfigError::Validation {
        field: field.into(),
        reason: reason.into(),
    }
}

fn range(field: &str, msg: String) -> ConfigError {
    invalid(field, Invalid::Range(msg))
}

/// Parses and validates a scenario document.
pub fn load_scenario(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let config: ScenarioConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map(|s| line_col(text, s.start)).unwrap_or((0, 0));
        ConfigError::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    config.validate()?;
    Ok(config)
}

/// Reads a scenario file. A path without extension that does not exist is
/// retried with `.toml` appended.
pub fn load_scenario_file(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let resolved = if !path.exists() && path.extension().is_none() {
        path.with_extension("toml")
    } else {
        path.to_path_buf()
    };
    let text = std::fs::read_to_string(&resolved).map_err(|source| ConfigError::Io {
        path: resolved.clone(),
        source,
    })?;
    load_scenario(&text)
}

pub fn serialize_scenario(config: &ScenarioConfig) -> String {
    toml::to_string(config).expect("scenario configs are always representable in TOML")
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

/// A validated scenario with its fuzzy literals built.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub classes: HashMap<String, Arc<VehicleClass>>,
    /// Expanded fleet, upstream first: `(class, position, velocity)`.
    pub fleet: Vec<(Arc<VehicleClass>, FuzzyInt, FuzzyInt)>,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<Scenario, ConfigError> {
        if self.steps < 1 {
            return Err(range("steps", "must be at least 1".into()));
        }
        if self.road_length < 1 {
            return Err(range(
                "road_length",
                format!("{} is not positive", self.road_length),
            ));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(range("alpha", format!("{} is outside [0, 1]", self.alpha)));
        }
        if !(0.0..1.0).contains(&self.epsilon) {
            return Err(range(
                "epsilon",
                format!("{} is outside [0, 1)", self.epsilon),
            ));
        }

        let mut classes = HashMap::new();
        for (i, c) in self.classes.iter().enumerate() {
            let field = |f: &str| format!("classes[{i}].{f}");
            let length =
                FuzzyInt::new(c.length.iter().copied()).map_err(|e| invalid(field("length"), e))?;
            let v_max =
                FuzzyInt::new(c.v_max.iter().copied()).map_err(|e| invalid(field("v_max"), e))?;
            let accel =
                FuzzyInt::new(c.accel.iter().copied()).map_err(|e| invalid(field("accel"), e))?;
            let class = VehicleClass::new(c.name.clone(), length, v_max, accel)
                .map_err(|e| invalid(format!("classes[{i}]"), e))?;
            if classes.insert(c.name.clone(), Arc::new(class)).is_some() {
                return Err(range(
                    &field("name"),
                    format!("duplicate class `{}`", c.name),
                ));
            }
        }

        let mut fleet = Vec::new();
        for (i, f) in self.fleet.iter().enumerate() {
            let field = |x: &str| format!("fleet[{i}].{x}");
            let class = classes
                .get(&f.class)
                .cloned()
                .ok_or_else(|| invalid(field("class"), Invalid::UnknownClass(f.class.clone())))?;
            let position = FuzzyInt::new(f.position.iter().copied())
                .map_err(|e| invalid(field("position"), e))?;
            let velocity = FuzzyInt::new(f.velocity.iter().copied())
                .map_err(|e| invalid(field("velocity"), e))?;
            if f.count < 1 {
                return Err(range(&field("count"), "must be at least 1".into()));
            }
            if f.spacing < 1 {
                return Err(range(&field("spacing"), "must be at least 1".into()));
            }
            for k in 0..f.count as i64 {
                fleet.push((
                    class.clone(),
                    position.shift(k * f.spacing),
                    velocity.clone(),
                ));
            }
        }

        let n = &self.nasch;
        NaschParams {
            v_max: n.v_max,
            p: n.p,
        }
        .validate()
        .map_err(|e| invalid("nasch", e))?;
        if n.runs < 1 {
            return Err(range("nasch.runs", "must be at least 1".into()));
        }

        if let Some(fd) = &self.fundamental {
            if let Some(d) = fd.densities.iter().find(|d| !(**d > 0.0 && **d <= 1.0)) {
                return Err(range(
                    "fundamental.densities",
                    format!("{d} is outside (0, 1]"),
                ));
            }
            if fd.window < 1 {
                return Err(range("fundamental.window", "must be at least 1".into()));
            }
            if !(fd.cut_threshold > 0.0 && fd.cut_threshold <= 1.0) {
                return Err(range(
                    "fundamental.cut_threshold",
                    format!("{} is outside (0, 1]", fd.cut_threshold),
                ));
            }
            if !(0.0..=1.0).contains(&fd.probability_threshold) {
                return Err(range(
                    "fundamental.probability_threshold",
                    format!("{} is outside [0, 1]", fd.probability_threshold),
                ));
            }
            if let Some(c) = &fd.class {
                if !classes.contains_key(c) {
                    return Err(invalid(
                        "fundamental.class",
                        Invalid::UnknownClass(c.clone()),
                    ));
                }
            }
            if fd.estimator == FlowEstimator::SiteCount && self.model == ModelKind::Fcm {
                return Err(range(
                    "fundamental.estimator",
                    "site counting is only defined for the nasch model".into(),
                ));
            }
        }

        let scenario = Scenario {
            config: self.clone(),
            classes,
            fleet,
        };
        scenario.fcm_state().map_err(|e| invalid("fleet", e))?;
        scenario
            .nasch_state(n.base_seed)
            .map_err(|e| invalid("fleet", e))?;
        Ok(scenario)
    }
}

impl Scenario {
    pub fn road(&self) -> Road {
        Road {
            length: self.config.road_length,
            boundary: self.config.boundary,
        }
    }

    pub fn fcm_params(&self) -> FcmParams {
        FcmParams {
            alpha: self.config.alpha,
            epsilon: self.config.epsilon,
            gap_mode: self.config.gap_mode,
        }
    }

    pub fn nasch_params(&self) -> NaschParams {
        NaschParams {
            v_max: self.config.nasch.v_max,
            p: self.config.nasch.p,
        }
    }

    pub fn fundamental(&self) -> FundamentalSpec {
        self.config.fundamental.clone().unwrap_or_default()
    }

    pub fn fcm_state(&self) -> Result<FcmState, ModelError> {
        FcmState::new(self.road(), self.fcm_params(), self.fleet.clone())
    }

    /// The fleet reduced to crisp `(cell, velocity)` by defuzzification.
    pub fn nasch_state(&self, seed: u64) -> Result<NaschState, NaschError> {
        let v_max = self.config.nasch.v_max;
        let cars: Vec<(i64, i64)> = self
            .fleet
            .iter()
            .map(|(_, p, v)| (p.argmax(), v.argmax().clamp(0, v_max)))
            .collect();
        NaschState::new(self.road(), self.nasch_params(), &cars, seed)
    }

    /// Class used for density sweeps.
    pub fn sweep_class(&self) -> Option<Arc<VehicleClass>> {
        if let Some(name) = self.fundamental().class {
            return self.classes.get(&name).cloned();
        }
        if let Some((c, _, _)) = self.fleet.first() {
            return Some(c.clone());
        }
        self.config
            .classes
            .first()
            .and_then(|c| self.classes.get(&c.name).cloned())
    }
}

/// Evenly spaced stopped vehicles: vehicle `i` at cell `floor(i * C / n)`.
pub fn even_cells(road_length: i64, vehicles: usize) -> Vec<i64> {
    (0..vehicles as i64)
        .map(|i| i * road_length / vehicles as i64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const SINGLE: &str = r#"
name = "single"
road_length = 60
steps = 10
alpha = 0.9

[[classes]]
name = "car"
length = [[0, 1.0]]
v_max = [[4, 0.2], [5, 1.0], [6, 0.2]]
accel = [[0, 0.2], [1, 1.0], [2, 0.2]]

[[fleet]]
class = "car"
position = [[0, 1.0]]
"#;

    #[test]
    fn loads_minimal_scenario() {
        let cfg = load_scenario(SINGLE).unwrap();
        assert_eq!(cfg.model, ModelKind::Fcm);
        assert_eq!(cfg.boundary, Boundary::Open);
        assert_eq!(cfg.epsilon, 0.01);
        let s = cfg.validate().unwrap();
        assert_eq!(s.fleet.len(), 1);
        assert_eq!(s.fleet[0].2, FuzzyInt::crisp(0));
        assert_eq!(s.fleet[0].0.v_max.to_string(), "{0.2/4; 1/5; 0.2/6}");
    }

    #[test]
    fn serialize_round_trips() {
        let mut cfg = load_scenario(SINGLE).unwrap();
        cfg.fundamental = Some(FundamentalSpec::default());
        cfg.outputs.push(OutputSpec {
            kind: OutputKind::Queue,
            path: "q.csv".into(),
        });
        assert_eq!(load_scenario(&serialize_scenario(&cfg)).unwrap(), cfg);
    }

    #[test]
    fn bad_grade_is_a_validation_error() {
        let text = SINGLE.replace("[5, 1.0]", "[5, 1.5]");
        match load_scenario(&text) {
            Err(ConfigError::Validation {
                field,
                reason: Invalid::Fuzzy(FuzzyError::BadGrade { value: 5, .. }),
            }) => assert_eq!(field, "classes[0].v_max"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parse_error_reports_line() {
        let text = SINGLE.replace("steps = 10", "steps = ten");
        match load_scenario(&text) {
            Err(ConfigError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_class_and_fields_rejected() {
        let text = SINGLE.replace("class = \"car\"", "class = \"bus\"");
        assert!(matches!(
            load_scenario(&text),
            Err(ConfigError::Validation {
                reason: Invalid::UnknownClass(_),
                ..
            })
        ));
        let text = SINGLE.replace("steps = 10", "steps = 10\nspeed = 3");
        assert!(matches!(
            load_scenario(&text),
            Err(ConfigError::Parse { .. })
        ));
    }

    #[test]
    fn range_checks() {
        for (from, to) in [
            ("steps = 10", "steps = 0"),
            ("alpha = 0.9", "alpha = 1.5"),
            ("road_length = 60", "road_length = 0"),
        ] {
            assert!(
                matches!(
                    load_scenario(&SINGLE.replace(from, to)),
                    Err(ConfigError::Validation { .. })
                ),
                "{to}"
            );
        }
    }

    #[test]
    fn fleet_count_expands() {
        let text = SINGLE.replace(
            "position = [[0, 1.0]]",
            "position = [[0, 1.0]]\ncount = 4\nspacing = 2",
        );
        let s = load_scenario(&text).unwrap().validate().unwrap();
        let cells: Vec<i64> = s.fleet.iter().map(|(_, p, _)| p.argmax()).collect();
        assert_eq!(cells, vec![0, 2, 4, 6]);
        let nasch = s.nasch_state(1).unwrap();
        assert_eq!(nasch.positions(), &[0, 2, 4, 6]);
    }

    #[test]
    fn even_spacing() {
        assert_eq!(even_cells(10, 4), vec![0, 2, 5, 7]);
        assert_eq!(even_cells(5, 5), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn line_col_counts_from_one() {
        assert_eq!(line_col("ab\ncd", 4), (2, 2));
        assert_eq!(line_col("ab", 0), (1, 1));
    }
}
