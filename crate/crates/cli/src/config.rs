//! Sweep configuration: JSON schema, defaults and validation.

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;

use dicke_core::{InverseTemperature, ModelParams};
use serde::{Deserialize, Deserializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("config is not valid JSON at line {line}, column {column}: {msg}")]
    Syntax { line: usize, column: usize, msg: String },
    #[error("config field `{field}`: {msg}")]
    Field { field: String, msg: String },
}

impl ConfigError {
    fn field(field: impl Into<String>, msg: impl Into<String>) -> Self {
        ConfigError::Field { field: field.into(), msg: msg.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Deserialize)]
pub enum ParamName {
    #[serde(rename = "omega0")]
    Omega0,
    #[serde(rename = "Omega")]
    Omega,
    #[serde(rename = "g1")]
    G1,
    #[serde(rename = "g2")]
    G2,
    #[serde(rename = "beta")]
    Beta,
}

impl ParamName {
    pub fn as_str(&self) -> &'static str {
        match self {
            ParamName::Omega0 => "omega0",
            ParamName::Omega => "Omega",
            ParamName::G1 => "g1",
            ParamName::G2 => "g2",
            ParamName::Beta => "beta",
        }
    }
}

impl fmt::Display for ParamName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub name: ParamName,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl Axis {
    /// Grid values; the end points are hit exactly.
    pub fn values(&self) -> Vec<f64> {
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i == 0 {
                    return self.start;
                }
                if i == self.count - 1 {
                    return self.stop;
                }
                let u = i as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.start + (self.stop - self.start) * u,
                    Spacing::Log => self.start * (self.stop / self.start).powf(u),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Critical,
    Gap,
    Spectrum,
    FreeEnergy,
    Partition,
    EdCompare,
}

impl Task {
    pub const ALL: [Task; 6] = [
        Task::Critical,
        Task::Gap,
        Task::Spectrum,
        Task::FreeEnergy,
        Task::Partition,
        Task::EdCompare,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Task::Critical => "critical",
            Task::Gap => "gap",
            Task::Spectrum => "spectrum",
            Task::FreeEnergy => "free-energy",
            Task::Partition => "partition",
            Task::EdCompare => "ed-compare",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub format: Format,
    /// Existing directory receiving one file per task.
    #[serde(default = "default_path")]
    pub path: PathBuf,
}

fn default_path() -> PathBuf {
    PathBuf::from(".")
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { format: Format::default(), path: default_path() }
    }
}

/// β as written in a config: a positive number or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaValue(pub f64);

impl<'de> Deserialize<'de> for BetaValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(BetaValue(x)),
            Raw::Text(s) => parse_beta(&s).map(BetaValue).map_err(serde::de::Error::custom),
        }
    }
}

/// Parses a β literal; `inf` (any case, optional `+`) means zero temperature.
pub fn parse_beta(s: &str) -> Result<f64, String> {
    let t = s.trim();
    match t.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" | "+infinity" => Ok(f64::INFINITY),
        _ => t
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| format!("expected a number or \"inf\", got {s:?}")),
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFixed {
    omega0: Option<f64>,
    #[serde(rename = "Omega")]
    omega: Option<f64>,
    g1: Option<f64>,
    g2: Option<f64>,
    beta: Option<BetaValue>,
}

/// Values of the parameters that are not swept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fixed {
    pub omega0: f64,
    pub omega: f64,
    pub g1: f64,
    pub g2: f64,
    /// `f64::INFINITY` for zero temperature.
    pub beta: f64,
}

impl Default for Fixed {
    fn default() -> Self {
        Fixed { omega0: 1.0, omega: 1.0, g1: 0.0, g2: 0.0, beta: f64::INFINITY }
    }
}

impl Fixed {
    pub fn get(&self, name: ParamName) -> f64 {
        match name {
            ParamName::Omega0 => self.omega0,
            ParamName::Omega => self.omega,
            ParamName::G1 => self.g1,
            ParamName::G2 => self.g2,
            ParamName::Beta => self.beta,
        }
    }

    pub fn set(&mut self, name: ParamName, value: f64) {
        match name {
            ParamName::Omega0 => self.omega0 = value,
            ParamName::Omega => self.omega = value,
            ParamName::G1 => self.g1 = value,
            ParamName::G2 => self.g2 = value,
            ParamName::Beta => self.beta = value,
        }
    }

    pub fn params(&self) -> dicke_core::Result<ModelParams<f64>> {
        ModelParams::new(self.omega0, self.omega, self.g1, self.g2)
    }

    pub fn inverse_temperature(&self) -> dicke_core::Result<InverseTemperature<f64>> {
        InverseTemperature::finite(self.beta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdSettings {
    #[serde(default = "default_ed_atoms")]
    pub n_atoms: usize,
    /// Fock cutoff; the mean-field based default when absent.
    #[serde(default)]
    pub n_max: Option<usize>,
    #[serde(default = "default_k_gaps")]
    pub k_gaps: usize,
    /// Upper bound on ED rows evaluated at the same time.
    #[serde(default = "default_ed_concurrency")]
    pub max_concurrent: usize,
}

fn default_ed_atoms() -> usize {
    8
}

fn default_k_gaps() -> usize {
    2
}

fn default_ed_concurrency() -> usize {
    2
}

impl Default for EdSettings {
    fn default() -> Self {
        EdSettings {
            n_atoms: default_ed_atoms(),
            n_max: None,
            k_gaps: default_k_gaps(),
            max_concurrent: default_ed_concurrency(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionSettings {
    #[serde(default = "default_partition_atoms")]
    pub n_atoms: u64,
    #[serde(default = "default_cutoff")]
    pub cutoff: usize,
}

fn default_partition_atoms() -> u64 {
    1000
}

fn default_cutoff() -> usize {
    2048
}

impl Default for PartitionSettings {
    fn default() -> Self {
        PartitionSettings { n_atoms: default_partition_atoms(), cutoff: default_cutoff() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    #[serde(default)]
    axes: Vec<Axis>,
    #[serde(default)]
    fixed: RawFixed,
    #[serde(default = "default_tasks")]
    tasks: Vec<Task>,
    #[serde(default)]
    output: OutputSpec,
    #[serde(default)]
    workers: Option<usize>,
    #[serde(default)]
    ed: EdSettings,
    #[serde(default)]
    partition: PartitionSettings,
}

fn default_tasks() -> Vec<Task> {
    vec![Task::Gap]
}

/// A validated sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// At most two, distinct names, each with `count >= 2`.
    pub axes: Vec<Axis>,
    pub fixed: Fixed,
    /// Distinct, in the order given.
    pub tasks: Vec<Task>,
    pub output: OutputSpec,
    /// Worker threads; `None` lets the pool decide.
    pub workers: Option<usize>,
    pub ed: EdSettings,
    pub partition: PartitionSettings,
}

impl SweepSpec {
    /// Number of grid points.
    pub fn grid_len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }
}

pub fn parse_config(text: &[u8]) -> Result<SweepSpec, ConfigError> {
    let raw: RawSpec = serde_json::from_slice(text).map_err(|e| ConfigError::Syntax {
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    })?;
    validate(raw)
}

fn check_value(field: &str, name: ParamName, x: f64) -> Result<(), ConfigError> {
    let ok = match name {
        ParamName::Omega0 | ParamName::Omega => x.is_finite() && x > 0.0,
        ParamName::G1 | ParamName::G2 => x.is_finite() && x >= 0.0,
        ParamName::Beta => x > 0.0 && !x.is_nan(),
    };
    if ok {
        Ok(())
    } else {
        let want = match name {
            ParamName::G1 | ParamName::G2 => "a finite value >= 0",
            ParamName::Beta => "a value > 0 or \"inf\"",
            _ => "a finite value > 0",
        };
        Err(ConfigError::field(field, format!("{name} must be {want}, got {x}")))
    }
}

fn validate(raw: RawSpec) -> Result<SweepSpec, ConfigError> {
    if raw.axes.len() > 2 {
        return Err(ConfigError::field("axes", format!("at most 2 axes, got {}", raw.axes.len())));
    }
    let mut seen = BTreeSet::new();
    for (i, a) in raw.axes.iter().enumerate() {
        let at = |f: &str| format!("axes[{i}].{f}");
        if !seen.insert(a.name) {
            return Err(ConfigError::field(at("name"), format!("duplicate axis {}", a.name)));
        }
        if a.count < 2 {
            return Err(ConfigError::field(at("count"), format!("must be >= 2, got {}", a.count)));
        }
        if !a.start.is_finite() {
            return Err(ConfigError::field(at("start"), "must be finite"));
        }
        if !a.stop.is_finite() {
            return Err(ConfigError::field(at("stop"), "must be finite"));
        }
        if a.spacing == Spacing::Log && (a.start <= 0.0 || a.stop <= 0.0) {
            return Err(ConfigError::field(at("spacing"), "log spacing needs start and stop > 0"));
        }
        check_value(&at("start"), a.name, a.start)?;
        check_value(&at("stop"), a.name, a.stop)?;
    }

    let mut fixed = Fixed::default();
    let given = [
        (ParamName::Omega0, raw.fixed.omega0),
        (ParamName::Omega, raw.fixed.omega),
        (ParamName::G1, raw.fixed.g1),
        (ParamName::G2, raw.fixed.g2),
        (ParamName::Beta, raw.fixed.beta.map(|b| b.0)),
    ];
    for (name, value) in given {
        let Some(x) = value else { continue };
        let field = format!("fixed.{name}");
        if seen.contains(&name) {
            return Err(ConfigError::field(field, format!("{name} is also a swept axis")));
        }
        check_value(&field, name, x)?;
        fixed.set(name, x);
    }

    let mut tasks = Vec::with_capacity(raw.tasks.len());
    for (i, t) in raw.tasks.iter().enumerate() {
        if tasks.contains(t) {
            return Err(ConfigError::field(format!("tasks[{i}]"), format!("duplicate task {t}")));
        }
        tasks.push(*t);
    }

    if raw.workers == Some(0) {
        return Err(ConfigError::field("workers", "must be >= 1"));
    }
    if raw.ed.n_atoms == 0 {
        return Err(ConfigError::field("ed.n_atoms", "must be >= 1"));
    }
    if raw.ed.max_concurrent == 0 {
        return Err(ConfigError::field("ed.max_concurrent", "must be >= 1"));
    }
    if raw.partition.n_atoms == 0 {
        return Err(ConfigError::field("partition.n_atoms", "must be >= 1"));
    }
    if raw.partition.cutoff == 0 {
        return Err(ConfigError::field("partition.cutoff", "must be >= 1"));
    }

    Ok(SweepSpec {
        axes: raw.axes,
        fixed,
        tasks,
        output: raw.output,
        workers: raw.workers,
        ed: raw.ed,
        partition: raw.partition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<SweepSpec, ConfigError> {
        parse_config(s.as_bytes())
    }

    fn field_of(e: ConfigError) -> String {
        match e {
            ConfigError::Field { field, .. } => field,
            other => panic!("expected a field error, got {other}"),
        }
    }

    #[test]
    fn minimal_document_gets_defaults() {
        let spec = parse(r#"{"axes":[{"name":"g1","start":0,"stop":1,"count":3}]}"#).unwrap();
        assert_eq!(spec.axes[0].spacing, Spacing::Linear);
        assert_eq!(spec.fixed, Fixed::default());
        assert_eq!(spec.tasks, vec![Task::Gap]);
        assert_eq!(spec.output, OutputSpec::default());
        assert_eq!(spec.workers, None);
        assert_eq!(spec.ed, EdSettings::default());
        assert_eq!(spec.grid_len(), 3);
    }

    #[test]
    fn axis_count_one_is_rejected() {
        let e = parse(r#"{"axes":[{"name":"g1","start":0,"stop":1,"count":1}]}"#).unwrap_err();
        assert_eq!(field_of(e), "axes[0].count");
    }

    #[test]
    fn duplicate_axis_is_rejected() {
        let e = parse(
            r#"{"axes":[{"name":"g1","start":0,"stop":1,"count":2},
                        {"name":"g1","start":0,"stop":2,"count":2}]}"#,
        )
        .unwrap_err();
        assert_eq!(field_of(e), "axes[1].name");
    }

    #[test]
    fn three_axes_are_rejected() {
        let e = parse(
            r#"{"axes":[{"name":"g1","start":0,"stop":1,"count":2},
                        {"name":"g2","start":0,"stop":1,"count":2},
                        {"name":"beta","start":1,"stop":2,"count":2}]}"#,
        )
        .unwrap_err();
        assert_eq!(field_of(e), "axes");
    }

    #[test]
    fn unknown_keys_are_rejected_with_location() {
        for doc in [
            r#"{"axes":[], "colour": 1}"#,
            r#"{"axes":[{"name":"g1","start":0,"stop":1,"count":2,"step":3}]}"#,
            r#"{"fixed":{"g3":1}}"#,
            r#"{"output":{"format":"csv","dir":"x"}}"#,
        ] {
            match parse(doc).unwrap_err() {
                ConfigError::Syntax { line, msg, .. } => {
                    assert_eq!(line, 1);
                    assert!(msg.contains("unknown field"), "{msg}");
                }
                other => panic!("{other}"),
            }
        }
    }

    #[test]
    fn unknown_axis_name_and_task_are_rejected() {
        assert!(parse(r#"{"axes":[{"name":"g3","start":0,"stop":1,"count":2}]}"#).is_err());
        assert!(parse(r#"{"tasks":["plot"]}"#).is_err());
    }

    #[test]
    fn syntax_errors_report_line() {
        match parse("{\n  \"axes\": [\n  }").unwrap_err() {
            ConfigError::Syntax { line, .. } => assert_eq!(line, 3),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn beta_accepts_inf() {
        let spec = parse(r#"{"fixed":{"beta":"inf","g1":0.7}}"#).unwrap();
        assert_eq!(spec.fixed.beta, f64::INFINITY);
        assert_eq!(spec.fixed.g1, 0.7);
        let spec = parse(r#"{"fixed":{"beta":2.5}}"#).unwrap();
        assert_eq!(spec.fixed.beta, 2.5);
        assert!(parse(r#"{"fixed":{"beta":"hot"}}"#).is_err());
        assert_eq!(field_of(parse(r#"{"fixed":{"beta":-1}}"#).unwrap_err()), "fixed.beta");
    }

    #[test]
    fn fixed_value_conflicting_with_axis() {
        let e = parse(r#"{"axes":[{"name":"g1","start":0,"stop":1,"count":2}],"fixed":{"g1":0.2}}"#)
            .unwrap_err();
        assert_eq!(field_of(e), "fixed.g1");
    }

    #[test]
    fn parameter_domains_are_checked() {
        let e = parse(r#"{"axes":[{"name":"omega0","start":0,"stop":1,"count":2}]}"#).unwrap_err();
        assert_eq!(field_of(e), "axes[0].start");
        let e = parse(r#"{"fixed":{"g2":-0.1}}"#).unwrap_err();
        assert_eq!(field_of(e), "fixed.g2");
        let e = parse(r#"{"axes":[{"name":"g1","start":0,"stop":1,"count":2,"spacing":"log"}]}"#)
            .unwrap_err();
        assert_eq!(field_of(e), "axes[0].spacing");
    }

    #[test]
    fn duplicate_task_is_rejected() {
        assert_eq!(field_of(parse(r#"{"tasks":["gap","gap"]}"#).unwrap_err()), "tasks[1]");
    }

    #[test]
    fn empty_task_list_is_allowed() {
        assert!(parse(r#"{"tasks":[]}"#).unwrap().tasks.is_empty());
    }

    #[test]
    fn axis_values_hit_end_points() {
        let a = Axis { name: ParamName::Beta, start: 0.1, stop: 10.0, count: 3, spacing: Spacing::Log };
        let v = a.values();
        assert_eq!(v[0], 0.1);
        assert_eq!(v[2], 10.0);
        assert!((v[1] - 1.0).abs() < 1e-15);
        let a = Axis { name: ParamName::G1, start: 0.0, stop: 1.0, count: 5, spacing: Spacing::Linear };
        assert_eq!(a.values(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn parse_beta_literals() {
        assert_eq!(parse_beta("inf"), Ok(f64::INFINITY));
        assert_eq!(parse_beta("INF"), Ok(f64::INFINITY));
        assert_eq!(parse_beta("3.5"), Ok(3.5));
        assert!(parse_beta("nan").is_err());
        assert!(parse_beta("").is_err());
    }
}
