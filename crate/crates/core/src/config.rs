//! Run configuration: a TOML document of flat, dotted keys under the
//! `system`, `sweep`, `output` and `numerics` namespaces.
//!
//! Dimensional scalars are written as `"<number> <unit>"` strings; a bare
//! number is read in the canonical unit (MHz, mT, µs, 1/µs, MHz/T, degrees
//! for angles). Whether a key was written as `a.b = 1` or under a `[a]`
//! table header makes no difference.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use crate::experiments::{CombSpec, RegimeThresholds, Resonance};
use crate::hamiltonian::{
    Dephasing, HamiltonianModel, HyperfineTensor, InefficiencyModel, NuclearZeeman, SystemParams, TargetTransition, Thresholds,
    D0, GAMMA_E, GAMMA_N_C13,
};
use crate::spin_ops::{ComplexMatrix, FieldVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dimension {
    Frequency,
    Field,
    Angle,
    Time,
    Rate,
    Gyromagnetic,
}

impl Dimension {
    fn name(self) -> &'static str {
        match self {
            Dimension::Frequency => "a frequency",
            Dimension::Field => "a magnetic field",
            Dimension::Angle => "an angle",
            Dimension::Time => "a time",
            Dimension::Rate => "a rate",
            Dimension::Gyromagnetic => "a gyromagnetic ratio",
        }
    }

    fn canonical(self) -> &'static str {
        match self {
            Dimension::Frequency => "MHz",
            Dimension::Field => "mT",
            Dimension::Angle => "deg",
            Dimension::Time => "us",
            Dimension::Rate => "1/us",
            Dimension::Gyromagnetic => "MHz/T",
        }
    }
}

/// `(unit, dimension, factor to the canonical unit)`. Angles are converted
/// to radians.
const UNITS: &[(&str, Dimension, f64)] = &[
    ("Hz", Dimension::Frequency, 1e-6),
    ("kHz", Dimension::Frequency, 1e-3),
    ("MHz", Dimension::Frequency, 1.0),
    ("GHz", Dimension::Frequency, 1e3),
    ("T", Dimension::Field, 1e3),
    ("mT", Dimension::Field, 1.0),
    ("uT", Dimension::Field, 1e-3),
    ("µT", Dimension::Field, 1e-3),
    ("G", Dimension::Field, 0.1),
    ("deg", Dimension::Angle, std::f64::consts::PI / 180.0),
    ("rad", Dimension::Angle, 1.0),
    ("s", Dimension::Time, 1e6),
    ("ms", Dimension::Time, 1e3),
    ("us", Dimension::Time, 1.0),
    ("µs", Dimension::Time, 1.0),
    ("ns", Dimension::Time, 1e-3),
    ("1/s", Dimension::Rate, 1e-6),
    ("1/ms", Dimension::Rate, 1e-3),
    ("1/us", Dimension::Rate, 1.0),
    ("1/µs", Dimension::Rate, 1.0),
    ("Hz/T", Dimension::Gyromagnetic, 1e-6),
    ("kHz/T", Dimension::Gyromagnetic, 1e-3),
    ("MHz/T", Dimension::Gyromagnetic, 1.0),
    ("GHz/T", Dimension::Gyromagnetic, 1e3),
];

#[derive(Clone, Debug, PartialEq)]
pub enum IssueKind {
    Missing,
    UnknownKey,
    UnitMismatch { expected: &'static str, unit: String, found: &'static str },
    Invalid(String),
    Syntax(String),
}

/// One problem in a configuration document.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigIssue {
    pub key: String,
    /// 1-based line, when the key appears in the document.
    pub line: Option<usize>,
    pub kind: IssueKind,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(l) = self.line {
            write!(f, "line {l}: ")?;
        }
        match &self.kind {
            IssueKind::Missing => write!(f, "missing required field `{}`", self.key),
            IssueKind::UnknownKey => write!(f, "unknown key `{}`", self.key),
            IssueKind::UnitMismatch { expected, unit, found } => {
                write!(f, "unit mismatch for `{}`: expected {expected}, got `{unit}` ({found})", self.key)
            }
            IssueKind::Invalid(msg) => write!(f, "invalid `{}`: {msg}", self.key),
            IssueKind::Syntax(msg) => write!(f, "syntax error: {msg}"),
        }
    }
}

/// Every problem found in a document.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub issues: Vec<ConfigIssue>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} configuration problem(s):", self.issues.len())?;
        for i in &self.issues {
            writeln!(f, "  {i}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OutputFormat {
    #[default]
    Table,
    Structured,
}

impl OutputFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            OutputFormat::Table => "table",
            OutputFormat::Structured => "structured",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridSpacing {
    Linear,
    Log,
}

#[derive(Clone, Debug, PartialEq)]
pub enum GridSpec {
    Values(Vec<f64>),
    Range { start: f64, stop: f64, points: usize, spacing: GridSpacing },
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            GridSpec::Values(v) => v.clone(),
            GridSpec::Range { start, stop, points, spacing } => {
                let n = *points;
                if n == 1 {
                    return vec![*start];
                }
                (0..n)
                    .map(|k| {
                        let f = k as f64 / (n - 1) as f64;
                        match spacing {
                            GridSpacing::Linear => start + (stop - start) * f,
                            GridSpacing::Log => (start.ln() + (stop.ln() - start.ln()) * f).exp(),
                        }
                    })
                    .collect()
            }
        }
    }
}

/// Reference point that frequency-grid values are measured from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum GridCenter {
    #[default]
    Absolute,
    Midpoint,
    SelectiveDown,
    SelectiveUp,
}

impl GridCenter {
    pub fn as_str(self) -> &'static str {
        match self {
            GridCenter::Absolute => "absolute",
            GridCenter::Midpoint => "midpoint",
            GridCenter::SelectiveDown => "selective_down",
            GridCenter::SelectiveUp => "selective_up",
        }
    }

    pub fn resonance(self) -> Option<Resonance> {
        match self {
            GridCenter::Absolute => None,
            GridCenter::Midpoint => Some(Resonance::Midpoint),
            GridCenter::SelectiveDown => Some(Resonance::SelectiveDown),
            GridCenter::SelectiveUp => Some(Resonance::SelectiveUp),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialConfig {
    Pumped,
    MaximallyMixed,
    /// Electron populations `(+1, 0, −1)` and nuclear Bloch vector.
    Custom { electron: [f64; 3], nuclear: [f64; 3] },
}

impl InitialConfig {
    pub fn to_state(&self) -> crate::Result<crate::experiments::InitialState> {
        use crate::experiments::InitialState;
        Ok(match self {
            InitialConfig::Pumped => InitialState::Pumped,
            InitialConfig::MaximallyMixed => InitialState::MaximallyMixed,
            InitialConfig::Custom { electron, nuclear } => {
                let e = ComplexMatrix::from_real_diagonal(electron);
                let [x, y, z] = *nuclear;
                let n = ComplexMatrix::from_row_major(
                    2,
                    &[
                        crate::spin_ops::C64::new(0.5 * (1.0 + z), 0.0),
                        crate::spin_ops::C64::new(0.5 * x, -0.5 * y),
                        crate::spin_ops::C64::new(0.5 * x, 0.5 * y),
                        crate::spin_ops::C64::new(0.5 * (1.0 - z), 0.0),
                    ],
                )?;
                InitialState::Custom(crate::lindblad::DensityMatrix::product(&e, &n)?)
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub grid: Option<GridSpec>,
    pub center: GridCenter,
    /// µs
    pub time: f64,
    pub initial: InitialConfig,
    pub comb: Option<CombSpec>,
    pub resonance: Option<Resonance>,
    pub regimes: RegimeThresholds,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    pub format: OutputFormat,
    pub manifest: Option<PathBuf>,
}

/// A fully validated run configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub params: SystemParams,
    pub sweep: SweepConfig,
    pub output: OutputConfig,
    /// Used only by randomized test utilities; echoed for provenance.
    pub seed: Option<u64>,
}

const KNOWN_KEYS: &[&str] = &[
    "system.zero_field_splitting",
    "system.gamma_e",
    "system.gamma_n",
    "system.nuclear_zeeman",
    "system.hamiltonian",
    "system.field.magnitude",
    "system.field.theta",
    "system.field.phi",
    "system.hyperfine.tensor",
    "system.hyperfine.parallel",
    "system.hyperfine.perpendicular",
    "system.hyperfine.polar",
    "system.hyperfine.azimuth",
    "system.rabi",
    "system.drive_frequency",
    "system.target",
    "system.pump_rate",
    "system.pump_efficiency",
    "system.inefficiency",
    "system.dephasing.electron",
    "system.dephasing.nuclear",
    "system.thresholds.anti_crossing",
    "system.thresholds.secular_ratio",
    "system.thresholds.rwa_rabi_multiple",
    "system.thresholds.label_overlap",
    "system.thresholds.eslac_window",
    "sweep.values",
    "sweep.start",
    "sweep.stop",
    "sweep.points",
    "sweep.spacing",
    "sweep.center",
    "sweep.time",
    "sweep.initial_state",
    "sweep.initial.electron",
    "sweep.initial.nuclear",
    "sweep.comb.enabled",
    "sweep.comb.tones",
    "sweep.comb.spacing",
    "sweep.resonance",
    "sweep.regime.lambda_from",
    "sweep.regime.broadband_from",
    "output.path",
    "output.format",
    "output.manifest",
    "numerics.seed",
];

/// Flattened document with the line of every key.
struct Doc {
    values: BTreeMap<String, toml::Value>,
    lines: BTreeMap<String, usize>,
    issues: Vec<ConfigIssue>,
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, toml::Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            toml::Value::Table(t) => flatten(&key, t, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

/// Best-effort map from dotted key to the line where it is assigned.
fn key_lines(text: &str) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    let mut section = String::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('#') || line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            section = line.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            continue;
        }
        if let Some((lhs, _)) = line.split_once('=') {
            let lhs: String = lhs.split('.').map(|s| s.trim().trim_matches('"')).collect::<Vec<_>>().join(".");
            let key = if section.is_empty() { lhs } else { format!("{section}.{lhs}") };
            out.entry(key).or_insert(n + 1);
        }
    }
    out
}

impl Doc {
    fn issue(&mut self, key: &str, kind: IssueKind) {
        let line = self.lines.get(key).copied();
        self.issues.push(ConfigIssue { key: key.to_string(), line, kind });
    }

    fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    fn quantity(&mut self, key: &str, dim: Dimension) -> Option<f64> {
        let v = self.values.get(key)?.clone();
        let parsed = match &v {
            toml::Value::Float(x) => Ok(if dim == Dimension::Angle { x.to_radians() } else { *x }),
            toml::Value::Integer(i) => {
                let x = *i as f64;
                Ok(if dim == Dimension::Angle { x.to_radians() } else { x })
            }
            toml::Value::String(s) => self.parse_quantity(key, s, dim),
            _ => Err(IssueKind::Invalid(format!("expected {} such as \"1.0 {}\"", dim.name(), dim.canonical()))),
        };
        match parsed {
            Ok(x) if x.is_finite() => Some(x),
            Ok(_) => {
                self.issue(key, IssueKind::Invalid("value is not finite".into()));
                None
            }
            Err(kind) => {
                self.issue(key, kind);
                None
            }
        }
    }

    fn parse_quantity(&self, _key: &str, s: &str, dim: Dimension) -> Result<f64, IssueKind> {
        let s = s.trim();
        let split = s.find(|c: char| c.is_whitespace()).unwrap_or(s.len());
        let (num, unit) = s.split_at(split);
        let unit = unit.trim();
        let x: f64 = num
            .parse()
            .map_err(|_| IssueKind::Invalid(format!("cannot read a number from \"{s}\"")))?;
        if unit.is_empty() {
            return Ok(if dim == Dimension::Angle { x.to_radians() } else { x });
        }
        match UNITS.iter().find(|(u, _, _)| *u == unit) {
            Some((_, d, factor)) if *d == dim => Ok(x * factor),
            Some((_, d, _)) => {
                Err(IssueKind::UnitMismatch { expected: dim.name(), unit: unit.to_string(), found: d.name() })
            }
            None => Err(IssueKind::Invalid(format!("unknown unit `{unit}`"))),
        }
    }

    fn required_quantity(&mut self, key: &str, dim: Dimension) -> Option<f64> {
        if !self.has(key) {
            self.issue(key, IssueKind::Missing);
            return None;
        }
        self.quantity(key, dim)
    }

    fn number(&mut self, key: &str) -> Option<f64> {
        match self.values.get(key)?.clone() {
            toml::Value::Float(x) => Some(x),
            toml::Value::Integer(i) => Some(i as f64),
            _ => {
                self.issue(key, IssueKind::Invalid("expected a dimensionless number".into()));
                None
            }
        }
    }

    fn integer(&mut self, key: &str) -> Option<i64> {
        match self.values.get(key)?.clone() {
            toml::Value::Integer(i) => Some(i),
            _ => {
                self.issue(key, IssueKind::Invalid("expected an integer".into()));
                None
            }
        }
    }

    fn boolean(&mut self, key: &str) -> Option<bool> {
        match self.values.get(key)?.clone() {
            toml::Value::Boolean(b) => Some(b),
            _ => {
                self.issue(key, IssueKind::Invalid("expected true or false".into()));
                None
            }
        }
    }

    fn string(&mut self, key: &str) -> Option<String> {
        match self.values.get(key)?.clone() {
            toml::Value::String(s) => Some(s),
            _ => {
                self.issue(key, IssueKind::Invalid("expected a string".into()));
                None
            }
        }
    }

    fn choice<T: Copy>(&mut self, key: &str, options: &[(&str, T)]) -> Option<T> {
        let s = self.string(key)?;
        match options.iter().find(|(name, _)| *name == s) {
            Some((_, v)) => Some(*v),
            None => {
                let names: Vec<&str> = options.iter().map(|o| o.0).collect();
                self.issue(key, IssueKind::Invalid(format!("`{s}` is not one of {}", names.join(", "))));
                None
            }
        }
    }

    fn array(&mut self, key: &str) -> Option<Vec<toml::Value>> {
        match self.values.get(key)?.clone() {
            toml::Value::Array(a) => Some(a),
            _ => {
                self.issue(key, IssueKind::Invalid("expected an array".into()));
                None
            }
        }
    }

    fn quantity_list(&mut self, key: &str, dim: Dimension) -> Option<Vec<f64>> {
        let items = self.array(key)?;
        let mut out = Vec::with_capacity(items.len());
        for (i, item) in items.into_iter().enumerate() {
            let sub = format!("{key}[{i}]");
            self.values.insert(sub.clone(), item);
            if let Some(line) = self.lines.get(key).copied() {
                self.lines.insert(sub.clone(), line);
            }
            out.push(self.quantity(&sub, dim));
        }
        out.into_iter().collect()
    }

    fn number_list(&mut self, key: &str, len: usize) -> Option<Vec<f64>> {
        let items = self.array(key)?;
        let nums: Option<Vec<f64>> = items
            .iter()
            .map(|v| match v {
                toml::Value::Float(x) => Some(*x),
                toml::Value::Integer(i) => Some(*i as f64),
                _ => None,
            })
            .collect();
        match nums {
            Some(v) if v.len() == len => Some(v),
            _ => {
                self.issue(key, IssueKind::Invalid(format!("expected {len} numbers")));
                None
            }
        }
    }
}

/// Parses and validates a configuration document, reporting every problem.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let table: toml::Table = match toml::from_str(text) {
        Ok(t) => t,
        Err(e) => {
            let line = e.span().map(|s| text[..s.start.min(text.len())].lines().count().max(1));
            return Err(ConfigError {
                issues: vec![ConfigIssue {
                    key: String::new(),
                    line,
                    kind: IssueKind::Syntax(e.message().to_string()),
                }],
            });
        }
    };
    let mut values = BTreeMap::new();
    flatten("", &table, &mut values);
    let mut doc = Doc { values, lines: key_lines(text), issues: Vec::new() };

    let unknown: Vec<String> = doc.values.keys().filter(|k| !KNOWN_KEYS.contains(&k.as_str())).cloned().collect();
    for k in unknown {
        doc.issue(&k, IssueKind::UnknownKey);
    }

    let params = parse_system(&mut doc);
    let sweep = parse_sweep(&mut doc);
    let output = parse_output(&mut doc);
    let seed = doc.integer("numerics.seed").and_then(|s| {
        if s < 0 {
            doc.issue("numerics.seed", IssueKind::Invalid("seed must be non-negative".into()));
            None
        } else {
            Some(s as u64)
        }
    });

    if !doc.issues.is_empty() {
        doc.issues.sort_by(|a, b| a.line.unwrap_or(usize::MAX).cmp(&b.line.unwrap_or(usize::MAX)).then(a.key.cmp(&b.key)));
        return Err(ConfigError { issues: doc.issues });
    }
    let params = params.expect("no issues implies a complete system block");
    if let Err(e) = params.validate() {
        return Err(ConfigError {
            issues: vec![ConfigIssue { key: "system".into(), line: None, kind: IssueKind::Invalid(e.to_string()) }],
        });
    }
    Ok(RunConfig { params, sweep: sweep.expect("validated"), output: output.expect("validated"), seed })
}

fn parse_system(doc: &mut Doc) -> Option<SystemParams> {
    let d0 = doc.quantity("system.zero_field_splitting", Dimension::Frequency).unwrap_or(D0);
    let gamma_e = doc.quantity("system.gamma_e", Dimension::Gyromagnetic).unwrap_or(GAMMA_E);
    let gamma_n = doc.quantity("system.gamma_n", Dimension::Gyromagnetic).unwrap_or(GAMMA_N_C13);
    let nuclear_zeeman = doc
        .choice("system.nuclear_zeeman", &[("gamma_n", NuclearZeeman::GammaN), ("gamma_e", NuclearZeeman::GammaE)])
        .unwrap_or_default();
    let hamiltonian = doc
        .choice("system.hamiltonian", &[("full", HamiltonianModel::Full), ("secular", HamiltonianModel::Secular)])
        .unwrap_or_default();

    let magnitude = doc.required_quantity("system.field.magnitude", Dimension::Field);
    let theta = doc.required_quantity("system.field.theta", Dimension::Angle);
    let phi = doc.required_quantity("system.field.phi", Dimension::Angle);
    let field = match (magnitude, theta, phi) {
        (Some(m), Some(t), Some(p)) => match FieldVector::new(m, t, p) {
            Ok(f) => Some(f),
            Err(e) => {
                doc.issue("system.field.magnitude", IssueKind::Invalid(e.to_string()));
                None
            }
        },
        _ => None,
    };

    let hyperfine = parse_hyperfine(doc);

    let rabi = doc.quantity("system.rabi", Dimension::Frequency).unwrap_or(0.0);
    let drive_frequency = doc.quantity("system.drive_frequency", Dimension::Frequency).unwrap_or(0.0);
    let target = doc
        .choice("system.target", &[("0<->-1", TargetTransition::Minus), ("0<->+1", TargetTransition::Plus)])
        .unwrap_or_default();
    let pump_rate = doc.quantity("system.pump_rate", Dimension::Rate).unwrap_or(1.0 / 3.0);
    let pump_efficiency = doc.number("system.pump_efficiency").unwrap_or(0.9);
    let inefficiency = doc
        .choice(
            "system.inefficiency",
            &[("randomize", InefficiencyModel::Randomize), ("loss", InefficiencyModel::Loss)],
        )
        .unwrap_or_default();
    let dephasing = Dephasing {
        electron: doc.quantity("system.dephasing.electron", Dimension::Rate).unwrap_or(0.0),
        nuclear: doc.quantity("system.dephasing.nuclear", Dimension::Rate).unwrap_or(0.0),
    };
    let defaults = Thresholds::default();
    let eslac = if doc.has("system.thresholds.eslac_window") {
        match doc.quantity_list("system.thresholds.eslac_window", Dimension::Field) {
            Some(v) if v.len() == 2 && v[0] <= v[1] => (v[0], v[1]),
            Some(_) => {
                doc.issue("system.thresholds.eslac_window", IssueKind::Invalid("expected [low, high]".into()));
                defaults.eslac_window_mt
            }
            None => defaults.eslac_window_mt,
        }
    } else {
        defaults.eslac_window_mt
    };
    let thresholds = Thresholds {
        anti_crossing_mhz: doc
            .quantity("system.thresholds.anti_crossing", Dimension::Frequency)
            .unwrap_or(defaults.anti_crossing_mhz),
        secular_ratio: doc.number("system.thresholds.secular_ratio").unwrap_or(defaults.secular_ratio),
        rwa_rabi_multiple: doc.number("system.thresholds.rwa_rabi_multiple").unwrap_or(defaults.rwa_rabi_multiple),
        label_overlap: doc.number("system.thresholds.label_overlap").unwrap_or(defaults.label_overlap),
        eslac_window_mt: eslac,
    };

    for (key, v) in [("system.rabi", rabi), ("system.pump_rate", pump_rate)] {
        if v < 0.0 {
            doc.issue(key, IssueKind::Invalid("must be non-negative".into()));
        }
    }
    if !(0.0..=1.0).contains(&pump_efficiency) {
        doc.issue("system.pump_efficiency", IssueKind::Invalid("must lie in [0, 1]".into()));
    }

    Some(SystemParams {
        zero_field_splitting: d0,
        gamma_e,
        gamma_n,
        field: field?,
        hyperfine: hyperfine?,
        rabi,
        drive_frequency,
        target,
        pump_rate,
        pump_efficiency,
        inefficiency,
        dephasing,
        nuclear_zeeman,
        hamiltonian,
        thresholds,
    })
}

fn parse_hyperfine(doc: &mut Doc) -> Option<HyperfineTensor> {
    const AXIAL: [&str; 4] = [
        "system.hyperfine.parallel",
        "system.hyperfine.perpendicular",
        "system.hyperfine.polar",
        "system.hyperfine.azimuth",
    ];
    let has_tensor = doc.has("system.hyperfine.tensor");
    let has_axial = AXIAL.iter().any(|k| doc.has(k));
    if has_tensor && has_axial {
        doc.issue("system.hyperfine.tensor", IssueKind::Invalid("give either the tensor or the axial form".into()));
        return None;
    }
    if has_tensor {
        let rows = doc.array("system.hyperfine.tensor")?;
        let mut a = [[0.0; 3]; 3];
        if rows.len() != 3 {
            doc.issue("system.hyperfine.tensor", IssueKind::Invalid("expected 3 rows".into()));
            return None;
        }
        let mut ok = true;
        for (i, row) in rows.into_iter().enumerate() {
            let key = format!("system.hyperfine.tensor.row{i}");
            doc.values.insert(key.clone(), row);
            if let Some(l) = doc.lines.get("system.hyperfine.tensor").copied() {
                doc.lines.insert(key.clone(), l);
            }
            match doc.quantity_list(&key, Dimension::Frequency) {
                Some(r) if r.len() == 3 => a[i] = [r[0], r[1], r[2]],
                Some(_) => {
                    doc.issue("system.hyperfine.tensor", IssueKind::Invalid(format!("row {i} needs 3 entries")));
                    ok = false;
                }
                None => ok = false,
            }
        }
        if !ok {
            return None;
        }
        return match HyperfineTensor::new(a) {
            Ok(t) => Some(t),
            Err(e) => {
                doc.issue("system.hyperfine.tensor", IssueKind::Invalid(e.to_string()));
                None
            }
        };
    }
    if !has_axial {
        doc.issue("system.hyperfine.tensor", IssueKind::Missing);
        return None;
    }
    let dims = [Dimension::Frequency, Dimension::Frequency, Dimension::Angle, Dimension::Angle];
    let vals: Vec<Option<f64>> = AXIAL.iter().zip(dims).map(|(k, d)| doc.required_quantity(k, d)).collect();
    let vals: Vec<f64> = vals.into_iter().collect::<Option<_>>()?;
    match HyperfineTensor::axial(vals[0], vals[1], vals[2], vals[3]) {
        Ok(t) => Some(t),
        Err(e) => {
            doc.issue("system.hyperfine.parallel", IssueKind::Invalid(e.to_string()));
            None
        }
    }
}

fn parse_sweep(doc: &mut Doc) -> Option<SweepConfig> {
    let range_keys = ["sweep.start", "sweep.stop", "sweep.points"];
    let has_values = doc.has("sweep.values");
    let has_range = range_keys.iter().any(|k| doc.has(k));
    let mut grid = None;
    if has_values && has_range {
        doc.issue("sweep.values", IssueKind::Invalid("give either `values` or `start`/`stop`/`points`".into()));
    } else if has_values {
        grid = doc.array("sweep.values").and_then(|items| {
            let nums: Option<Vec<f64>> = items
                .iter()
                .map(|v| match v {
                    toml::Value::Float(x) => Some(*x),
                    toml::Value::Integer(i) => Some(*i as f64),
                    _ => None,
                })
                .collect();
            if nums.is_none() {
                doc.issue("sweep.values", IssueKind::Invalid("expected plain numbers in the swept unit".into()));
            }
            nums.map(GridSpec::Values)
        });
    } else if has_range {
        for k in range_keys {
            if !doc.has(k) {
                doc.issue(k, IssueKind::Missing);
            }
        }
        let start = doc.number("sweep.start");
        let stop = doc.number("sweep.stop");
        let points = doc.integer("sweep.points");
        let spacing = if doc.has("sweep.spacing") {
            doc.choice("sweep.spacing", &[("linear", GridSpacing::Linear), ("log", GridSpacing::Log)])
        } else {
            Some(GridSpacing::Linear)
        };
        if let (Some(start), Some(stop), Some(points), Some(spacing)) = (start, stop, points, spacing) {
            if points < 1 {
                doc.issue("sweep.points", IssueKind::Invalid("need at least one point".into()));
            } else if spacing == GridSpacing::Log && (start <= 0.0 || stop <= 0.0) {
                doc.issue("sweep.spacing", IssueKind::Invalid("log spacing needs positive bounds".into()));
            } else {
                grid = Some(GridSpec::Range { start, stop, points: points as usize, spacing });
            }
        }
    }

    let center = if doc.has("sweep.center") {
        doc.choice(
            "sweep.center",
            &[
                ("absolute", GridCenter::Absolute),
                ("midpoint", GridCenter::Midpoint),
                ("selective_down", GridCenter::SelectiveDown),
                ("selective_up", GridCenter::SelectiveUp),
            ],
        )
        .unwrap_or_default()
    } else {
        GridCenter::Absolute
    };
    let time = doc.quantity("sweep.time", Dimension::Time).unwrap_or(30.0);
    if time <= 0.0 {
        doc.issue("sweep.time", IssueKind::Invalid("must be positive".into()));
    }
    let kind = if doc.has("sweep.initial_state") {
        doc.choice("sweep.initial_state", &[("pumped", 0), ("mixed", 1), ("custom", 2)]).unwrap_or(0)
    } else {
        0
    };
    let initial = match kind {
        1 => InitialConfig::MaximallyMixed,
        2 => {
            for k in ["sweep.initial.electron", "sweep.initial.nuclear"] {
                if !doc.has(k) {
                    doc.issue(k, IssueKind::Missing);
                }
            }
            let e = doc.number_list("sweep.initial.electron", 3);
            let n = doc.number_list("sweep.initial.nuclear", 3);
            match (e, n) {
                (Some(e), Some(n)) => {
                    let custom = InitialConfig::Custom { electron: [e[0], e[1], e[2]], nuclear: [n[0], n[1], n[2]] };
                    if let Err(err) = custom.to_state() {
                        doc.issue("sweep.initial.electron", IssueKind::Invalid(err.to_string()));
                    }
                    custom
                }
                _ => InitialConfig::Pumped,
            }
        }
        _ => InitialConfig::Pumped,
    };
    let comb_enabled = doc.boolean("sweep.comb.enabled").unwrap_or(false);
    let comb = if comb_enabled {
        let d = CombSpec::default();
        let tones = doc.integer("sweep.comb.tones").unwrap_or(d.tone_count as i64);
        let spacing = doc.quantity("sweep.comb.spacing", Dimension::Frequency).unwrap_or(d.spacing);
        let c = CombSpec { tone_count: tones.max(0) as usize, spacing };
        if let Err(e) = c.validate() {
            doc.issue("sweep.comb.tones", IssueKind::Invalid(e.to_string()));
        }
        Some(c)
    } else {
        for k in ["sweep.comb.tones", "sweep.comb.spacing"] {
            if doc.has(k) {
                doc.issue(k, IssueKind::Invalid("comb settings given but `sweep.comb.enabled` is not true".into()));
            }
        }
        None
    };
    let resonance = if doc.has("sweep.resonance") {
        doc.choice(
            "sweep.resonance",
            &[
                ("fixed", Resonance::Fixed),
                ("midpoint", Resonance::Midpoint),
                ("selective_down", Resonance::SelectiveDown),
                ("selective_up", Resonance::SelectiveUp),
            ],
        )
    } else {
        None
    };
    let d = RegimeThresholds::default();
    let regimes = RegimeThresholds {
        lambda_from: doc.number("sweep.regime.lambda_from").unwrap_or(d.lambda_from),
        broadband_from: doc.number("sweep.regime.broadband_from").unwrap_or(d.broadband_from),
    };
    Some(SweepConfig { grid, center, time, initial, comb, resonance, regimes })
}

fn parse_output(doc: &mut Doc) -> Option<OutputConfig> {
    let path = doc.string("output.path").map(PathBuf::from);
    let manifest = doc.string("output.manifest").map(PathBuf::from);
    let format = if doc.has("output.format") {
        doc.choice("output.format", &[("table", OutputFormat::Table), ("structured", OutputFormat::Structured)])
            .unwrap_or_default()
    } else {
        OutputFormat::Table
    };
    Some(OutputConfig { path, format, manifest })
}

fn q(x: f64, unit: &str) -> String {
    toml::Value::String(format!("{x:?} {unit}")).to_string()
}

fn s(x: &str) -> String {
    toml::Value::String(x.to_string()).to_string()
}

impl RunConfig {
    /// Canonical TOML text of every resolved setting, defaults included.
    /// Parsing it back yields an identical configuration.
    pub fn to_toml(&self) -> String {
        let p = &self.params;
        let mut lines = vec!["[system]".to_string()];
        let mut kv = |k: &str, v: String| lines.push(format!("{k} = {v}"));
        kv("zero_field_splitting", q(p.zero_field_splitting, "MHz"));
        kv("gamma_e", q(p.gamma_e, "MHz/T"));
        kv("gamma_n", q(p.gamma_n, "MHz/T"));
        kv(
            "nuclear_zeeman",
            s(match p.nuclear_zeeman {
                NuclearZeeman::GammaN => "gamma_n",
                NuclearZeeman::GammaE => "gamma_e",
            }),
        );
        kv(
            "hamiltonian",
            s(match p.hamiltonian {
                HamiltonianModel::Full => "full",
                HamiltonianModel::Secular => "secular",
            }),
        );
        kv("field.magnitude", q(p.field.magnitude_mt, "mT"));
        kv("field.theta", q(p.field.theta, "rad"));
        kv("field.phi", q(p.field.phi, "rad"));
        let rows: Vec<String> = p
            .hyperfine
            .matrix()
            .iter()
            .map(|r| format!("[{:?}, {:?}, {:?}]", r[0], r[1], r[2]))
            .collect();
        kv("hyperfine.tensor", format!("[{}]", rows.join(", ")));
        kv("rabi", q(p.rabi, "MHz"));
        kv("drive_frequency", q(p.drive_frequency, "MHz"));
        kv(
            "target",
            s(match p.target {
                TargetTransition::Minus => "0<->-1",
                TargetTransition::Plus => "0<->+1",
            }),
        );
        kv("pump_rate", q(p.pump_rate, "1/us"));
        kv("pump_efficiency", format!("{:?}", p.pump_efficiency));
        kv(
            "inefficiency",
            s(match p.inefficiency {
                InefficiencyModel::Randomize => "randomize",
                InefficiencyModel::Loss => "loss",
            }),
        );
        kv("dephasing.electron", q(p.dephasing.electron, "1/us"));
        kv("dephasing.nuclear", q(p.dephasing.nuclear, "1/us"));
        let t = &p.thresholds;
        kv("thresholds.anti_crossing", q(t.anti_crossing_mhz, "MHz"));
        kv("thresholds.secular_ratio", format!("{:?}", t.secular_ratio));
        kv("thresholds.rwa_rabi_multiple", format!("{:?}", t.rwa_rabi_multiple));
        kv("thresholds.label_overlap", format!("{:?}", t.label_overlap));
        kv("thresholds.eslac_window", format!("[{}, {}]", q(t.eslac_window_mt.0, "mT"), q(t.eslac_window_mt.1, "mT")));

        lines.push(String::new());
        lines.push("[sweep]".into());
        let mut kv = |k: &str, v: String| lines.push(format!("{k} = {v}"));
        let sw = &self.sweep;
        match &sw.grid {
            Some(GridSpec::Values(v)) => {
                let items: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
                kv("values", format!("[{}]", items.join(", ")));
            }
            Some(GridSpec::Range { start, stop, points, spacing }) => {
                kv("start", format!("{start:?}"));
                kv("stop", format!("{stop:?}"));
                kv("points", points.to_string());
                kv(
                    "spacing",
                    s(match spacing {
                        GridSpacing::Linear => "linear",
                        GridSpacing::Log => "log",
                    }),
                );
            }
            None => {}
        }
        kv("center", s(sw.center.as_str()));
        kv("time", q(sw.time, "us"));
        match &sw.initial {
            InitialConfig::Pumped => kv("initial_state", s("pumped")),
            InitialConfig::MaximallyMixed => kv("initial_state", s("mixed")),
            InitialConfig::Custom { electron, nuclear } => {
                kv("initial_state", s("custom"));
                kv("initial.electron", format!("[{:?}, {:?}, {:?}]", electron[0], electron[1], electron[2]));
                kv("initial.nuclear", format!("[{:?}, {:?}, {:?}]", nuclear[0], nuclear[1], nuclear[2]));
            }
        }
        match &sw.comb {
            Some(c) => {
                kv("comb.enabled", "true".into());
                kv("comb.tones", c.tone_count.to_string());
                kv("comb.spacing", q(c.spacing, "MHz"));
            }
            None => kv("comb.enabled", "false".into()),
        }
        if let Some(r) = &sw.resonance {
            let name = match r {
                Resonance::Fixed => "fixed",
                Resonance::Midpoint => "midpoint",
                Resonance::SelectiveUp => "selective_up",
                // Explicit transitions are not expressible in the document.
                Resonance::SelectiveDown | Resonance::Transition { .. } => "selective_down",
            };
            kv("resonance", s(name));
        }
        kv("regime.lambda_from", format!("{:?}", sw.regimes.lambda_from));
        kv("regime.broadband_from", format!("{:?}", sw.regimes.broadband_from));

        lines.push(String::new());
        lines.push("[output]".into());
        let mut kv = |k: &str, v: String| lines.push(format!("{k} = {v}"));
        if let Some(p) = &self.output.path {
            kv("path", s(&p.to_string_lossy()));
        }
        kv("format", s(self.output.format.as_str()));
        if let Some(m) = &self.output.manifest {
            kv("manifest", s(&m.to_string_lossy()));
        }
        if let Some(seed) = self.seed {
            lines.push(String::new());
            lines.push("[numerics]".into());
            lines.push(format!("seed = {seed}"));
        }
        lines.push(String::new());
        lines.join("\n")
    }
}
