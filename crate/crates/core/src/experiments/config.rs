//! Scenario files: `[section]` headers, `key = value` lines and `#` comments.
//!
//! Lengths are written either in meters (`0.005`) or as multiples of the
//! free-space wavelength (`1.5 lambda0`). Lists are comma separated.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use crate::error::ConfigError;
use crate::geometry::{spacing_from_factor, ArrayConfig, PathModel};
use crate::medium::{MediumGeometry, MediumSpec, ShapeKind, DEFAULT_SPAN_BOUND};
use crate::optimize::{FirstRowBounds, FirstRowOptions, LDeltaOptions, LinearGrid};

type ConfigResult<T> = std::result::Result<T, ConfigError>;

/// Default free-space wavelength: 5 mm, i.e. 60 GHz.
pub const DEFAULT_LAMBDA0: f64 = 5e-3;
/// Default link range in meters.
pub const DEFAULT_RANGE: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Section {
    Geometry,
    Medium,
    Experiment,
}

impl Section {
    fn parse(name: &str) -> Option<Self> {
        match name {
            "geometry" => Some(Section::Geometry),
            "medium" => Some(Section::Medium),
            "experiment" => Some(Section::Experiment),
            _ => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Section::Geometry => "geometry",
            Section::Medium => "medium",
            Section::Experiment => "experiment",
        }
    }
}

const GEOMETRY_KEYS: &[&str] = &[
    "n_tx", "m_rx", "eta", "d_t", "d_r", "theta_t", "theta_r", "range", "lambda0", "path_model",
];
const MEDIUM_KEYS: &[&str] = &["variant", "sqrt_eps_r", "thickness", "first_row", "shape", "l_delta"];
const EXPERIMENT_KEYS: &[&str] = &[
    "command", "output", "sqrt_eps_r_values", "eta_values", "shapes", "l11", "l12_start", "l12_end",
    "l12_steps", "l13_start", "l13_end", "l13_steps", "n_min", "n_max", "span_bound", "grid_points",
    "base", "lower", "upper", "coarse_budget", "max_points_per_dim", "refine_points", "starts",
];

/// Toeplitz entries may also be given one per key: `l11`, `l12`, ...
fn is_toeplitz_entry_key(key: &str) -> Option<usize> {
    key.strip_prefix("l1").and_then(|k| k.parse::<usize>().ok()).filter(|&k| k >= 1)
}

fn key_allowed(section: Section, key: &str) -> bool {
    match section {
        Section::Geometry => GEOMETRY_KEYS.contains(&key),
        Section::Medium => MEDIUM_KEYS.contains(&key) || is_toeplitz_entry_key(key).is_some(),
        Section::Experiment => EXPERIMENT_KEYS.contains(&key),
    }
}

#[derive(Debug, Clone, PartialEq)]
struct RawEntry {
    value: String,
    /// 0 for values supplied as overrides.
    line: usize,
}

/// Key/value pairs as read from the file, before typing and validation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<(Section, String), RawEntry>,
}

impl RawConfig {
    pub fn parse(text: &str) -> ConfigResult<Self> {
        let mut raw = RawConfig::default();
        let mut section: Option<Section> = None;
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError::new("unterminated section header").at_line(lineno))?
                    .trim();
                section = Some(Section::parse(name).ok_or_else(|| {
                    ConfigError::new(format!("unknown section [{name}]")).at_line(lineno)
                })?);
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| ConfigError::new("expected 'key = value'").at_line(lineno))?;
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() {
                return Err(ConfigError::new("empty key").at_line(lineno));
            }
            let sec = section.ok_or_else(|| {
                ConfigError::new("key outside of any section").at_line(lineno).with_key(key)
            })?;
            raw.insert(sec, key, value, lineno)?;
        }
        Ok(raw)
    }

    fn insert(&mut self, section: Section, key: &str, value: &str, line: usize) -> ConfigResult<()> {
        if !key_allowed(section, key) {
            let mut err = ConfigError::new(format!("unknown key in [{}]", section.name())).with_key(key);
            if line > 0 {
                err = err.at_line(line);
            }
            return Err(err);
        }
        let slot = (section, key.to_string());
        if line > 0 {
            if let Some(prev) = self.entries.get(&slot) {
                return Err(ConfigError::new(format!("duplicate key (first set on line {})", prev.line))
                    .at_line(line)
                    .with_key(key));
            }
        }
        self.entries.insert(
            slot,
            RawEntry {
                value: value.to_string(),
                line,
            },
        );
        Ok(())
    }

    /// Applies `section.key=value`, replacing any value from the file.
    pub fn apply_override(&mut self, spec: &str) -> ConfigResult<()> {
        let (path, value) = spec
            .split_once('=')
            .ok_or_else(|| ConfigError::new(format!("override '{spec}' is not of the form section.key=value")))?;
        let (section, key) = path.trim().split_once('.').ok_or_else(|| {
            ConfigError::new(format!("override '{spec}' must name the section, e.g. geometry.eta=0.5"))
        })?;
        let section = Section::parse(section.trim())
            .ok_or_else(|| ConfigError::new(format!("unknown section '{section}' in override")))?;
        self.insert(section, key.trim(), value.trim(), 0)
    }

    /// Removes a key, returning whether it was present.
    pub fn remove(&mut self, section: Section, key: &str) -> bool {
        self.entries.remove(&(section, key.to_string())).is_some()
    }

    fn get(&self, section: Section, key: &str) -> Option<&RawEntry> {
        self.entries.get(&(section, key.to_string()))
    }

    fn keys_in(&self, section: Section) -> impl Iterator<Item = &str> {
        self.entries
            .keys()
            .filter(move |(s, _)| *s == section)
            .map(|(_, k)| k.as_str())
    }
}

fn located(entry: &RawEntry, key: &str, message: String) -> ConfigError {
    let err = ConfigError::new(message).with_key(key);
    if entry.line > 0 {
        err.at_line(entry.line)
    } else {
        err
    }
}

/// Typed accessors over a raw config; lengths resolve against `lambda0`.
struct Reader<'a> {
    raw: &'a RawConfig,
    lambda0: f64,
}

impl<'a> Reader<'a> {
    fn entry(&self, section: Section, key: &str) -> Option<&'a RawEntry> {
        self.raw.get(section, key)
    }

    fn f64(&self, section: Section, key: &str) -> ConfigResult<Option<f64>> {
        let Some(e) = self.entry(section, key) else {
            return Ok(None);
        };
        parse_number(&e.value)
            .map(Some)
            .map_err(|m| located(e, key, m))
    }

    fn usize(&self, section: Section, key: &str) -> ConfigResult<Option<usize>> {
        let Some(e) = self.entry(section, key) else {
            return Ok(None);
        };
        e.value
            .parse::<usize>()
            .map(Some)
            .map_err(|_| located(e, key, format!("expected a non-negative integer, got '{}'", e.value)))
    }

    fn length(&self, section: Section, key: &str) -> ConfigResult<Option<f64>> {
        let Some(e) = self.entry(section, key) else {
            return Ok(None);
        };
        parse_length(&e.value, self.lambda0)
            .map(Some)
            .map_err(|m| located(e, key, m))
    }

    fn list<T>(
        &self,
        section: Section,
        key: &str,
        item: impl Fn(&str) -> Result<T, String>,
    ) -> ConfigResult<Option<Vec<T>>> {
        let Some(e) = self.entry(section, key) else {
            return Ok(None);
        };
        let items = e
            .value
            .split(',')
            .map(|s| item(s.trim()))
            .collect::<Result<Vec<T>, String>>()
            .map_err(|m| located(e, key, m))?;
        if items.is_empty() {
            return Err(located(e, key, "empty list".into()));
        }
        Ok(Some(items))
    }

    fn string(&self, section: Section, key: &str) -> Option<&'a str> {
        self.entry(section, key).map(|e| e.value.as_str())
    }

    fn fail(&self, section: Section, key: &str, message: impl Into<String>) -> ConfigError {
        match self.entry(section, key) {
            Some(e) => located(e, key, message.into()),
            None => ConfigError::new(message).with_key(key),
        }
    }
}

fn parse_number(s: &str) -> Result<f64, String> {
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("expected a finite number, got '{s}'")),
    }
}

/// `<float>` in meters or `<float> lambda0`.
pub fn parse_length(s: &str, lambda0: f64) -> Result<f64, String> {
    let s = s.trim();
    if let Some(multiple) = s.strip_suffix("lambda0") {
        let multiple = multiple.trim();
        let factor = if multiple.is_empty() {
            1.0
        } else {
            multiple
                .strip_suffix('*')
                .map(str::trim)
                .unwrap_or(multiple)
                .parse::<f64>()
                .map_err(|_| format!("bad wavelength multiple in '{s}'"))?
        };
        return Ok(factor * lambda0);
    }
    if s.chars().any(char::is_alphabetic) && s.parse::<f64>().is_err() {
        return Err(format!("unknown unit in '{s}' (use meters or 'lambda0')"));
    }
    parse_number(s)
}

/// Antenna spacing: a factor of the free-space optimum or explicit values in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Spacing {
    Eta(f64),
    Explicit { d_t: f64, d_r: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometrySettings {
    pub n_tx: usize,
    pub m_rx: usize,
    pub spacing: Spacing,
    pub theta_t: f64,
    pub theta_r: f64,
    pub range: f64,
    pub lambda0: f64,
    pub path_model: PathModel,
}

impl GeometrySettings {
    pub fn array_config(&self) -> crate::Result<ArrayConfig> {
        self.array_config_for(self.n_tx, self.m_rx, None)
    }

    /// Config for given antenna counts, optionally replacing the spacing factor.
    pub fn array_config_for(&self, n_tx: usize, m_rx: usize, eta: Option<f64>) -> crate::Result<ArrayConfig> {
        let tpl = ArrayConfig::new(n_tx, m_rx, self.range, self.lambda0).with_tilts(self.theta_t, self.theta_r);
        let cfg = match (self.spacing, eta) {
            (_, Some(eta)) | (Spacing::Eta(eta), None) => spacing_from_factor(&tpl, eta)?,
            (Spacing::Explicit { d_t, d_r }, None) => tpl.with_spacings(d_t, d_r),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// `None` in a shape list stands for the medium-free baseline.
pub type ShapeChoice = Option<ShapeKind>;

#[derive(Debug, Clone, PartialEq)]
pub enum Experiment {
    /// Evaluate the configured link and medium once.
    Point,
    SweepL12 {
        sqrt_eps_r_values: Vec<f64>,
        l11: f64,
        l12: LinearGrid,
    },
    SweepL12L13 {
        l11: f64,
        l12: LinearGrid,
        l13: LinearGrid,
    },
    /// Per-`N` search of `l_delta` for each shape, permittivity and spacing factor.
    OptimizeLDelta {
        shapes: Vec<ShapeChoice>,
        sqrt_eps_r_values: Vec<f64>,
        eta_values: Option<Vec<f64>>,
        n_min: usize,
        n_max: usize,
        span_bound: f64,
        options: LDeltaOptions,
    },
    OptimizeFirstRow {
        bounds: Option<FirstRowBounds>,
        span_bound: f64,
        options: FirstRowOptions,
    },
}

impl Experiment {
    pub fn command(&self) -> &'static str {
        match self {
            Experiment::Point => "point",
            Experiment::SweepL12 { .. } => "sweep_l12",
            Experiment::SweepL12L13 { .. } => "sweep_l12_l13",
            Experiment::OptimizeLDelta { .. } => "optimize_l_delta",
            Experiment::OptimizeFirstRow { .. } => "optimize_first_row",
        }
    }

    fn keys(command: &str) -> Option<&'static [&'static str]> {
        Some(match command {
            "point" => &[],
            "sweep_l12" => &["sqrt_eps_r_values", "l11", "l12_start", "l12_end", "l12_steps"],
            "sweep_l12_l13" => &["l11", "l12_start", "l12_end", "l12_steps", "l13_start", "l13_end", "l13_steps"],
            "optimize_l_delta" => &["shapes", "sqrt_eps_r_values", "eta_values", "n_min", "n_max", "span_bound", "grid_points"],
            "optimize_first_row" => &[
                "base", "lower", "upper", "span_bound", "coarse_budget", "max_points_per_dim", "refine_points", "starts",
            ],
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub geometry: GeometrySettings,
    pub medium: MediumSpec,
    pub experiment: Experiment,
    pub output: Option<PathBuf>,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> ConfigResult<Self> {
        Self::from_raw(&RawConfig::parse(text)?)
    }

    pub fn parse_with_overrides(text: &str, overrides: &[String]) -> ConfigResult<Self> {
        let mut raw = RawConfig::parse(text)?;
        for o in overrides {
            raw.apply_override(o)?;
        }
        Self::from_raw(&raw)
    }

    pub fn from_raw(raw: &RawConfig) -> ConfigResult<Self> {
        use Section::*;
        let mut r = Reader { raw, lambda0: DEFAULT_LAMBDA0 };

        let lambda0 = r.f64(Geometry, "lambda0")?.unwrap_or(DEFAULT_LAMBDA0);
        if lambda0 <= 0.0 {
            return Err(r.fail(Geometry, "lambda0", "lambda0 must be positive (meters)"));
        }
        r.lambda0 = lambda0;

        let n_tx = r.usize(Geometry, "n_tx")?.unwrap_or(2);
        let m_rx = r.usize(Geometry, "m_rx")?.unwrap_or(n_tx);
        if n_tx == 0 || m_rx == 0 {
            return Err(r.fail(Geometry, if n_tx == 0 { "n_tx" } else { "m_rx" }, "antenna counts must be >= 1"));
        }
        let eta = r.f64(Geometry, "eta")?;
        let d_t = r.length(Geometry, "d_t")?;
        let d_r = r.length(Geometry, "d_r")?;
        let spacing = match (eta, d_t, d_r) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                let mut err = ConfigError::new("eta and explicit spacings are mutually exclusive").with_key("eta");
                if d_t.is_some() {
                    err = err.with_key("d_t");
                }
                if d_r.is_some() {
                    err = err.with_key("d_r");
                }
                return Err(err);
            }
            (Some(eta), None, None) => {
                if eta <= 0.0 {
                    return Err(r.fail(Geometry, "eta", "eta must be positive"));
                }
                Spacing::Eta(eta)
            }
            (None, Some(d_t), Some(d_r)) => {
                if d_t <= 0.0 || d_r <= 0.0 {
                    return Err(r.fail(Geometry, "d_t", "spacings must be positive"));
                }
                Spacing::Explicit { d_t, d_r }
            }
            (None, Some(_), None) => return Err(ConfigError::new("d_t given without d_r").with_key("d_r")),
            (None, None, Some(_)) => return Err(ConfigError::new("d_r given without d_t").with_key("d_t")),
            (None, None, None) => {
                return Err(ConfigError::new("one of eta or d_t/d_r is required")
                    .with_key("eta")
                    .with_key("d_t"))
            }
        };
        let theta_t = r.f64(Geometry, "theta_t")?.unwrap_or(0.0);
        let theta_r = r.f64(Geometry, "theta_r")?.unwrap_or(0.0);
        for (k, v) in [("theta_t", theta_t), ("theta_r", theta_r)] {
            if v.abs() >= std::f64::consts::FRAC_PI_2 {
                return Err(r.fail(Geometry, k, "tilt must satisfy |theta| < pi/2 (radians)"));
            }
        }
        let range = r.length(Geometry, "range")?.unwrap_or(DEFAULT_RANGE);
        if range <= 0.0 {
            return Err(r.fail(Geometry, "range", "range must be positive"));
        }
        let path_model = match r.string(Geometry, "path_model") {
            None => PathModel::Approximate,
            Some(s) => s.parse().map_err(|m: String| r.fail(Geometry, "path_model", m))?,
        };
        let geometry = GeometrySettings {
            n_tx,
            m_rx,
            spacing,
            theta_t,
            theta_r,
            range,
            lambda0,
            path_model,
        };

        let medium = read_medium(&r, n_tx.max(m_rx), range)?;
        let experiment = read_experiment(&r, &geometry, &medium)?;
        let output = r.string(Experiment, "output").map(PathBuf::from);
        Ok(ScenarioConfig {
            geometry,
            medium,
            experiment,
            output,
        })
    }

    /// Canonical text form; parsing it yields an equal configuration.
    pub fn to_config_string(&self) -> String {
        let g = &self.geometry;
        let mut s = String::new();
        let _ = writeln!(s, "[geometry]");
        let _ = writeln!(s, "n_tx = {}", g.n_tx);
        let _ = writeln!(s, "m_rx = {}", g.m_rx);
        match g.spacing {
            Spacing::Eta(eta) => {
                let _ = writeln!(s, "eta = {}", num(eta));
            }
            Spacing::Explicit { d_t, d_r } => {
                let _ = writeln!(s, "d_t = {}", num(d_t));
                let _ = writeln!(s, "d_r = {}", num(d_r));
            }
        }
        let _ = writeln!(s, "theta_t = {}", num(g.theta_t));
        let _ = writeln!(s, "theta_r = {}", num(g.theta_r));
        let _ = writeln!(s, "range = {}", num(g.range));
        let _ = writeln!(s, "lambda0 = {}", num(g.lambda0));
        let _ = writeln!(s, "path_model = {}", g.path_model);

        let _ = writeln!(s, "\n[medium]");
        let m = &self.medium;
        match &m.geometry {
            MediumGeometry::FreeSpace => {
                let _ = writeln!(s, "variant = free_space");
            }
            MediumGeometry::Rectangular { thickness } => {
                let _ = writeln!(s, "variant = rectangular");
                let _ = writeln!(s, "thickness = {}", num(*thickness));
            }
            MediumGeometry::ExplicitToeplitz { first_row } => {
                let _ = writeln!(s, "variant = toeplitz");
                let _ = writeln!(s, "first_row = {}", list(first_row.iter().map(|v| num(*v))));
            }
            MediumGeometry::ShapeFunction { kind, l_delta } => {
                let _ = writeln!(s, "variant = shape");
                let _ = writeln!(s, "shape = {kind}");
                let _ = writeln!(s, "l_delta = {}", num(*l_delta));
            }
        }
        let _ = writeln!(s, "sqrt_eps_r = {}", num(m.sqrt_eps_r));

        let _ = writeln!(s, "\n[experiment]");
        let _ = writeln!(s, "command = {}", self.experiment.command());
        match &self.experiment {
            Experiment::Point => {}
            Experiment::SweepL12 { sqrt_eps_r_values, l11, l12 } => {
                let _ = writeln!(s, "sqrt_eps_r_values = {}", list(sqrt_eps_r_values.iter().map(|v| num(*v))));
                let _ = writeln!(s, "l11 = {}", num(*l11));
                write_grid(&mut s, "l12", l12);
            }
            Experiment::SweepL12L13 { l11, l12, l13 } => {
                let _ = writeln!(s, "l11 = {}", num(*l11));
                write_grid(&mut s, "l12", l12);
                write_grid(&mut s, "l13", l13);
            }
            Experiment::OptimizeLDelta {
                shapes,
                sqrt_eps_r_values,
                eta_values,
                n_min,
                n_max,
                span_bound,
                options,
            } => {
                let names = shapes.iter().map(|k| k.map_or("free_space".to_string(), |k| k.to_string()));
                let _ = writeln!(s, "shapes = {}", list(names));
                let _ = writeln!(s, "sqrt_eps_r_values = {}", list(sqrt_eps_r_values.iter().map(|v| num(*v))));
                if let Some(etas) = eta_values {
                    let _ = writeln!(s, "eta_values = {}", list(etas.iter().map(|v| num(*v))));
                }
                let _ = writeln!(s, "n_min = {n_min}");
                let _ = writeln!(s, "n_max = {n_max}");
                let _ = writeln!(s, "span_bound = {}", num(*span_bound));
                let _ = writeln!(s, "grid_points = {}", options.grid_points);
            }
            Experiment::OptimizeFirstRow {
                bounds,
                span_bound,
                options,
            } => {
                if let Some(b) = bounds {
                    let _ = writeln!(s, "base = {}", num(b.base));
                    let _ = writeln!(s, "lower = {}", num(b.lower));
                    let _ = writeln!(s, "upper = {}", num(b.upper));
                }
                let _ = writeln!(s, "span_bound = {}", num(*span_bound));
                let _ = writeln!(s, "coarse_budget = {}", options.coarse_budget);
                let _ = writeln!(s, "max_points_per_dim = {}", options.max_points_per_dim);
                let _ = writeln!(s, "refine_points = {}", options.refine_points);
                let _ = writeln!(s, "starts = {}", options.starts);
            }
        }
        if let Some(out) = &self.output {
            let _ = writeln!(s, "output = {}", out.display());
        }
        s
    }
}

/// Shortest decimal that round-trips to the same `f64`.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

fn list(items: impl Iterator<Item = String>) -> String {
    items.collect::<Vec<_>>().join(", ")
}

fn write_grid(s: &mut String, name: &str, g: &LinearGrid) {
    let _ = writeln!(s, "{name}_start = {}", num(g.start));
    let _ = writeln!(s, "{name}_end = {}", num(g.end));
    let _ = writeln!(s, "{name}_steps = {}", g.steps);
}

fn read_medium(r: &Reader<'_>, v: usize, range: f64) -> ConfigResult<MediumSpec> {
    use Section::Medium;
    let variant = r.string(Medium, "variant").unwrap_or("free_space");
    let sqrt_eps_r = r.f64(Medium, "sqrt_eps_r")?.unwrap_or(1.0);
    if sqrt_eps_r < 1.0 {
        return Err(r.fail(Medium, "sqrt_eps_r", "sqrt_eps_r must be >= 1"));
    }
    let present: Vec<&str> = r.raw.keys_in(Medium).collect();
    let reject_unused = |allowed: &dyn Fn(&str) -> bool| -> ConfigResult<()> {
        for key in &present {
            if !(*key == "variant" || *key == "sqrt_eps_r" || allowed(key)) {
                return Err(r.fail(Medium, key, format!("key is not used by medium variant '{variant}'")));
            }
        }
        Ok(())
    };
    let geometry = match variant {
        "free_space" => {
            reject_unused(&|_| false)?;
            MediumGeometry::FreeSpace
        }
        "rectangular" => {
            reject_unused(&|k| k == "thickness")?;
            let thickness = r
                .length(Medium, "thickness")?
                .ok_or_else(|| ConfigError::new("rectangular medium needs a thickness").with_key("thickness"))?;
            if thickness < 0.0 || thickness >= range {
                return Err(r.fail(Medium, "thickness", "thickness must satisfy 0 <= t < range"));
            }
            MediumGeometry::Rectangular { thickness }
        }
        "toeplitz" => {
            reject_unused(&|k| k == "first_row" || is_toeplitz_entry_key(k).is_some())?;
            let first_row = read_first_row(r, v)?;
            MediumGeometry::ExplicitToeplitz { first_row }
        }
        "shape" => {
            reject_unused(&|k| k == "shape" || k == "l_delta")?;
            let kind: ShapeKind = r
                .string(Medium, "shape")
                .ok_or_else(|| ConfigError::new("shape medium needs a shape").with_key("shape"))?
                .parse()
                .map_err(|e: crate::Error| r.fail(Medium, "shape", e.to_string()))?;
            let l_delta = r.length(Medium, "l_delta")?.unwrap_or(0.0);
            if l_delta < 0.0 {
                return Err(r.fail(Medium, "l_delta", "l_delta must be >= 0"));
            }
            MediumGeometry::ShapeFunction { kind, l_delta }
        }
        other => {
            return Err(r.fail(
                Medium,
                "variant",
                format!("unknown medium variant '{other}' (free_space, rectangular, toeplitz, shape)"),
            ))
        }
    };
    Ok(MediumSpec { geometry, sqrt_eps_r })
}

fn read_first_row(r: &Reader<'_>, v: usize) -> ConfigResult<Vec<f64>> {
    use Section::Medium;
    let lam = r.lambda0;
    let listed = r.list(Medium, "first_row", |s| parse_length(s, lam))?;
    let mut keyed: Vec<(usize, &str)> = r
        .raw
        .keys_in(Medium)
        .filter_map(|k| is_toeplitz_entry_key(k).map(|i| (i, k)))
        .collect();
    keyed.sort();
    let row = match (listed, keyed.is_empty()) {
        (Some(_), false) => {
            return Err(ConfigError::new("give the Toeplitz row either as first_row or as l1k keys, not both")
                .with_key("first_row")
                .with_key(keyed[0].1))
        }
        (Some(row), true) => row,
        (None, false) => {
            let mut row = Vec::with_capacity(keyed.len());
            for (expected, (i, key)) in (1..).zip(&keyed) {
                if *i != expected {
                    return Err(ConfigError::new(format!("Toeplitz entries must be l11..l1{v} without gaps"))
                        .with_key(*key));
                }
                row.push(r.length(Medium, key)?.expect("key present"));
            }
            row
        }
        (None, true) => {
            return Err(ConfigError::new("toeplitz medium needs first_row or l11..l1V").with_key("first_row"))
        }
    };
    if row.len() != v {
        return Err(r.fail(
            Medium,
            "first_row",
            format!("Toeplitz first row has {} entries, expected V = {v}", row.len()),
        ));
    }
    if row.iter().any(|l| *l < 0.0) {
        return Err(r.fail(Medium, "first_row", "medium lengths must be >= 0"));
    }
    Ok(row)
}

fn read_grid(r: &Reader<'_>, name: &str, default: (f64, f64, usize)) -> ConfigResult<LinearGrid> {
    use Section::Experiment;
    let start = r.length(Experiment, &format!("{name}_start"))?.unwrap_or(default.0);
    let end = r.length(Experiment, &format!("{name}_end"))?.unwrap_or(default.1);
    let steps = r.usize(Experiment, &format!("{name}_steps"))?.unwrap_or(default.2);
    if steps < 2 {
        return Err(r.fail(Experiment, &format!("{name}_steps"), "a sweep needs at least 2 steps"));
    }
    if start < 0.0 || end < start {
        return Err(r.fail(Experiment, &format!("{name}_end"), format!("{name} range must satisfy 0 <= start <= end")));
    }
    Ok(LinearGrid::new(start, end, steps))
}

fn read_experiment(r: &Reader<'_>, g: &GeometrySettings, medium: &MediumSpec) -> ConfigResult<Experiment> {
    use Section::Experiment as E;
    let command = r.string(E, "command").unwrap_or("point");
    let allowed = Experiment::keys(command).ok_or_else(|| {
        r.fail(
            E,
            "command",
            format!(
                "unknown command '{command}' (point, sweep_l12, sweep_l12_l13, optimize_l_delta, optimize_first_row)"
            ),
        )
    })?;
    for key in r.raw.keys_in(E) {
        if key != "command" && key != "output" && !allowed.contains(&key) {
            return Err(r.fail(E, key, format!("key is not used by command '{command}'")));
        }
    }
    let lam = g.lambda0;
    let sqrt_list = |r: &Reader<'_>| -> ConfigResult<Vec<f64>> {
        let values = r
            .list(E, "sqrt_eps_r_values", parse_number)?
            .unwrap_or_else(|| vec![medium.sqrt_eps_r]);
        if values.iter().any(|v| *v < 1.0) {
            return Err(r.fail(E, "sqrt_eps_r_values", "every sqrt_eps_r must be >= 1"));
        }
        Ok(values)
    };
    let span_bound = r.f64(E, "span_bound")?.unwrap_or(DEFAULT_SPAN_BOUND);
    if span_bound <= 0.0 {
        return Err(r.fail(E, "span_bound", "span bound must be positive"));
    }
    let square = |v: usize| -> ConfigResult<()> {
        if g.n_tx != v || g.m_rx != v {
            return Err(ConfigError::new(format!("command '{command}' needs n_tx = m_rx = {v}"))
                .with_key("n_tx")
                .with_key("m_rx"));
        }
        Ok(())
    };
    Ok(match command {
        "point" => Experiment::Point,
        "sweep_l12" => {
            square(2)?;
            Experiment::SweepL12 {
                sqrt_eps_r_values: sqrt_list(r)?,
                l11: r.length(E, "l11")?.unwrap_or(lam),
                l12: read_grid(r, "l12", (lam, 4.0 * lam, 601))?,
            }
        }
        "sweep_l12_l13" => {
            square(3)?;
            Experiment::SweepL12L13 {
                l11: r.length(E, "l11")?.unwrap_or(lam),
                l12: read_grid(r, "l12", (0.0, 2.0 * lam, 200))?,
                l13: read_grid(r, "l13", (0.0, 2.0 * lam, 200))?,
            }
        }
        "optimize_l_delta" => {
            let shapes = match r.list(E, "shapes", |s| {
                if s == "free_space" || s == "none" {
                    Ok(None)
                } else {
                    s.parse::<ShapeKind>().map(Some).map_err(|e| e.to_string())
                }
            })? {
                Some(s) => s,
                None => match &medium.geometry {
                    MediumGeometry::ShapeFunction { kind, .. } => vec![Some(*kind)],
                    _ => return Err(ConfigError::new("optimize_l_delta needs shapes or a shape medium").with_key("shapes")),
                },
            };
            let eta_values = r.list(E, "eta_values", parse_number)?;
            if let Some(etas) = &eta_values {
                if matches!(g.spacing, Spacing::Explicit { .. }) {
                    return Err(ConfigError::new("eta_values needs the geometry spacing given as eta")
                        .with_key("eta_values")
                        .with_key("d_t"));
                }
                if etas.iter().any(|e| *e <= 0.0) {
                    return Err(r.fail(E, "eta_values", "every eta must be positive"));
                }
            }
            let n_min = r.usize(E, "n_min")?.unwrap_or(g.n_tx.max(g.m_rx));
            let n_max = r.usize(E, "n_max")?.unwrap_or(n_min);
            if n_min == 0 || n_max < n_min {
                return Err(r.fail(E, "n_max", "need 1 <= n_min <= n_max"));
            }
            let grid_points = r.usize(E, "grid_points")?.unwrap_or(LDeltaOptions::default().grid_points);
            if grid_points < 2 {
                return Err(r.fail(E, "grid_points", "need at least 2 grid points"));
            }
            Experiment::OptimizeLDelta {
                shapes,
                sqrt_eps_r_values: sqrt_list(r)?,
                eta_values,
                n_min,
                n_max,
                span_bound,
                options: LDeltaOptions {
                    grid_points,
                    ..Default::default()
                },
            }
        }
        "optimize_first_row" => {
            let base = r.length(E, "base")?;
            let lower = r.length(E, "lower")?;
            let upper = r.length(E, "upper")?;
            let bounds = match (base, lower, upper) {
                (None, None, None) => None,
                _ => {
                    let d = FirstRowBounds::default_for(lam, medium.sqrt_eps_r, span_bound);
                    Some(FirstRowBounds {
                        base: base.unwrap_or(d.base),
                        lower: lower.unwrap_or(d.lower),
                        upper: upper.unwrap_or(d.upper),
                    })
                }
            };
            let d = FirstRowOptions::default();
            Experiment::OptimizeFirstRow {
                bounds,
                span_bound,
                options: FirstRowOptions {
                    coarse_budget: r.usize(E, "coarse_budget")?.unwrap_or(d.coarse_budget),
                    max_points_per_dim: r.usize(E, "max_points_per_dim")?.unwrap_or(d.max_points_per_dim),
                    refine_points: r.usize(E, "refine_points")?.unwrap_or(d.refine_points),
                    starts: r.usize(E, "starts")?.unwrap_or(d.starts),
                    ..d
                },
            }
        }
        _ => unreachable!("command validated above"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[geometry]\nn_tx = 2\nm_rx = 2\neta = 1\n";

    #[test]
    fn minimal_round_trip() {
        let cfg = ScenarioConfig::parse(MINIMAL).unwrap();
        assert_eq!(cfg.geometry.spacing, Spacing::Eta(1.0));
        assert_eq!(cfg.medium, MediumSpec::free_space());
        assert_eq!(cfg.experiment, Experiment::Point);
        let again = ScenarioConfig::parse(&cfg.to_config_string()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn wavelength_units() {
        let text = "[geometry]\neta = 0.5\nlambda0 = 5e-3\n[medium]\nvariant = toeplitz\nl11 = 1 lambda0\nl12 = 0.002\n";
        let cfg = ScenarioConfig::parse(text).unwrap();
        let MediumGeometry::ExplicitToeplitz { first_row } = &cfg.medium.geometry else {
            panic!("wrong variant")
        };
        assert_eq!(first_row, &vec![5e-3, 0.002]);
        assert_eq!(parse_length("2.5 lambda0", 2.0).unwrap(), 5.0);
        assert_eq!(parse_length("lambda0", 2.0).unwrap(), 2.0);
        assert!(parse_length("3 mm", 2.0).is_err());
    }

    #[test]
    fn eta_and_spacing_are_exclusive() {
        let err = ScenarioConfig::parse("[geometry]\neta = 1\nd_t = 0.1\nd_r = 0.1\n").unwrap_err();
        assert!(err.keys.contains(&"eta".to_string()));
        assert!(err.keys.contains(&"d_t".to_string()));
        assert!(ScenarioConfig::parse("[geometry]\nn_tx = 2\n").is_err());
    }

    #[test]
    fn diagnostics_name_line_and_key() {
        let err = ScenarioConfig::parse("[geometry]\neta = 1\nbogus = 3\n").unwrap_err();
        assert_eq!(err.line, Some(3));
        assert_eq!(err.keys, vec!["bogus".to_string()]);

        let err = ScenarioConfig::parse("[geometry]\neta = -1\n").unwrap_err();
        assert_eq!(err.line, Some(2));

        let err = ScenarioConfig::parse("eta = 1\n").unwrap_err();
        assert_eq!(err.line, Some(1));

        let err = ScenarioConfig::parse("[geometry]\neta 1\n").unwrap_err();
        assert_eq!(err.line, Some(2));

        let err = ScenarioConfig::parse("[geometry]\neta = 1\neta = 2\n").unwrap_err();
        assert_eq!(err.line, Some(3));

        let err = ScenarioConfig::parse("[geometry]\neta = 1\n[medium]\nvariant = toeplitz\nfirst_row = 1, 2\nthickness = 3\n").unwrap_err();
        assert_eq!(err.keys, vec!["thickness".to_string()]);
    }

    #[test]
    fn overrides_replace_values() {
        let mut raw = RawConfig::parse(MINIMAL).unwrap();
        raw.apply_override("geometry.eta=0.5").unwrap();
        let cfg = ScenarioConfig::from_raw(&raw).unwrap();
        assert_eq!(cfg.geometry.spacing, Spacing::Eta(0.5));
        assert!(raw.apply_override("eta=0.5").is_err());
        assert!(raw.apply_override("geometry.nope=1").is_err());
    }

    #[test]
    fn experiments_round_trip() {
        let text = "\
[geometry]
n_tx = 5
eta = 0.8
[medium]
variant = shape
shape = quadratic
sqrt_eps_r = 2
[experiment]
command = optimize_l_delta
shapes = free_space, quadratic
eta_values = 0.6, 0.4
n_min = 2
n_max = 6
grid_points = 100
";
        let cfg = ScenarioConfig::parse(text).unwrap();
        assert_eq!(cfg.geometry.m_rx, 5);
        let Experiment::OptimizeLDelta { shapes, eta_values, .. } = &cfg.experiment else {
            panic!()
        };
        assert_eq!(shapes, &vec![None, Some(ShapeKind::Quadratic)]);
        assert_eq!(eta_values.as_deref(), Some(&[0.6, 0.4][..]));
        assert_eq!(ScenarioConfig::parse(&cfg.to_config_string()).unwrap(), cfg);

        let sweep = "[geometry]\neta = 0.5\n[experiment]\ncommand = sweep_l12\nsqrt_eps_r_values = 1, 2\nl12_steps = 11\noutput = out.csv\n";
        let cfg = ScenarioConfig::parse(sweep).unwrap();
        assert_eq!(ScenarioConfig::parse(&cfg.to_config_string()).unwrap(), cfg);
    }

    #[test]
    fn commands_check_their_keys() {
        let err = ScenarioConfig::parse("[geometry]\neta = 1\n[experiment]\ncommand = point\nl12_steps = 3\n").unwrap_err();
        assert_eq!(err.keys, vec!["l12_steps".to_string()]);
        let err = ScenarioConfig::parse("[geometry]\nn_tx = 3\neta = 1\n[experiment]\ncommand = sweep_l12\n").unwrap_err();
        assert!(err.message.contains("n_tx = m_rx = 2"));
        assert!(ScenarioConfig::parse("[geometry]\neta = 1\n[experiment]\ncommand = fly\n").is_err());
    }
}
