//! TOML experiment configs.
//!
//! ```toml
//! experiment = "shift_sweep"
//!
//! [params]
//! nu_q = "5 GHz"
//! nu_r = "8 GHz"
//!
//! [[grid]]
//! name = "g_x"
//! start = "0 MHz"
//! stop = "150 MHz"
//! count = 31
//!
//! [output]
//! path = "shifts.csv"
//! format = "csv"
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Deserialize;
use toml::Spanned;

use crate::error::CliError;
use crate::experiments::{find, Experiment, Fallback, Kind, ParamSpec, Value};
use crate::table::Format;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: Spanned<String>,
    #[serde(default)]
    params: BTreeMap<Spanned<String>, Spanned<toml::Value>>,
    #[serde(default)]
    grid: Vec<RawAxis>,
    output: Option<RawOutput>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAxis {
    name: Spanned<String>,
    start: Spanned<toml::Value>,
    stop: Spanned<toml::Value>,
    count: Spanned<i64>,
    scale: Option<Spanned<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    path: Option<PathBuf>,
    format: Option<Spanned<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub spec: &'static ParamSpec,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Config {
    pub experiment: &'static Experiment,
    /// Fixed parameters after defaults are applied; swept ones are absent.
    pub fixed: BTreeMap<&'static str, Value>,
    /// Outermost axis first.
    pub axes: Vec<Axis>,
    pub output_path: Option<PathBuf>,
    pub format: Option<Format>,
    /// Verbatim config text, echoed into the output metadata.
    pub source: String,
}

/// A fully resolved grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub values: BTreeMap<&'static str, Value>,
}

impl Point {
    pub fn num(&self, name: &str) -> f64 {
        self.opt_num(name)
            .unwrap_or_else(|| panic!("parameter `{name}` missing after validation"))
    }

    pub fn opt_num(&self, name: &str) -> Option<f64> {
        match self.values.get(name) {
            Some(Value::Num(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn count(&self, name: &str) -> Option<usize> {
        match self.values.get(name) {
            Some(Value::Count(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn choice(&self, name: &str) -> &'static str {
        match self.values.get(name) {
            Some(Value::Choice(v)) => v,
            _ => panic!("choice `{name}` missing after validation"),
        }
    }
}

/// 1-based line and column of a byte offset.
fn location(src: &str, offset: usize) -> String {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
    format!("line {line}, column {col}")
}

fn at<T>(src: &str, s: &Spanned<T>, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{}: {msg}", location(src, s.span().start)))
}

fn nearest<'a>(name: &str, candidates: impl Iterator<Item = &'a str>) -> Option<&'a str> {
    candidates
        .map(|c| (strsim::levenshtein(name, c), c))
        .filter(|(d, _)| *d <= 3)
        .min()
        .map(|(_, c)| c)
}

fn suggestion(name: &str, candidates: impl Iterator<Item = &'static str>) -> String {
    match nearest(name, candidates) {
        Some(c) => format!("; did you mean `{c}`?"),
        None => String::new(),
    }
}

/// Unit suffixes with their power of ten, longest suffix first.
type Units = &'static [(&'static str, i32)];

const FREQUENCY_UNITS: Units = &[("GHz", 9), ("MHz", 6), ("kHz", 3), ("Hz", 0)];
const TEMPERATURE_UNITS: Units = &[("mK", -3), ("K", 0)];
const TIME_UNITS: Units = &[("ns", -9), ("us", -6), ("µs", -6), ("ms", -3), ("s", 0)];

/// Parses `"<number> <unit>"`; the space is optional and units are
/// case-sensitive.
pub fn parse_quantity(text: &str, units: Units) -> Result<f64, String> {
    let text = text.trim();
    let allowed = || units.iter().map(|(u, _)| *u).collect::<Vec<_>>().join(", ");
    let &(unit, exponent) = units
        .iter()
        .find(|(u, _)| text.ends_with(u))
        .ok_or_else(|| format!("`{text}` has no recognised unit (expected one of {})", allowed()))?;
    let number = text[..text.len() - unit.len()].trim();
    let v: f64 = number
        .parse()
        .map_err(|_| format!("`{number}` is not a number (in `{text}`)"))?;
    if !v.is_finite() {
        return Err(format!("`{text}` is not finite"));
    }
    // Dividing by an exact power of ten keeps "400 ns" at the nearest double.
    let scale = 10f64.powi(exponent.abs());
    Ok(if exponent < 0 { v / scale } else { v * scale })
}

fn units_of(kind: Kind) -> Option<Units> {
    match kind {
        Kind::Frequency => Some(FREQUENCY_UNITS),
        Kind::Temperature => Some(TEMPERATURE_UNITS),
        Kind::Time => Some(TIME_UNITS),
        _ => None,
    }
}

fn scalar(v: &toml::Value, kind: Kind) -> Result<f64, String> {
    if let Some(units) = units_of(kind) {
        return match v {
            toml::Value::String(s) => parse_quantity(s, units),
            toml::Value::Integer(_) | toml::Value::Float(_) => Err(format!(
                "a {} needs a unit, e.g. \"{}\"",
                kind.describe(),
                kind.example()
            )),
            other => Err(format!("expected a {}, got {}", kind.describe(), other.type_str())),
        };
    }
    match v {
        toml::Value::Integer(i) => Ok(*i as f64),
        toml::Value::Float(f) if f.is_finite() => Ok(*f),
        toml::Value::Float(f) => Err(format!("{f} is not finite")),
        other => Err(format!("expected a number, got {}", other.type_str())),
    }
}

fn value(v: &toml::Value, kind: Kind) -> Result<Value, String> {
    match kind {
        Kind::Count { min } => match v {
            toml::Value::Integer(i) if *i >= min as i64 => Ok(Value::Count(*i as usize)),
            toml::Value::Integer(i) => Err(format!("{i} is below the minimum {min}")),
            other => Err(format!("expected an integer, got {}", other.type_str())),
        },
        Kind::Choice(options) => match v {
            toml::Value::String(s) => options
                .iter()
                .find(|o| **o == s.as_str())
                .map(|o| Value::Choice(o))
                .ok_or_else(|| format!("`{s}` is not one of {}", options.join(", "))),
            other => Err(format!("expected a string, got {}", other.type_str())),
        },
        _ => scalar(v, kind).map(Value::Num),
    }
}

fn axis_values(start: f64, stop: f64, count: usize, scale: Scale) -> Vec<f64> {
    let last = (count - 1) as f64;
    (0..count)
        .map(|i| {
            if i == count - 1 {
                return stop;
            }
            let t = i as f64 / last;
            match scale {
                Scale::Linear => start + (stop - start) * t,
                Scale::Log => start * (stop / start).powf(t),
            }
        })
        .collect()
}

pub fn parse(src: &str) -> Result<Config, CliError> {
    let raw: RawConfig = toml::from_str(src).map_err(|e| CliError::Config(e.to_string()))?;

    let experiment = find(raw.experiment.get_ref()).ok_or_else(|| {
        let name = raw.experiment.get_ref();
        at(
            src,
            &raw.experiment,
            format!(
                "unknown experiment `{name}`{}",
                suggestion(name, crate::experiments::CATALOG.iter().map(|e| e.name))
            ),
        )
    })?;
    let spec_of = |name: &Spanned<String>| {
        experiment.param(name.get_ref()).ok_or_else(|| {
            at(
                src,
                name,
                format!(
                    "`{}` has no parameter `{}`{}",
                    experiment.name,
                    name.get_ref(),
                    suggestion(name.get_ref(), experiment.params.iter().map(|p| p.name))
                ),
            )
        })
    };

    let mut given: BTreeMap<&'static str, Value> = BTreeMap::new();
    for (name, v) in &raw.params {
        let spec = spec_of(name)?;
        let parsed = value(v.get_ref(), spec.kind).map_err(|m| at(src, v, format!("params.{}: {m}", spec.name)))?;
        given.insert(spec.name, parsed);
    }

    let mut axes = Vec::new();
    for a in &raw.grid {
        let spec = spec_of(&a.name)?;
        if !spec.kind.sweepable() {
            return Err(at(src, &a.name, format!("`{}` cannot be swept", spec.name)));
        }
        if given.contains_key(spec.name) {
            return Err(at(src, &a.name, format!("`{}` is both fixed in [params] and swept", spec.name)));
        }
        if axes.iter().any(|x: &Axis| x.spec.name == spec.name) {
            return Err(at(src, &a.name, format!("`{}` is swept twice", spec.name)));
        }
        let start = scalar(a.start.get_ref(), spec.kind).map_err(|m| at(src, &a.start, format!("grid.start: {m}")))?;
        let stop = scalar(a.stop.get_ref(), spec.kind).map_err(|m| at(src, &a.stop, format!("grid.stop: {m}")))?;
        let count = *a.count.get_ref();
        if count < 2 {
            return Err(at(src, &a.count, format!("grid.count must be at least 2, got {count}")));
        }
        let scale = match a.scale.as_ref().map(|s| s.get_ref().as_str()) {
            None | Some("linear") => Scale::Linear,
            Some("log") => Scale::Log,
            Some(other) => {
                return Err(at(
                    src,
                    a.scale.as_ref().unwrap(),
                    format!("grid.scale `{other}` is not one of linear, log"),
                ))
            }
        };
        if scale == Scale::Log && !(start > 0.0 && stop > 0.0) {
            return Err(at(src, &a.name, "a log axis needs positive start and stop"));
        }
        axes.push(Axis {
            spec,
            values: axis_values(start, stop, count as usize, scale),
        });
    }

    let swept = |name: &str| axes.iter().any(|a| a.spec.name == name);
    let mut fixed = BTreeMap::new();
    for spec in experiment.params {
        if let Some(v) = given.get(spec.name) {
            fixed.insert(spec.name, *v);
        } else if let Fallback::Default(v) = spec.fallback {
            if !swept(spec.name) {
                fixed.insert(spec.name, v);
            }
        } else if spec.fallback == Fallback::Required && !swept(spec.name) {
            return Err(CliError::Config(format!(
                "`{}` requires parameter `{}` ({}) in [params] or [[grid]]",
                experiment.name,
                spec.name,
                spec.kind.describe()
            )));
        }
    }
    for rule in experiment.conditions {
        if fixed.get(rule.when) == Some(&Value::Choice(rule.equals)) {
            for name in rule.require {
                if !fixed.contains_key(name) && !swept(name) {
                    return Err(CliError::Config(format!(
                        "`{}` with {} = \"{}\" requires parameter `{name}`",
                        experiment.name, rule.when, rule.equals
                    )));
                }
            }
        }
    }
    if let Some(name) = experiment.sweep_required {
        if !swept(name) {
            return Err(CliError::Config(format!(
                "`{}` needs a [[grid]] axis named `{name}`",
                experiment.name
            )));
        }
    }

    let (output_path, format) = match raw.output {
        Some(o) => {
            let format = match &o.format {
                None => None,
                Some(f) => Some(
                    f.get_ref()
                        .parse::<Format>()
                        .map_err(|m| at(src, f, format!("output.format: {m}")))?,
                ),
            };
            (o.path, format)
        }
        None => (None, None),
    };

    Ok(Config {
        experiment,
        fixed,
        axes,
        output_path,
        format,
        source: src.to_string(),
    })
}

impl Config {
    /// Cartesian product of the axes in row-major order (last axis fastest).
    pub fn points(&self) -> Vec<Point> {
        let total: usize = self.axes.iter().map(|a| a.values.len()).product();
        (0..total)
            .map(|mut index| {
                let mut values = self.fixed.clone();
                for axis in self.axes.iter().rev() {
                    let n = axis.values.len();
                    values.insert(axis.spec.name, Value::Num(axis.values[index % n]));
                    index /= n;
                }
                Point { values }
            })
            .collect()
    }
}
