//! Run configuration: TOML with `[system]`, `[disorder]` and `[run]` tables.
//!
//! Rates may carry a unit suffix (`"8Gamma"`, `"20g0"`, `"0.7071g"`) and
//! angles a `pi` suffix (`"0.3pi"`, `"3pi/2"`). Command-line overrides are
//! inserted into the same tables before resolution, so they follow
//! exactly the same rules as file entries.

use std::f64::consts::PI;
use std::path::Path;

use serde::Serialize;
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::params::{DisorderSpec, Preset, SystemParams};

const SYSTEM_KEYS: &[&str] = &[
    "g",
    "kappa",
    "gamma0",
    "Gamma",
    "J0",
    "phi_dim",
    "n_atoms",
    "varphi",
    "phi1",
    "detunings",
];
const DISORDER_KEYS: &[&str] = &[
    "position_frac",
    "coupling_frac",
    "frequency_halfwidth",
    "seed",
    "n_realizations",
    "combined",
];
const RUN_KEYS: &[&str] = &[
    "preset",
    "grid",
    "t_end",
    "points",
    "jobs",
    "observable",
    "delta",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Unit {
    None,
    G0,
    Gamma,
    G,
    Pi,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Quantity {
    value: f64,
    unit: Unit,
}

fn parse_quantity(text: &str) -> Result<Quantity> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Config(format!("cannot parse quantity `{text}`"));
    let number = |t: &str| -> Result<f64> {
        match t {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => t.trim_end_matches('*').parse::<f64>().map_err(|_| bad()),
        }
    };
    if let Some(pos) = s.find("pi") {
        let coef = number(s[..pos].trim_end_matches('*'))?;
        let rest = &s[pos + 2..];
        let denom = match rest.strip_prefix('/') {
            Some(d) => d.parse::<f64>().map_err(|_| bad())?,
            None if rest.is_empty() => 1.0,
            None => return Err(bad()),
        };
        return Ok(Quantity {
            value: coef / denom,
            unit: Unit::Pi,
        });
    }
    for (suffix, unit) in [("Gamma", Unit::Gamma), ("g0", Unit::G0), ("g", Unit::G)] {
        if let Some(head) = s.strip_suffix(suffix) {
            return Ok(Quantity {
                value: number(head)?,
                unit,
            });
        }
    }
    Ok(Quantity {
        value: s.parse::<f64>().map_err(|_| bad())?,
        unit: Unit::None,
    })
}

fn value_quantity(key: &str, v: &Value) -> Result<Quantity> {
    match v {
        Value::Integer(i) => Ok(Quantity {
            value: *i as f64,
            unit: Unit::None,
        }),
        Value::Float(f) => Ok(Quantity {
            value: *f,
            unit: Unit::None,
        }),
        Value::String(s) => parse_quantity(s),
        other => Err(Error::Config(format!(
            "`{key}` must be a number or string, got {other}"
        ))),
    }
}

/// Unit scales available once the base rates are known.
#[derive(Debug, Clone, Copy)]
struct Units {
    g0: Option<f64>,
    gamma: Option<f64>,
    g: Option<f64>,
}

impl Units {
    fn rate(&self, key: &str, q: Quantity) -> Result<f64> {
        let scale = match q.unit {
            Unit::None => Some(1.0),
            Unit::G0 => self.g0,
            Unit::Gamma => self.gamma,
            Unit::G => self.g,
            Unit::Pi => return Err(Error::Config(format!("`{key}` is a rate, not an angle"))),
        };
        scale
            .map(|s| q.value * s)
            .ok_or_else(|| Error::Config(format!("unit of `{key}` refers to an unresolved rate")))
    }

    fn angle(key: &str, q: Quantity) -> Result<f64> {
        match q.unit {
            Unit::None => Ok(q.value),
            Unit::Pi => Ok(q.value * PI),
            _ => Err(Error::Config(format!(
                "`{key}` is an angle; use radians or a `pi` suffix"
            ))),
        }
    }
}

/// Sweep grid `axis=start:stop:count`, inclusive of both ends.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSpec {
    pub axis: String,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        crate::response::linspace(self.start, self.stop, self.count)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunSettings {
    pub grids: Vec<GridSpec>,
    pub t_end: Option<f64>,
    pub points: Option<usize>,
    pub jobs: Option<usize>,
    pub observable: Option<String>,
    /// Detuning grid, stored as a grid spec on axis `delta`.
    pub delta: Option<GridSpec>,
}

impl RunSettings {
    pub fn grid(&self, axis: &str) -> Option<&GridSpec> {
        self.grids.iter().find(|g| g.axis == axis)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedConfig {
    pub preset: Option<String>,
    pub system: SystemParams,
    pub disorder: DisorderSpec,
    pub run: RunSettings,
}

/// Unresolved configuration tables.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    system: Table,
    disorder: Table,
    run: Table,
}

fn check_keys(section: &str, table: &Table, allowed: &[&str]) -> Result<()> {
    for k in table.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(Error::Config(format!("unknown key `{k}` in [{section}]")));
        }
    }
    Ok(())
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut root: Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        let mut take = |name: &str| -> Result<Table> {
            match root.remove(name) {
                None => Ok(Table::new()),
                Some(Value::Table(t)) => Ok(t),
                Some(_) => Err(Error::Config(format!("`{name}` must be a table"))),
            }
        };
        let cfg = Self {
            system: take("system")?,
            disorder: take("disorder")?,
            run: take("run")?,
        };
        if let Some(k) = root.keys().next() {
            return Err(Error::Config(format!("unknown top-level entry `{k}`")));
        }
        check_keys("system", &cfg.system, SYSTEM_KEYS)?;
        check_keys("disorder", &cfg.disorder, DISORDER_KEYS)?;
        check_keys("run", &cfg.run, RUN_KEYS)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Overrides `section.key` with a textual value.
    pub fn set(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        let (table, allowed) = match section {
            "system" => (&mut self.system, SYSTEM_KEYS),
            "disorder" => (&mut self.disorder, DISORDER_KEYS),
            "run" => (&mut self.run, RUN_KEYS),
            other => return Err(Error::Config(format!("unknown section `{other}`"))),
        };
        if !allowed.contains(&key) {
            return Err(Error::Config(format!("unknown key `{key}` in [{section}]")));
        }
        table.insert(key.to_string(), Value::String(value.to_string()));
        Ok(())
    }

    /// Appends a grid spec to `[run].grid`.
    pub fn add_grid(&mut self, spec: &str) {
        let entry = self
            .run
            .entry("grid")
            .or_insert_with(|| Value::Array(Vec::new()));
        if let Value::String(s) = entry {
            *entry = Value::Array(vec![Value::String(s.clone())]);
        }
        if let Value::Array(a) = entry {
            a.push(Value::String(spec.to_string()));
        }
    }

    pub fn resolve(&self) -> Result<ResolvedConfig> {
        let preset_name = match self.run.get("preset") {
            None => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(_) => return Err(Error::Config("`preset` must be a string".into())),
        };
        let preset = preset_name.as_deref().map(Preset::from_name).transpose()?;
        let mut p = preset.unwrap_or(Preset::Fig2).params();
        let sys = &self.system;
        let q = |k: &str| sys.get(k).map(|v| value_quantity(k, v)).transpose();

        // base rates first: gamma0 and Gamma may be stated in each other's units
        let (qg0, qgw) = (q("gamma0")?, q("Gamma")?);
        let plain = |x: Option<Quantity>| x.filter(|x| matches!(x.unit, Unit::None | Unit::G0));
        if let Some(x) = plain(qg0) {
            p.gamma0 = x.value;
        }
        let u = Units {
            g0: Some(p.gamma0),
            gamma: None,
            g: None,
        };
        if let Some(x) = qgw {
            if x.unit != Unit::Gamma {
                p.gamma_wg = u.rate("Gamma", x)?;
            } else if x.value != 1.0 {
                return Err(Error::Config(
                    "`Gamma` cannot be given in units of itself".into(),
                ));
            }
        }
        if let Some(x) = qg0 {
            if !matches!(x.unit, Unit::None | Unit::G0) {
                let u = Units {
                    g0: None,
                    gamma: Some(p.gamma_wg),
                    g: None,
                };
                p.gamma0 = u.rate("gamma0", x)?;
            }
        }
        let mut u = Units {
            g0: Some(p.gamma0),
            gamma: Some(p.gamma_wg),
            g: None,
        };
        if let Some(x) = q("g")? {
            p.g = u.rate("g", x)?;
        }
        u.g = Some(p.g);
        if let Some(x) = q("kappa")? {
            p.kappa = u.rate("kappa", x)?;
        }
        if let Some(x) = q("J0")? {
            p.j0 = u.rate("J0", x)?;
        }
        for (key, slot) in [
            ("phi_dim", &mut p.phi_dim),
            ("varphi", &mut p.varphi),
            ("phi1", &mut p.phi1),
        ] {
            if let Some(x) = q(key)? {
                *slot = Units::angle(key, x)?;
            }
        }
        if let Some(v) = sys.get("n_atoms") {
            let n = integer("n_atoms", v)?;
            p = p.with_n_atoms(n as usize);
        }
        if let Some(v) = sys.get("detunings") {
            let arr = match v {
                Value::Array(a) => a.clone(),
                Value::String(s) => s
                    .split(',')
                    .filter(|t| !t.trim().is_empty())
                    .map(|t| Value::String(t.trim().to_string()))
                    .collect(),
                _ => return Err(Error::Config("`detunings` must be a list".into())),
            };
            p.detunings = arr
                .iter()
                .map(|x| u.rate("detunings", value_quantity("detunings", x)?))
                .collect::<Result<_>>()?;
        }
        p.validate()?;

        let mut d = DisorderSpec::default();
        let dis = &self.disorder;
        for (key, slot) in [
            ("position_frac", &mut d.position_frac),
            ("coupling_frac", &mut d.coupling_frac),
        ] {
            if let Some(v) = dis.get(key) {
                *slot = Units {
                    g0: None,
                    gamma: None,
                    g: None,
                }
                .rate(key, value_quantity(key, v)?)?;
            }
        }
        if let Some(v) = dis.get("frequency_halfwidth") {
            d.frequency_halfwidth = u.rate(
                "frequency_halfwidth",
                value_quantity("frequency_halfwidth", v)?,
            )?;
        }
        if let Some(v) = dis.get("seed") {
            d.seed = integer("seed", v)?;
        }
        if let Some(v) = dis.get("n_realizations") {
            d.n_realizations = integer("n_realizations", v)? as usize;
        }
        if let Some(v) = dis.get("combined") {
            d.combined = boolean("combined", v)?;
        }
        d.validate()?;

        let mut run = RunSettings::default();
        let r = &self.run;
        if let Some(v) = r.get("grid") {
            let specs: Vec<String> = match v {
                Value::String(s) => vec![s.clone()],
                Value::Array(a) => a
                    .iter()
                    .map(|x| match x {
                        Value::String(s) => Ok(s.clone()),
                        _ => Err(Error::Config("grid entries must be strings".into())),
                    })
                    .collect::<Result<_>>()?,
                _ => return Err(Error::Config("`grid` must be a string or list".into())),
            };
            for s in specs {
                let g = parse_grid(&s, &p)?;
                // later entries override earlier ones on the same axis
                run.grids.retain(|x| x.axis != g.axis);
                run.grids.push(g);
            }
        }
        if let Some(v) = r.get("delta") {
            let s = match v {
                Value::String(s) => s.clone(),
                _ => {
                    return Err(Error::Config(
                        "`delta` must be a `start:stop:count` string".into(),
                    ))
                }
            };
            let g = parse_grid(&format!("delta={}", s.trim_start_matches("delta=")), &p)?;
            run.delta = Some(g);
        }
        if let Some(v) = r.get("t_end") {
            run.t_end = Some(u.rate_inverse("t_end", value_quantity("t_end", v)?)?);
        }
        if let Some(v) = r.get("points") {
            run.points = Some(integer("points", v)? as usize);
        }
        if let Some(v) = r.get("jobs") {
            run.jobs = Some(integer("jobs", v)? as usize);
        }
        if let Some(v) = r.get("observable") {
            run.observable = Some(match v {
                Value::String(s) => s.clone(),
                _ => return Err(Error::Config("`observable` must be a string".into())),
            });
        }
        Ok(ResolvedConfig {
            preset: preset.map(|x| x.name().to_string()),
            system: p,
            disorder: d,
            run,
        })
    }
}

impl Units {
    /// Times are plain numbers in the inverse of the output unit.
    fn rate_inverse(&self, key: &str, q: Quantity) -> Result<f64> {
        match q.unit {
            Unit::None => Ok(q.value),
            _ => Err(Error::Config(format!("`{key}` must be a plain number"))),
        }
    }
}

fn integer(key: &str, v: &Value) -> Result<u64> {
    let bad = || Error::Config(format!("`{key}` must be a non-negative integer"));
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        Value::String(s) => s.trim().parse().map_err(|_| bad()),
        _ => Err(bad()),
    }
}

fn boolean(key: &str, v: &Value) -> Result<bool> {
    match v {
        Value::Boolean(b) => Ok(*b),
        Value::String(s) => s
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("`{key}` must be true or false"))),
        _ => Err(Error::Config(format!("`{key}` must be true or false"))),
    }
}

const ANGLE_AXES: &[&str] = &["varphi", "phi_dim", "phi1"];
const RATE_AXES: &[&str] = &["J0", "g", "kappa", "gamma0", "Gamma", "delta", "omega"];
const PLAIN_AXES: &[&str] = &["N", "n_atoms", "d"];

/// Parses `axis=start:stop:count`; units resolve against `params`.
pub fn parse_grid(spec: &str, params: &SystemParams) -> Result<GridSpec> {
    let bad = |why: &str| Error::Config(format!("bad grid `{spec}`: {why}"));
    let (axis, range) = spec
        .split_once('=')
        .ok_or_else(|| bad("expected axis=start:stop:count"))?;
    let axis = match axis.trim() {
        "phi" => "phi_dim",
        other => other,
    };
    let parts: Vec<&str> = range.split(':').collect();
    if parts.len() != 3 {
        return Err(bad("expected start:stop:count"));
    }
    let count: usize = parts[2]
        .trim()
        .parse()
        .map_err(|_| bad("count must be an integer"))?;
    if count == 0 {
        return Err(bad("count must be positive"));
    }
    let u = Units {
        g0: Some(params.gamma0),
        gamma: Some(params.gamma_wg),
        g: Some(params.g),
    };
    let conv = |t: &str| -> Result<f64> {
        let q = parse_quantity(t)?;
        if ANGLE_AXES.contains(&axis) {
            Units::angle(axis, q)
        } else if RATE_AXES.contains(&axis) {
            u.rate(axis, q)
        } else if PLAIN_AXES.contains(&axis) {
            match q.unit {
                Unit::None => Ok(q.value),
                _ => Err(bad("this axis takes plain numbers")),
            }
        } else {
            Err(bad("unknown axis"))
        }
    };
    let start = conv(parts[0])?;
    let stop = conv(parts[1])?;
    if !start.is_finite() || !stop.is_finite() {
        return Err(bad("bounds must be finite"));
    }
    Ok(GridSpec {
        axis: axis.to_string(),
        start,
        stop,
        count,
    })
}
