//! Experiment configuration: flat `key = value` text or a JSON object, plus
//! `key=value` overrides from the command line.

use std::path::Path;

use crate::channel::{db_to_linear, SystemParams};
use crate::error::{Error, Result};
use crate::optimize::Scheme;
use crate::specfun::QuadratureSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Fig1,
    Fig2,
    Fig3,
    Custom,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Fig1 => "fig1",
            Experiment::Fig2 => "fig2",
            Experiment::Fig3 => "fig3",
            Experiment::Custom => "custom",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fig1" => Some(Experiment::Fig1),
            "fig2" => Some(Experiment::Fig2),
            "fig3" => Some(Experiment::Fig3),
            "custom" => Some(Experiment::Custom),
            _ => None,
        }
    }

    pub(crate) fn index(self) -> u64 {
        match self {
            Experiment::Fig1 => 1,
            Experiment::Fig2 => 2,
            Experiment::Fig3 => 3,
            Experiment::Custom => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    /// Fixed jamming power in dB; produces the three rate curves.
    PmDb,
    /// `sigma_g^2 / sigma_h^2 = sigma_f^2 / sigma_h^2` in dB.
    RatioDb,
    NPorts,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::PmDb => "p_m_db",
            SweepVariable::RatioDb => "ratio_db",
            SweepVariable::NPorts => "n_ports",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "p_m_db" => Some(SweepVariable::PmDb),
            "ratio_db" | "sigma_ratio_db" => Some(SweepVariable::RatioDb),
            "n_ports" => Some(SweepVariable::NPorts),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub experiment: Experiment,
    pub sweep_variable: SweepVariable,
    pub sweep_values: Vec<f64>,
    pub schemes: Vec<Scheme>,
    /// Linear units throughout.
    pub params: SystemParams,
    /// Draws per Monte Carlo estimate; 0 disables the MC columns.
    pub mc_samples: u64,
    pub seed: u64,
    pub quadrature: QuadratureSpec,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        parse_config_str("", &[]).expect("defaults are valid")
    }
}

/// One setting with where it came from.
#[derive(Debug, Clone)]
struct Entry {
    key: String,
    value: String,
    line: Option<usize>,
}

const KEYS: &[&str] = &[
    "p_s_db",
    "p_m_max_db",
    "sigma_ratio_db",
    "ratio_db",
    "sigma_h2",
    "sigma_d2",
    "sigma_m2",
    "delta",
    "n_ports",
    "aperture_w",
    "experiment",
    "mc_samples",
    "seed",
    "sweep_variable",
    "sweep_values",
    "schemes",
];

/// Reads `path` (if given) and applies `overrides` on top.
pub fn parse_config(path: Option<&Path>, overrides: &[String]) -> Result<ExperimentSpec> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| Error::Io {
            path: p.display().to_string(),
            detail: e.to_string(),
        })?,
        None => String::new(),
    };
    parse_config_str(&text, overrides)
}

pub fn parse_config_str(text: &str, overrides: &[String]) -> Result<ExperimentSpec> {
    let mut entries = if text.trim_start().starts_with('{') {
        json_entries(text)?
    } else {
        kv_entries(text)?
    };
    for o in overrides {
        let (k, v) = o.split_once('=').ok_or_else(|| Error::Config {
            key: o.clone(),
            line: None,
            detail: "override must look like key=value".into(),
        })?;
        entries.push(Entry {
            key: k.trim().to_string(),
            value: v.trim().to_string(),
            line: None,
        });
    }
    resolve(&entries)
}

fn kv_entries(text: &str) -> Result<Vec<Entry>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Config {
            key: line.to_string(),
            line: Some(i + 1),
            detail: "expected key = value".into(),
        })?;
        out.push(Entry {
            key: k.trim().to_string(),
            value: v.trim().to_string(),
            line: Some(i + 1),
        });
    }
    Ok(out)
}

fn json_entries(text: &str) -> Result<Vec<Entry>> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Config {
        key: "<json>".into(),
        line: Some(e.line()),
        detail: e.to_string(),
    })?;
    let obj = value.as_object().ok_or_else(|| Error::Config {
        key: "<json>".into(),
        line: None,
        detail: "top level must be an object".into(),
    })?;
    let line_of = |key: &str| {
        let quoted = format!("\"{key}\"");
        text.lines().position(|l| l.contains(&quoted)).map(|i| i + 1)
    };
    let mut out = Vec::new();
    for (k, v) in obj {
        let value = match v {
            serde_json::Value::String(s) => s.clone(),
            serde_json::Value::Number(n) => n.to_string(),
            serde_json::Value::Array(items) => items
                .iter()
                .map(|it| match it {
                    serde_json::Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect::<Vec<_>>()
                .join(","),
            other => other.to_string(),
        };
        out.push(Entry {
            key: k.clone(),
            value,
            line: line_of(k),
        });
    }
    Ok(out)
}

fn bad(e: &Entry, detail: impl Into<String>) -> Error {
    Error::Config {
        key: e.key.clone(),
        line: e.line,
        detail: detail.into(),
    }
}

fn real(e: &Entry) -> Result<f64> {
    match e.value.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(bad(e, format!("`{}` is not a finite number", e.value))),
    }
}

fn integer(e: &Entry) -> Result<u64> {
    e.value
        .parse::<u64>()
        .map_err(|_| bad(e, format!("`{}` is not a nonnegative integer", e.value)))
}

fn positive(e: &Entry) -> Result<f64> {
    let v = real(e)?;
    if v <= 0.0 {
        return Err(bad(e, "must be > 0"));
    }
    Ok(v)
}

/// `a,b,c` or `start:step:stop` (inclusive of `stop` up to rounding).
fn value_list(e: &Entry) -> Result<Vec<f64>> {
    let parts: Vec<&str> = e.value.split(':').collect();
    let values = if parts.len() == 3 {
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(e, format!("`{s}` is not a number")))
        };
        let (start, step, stop) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if step.is_nan() || step <= 0.0 || stop < start {
            return Err(bad(e, "range needs step > 0 and stop >= start"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| start + step * i as f64).collect()
    } else {
        e.value
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| bad(e, format!("`{}` is not a number", s.trim())))
            })
            .collect::<Result<Vec<f64>>>()?
    };
    if values.is_empty() {
        return Err(bad(e, "sweep needs at least one value"));
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(bad(e, "sweep values must be strictly increasing"));
    }
    Ok(values)
}

fn resolve(entries: &[Entry]) -> Result<ExperimentSpec> {
    let mut p_s_db = 20.0;
    let mut p_m_max_db = 30.0;
    let mut ratio_db = -18.0;
    let (mut sigma_h2, mut sigma_d2, mut sigma_m2) = (1.0, 1.0, 1.0);
    let mut delta = 0.05;
    let mut n_ports: u64 = 8;
    let mut aperture_w = 5.0;
    let mut experiment = Experiment::Fig2;
    let mut mc_samples = 0;
    let mut seed = 1;
    let mut sweep_variable: Option<(SweepVariable, &Entry)> = None;
    let mut sweep_values: Option<(Vec<f64>, &Entry)> = None;
    let mut schemes: Option<Vec<Scheme>> = None;
    let mut n_entry: Option<&Entry> = None;

    for e in entries {
        match e.key.as_str() {
            "p_s_db" => p_s_db = real(e)?,
            "p_m_max_db" => p_m_max_db = real(e)?,
            "sigma_ratio_db" | "ratio_db" => ratio_db = real(e)?,
            "sigma_h2" => sigma_h2 = positive(e)?,
            "sigma_d2" => sigma_d2 = positive(e)?,
            "sigma_m2" => sigma_m2 = positive(e)?,
            "delta" => {
                delta = real(e)?;
                if !(delta > 0.0 && delta < 1.0) {
                    return Err(bad(e, "must lie strictly between 0 and 1"));
                }
            }
            "n_ports" => {
                n_ports = integer(e)?;
                if n_ports < 2 {
                    return Err(bad(e, "the fluid antenna needs at least 2 ports"));
                }
                n_entry = Some(e);
            }
            "aperture_w" => aperture_w = positive(e)?,
            "experiment" => {
                experiment = Experiment::parse(&e.value)
                    .ok_or_else(|| bad(e, "expected one of fig1, fig2, fig3, custom"))?
            }
            "mc_samples" => mc_samples = integer(e)?,
            "seed" => seed = integer(e)?,
            "sweep_variable" => {
                let v = SweepVariable::parse(&e.value)
                    .ok_or_else(|| bad(e, "expected one of p_m_db, ratio_db, n_ports"))?;
                sweep_variable = Some((v, e));
            }
            "sweep_values" => sweep_values = Some((value_list(e)?, e)),
            "schemes" => {
                let list = e
                    .value
                    .split(',')
                    .map(|s| Scheme::from_name(s.trim()).ok_or_else(|| bad(e, format!("unknown scheme `{}`", s.trim()))))
                    .collect::<Result<Vec<_>>>()?;
                if list.is_empty() {
                    return Err(bad(e, "need at least one scheme"));
                }
                schemes = Some(list);
            }
            _ => {
                return Err(bad(
                    e,
                    format!("unknown key; expected one of {}", KEYS.join(", ")),
                ))
            }
        }
    }

    let (default_var, default_values): (SweepVariable, Vec<f64>) = match experiment {
        Experiment::Fig1 => (SweepVariable::PmDb, (0..=120).map(|i| 0.25 * i as f64).collect()),
        Experiment::Fig2 => (SweepVariable::RatioDb, (0..=10).map(|i| -20.0 + 2.0 * i as f64).collect()),
        Experiment::Fig3 => (SweepVariable::NPorts, (2..=16).map(|n| n as f64).collect()),
        Experiment::Custom => {
            let (var, var_entry) = sweep_variable.ok_or_else(|| Error::Config {
                key: "sweep_variable".into(),
                line: None,
                detail: "custom experiments must set sweep_variable".into(),
            })?;
            if sweep_values.is_none() {
                return Err(bad(var_entry, "custom experiments must also set sweep_values"));
            }
            (var, Vec::new())
        }
    };
    let var = sweep_variable.map(|(v, _)| v).unwrap_or(default_var);
    let values = match sweep_values {
        Some((v, e)) => {
            if var == SweepVariable::NPorts && v.iter().any(|&n| n.fract() != 0.0 || n < 2.0) {
                return Err(bad(e, "port counts must be integers >= 2"));
            }
            v
        }
        None if var == default_var => default_values,
        None => {
            let (_, e) = sweep_variable.expect("set when differing from default");
            return Err(bad(e, "a non-default sweep_variable needs sweep_values"));
        }
    };

    let params = SystemParams {
        p_s: db_to_linear(p_s_db),
        p_m_max: db_to_linear(p_m_max_db),
        sigma_h2,
        sigma_g2: sigma_h2 * db_to_linear(ratio_db),
        sigma_f2: sigma_h2 * db_to_linear(ratio_db),
        sigma_d2,
        sigma_m2,
        delta,
        n_ports: n_ports as usize,
        aperture_w,
    };
    params.validate().map_err(|err| Error::Config {
        key: n_entry.map(|e| e.key.clone()).unwrap_or_else(|| "params".into()),
        line: None,
        detail: err.to_string(),
    })?;

    Ok(ExperimentSpec {
        experiment,
        sweep_variable: var,
        sweep_values: values,
        schemes: schemes.unwrap_or_else(|| Scheme::ALL.to_vec()),
        params,
        mc_samples,
        seed,
        quadrature: QuadratureSpec::default(),
    })
}
