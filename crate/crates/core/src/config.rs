//! Job configuration: JSON parsing with field-path errors and a canonical
//! serialization.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde_json::{json, Map, Value};

use crate::beta::{BetaSpec, Side};
use crate::error::{Error, Result};
use crate::symbolic::{EventuallyPeriodicSeq, Word};
use crate::transfer::{Potential, PowerOptions};
use crate::zerotemp::{TemperatureGrid, ZeroTempOptions};

pub const DEFAULT_MAX_DIGITS: usize = 64;
pub const DEFAULT_MAX_PERIOD: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub enum BetaMode {
    Value { value: f64, max_digits: usize },
    Digits(EventuallyPeriodicSeq),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PotentialConfig {
    pub depth: usize,
    pub table: BTreeMap<Word, f64>,
    pub theta: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct JobConfig {
    pub beta: BetaMode,
    pub potential: PotentialConfig,
    pub depth: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub t_grid: TemperatureGrid,
    pub seed: u64,
    pub max_period: usize,
    pub output: Option<PathBuf>,
}

fn schema(path: &str, message: impl Into<String>) -> Error {
    Error::Schema {
        path: path.to_string(),
        message: message.into(),
    }
}

fn object<'a>(v: &'a Value, path: &str, allowed: &[&str]) -> Result<&'a Map<String, Value>> {
    let obj = v.as_object().ok_or_else(|| schema(path, "expected an object"))?;
    for key in obj.keys() {
        if !allowed.contains(&key.as_str()) {
            let p = if path == "$" { key.clone() } else { format!("{path}.{key}") };
            return Err(schema(&p, "unknown field"));
        }
    }
    Ok(obj)
}

fn number(v: &Value, path: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| schema(path, "expected a number"))
}

fn count(v: &Value, path: &str) -> Result<usize> {
    v.as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| schema(path, "expected a non-negative integer"))
}

fn positive(v: f64, path: &str) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(schema(path, "expected a positive number"))
    }
}

impl JobConfig {
    /// Schema validation only; see [`parse_config`] for the admissibility pass.
    pub fn from_json(v: &Value) -> Result<Self> {
        let root = object(
            v,
            "$",
            &["beta", "potential", "depth", "tol", "max_iter", "t_grid", "seed", "max_period", "output"],
        )?;

        let b = root.get("beta").ok_or_else(|| schema("beta", "missing"))?;
        let b = object(b, "beta", &["value", "digits", "max_digits"])?;
        let beta = match (b.get("value"), b.get("digits")) {
            (Some(_), Some(_)) => return Err(schema("beta", "give exactly one of value and digits")),
            (None, None) => return Err(schema("beta", "one of value and digits is required")),
            (Some(v), None) => BetaMode::Value {
                value: number(v, "beta.value")?,
                max_digits: match b.get("max_digits") {
                    Some(n) => count(n, "beta.max_digits")?,
                    None => DEFAULT_MAX_DIGITS,
                },
            },
            (None, Some(d)) => {
                if b.contains_key("max_digits") {
                    return Err(schema("beta.max_digits", "only meaningful with beta.value"));
                }
                let s = d.as_str().ok_or_else(|| schema("beta.digits", "expected a string"))?;
                BetaMode::Digits(s.parse().map_err(|e: Error| schema("beta.digits", e.to_string()))?)
            }
        };

        let p = root.get("potential").ok_or_else(|| schema("potential", "missing"))?;
        let p = object(p, "potential", &["depth", "table", "theta"])?;
        let pdepth = count(p.get("depth").ok_or_else(|| schema("potential.depth", "missing"))?, "potential.depth")?;
        if pdepth == 0 {
            return Err(schema("potential.depth", "must be at least 1"));
        }
        let t = p.get("table").ok_or_else(|| schema("potential.table", "missing"))?;
        let t = t.as_object().ok_or_else(|| schema("potential.table", "expected an object"))?;
        let mut table = BTreeMap::new();
        for (key, val) in t {
            let path = format!("potential.table.{key}");
            let w: Word = key.parse().map_err(|e: Error| schema(&path, e.to_string()))?;
            table.insert(w, number(val, &path)?);
        }
        let theta = match p.get("theta") {
            Some(v) => positive(number(v, "potential.theta")?, "potential.theta")?,
            None => 1.0,
        };

        let depth = match root.get("depth") {
            Some(v) => count(v, "depth")?,
            None => pdepth,
        };
        if depth < pdepth {
            return Err(schema("depth", "must be at least potential.depth"));
        }
        let tol = match root.get("tol") {
            Some(v) => positive(number(v, "tol")?, "tol")?,
            None => PowerOptions::default().tol,
        };
        let max_iter = match root.get("max_iter") {
            Some(v) => count(v, "max_iter")?,
            None => PowerOptions::default().max_iter,
        };
        let t_grid = match root.get("t_grid") {
            Some(Value::String(s)) => s.parse().map_err(|e: Error| schema("t_grid", e.to_string()))?,
            Some(Value::Array(items)) => TemperatureGrid::new(
                items
                    .iter()
                    .enumerate()
                    .map(|(i, x)| number(x, &format!("t_grid[{i}]")))
                    .collect::<Result<_>>()?,
            )
            .map_err(|e| schema("t_grid", e.to_string()))?,
            Some(_) => return Err(schema("t_grid", "expected a string or an array of numbers")),
            None => TemperatureGrid::default(),
        };
        let seed = match root.get("seed") {
            Some(v) => v.as_u64().ok_or_else(|| schema("seed", "expected a non-negative integer"))?,
            None => 0,
        };
        let max_period = match root.get("max_period") {
            Some(v) => count(v, "max_period")?,
            None => DEFAULT_MAX_PERIOD,
        };
        let output = match root.get("output") {
            Some(Value::String(s)) => Some(PathBuf::from(s)),
            Some(_) => return Err(schema("output", "expected a string")),
            None => None,
        };
        Ok(JobConfig {
            beta,
            potential: PotentialConfig {
                depth: pdepth,
                table,
                theta,
            },
            depth,
            tol,
            max_iter,
            t_grid,
            seed,
            max_period,
            output,
        })
    }

    /// Canonical form: every field explicit, keys sorted.
    pub fn to_json(&self) -> Value {
        let beta = match &self.beta {
            BetaMode::Value { value, max_digits } => json!({ "value": value, "max_digits": max_digits }),
            BetaMode::Digits(d) => json!({ "digits": d.to_string() }),
        };
        let table: Map<String, Value> = self
            .potential
            .table
            .iter()
            .map(|(w, v)| (w.to_string(), json!(v)))
            .collect();
        let mut v = json!({
            "beta": beta,
            "potential": {
                "depth": self.potential.depth,
                "table": table,
                "theta": self.potential.theta,
            },
            "depth": self.depth,
            "tol": self.tol,
            "max_iter": self.max_iter,
            "t_grid": self.t_grid.values(),
            "seed": self.seed,
            "max_period": self.max_period,
        });
        if let Some(out) = &self.output {
            v["output"] = json!(out.to_string_lossy());
        }
        v
    }

    pub fn to_canonical_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("config serializes")
    }

    pub fn spec(&self) -> Result<BetaSpec> {
        match &self.beta {
            BetaMode::Value { value, max_digits } => BetaSpec::from_value(*value, *max_digits),
            BetaMode::Digits(d) => BetaSpec::from_digits(d),
        }
    }

    pub fn build(&self) -> Result<(BetaSpec, Potential)> {
        let spec = self.spec()?;
        let p = &self.potential;
        let a = Potential::from_table(&spec, Side::Forward, p.depth, &p.table, p.theta)?;
        Ok((spec, a))
    }

    pub fn power_options(&self) -> PowerOptions {
        PowerOptions {
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }

    pub fn zero_temp_options(&self) -> ZeroTempOptions {
        ZeroTempOptions {
            power: self.power_options(),
            ..ZeroTempOptions::default()
        }
    }
}

/// Parse, validate the schema and check every table key against the β-shift.
pub fn parse_config(text: &str) -> Result<JobConfig> {
    let v: Value = serde_json::from_str(text).map_err(|e| schema("$", e.to_string()))?;
    let cfg = JobConfig::from_json(&v)?;
    cfg.build()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOLDEN: &str = r#"{
        "beta": {"digits": "(10)"},
        "potential": {"depth": 2, "table": {"00": 0.0, "01": -1.0, "10": 0.5}},
        "depth": 4,
        "t_grid": "2:64:geometric",
        "seed": 3
    }"#;

    #[test]
    fn golden_sample_parses() {
        let cfg = parse_config(GOLDEN).unwrap();
        assert_eq!(cfg.potential.table.len(), 3);
        assert_eq!(cfg.depth, 4);
        assert_eq!(cfg.t_grid.values(), &[2.0, 4.0, 8.0, 16.0, 32.0, 64.0]);
        let (spec, a) = cfg.build().unwrap();
        assert_eq!(spec.alphabet_top(), 1);
        assert_eq!(a.eval(&[1, 0]).unwrap(), 0.5);
    }

    #[test]
    fn inadmissible_key_is_named() {
        let text = GOLDEN.replace(r#""10": 0.5"#, r#""10": 0.5, "11": 2.0"#);
        assert_eq!(parse_config(&text).unwrap_err(), Error::InadmissibleTableKey("11".into()));
        assert_eq!(parse_config(&text).unwrap_err().exit_code(), 1);
    }

    #[test]
    fn schema_errors_carry_paths() {
        let both = GOLDEN.replace(r#"{"digits": "(10)"}"#, r#"{"digits": "(10)", "value": 1.6}"#);
        assert!(matches!(parse_config(&both), Err(Error::Schema { path, .. }) if path == "beta"));
        let bad = GOLDEN.replace("0.5", "\"x\"");
        assert!(matches!(parse_config(&bad), Err(Error::Schema { path, .. }) if path == "potential.table.10"));
        let extra = GOLDEN.replace("\"seed\": 3", "\"seed\": 3, \"colour\": 1");
        assert!(matches!(parse_config(&extra), Err(Error::Schema { path, .. }) if path == "colour"));
        let shallow = GOLDEN.replace("\"depth\": 4", "\"depth\": 1");
        assert!(matches!(parse_config(&shallow), Err(Error::Schema { path, .. }) if path == "depth"));
        assert!(matches!(parse_config("{"), Err(Error::Schema { .. })));
        let missing = GOLDEN.replace(r#", "10": 0.5"#, "");
        assert!(matches!(parse_config(&missing), Err(Error::MissingTableKey(_))));
    }

    #[test]
    fn value_mode() {
        let text = GOLDEN.replace(r#"{"digits": "(10)"}"#, r#"{"value": 1.6180339887498949}"#);
        let cfg = parse_config(&text).unwrap();
        assert!(matches!(cfg.beta, BetaMode::Value { max_digits: DEFAULT_MAX_DIGITS, .. }));
        assert!((cfg.spec().unwrap().beta() - 1.618033988749895).abs() < 1e-15);
    }

    #[test]
    fn canonical_round_trip() {
        let cfg = parse_config(GOLDEN).unwrap();
        let text = cfg.to_canonical_string();
        let again = parse_config(&text).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.to_canonical_string(), text);
    }
}
