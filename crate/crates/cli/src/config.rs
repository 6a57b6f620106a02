//! Run configuration: a JSON file overlaid by command-line flags.

use std::path::{Path, PathBuf};

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Parameters of one run. Unset fields take the command's defaults, and
/// the resolved values are what gets echoed into every output.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    /// Short form (`sign`, `spike:3`, `constant:2@64`) or the JSON object.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ic: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Spacing of the reported time grid.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub indices: Option<Vec<i64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_range: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_range: Option<[f64; 2]>,
    /// `[n step, t step]`
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regime: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quantity: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refine: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub criteria: Option<Vec<u8>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

macro_rules! overlay_fields {
    ($base:ident, $top:ident; $($f:ident),*) => {
        RunConfig { $($f: $top.$f.or($base.$f)),* }
    };
}

impl RunConfig {
    /// Fields set in `flags` win over `self`.
    pub fn overlay(self, flags: RunConfig) -> RunConfig {
        overlay_fields!(self, flags; command, ic, omega, t_end, dt, report_step, solver, indices, n_range,
            t_range, step, gamma, regime, quantity, target, refine, criteria, format, out)
    }

    /// Reads a config file. Accepts a bare configuration, an output
    /// envelope `{config, report}`, or a CSV/plot file whose first line is
    /// the `# {config, ...}` header.
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        let value: Value = match text.trim_start().strip_prefix('#') {
            Some(rest) => serde_json::from_str(rest.lines().next().unwrap_or("").trim()),
            None => serde_json::from_str(&text),
        }
        .map_err(|e| CliError::usage(format!("config {} is not valid JSON: {e}", path.display())))?;
        let inner = match value.get("config") {
            Some(c) if value.get("report").is_some() || value.get("meta").is_some() => c.clone(),
            _ => value,
        };
        serde_json::from_value(inner).map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

pub fn parse_pair(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split([',', ':']).map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => {
            let a = a.parse::<f64>().map_err(|e| format!("`{a}`: {e}"))?;
            let b = b.parse::<f64>().map_err(|e| format!("`{b}`: {e}"))?;
            if a > b {
                return Err(format!("empty range {a}..{b}"));
            }
            Ok([a, b])
        }
        _ => Err(format!("expected `lo,hi`, got `{s}`")),
    }
}

pub fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse::<T>().map_err(|e| format!("`{p}`: {e}")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win() {
        let file = RunConfig {
            omega: Some(0.5),
            t_end: Some(10.0),
            ..Default::default()
        };
        let flags = RunConfig {
            omega: Some(2.0),
            ..Default::default()
        };
        let eff = file.overlay(flags);
        assert_eq!(eff.omega, Some(2.0));
        assert_eq!(eff.t_end, Some(10.0));
    }

    #[test]
    fn pairs_and_lists() {
        assert_eq!(parse_pair("0,200").unwrap(), [0.0, 200.0]);
        assert_eq!(parse_pair("1:2.5").unwrap(), [1.0, 2.5]);
        assert!(parse_pair("3,1").is_err());
        assert_eq!(parse_list::<i64>("10,20").unwrap(), vec![10, 20]);
        assert!(parse_list::<i64>("1,x").is_err());
    }

    #[test]
    fn time_field_is_capitalized() {
        let c: RunConfig = serde_json::from_str(r#"{"T": 5.0}"#).unwrap();
        assert_eq!(c.t_end, Some(5.0));
        assert!(serde_json::from_str::<RunConfig>(r#"{"bogus": 1}"#).is_err());
    }
}
