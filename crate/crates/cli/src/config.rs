//! Scenario configuration: JSON on disk, `--set` overrides, typed view.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use polariton_core::dynamics::InitialProfile;
use polariton_core::params::ReducedSpec;
use polariton_core::spectral::Boundary;
use polariton_core::ParamSpec;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::report::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Scenario {
    Derive,
    Spectrum,
    EvolveRel,
    Evolve2d,
    Analytic,
    Greens,
    Homodyne,
    Figure(Figure),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    F1c,
    F1d,
    F2,
    F4a,
    F4b,
    F5,
    F6,
    F7,
    F8,
    F9,
}

const FIGURES: [(&str, Figure); 10] = [
    ("1c", Figure::F1c),
    ("1d", Figure::F1d),
    ("2", Figure::F2),
    ("4a", Figure::F4a),
    ("4b", Figure::F4b),
    ("5", Figure::F5),
    ("6", Figure::F6),
    ("7", Figure::F7),
    ("8", Figure::F8),
    ("9", Figure::F9),
];

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "derive" => Scenario::Derive,
            "spectrum" => Scenario::Spectrum,
            "evolve-rel" => Scenario::EvolveRel,
            "evolve-2d" => Scenario::Evolve2d,
            "analytic" => Scenario::Analytic,
            "greens" => Scenario::Greens,
            "homodyne" => Scenario::Homodyne,
            _ => {
                let fig = s.strip_prefix("figure:").and_then(|f| FIGURES.iter().find(|(n, _)| *n == f));
                match fig {
                    Some(&(_, f)) => Scenario::Figure(f),
                    None => return Err(format!("unknown scenario `{s}`")),
                }
            }
        })
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Scenario::Derive => "derive",
            Scenario::Spectrum => "spectrum",
            Scenario::EvolveRel => "evolve-rel",
            Scenario::Evolve2d => "evolve-2d",
            Scenario::Analytic => "analytic",
            Scenario::Greens => "greens",
            Scenario::Homodyne => "homodyne",
            Scenario::Figure(fig) => {
                let name = FIGURES.iter().find(|(_, g)| g == fig).map(|(n, _)| *n).unwrap_or("?");
                return write!(f, "figure:{name}");
            }
        };
        f.write_str(name)
    }
}

impl TryFrom<String> for Scenario {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<Scenario> for String {
    fn from(s: Scenario) -> String {
        s.to_string()
    }
}

impl Scenario {
    /// Parameters used when the config gives none. Only figures have them.
    pub fn preset_params(&self) -> Option<ParamSpec> {
        let reduced = |xi, delta_over_gamma, g_over_omega| {
            ParamSpec::Reduced(ReducedSpec { xi, delta_over_gamma, g_over_omega, omega_over_gamma: 1.0 })
        };
        let Scenario::Figure(fig) = self else { return None };
        Some(match fig {
            Figure::F1c => reduced(0.2, -4.0, 1.5),
            Figure::F1d => reduced(2.0, -4.0, 1.5),
            Figure::F2 => reduced(0.2, -8.0, 100.0),
            Figure::F4a | Figure::F4b => reduced(0.2, -12.0, 100.0),
            Figure::F5 => reduced(0.2, -4.0, 100.0),
            Figure::F6 => reduced(0.2, -4.0, 20.0),
            Figure::F7 | Figure::F8 | Figure::F9 => reduced(0.2, -12.0, 100.0),
        })
    }
}

/// Which integrator produces a long `EE(0, t)` series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    /// Closed-form pseudopotential solution.
    Analytic,
    /// Crank-Nicolson on the effective scalar equation.
    Scalar,
    /// Full four-component relative-frame evolution.
    Relative,
}

/// Grid and time-step overrides. Every field is optional; each scenario
/// documents its own defaults and ignores fields it has no use for.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    pub length: Option<f64>,
    pub n_points: Option<usize>,
    pub boundary: Option<Boundary>,
    pub dt: Option<f64>,
    pub t_max: Option<f64>,
    /// Snapshot or evaluation times.
    pub times: Option<Vec<f64>>,
    pub series_stride: Option<usize>,
    pub initial: Option<InitialProfile>,
    /// Output restricted to `|r| ≤ r_max`.
    pub r_max: Option<f64>,
    pub r_points: Option<usize>,
    pub t_points: Option<usize>,
    /// Write every `output_stride`-th grid point.
    pub output_stride: Option<usize>,
    pub xi_list: Option<Vec<f64>>,
    /// Panel detunings `Δ/γ` of the two-panel time-domain figures.
    pub detunings: Option<Vec<f64>>,
    pub medium_start: Option<f64>,
    pub ramp_width: Option<f64>,
    pub pulse_width: Option<f64>,
    pub pulse_center: Option<f64>,
    pub solver: Option<Solver>,
    pub omega_min: Option<f64>,
    pub omega_max: Option<f64>,
    pub omega_points: Option<usize>,
    pub fit_t_min: Option<f64>,
    pub max_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Axis name to value list. Bare names refer to `params.<name>`,
    /// dotted names are paths from the config root.
    pub axes: BTreeMap<String, Vec<Value>>,
    #[serde(default = "default_cap")]
    pub max_points: usize,
    /// Point indices that fail on purpose, for checking that a failure
    /// stays confined to its point.
    #[serde(default)]
    pub fail_points: Vec<usize>,
}

fn default_cap() -> usize {
    256
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    #[serde(default)]
    pub params: Option<ParamSpec>,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
}

impl ScenarioConfig {
    pub fn from_value(v: &Value) -> Result<Self, Failure> {
        ScenarioConfig::deserialize(v).map_err(|e| Failure::config(format!("config: {e}")))
    }

    pub fn params(&self) -> Result<ParamSpec, Failure> {
        self.params
            .or_else(|| self.scenario.preset_params())
            .ok_or_else(|| Failure::config(format!("scenario {} needs a `params` block", self.scenario)))
    }
}

pub fn load(path: Option<&Path>) -> Result<Value, Failure> {
    let Some(path) = path else { return Ok(Value::Object(Map::new())) };
    let text = std::fs::read_to_string(path).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    if !v.is_object() {
        return Err(Failure::config("config root must be a JSON object"));
    }
    Ok(v)
}

/// Applies a `key=value` override. Keys are dotted paths; values are parsed
/// as JSON and fall back to a plain string.
pub fn apply_set(root: &mut Value, assignment: &str) -> Result<(), Failure> {
    let (key, raw) =
        assignment.split_once('=').ok_or_else(|| Failure::config(format!("--set expects key=value, got `{assignment}`")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    set_path(root, key, value)
}

pub fn set_path(root: &mut Value, key: &str, value: Value) -> Result<(), Failure> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Failure::config(format!("malformed key `{key}`")));
    }
    let mut node = root;
    for part in &parts[..parts.len() - 1] {
        let map = node.as_object_mut().ok_or_else(|| Failure::config(format!("`{key}`: `{part}` is not inside an object")))?;
        node = map.entry(part.to_string()).or_insert_with(|| Value::Object(Map::new()));
    }
    let map = node.as_object_mut().ok_or_else(|| Failure::config(format!("`{key}` does not address an object field")))?;
    map.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Axis names to config paths.
pub fn axis_path(name: &str) -> String {
    if name.contains('.') {
        name.to_string()
    } else {
        format!("params.{name}")
    }
}

/// Fills in the preset parameters of figure scenarios so that overrides
/// like `params.xi=0.3` have something to act on.
pub fn materialize_params(root: &mut Value) {
    let Some(map) = root.as_object_mut() else { return };
    let preset = map
        .get("scenario")
        .and_then(Value::as_str)
        .and_then(|s| s.parse::<Scenario>().ok())
        .and_then(|s| s.preset_params());
    if let Some(p) = preset {
        if !map.contains_key("params") {
            map.insert("params".into(), serde_json::to_value(p).expect("params serialise"));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_names_round_trip() {
        for name in ["derive", "evolve-2d", "figure:1c", "figure:4b", "figure:9"] {
            assert_eq!(name.parse::<Scenario>().unwrap().to_string(), name);
        }
        assert!("figure:3".parse::<Scenario>().is_err());
    }

    #[test]
    fn overrides_create_nested_keys() {
        let mut v = Value::Object(Map::new());
        apply_set(&mut v, "numerics.dt=0.01").unwrap();
        apply_set(&mut v, "scenario=figure:5").unwrap();
        assert_eq!(v["numerics"]["dt"], 0.01);
        assert_eq!(v["scenario"], "figure:5");
        assert!(apply_set(&mut v, "scenario.x=1").is_err());
        assert!(apply_set(&mut v, "novalue").is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let v = serde_json::json!({"scenario": "derive", "numerics": {"dtt": 1.0}});
        assert!(ScenarioConfig::from_value(&v).is_err());
        let v = serde_json::json!({"scenario": "derive", "params": {"mode": "reduced", "xi": 0.2,
            "Delta_over_gamma": -12, "g_over_Omega": 100, "extra": 1}});
        assert!(ScenarioConfig::from_value(&v).is_err());
        let v = serde_json::json!({"scenario": "derive", "params": {"mode": "reduced", "xi": 0.2,
            "Delta_over_gamma": -12, "g_over_Omega": 100}});
        assert!(ScenarioConfig::from_value(&v).is_ok());
    }
}
