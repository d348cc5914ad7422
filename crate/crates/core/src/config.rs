//! Run configuration: flat `dotted.key = value` text or JSON, merged over
//! defaults and validated across sections.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::collision::SpatialLayout;
use crate::dynamics::{InitialData, SimulationConfig, StepOptions, Stepper, DEFAULT_FIT_WINDOW, DEFAULT_INSTABILITY_FACTOR};
use crate::error::{Error, Result};
use crate::kernel::{GridSpec, ModelParams, OutOfGrid, SphereRule};
use crate::verify::VerifySettings;
use crate::weights::{default_s0, WeightParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub radius: f64,
    pub n: usize,
    pub sphere_rule: SphereRule,
    pub out_of_grid: OutOfGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub dt: f64,
    pub t_end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub stepper: Stepper,
    pub conservation_project: bool,
    pub inner_iterations: usize,
    pub instability_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    /// Leading fraction of rows discarded before fitting.
    pub window: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// Embed a generation timestamp in JSON and SVG outputs.
    pub timestamp: bool,
}

/// (γ, ϑ) grid of the `sweep` command; every other setting is shared.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub gammas: Vec<f64>,
    pub varthetas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelParams,
    pub weights: WeightParams,
    pub grid: GridSection,
    pub space: SpatialLayout,
    pub init: InitialData,
    pub time: TimeSection,
    pub solver: SolverSection,
    pub fit: FitSection,
    pub seed: u64,
    pub output: OutputSection,
    pub verify: VerifySettings,
    pub sweep: SweepSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        let sim = SimulationConfig::default();
        Self {
            model: sim.model,
            weights: sim.weights,
            grid: GridSection {
                radius: sim.grid.radius,
                n: sim.grid.n,
                sphere_rule: sim.sphere_rule,
                out_of_grid: sim.out_of_grid,
            },
            space: sim.layout,
            init: sim.init,
            time: TimeSection {
                dt: sim.dt,
                t_end: sim.t_end,
            },
            solver: SolverSection {
                stepper: sim.stepper,
                conservation_project: sim.step.conservation_project,
                inner_iterations: sim.step.inner_iterations,
                instability_factor: DEFAULT_INSTABILITY_FACTOR,
            },
            fit: FitSection {
                window: DEFAULT_FIT_WINDOW,
            },
            seed: sim.seed,
            output: OutputSection {
                dir: PathBuf::from("out"),
                timestamp: true,
            },
            verify: VerifySettings::default(),
            sweep: SweepSection {
                gammas: vec![-0.5, -1.0],
                varthetas: vec![0.0, 1.0],
            },
        }
    }
}

impl RunConfig {
    /// Parses flat `key = value` text, or JSON when the first non-blank
    /// character is `{`. Keys not given keep their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let (user, lines) = if text.trim_start().starts_with('{') {
            let v: Value = serde_json::from_str(text).map_err(|e| Error::Config(format!("JSON: {e}")))?;
            if !v.is_object() {
                return Err(Error::Config("JSON config must be an object".into()));
            }
            (v, BTreeMap::new())
        } else {
            parse_flat(text)?
        };
        let mut merged = serde_json::to_value(RunConfig::default()).expect("default config serializes");
        merge(&mut merged, &user);
        let mut cfg: RunConfig = serde_path_to_error::deserialize(&merged).map_err(|e| {
            let path = e.path().to_string();
            let at = line_of(&lines, &path).map(|l| format!("line {l}: ")).unwrap_or_default();
            Error::Config(format!("{at}{path}: {}", e.inner()))
        })?;

        let mut keys = Vec::new();
        leaf_paths(&user, String::new(), &mut keys);
        if keys.iter().any(|k| k == "weights.q") && !keys.iter().any(|k| k == "weights.s0") {
            cfg.weights.s0 = default_s0(cfg.weights.q);
        }
        let resolved = serde_json::to_value(&cfg).expect("config serializes");
        for key in &keys {
            if lookup(&resolved, key).is_none() {
                let at = lines.get(key).map(|l| format!("line {l}: ")).unwrap_or_default();
                return Err(Error::Config(format!("{at}unknown key \"{key}\"")));
            }
        }
        Ok(cfg)
    }

    /// Cross-section validation. Violations name the failing condition,
    /// e.g. "ϑ < −2/γ", "q < s₀ < 1" or "p > 1, pγ > −3".
    pub fn validate(&self) -> Result<()> {
        self.simulation().validate()?;
        self.verify.validate()?;
        let p = self.verify.p;
        if !(p > 1.0 && p * self.model.gamma > -3.0) {
            return Err(Error::InvalidParameter {
                name: "verify.p",
                value: p,
                condition: "p > 1, pγ > −3",
            });
        }
        if !(0.0..1.0).contains(&self.fit.window) {
            return Err(Error::InvalidParameter {
                name: "fit.window",
                value: self.fit.window,
                condition: "0 ≤ window < 1",
            });
        }
        Ok(())
    }

    pub fn simulation(&self) -> SimulationConfig {
        SimulationConfig {
            model: self.model,
            weights: self.weights,
            grid: GridSpec {
                radius: self.grid.radius,
                n: self.grid.n,
            },
            sphere_rule: self.grid.sphere_rule,
            out_of_grid: self.grid.out_of_grid,
            layout: self.space,
            init: self.init,
            dt: self.time.dt,
            t_end: self.time.t_end,
            stepper: self.solver.stepper,
            step: StepOptions {
                conservation_project: self.solver.conservation_project,
                inner_iterations: self.solver.inner_iterations,
            },
            instability_factor: self.solver.instability_factor,
            seed: self.seed,
        }
    }

    /// Flat `key = value` rendering that `parse` reads back.
    pub fn to_flat(&self) -> String {
        let v = serde_json::to_value(self).expect("config serializes");
        let mut keys = Vec::new();
        leaf_paths(&v, String::new(), &mut keys);
        let mut out = String::new();
        for k in keys {
            let leaf = lookup(&v, &k).expect("leaf exists");
            out.push_str(&format!("{k} = {leaf}\n"));
        }
        out
    }
}

fn parse_flat(text: &str) -> Result<(Value, BTreeMap<String, usize>)> {
    let mut root = Value::Object(Map::new());
    let mut lines = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let n = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!("line {n}: expected `key = value`")));
        };
        let key = key.trim();
        if key.is_empty() || key.split('.').any(|s| s.is_empty()) {
            return Err(Error::Config(format!("line {n}: malformed key \"{key}\"")));
        }
        let value = value.trim();
        let parsed = serde_json::from_str::<Value>(value).unwrap_or_else(|_| Value::String(value.to_string()));
        if let Some(prev) = lines.insert(key.to_string(), n) {
            return Err(Error::Config(format!("line {n}: duplicate key \"{key}\" (first set on line {prev})")));
        }
        insert(&mut root, key, parsed).map_err(|msg| Error::Config(format!("line {n}: {msg}")))?;
    }
    Ok((root, lines))
}

fn insert(root: &mut Value, key: &str, value: Value) -> std::result::Result<(), String> {
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| format!("\"{}\" is a value, not a section", parts[..i].join(".")))?;
        if i + 1 == parts.len() {
            if obj.get(*part).is_some_and(Value::is_object) {
                return Err(format!("\"{key}\" is a section, not a value"));
            }
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Map::new()));
    }
    Ok(())
}

fn merge(base: &mut Value, over: &Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (b, o) => *b = o.clone(),
    }
}

fn leaf_paths(v: &Value, prefix: String, out: &mut Vec<String>) {
    match v {
        Value::Object(m) => {
            for (k, child) in m {
                let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                leaf_paths(child, p, out);
            }
        }
        _ => out.push(prefix),
    }
}

fn lookup<'a>(v: &'a Value, key: &str) -> Option<&'a Value> {
    key.split('.').try_fold(v, |node, part| node.get(part))
}

// Line of the key at `path` or, for a missing field, of any key below it.
fn line_of(lines: &BTreeMap<String, usize>, path: &str) -> Option<usize> {
    lines.get(path).copied().or_else(|| {
        lines
            .iter()
            .filter(|(k, _)| path == "." || k.starts_with(&format!("{path}.")))
            .map(|(_, l)| *l)
            .min()
    })
}
