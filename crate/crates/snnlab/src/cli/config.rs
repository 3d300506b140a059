//! Run configuration: JSON file plus `--set key=value` overrides on top of
//! defaults. Unknown keys are rejected.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::snn::ResetMode;
use crate::training::LrSchedule;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Artifact name stem; embedded in every output file.
    pub run_id: String,
    pub output_dir: String,
    pub seed: u64,
    pub propagate: PropagateSection,
    pub sweep: SweepSection,
    pub train: TrainSection,
    pub gradcheck: GradcheckSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            run_id: "run".into(),
            output_dir: "out".into(),
            seed: 42,
            propagate: PropagateSection::default(),
            sweep: SweepSection::default(),
            train: TrainSection::default(),
            gradcheck: GradcheckSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropagateSection {
    pub depth: usize,
    pub width: usize,
    pub t_steps: usize,
    pub beta: f64,
    pub theta: f64,
    /// Omitted: reset-free for t_steps = 1, soft reset otherwise.
    pub reset: Option<ResetMode>,
    pub schemes: Vec<String>,
    pub seeds: u64,
}

impl Default for PropagateSection {
    fn default() -> Self {
        PropagateSection {
            depth: 100,
            width: 1000,
            t_steps: 1,
            beta: 0.5,
            theta: 1.0,
            reset: None,
            schemes: vec!["proposed".into()],
            seeds: 20,
        }
    }
}

impl PropagateSection {
    pub fn effective_reset(&self) -> ResetMode {
        self.reset.unwrap_or(if self.t_steps == 1 {
            ResetMode::None
        } else {
            ResetMode::Soft
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub widths: Vec<usize>,
    pub thetas: Vec<f64>,
    pub depth: usize,
    pub beta: f64,
    pub scheme: String,
    pub seeds: u64,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            widths: vec![100, 600, 1000],
            thetas: vec![0.5, 0.6, 0.7, 0.8, 0.9, 0.95],
            depth: 100,
            beta: 0.5,
            scheme: "proposed".into(),
            seeds: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    /// "mnist" (IDX files under the data dir) or "synthetic".
    pub dataset: String,
    pub subset: usize,
    pub test_subset: usize,
    pub hidden_layers: usize,
    pub width: usize,
    pub classes: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub t_steps: usize,
    pub lr: f64,
    pub schedule: LrSchedule,
    pub beta: f64,
    pub theta: f64,
    pub surrogate_slope: f64,
    pub detach_reset: bool,
    pub schemes: Vec<String>,
}

impl Default for TrainSection {
    fn default() -> Self {
        TrainSection {
            dataset: "mnist".into(),
            subset: 10_000,
            test_subset: 2_000,
            hidden_layers: 6,
            width: 300,
            classes: 10,
            epochs: 5,
            batch_size: 128,
            t_steps: 3,
            lr: 1e-3,
            schedule: LrSchedule::CosineAnnealing,
            beta: 0.5,
            theta: 1.0,
            surrogate_slope: 2.0,
            detach_reset: false,
            schemes: vec!["proposed".into(), "kaiming".into()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GradcheckSection {
    pub surrogate_slope: f64,
}

impl Default for GradcheckSection {
    fn default() -> Self {
        GradcheckSection {
            surrogate_slope: 2.0,
        }
    }
}

fn set_path(root: &mut serde_json::Value, path: &str, value: serde_json::Value) -> Result<()> {
    let mut cur = root;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return Err(Error::Config(format!("empty key segment in '{path}'")));
        }
        let obj = cur
            .as_object_mut()
            .ok_or_else(|| Error::Config(format!("'{path}' does not address an object field")))?;
        if i + 1 == parts.len() {
            obj.insert((*part).to_string(), value);
            return Ok(());
        }
        cur = obj
            .entry((*part).to_string())
            .or_insert_with(|| serde_json::json!({}));
    }
    unreachable!()
}

/// defaults < file < --set overrides, then strict validation.
pub fn resolve_config(file: Option<&str>, sets: &[String]) -> Result<RunConfig> {
    let mut value = serde_json::to_value(RunConfig::default())
        .map_err(|e| Error::Config(e.to_string()))?;
    if let Some(path) = file {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file_value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{path}: {e}")))?;
        merge(&mut value, file_value);
    }
    for set in sets {
        let (key, raw) = set
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set needs key=value, got '{set}'")))?;
        // bare words that are not valid JSON are taken as strings
        let parsed: serde_json::Value = serde_json::from_str(raw)
            .unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
        set_path(&mut value, key, parsed)?;
    }
    serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))
}

fn merge(base: &mut serde_json::Value, overlay: serde_json::Value) {
    match (base, overlay) {
        (serde_json::Value::Object(b), serde_json::Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

impl RunConfig {
    /// Canonical one-line JSON used in artifact headers.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}
