//! Experiment configuration: one TOML file, schema `holoeq-config/v1`.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use holoeq_core::deformed::ThresholdRule;
use holoeq_core::model::{ModelKind, ModelManifold};
use holoeq_core::Error as CoreError;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

pub const CONFIG_SCHEMA: &str = "holoeq-config/v1";
pub const OUTPUT_ROOT_VAR: &str = "HOLOEQ_OUTPUT_ROOT";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    Plot,
    Blocks,
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json, Format::Plot]
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: String,
    pub name: String,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
    #[serde(default)]
    pub threshold: ThresholdRule,
    #[serde(default)]
    pub algebra: Option<AlgebraExperiment>,
    #[serde(default, rename = "sweep")]
    pub sweeps: Vec<SweepExperiment>,
    #[serde(default, rename = "oscillator")]
    pub oscillators: Vec<OscillatorExperiment>,
}

fn default_max_n() -> usize {
    2
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraExperiment {
    #[serde(default = "default_max_n")]
    pub max_n: usize,
}

fn default_bochner_t() -> f64 {
    1.0
}

/// A T sweep of one model over a cutoff grid. For products the cutoffs
/// replace the left factor's cutoff.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepExperiment {
    pub id: String,
    pub model: ModelManifold,
    #[serde(default)]
    pub cutoffs: Vec<usize>,
    pub t_values: Vec<f64>,
    #[serde(default = "default_bochner_t")]
    pub bochner_t: f64,
}

impl SweepExperiment {
    /// The model at each requested cutoff, in grid order.
    pub fn models(&self) -> Vec<ModelManifold> {
        if self.cutoffs.is_empty() {
            return vec![self.model.clone()];
        }
        self.cutoffs.iter().map(|&n| with_cutoff(&self.model, n)).collect()
    }
}

fn with_cutoff(model: &ModelManifold, cutoff: usize) -> ModelManifold {
    let mut out = model.clone();
    match &mut out.kind {
        ModelKind::Product { left, right } => {
            left.cutoff = cutoff;
            out.cutoff = cutoff.max(right.cutoff);
        }
        _ => out.cutoff = cutoff,
    }
    out
}

fn default_epsilon() -> f64 {
    1.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillatorExperiment {
    pub id: String,
    pub m: Vec<usize>,
    pub t_values: Vec<f64>,
    pub cutoffs: Vec<usize>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> LabError {
    LabError::Invalid { field: field.into(), reason: reason.into() }
}

/// Rewrites a core validation error so its field sits under `prefix`.
fn nest(prefix: &str, e: CoreError) -> LabError {
    match e {
        CoreError::InvalidParameter { field, reason } => invalid(format!("{prefix}.{field}"), reason),
        other => invalid(prefix, other.to_string()),
    }
}

fn check_grid(field: &str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(invalid(field, "grid must be nonempty"));
    }
    if let Some(bad) = values.iter().find(|t| !t.is_finite() || **t < 0.0) {
        return Err(invalid(field, format!("values must be finite and nonnegative, got {bad}")));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| LabError::Parse { path: String::new(), message: e.to_string() })?;
        let config: Self = serde_path_to_error::deserialize(de).map_err(|e| LabError::Parse {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<(Self, Vec<u8>)> {
        let bytes = std::fs::read(path).map_err(|source| LabError::Io { path: path.to_path_buf(), source })?;
        let text = std::str::from_utf8(&bytes).map_err(|e| LabError::Parse { path: String::new(), message: e.to_string() })?;
        Ok((Self::parse(text)?, bytes))
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != CONFIG_SCHEMA {
            return Err(invalid("schema", format!("expected {CONFIG_SCHEMA}, got {}", self.schema)));
        }
        if self.name.trim().is_empty() {
            return Err(invalid("name", "must be nonempty"));
        }
        if self.formats.is_empty() {
            return Err(invalid("formats", "at least one format is required"));
        }
        self.threshold.validate().map_err(|e| match e {
            CoreError::InvalidParameter { field, reason } => invalid(field, reason),
            other => invalid("threshold", other.to_string()),
        })?;
        if self.algebra.is_none() && self.sweeps.is_empty() && self.oscillators.is_empty() {
            return Err(invalid("sweep", "config defines no experiments"));
        }
        if let Some(a) = &self.algebra {
            if !(1..=3).contains(&a.max_n) {
                return Err(invalid("algebra.max_n", "must lie in 1..=3"));
            }
        }
        let mut ids = BTreeSet::new();
        for (i, s) in self.sweeps.iter().enumerate() {
            let at = format!("sweep[{i}]");
            if s.id.is_empty() || !ids.insert(s.id.clone()) {
                return Err(invalid(format!("{at}.id"), format!("missing or duplicate id `{}`", s.id)));
            }
            check_grid(&format!("{at}.t_values"), &s.t_values)?;
            if !(s.bochner_t > 0.0 && s.bochner_t.is_finite()) {
                return Err(invalid(format!("{at}.bochner_t"), "must be positive"));
            }
            for (j, m) in s.models().iter().enumerate() {
                let field = if s.cutoffs.is_empty() { format!("{at}.model") } else { format!("{at}.cutoffs[{j}]") };
                m.validate().map_err(|e| nest(&field, e))?;
            }
        }
        for (i, o) in self.oscillators.iter().enumerate() {
            let at = format!("oscillator[{i}]");
            if o.id.is_empty() || !ids.insert(o.id.clone()) {
                return Err(invalid(format!("{at}.id"), format!("missing or duplicate id `{}`", o.id)));
            }
            check_grid(&format!("{at}.t_values"), &o.t_values)?;
            if o.t_values.contains(&0.0) {
                return Err(invalid(format!("{at}.t_values"), "the local model needs T > 0"));
            }
            if o.m.is_empty() {
                return Err(invalid(format!("{at}.m"), "grid must be nonempty"));
            }
            if let Some(j) = o.m.iter().position(|m| !(1..=3).contains(m)) {
                return Err(invalid(format!("{at}.m[{j}]"), "m must lie in 1..=3"));
            }
            if o.cutoffs.is_empty() {
                return Err(invalid(format!("{at}.cutoffs"), "grid must be nonempty"));
            }
            if let Some(j) = o.cutoffs.iter().position(|&n| n < 4) {
                return Err(invalid(format!("{at}.cutoffs[{j}]"), "cutoff must be at least 4"));
            }
            if !(o.epsilon > 0.0 && o.epsilon.is_finite()) {
                return Err(invalid(format!("{at}.epsilon"), "must be positive"));
            }
        }
        Ok(())
    }

    /// `explicit` wins; otherwise `output_dir` under the override root.
    pub fn output_dir(&self, explicit: Option<&Path>) -> PathBuf {
        if let Some(dir) = explicit {
            return dir.to_path_buf();
        }
        match std::env::var_os(OUTPUT_ROOT_VAR) {
            Some(root) if !self.output_dir.is_absolute() => PathBuf::from(root).join(&self.output_dir),
            _ => self.output_dir.clone(),
        }
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
schema = "holoeq-config/v1"
name = "t"

[[sweep]]
id = "cp1"
t_values = [0.0, 2.0]
model = { kind = "cp1", k = 1, cutoff = 8, field = { kind = "linear" } }
"#;

    fn field_of(e: LabError) -> String {
        match e {
            LabError::Invalid { field, .. } => field,
            LabError::Parse { path, .. } => path,
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn parses_minimal_config() {
        let c = ExperimentConfig::parse(BASE).unwrap();
        assert_eq!(c.sweeps[0].models()[0].tag(), "cp1(k=1,N=8)");
        assert_eq!(c.formats, default_formats());
        assert_eq!(c.threshold, ThresholdRule::default());
    }

    #[test]
    fn empty_grid_names_field() {
        let e = ExperimentConfig::parse(&BASE.replace("[0.0, 2.0]", "[]")).unwrap_err();
        assert_eq!(field_of(e), "sweep[0].t_values");
    }

    #[test]
    fn bad_types_name_field() {
        let e = ExperimentConfig::parse(&BASE.replace("k = 1", "k = \"one\"")).unwrap_err();
        assert!(field_of(e).starts_with("sweep[0].model"));
        let e = ExperimentConfig::parse(&BASE.replace("cutoff = 8", "cutoff = 2")).unwrap_err();
        assert_eq!(field_of(e), "sweep[0].model");
        let e = ExperimentConfig::parse(&format!("{BASE}cutoffs = [8, 1]\n")).unwrap_err();
        assert_eq!(field_of(e), "sweep[0].cutoffs[1]");
    }

    #[test]
    fn product_cutoffs_override_left_factor() {
        let text = r#"
schema = "holoeq-config/v1"
name = "p"
[[sweep]]
id = "p"
t_values = [4.0]
cutoffs = [6, 8]
[sweep.model]
kind = "product"
field = { kind = "product_lift", factor = "left" }
left = { kind = "cp1", k = 0, cutoff = 4, field = { kind = "linear" } }
right = { kind = "torus", tau = [0.0, 1.0], cutoff = 2, field = { kind = "zero" } }
"#;
        let c = ExperimentConfig::parse(text).unwrap();
        let tags: Vec<String> = c.sweeps[0].models().iter().map(|m| m.tag()).collect();
        assert_eq!(tags, ["cp1(k=0,N=6)xtorus(tau=0+1i,N=2)", "cp1(k=0,N=8)xtorus(tau=0+1i,N=2)"]);
    }
}
