use std::path::PathBuf;

use clap::ValueEnum;
use mediatopo::experiments::{
    Fig1Setup, Fig2Setup, Fig3Setup, Fig4Setup, Fig5Setup, Fig6Setup, Table1Setup,
};
use mediatopo::realspace::Boundary;
use mediatopo::{EmitterLayout, ModelParams, Variant};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Invariant,
    Classify,
    Mediate,
    Figure,
    Table1,
    ListModels,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FigureId {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
}

/// A figure recipe with its parameters; absent fields take the recipe defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "lowercase")]
pub enum FigureSpec {
    Fig1(Fig1Setup),
    Fig2(Fig2Setup),
    Fig3(Fig3Setup),
    Fig4(Fig4Setup),
    Fig5(Fig5Setup),
    Fig6(Fig6Setup),
}

impl FigureSpec {
    pub fn default_for(id: FigureId) -> Self {
        match id {
            FigureId::Fig1 => FigureSpec::Fig1(Fig1Setup::default()),
            FigureId::Fig2 => FigureSpec::Fig2(Fig2Setup::default()),
            FigureId::Fig3 => FigureSpec::Fig3(Fig3Setup::default()),
            FigureId::Fig4 => FigureSpec::Fig4(Fig4Setup::default()),
            FigureId::Fig5 => FigureSpec::Fig5(Fig5Setup::default()),
            FigureId::Fig6 => FigureSpec::Fig6(Fig6Setup::default()),
        }
    }

    pub fn id(&self) -> FigureId {
        match self {
            FigureSpec::Fig1(_) => FigureId::Fig1,
            FigureSpec::Fig2(_) => FigureId::Fig2,
            FigureSpec::Fig3(_) => FigureId::Fig3,
            FigureSpec::Fig4(_) => FigureId::Fig4,
            FigureSpec::Fig5(_) => FigureId::Fig5,
            FigureSpec::Fig6(_) => FigureId::Fig6,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RealspaceSpec {
    pub n_cells: Vec<usize>,
    pub bc: Vec<Boundary>,
}

/// Everything a run depends on. The resolved form, with every default made
/// explicit, is echoed in the metadata block of `results.json`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<Task>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<EmitterLayout>,
    /// Points per axis of the Brillouin-zone grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub realspace: Option<RealspaceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<Variant>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub figure: Option<FigureSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table1: Option<Table1Setup>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

/// Rejected before any computation; maps to exit status 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError(format!("schema: {e}")))
    }

    /// Structural checks that need no numerics.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let task = self.task.ok_or_else(|| ConfigError("no task given (config `task` or --task)".into()))?;
        if let Some(m) = &self.model {
            m.validate().map_err(|e| ConfigError(format!("model: {e}")))?;
        }
        if let Some(g) = self.grid {
            if g < 8 {
                return Err(ConfigError(format!("grid must have at least 8 points per axis, got {g}")));
            }
        }
        let needs_model = matches!(task, Task::Invariant | Task::Classify | Task::Mediate);
        if needs_model && self.model.is_none() {
            return Err(ConfigError(format!("task {task:?} needs a model")));
        }
        if let (Some(m), Some(l)) = (&self.model, &self.layout) {
            if l.projector().n_bands() != m.n_bands() {
                return Err(ConfigError(format!(
                    "layout projector has {} entries, model {} has {} bands",
                    l.projector().n_bands(),
                    m.name(),
                    m.n_bands()
                )));
            }
        }
        if let (Some(m), Some(r)) = (&self.model, &self.realspace) {
            if r.n_cells.len() != m.dim() || r.bc.len() != m.dim() {
                return Err(ConfigError(format!("realspace needs {} entries per field for {}", m.dim(), m.name())));
            }
        }
        if task == Task::Figure && self.figure.is_none() {
            return Err(ConfigError("task figure needs a figure (config `figure` or --figure)".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure_spec_accepts_partial_parameters() {
        let c = ExperimentConfig::from_json(r#"{"task": "figure", "figure": {"id": "fig3", "g": 0.25}}"#).unwrap();
        match c.figure.unwrap() {
            FigureSpec::Fig3(s) => {
                assert_eq!(s.g, 0.25);
                assert_eq!(s.n_cells, 20);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"task": "figure", "colour": 1}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"figure": {"id": "fig3", "gg": 1}}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"model": {"name": "ssh", "params": {"v": 1, "x": 2}}}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"model": {"name": "", "params": {}}}"#).is_err());
    }

    #[test]
    fn missing_model_is_a_config_error() {
        let c = ExperimentConfig::from_json(r#"{"task": "invariant"}"#).unwrap();
        assert!(c.validate().is_err());
    }
}
