//! Construction of the four oracles a run uses.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::config::{OracleSelection, RunConfig};
use crate::error::{Error, Result};
use crate::evaluators::{GeometricEvaluator, PhysicalEvaluator, RemoteVisual, TagTableVisual, VisualOracle};
use crate::phenogen::{GeneratorOracle, ProceduralGenerator};
use crate::prompt_ops::{LanguageOracle, RemoteLanguage, ScriptedLanguage};

#[derive(Clone)]
pub struct Oracles {
    pub language: Arc<dyn LanguageOracle>,
    pub generator: Arc<dyn GeneratorOracle>,
    pub visual: Arc<dyn VisualOracle>,
    pub physical: Arc<dyn PhysicalEvaluator>,
}

/// Adapter names as written to run logs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdapterNames {
    pub language: String,
    pub generator: String,
    pub visual: String,
    pub physical: String,
}

impl Oracles {
    /// Hermetic mock oracles.
    pub fn mock(config: &RunConfig) -> Self {
        Oracles {
            language: Arc::new(ScriptedLanguage::default()),
            generator: Arc::new(ProceduralGenerator::new()),
            visual: Arc::new(TagTableVisual),
            physical: Arc::new(GeometricEvaluator::with_resolution(config.raster_resolution)),
        }
    }

    /// Oracles named by `selection`. Remote adapters read their endpoints
    /// from the environment.
    pub fn from_selection(selection: &OracleSelection, config: &RunConfig) -> Result<Self> {
        let language: Arc<dyn LanguageOracle> = match selection.language.as_str() {
            ScriptedLanguage::NAME => Arc::new(ScriptedLanguage::default()),
            RemoteLanguage::NAME | "remote" => Arc::new(RemoteLanguage::from_env()?),
            other => return Err(unknown("language", other)),
        };
        let generator: Arc<dyn GeneratorOracle> = match selection.generator.as_str() {
            ProceduralGenerator::NAME => Arc::new(ProceduralGenerator::new()),
            other => return Err(unknown("generator", other)),
        };
        let visual: Arc<dyn VisualOracle> = match selection.visual.as_str() {
            TagTableVisual::NAME => Arc::new(TagTableVisual),
            RemoteVisual::NAME | "remote" => Arc::new(RemoteVisual::from_env()?),
            other => return Err(unknown("visual", other)),
        };
        let physical: Arc<dyn PhysicalEvaluator> = match selection.physical.as_str() {
            GeometricEvaluator::NAME => Arc::new(GeometricEvaluator::with_resolution(config.raster_resolution)),
            other => return Err(unknown("physical", other)),
        };
        Ok(Oracles {
            language,
            generator,
            visual,
            physical,
        })
    }

    pub fn names(&self) -> AdapterNames {
        AdapterNames {
            language: self.language.name().to_string(),
            generator: self.generator.name().to_string(),
            visual: self.visual.name().to_string(),
            physical: self.physical.name().to_string(),
        }
    }

    /// Whether identical inputs give identical outputs end to end.
    pub fn deterministic(&self) -> bool {
        self.language.capabilities().deterministic && self.visual.deterministic()
    }

    pub fn concurrent_evaluation(&self) -> bool {
        self.generator.concurrent() && self.visual.concurrent()
    }
}

fn unknown(role: &str, name: &str) -> Error {
    Error::InvalidConfig(format!("unknown {role} oracle `{name}`"))
}
