use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use shiftknn::neighbors::PointCloud;
use shiftknn::risk::{EstimatorConfig, RegressionTask, SampleGrid, TestDesign};

/// A simulation or comparison run, as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: RegressionTask,
    pub estimators: Vec<EstimatorConfig>,
    pub n_grid: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_grid: Option<Vec<usize>>,
    pub replicates: usize,
    pub test_count: usize,
    /// Optional CSV of test points, used instead of fresh target draws.
    /// Relative paths are resolved against the config file's directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_points_csv: Option<PathBuf>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub record_timing: bool,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Reads a config; relative paths inside it become relative to the
    /// file's directory.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg =
            Self::from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        if let Some(p) = cfg.test_points_csv.as_mut() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn grid(&self) -> SampleGrid {
        SampleGrid {
            n: self.n_grid.clone(),
            m: self.m_grid.clone(),
        }
    }

    /// Structural checks that do not need any simulation.
    pub fn validate(&self) -> anyhow::Result<()> {
        self.task.validate()?;
        self.grid().validate()?;
        if self.estimators.is_empty() {
            bail!("config lists no estimators");
        }
        for e in &self.estimators {
            e.validate()?;
            e.exponents(&self.task)?;
        }
        if self.replicates == 0 {
            bail!("replicates must be at least 1");
        }
        if self.test_count == 0 && self.test_points_csv.is_none() {
            bail!("test_count must be at least 1");
        }
        Ok(())
    }

    pub fn test_design(&self) -> anyhow::Result<TestDesign> {
        match &self.test_points_csv {
            Some(path) => {
                let cloud = PointCloud::<f64>::from_csv_path(path)
                    .with_context(|| format!("reading test points from {}", path.display()))?;
                Ok(TestDesign::Fixed(Arc::new(cloud)))
            }
            None => Ok(TestDesign::Sampled(self.test_count)),
        }
    }
}
