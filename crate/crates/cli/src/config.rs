//! Run configuration, read from TOML.

use std::path::Path;

use anyhow::{bail, Context, Result};
use qtemporal_core::baseline::MlpConfig;
use qtemporal_core::qstate::{CatalogState, DensityMatrix, StateParams};
use qtemporal_core::train::{self, Init, TrainConfig, TrainingPair, DEFAULT_INIT_K};
use qtemporal_core::{GradientMethod, ParamKind};
use serde::{Deserialize, Serialize};

/// Marks errors in the user's configuration or arguments (exit code 2).
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub train: TrainSection,
    pub test: TestSection,
    pub sweep: SweepSection,
    pub oracle: OracleSection,
    pub baseline: BaselineSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitKind {
    Zero,
    Tunneling,
    Analytic,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GradientKind {
    Analytic,
    Central,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Trainable {
    K,
    #[serde(rename = "eps")]
    Eps,
    J,
}

/// One training or test pair: a catalog state (with parameters) or an
/// inline density matrix in the four-row `re,im` text form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    pub target: f64,
}

impl PairSpec {
    fn build(&self) -> Result<TrainingPair> {
        let defaults = StateParams::default();
        let params = StateParams {
            delta: self.delta.unwrap_or(defaults.delta),
            gamma: self.gamma.unwrap_or(defaults.gamma),
        };
        let pair = match (&self.state, &self.matrix) {
            (Some(name), None) => {
                let state = CatalogState::parse(name, params)?;
                let label = self
                    .label
                    .clone()
                    .unwrap_or_else(|| state.name().to_string());
                TrainingPair::new(label, state.density(), self.target)?
            }
            (None, Some(text)) => {
                let rho = DensityMatrix::from_text(text)?;
                let label = self.label.clone().unwrap_or_else(|| "matrix".into());
                TrainingPair::new(label, rho, self.target)?
            }
            _ => bail!(config_error(
                "each pair needs exactly one of `state` or `matrix`"
            )),
        };
        Ok(pair)
    }
}

fn build_dataset(name: &str, pairs: &[PairSpec]) -> Result<Vec<TrainingPair>> {
    if !pairs.is_empty() {
        return pairs
            .iter()
            .enumerate()
            .map(|(i, p)| p.build().with_context(|| format!("pair {}", i + 1)))
            .collect();
    }
    Ok(train::named_dataset(name)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    /// `table2`, `table2-exact`, `table3` or `table3-exact`; ignored when
    /// `pairs` is given.
    pub dataset: String,
    pub pairs: Vec<PairSpec>,
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub rms_stop: f64,
    pub init: InitKind,
    /// Tunneling amplitude for `init = "tunneling"`.
    pub init_k: f64,
    pub random_low: f64,
    pub random_high: f64,
    pub slices: usize,
    pub dt: f64,
    pub trainable: Vec<Trainable>,
    pub gradient: GradientKind,
    /// Step for `gradient = "central"`.
    pub fd_step: f64,
}

impl Default for TrainSection {
    fn default() -> Self {
        let d = TrainConfig::default();
        Self {
            dataset: "table2".into(),
            pairs: Vec::new(),
            learning_rate: d.learning_rate,
            max_epochs: d.max_epochs,
            rms_stop: d.rms_stop,
            init: InitKind::Tunneling,
            init_k: DEFAULT_INIT_K,
            random_low: -0.5,
            random_high: 0.5,
            slices: d.slices,
            dt: d.dt,
            trainable: vec![Trainable::K, Trainable::Eps, Trainable::J],
            gradient: GradientKind::Analytic,
            fd_step: 1e-6,
        }
    }
}

impl TrainSection {
    pub fn dataset(&self) -> Result<Vec<TrainingPair>> {
        build_dataset(&self.dataset, &self.pairs).context("train dataset")
    }

    pub fn to_train_config(&self, seed: u64) -> Result<TrainConfig> {
        let init = match self.init {
            InitKind::Zero => Init::Zero,
            InitKind::Tunneling => Init::Tunneling(self.init_k),
            InitKind::Analytic => Init::Analytic,
            InitKind::Random => Init::Random {
                low: self.random_low,
                high: self.random_high,
            },
        };
        let cfg = TrainConfig {
            learning_rate: self.learning_rate,
            max_epochs: self.max_epochs,
            rms_stop: self.rms_stop,
            init,
            seed,
            slices: self.slices,
            dt: self.dt,
            trainable: self
                .trainable
                .iter()
                .map(|t| match t {
                    Trainable::K => ParamKind::K,
                    Trainable::Eps => ParamKind::Eps,
                    Trainable::J => ParamKind::J,
                })
                .collect(),
            method: match self.gradient {
                GradientKind::Analytic => GradientMethod::Analytic,
                GradientKind::Central => GradientMethod::CentralDifference { h: self.fd_step },
            },
        };
        cfg.validate()
            .map_err(|e| config_error(format!("[train]: {e}")))?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TestSection {
    pub dataset: String,
    pub pairs: Vec<PairSpec>,
}

impl Default for TestSection {
    fn default() -> Self {
        Self {
            dataset: "table3".into(),
            pairs: Vec::new(),
        }
    }
}

impl TestSection {
    pub fn dataset(&self) -> Result<Vec<TrainingPair>> {
        build_dataset(&self.dataset, &self.pairs).context("test dataset")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    /// Label of the pair whose target is swept.
    pub pivot: String,
    pub start: f64,
    pub step: f64,
    pub stop: f64,
    /// Extra grid values appended after the regular grid.
    pub points: Vec<f64>,
    /// Overrides of the `[train]` budget for each sweep point.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_epochs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rms_stop: Option<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            pivot: "P".into(),
            start: 0.05,
            step: 0.05,
            stop: 0.95,
            points: Vec::new(),
            max_epochs: None,
            rms_stop: None,
        }
    }
}

impl SweepSection {
    pub fn targets(&self) -> Result<Vec<f64>> {
        let mut t = train::grid(self.start, self.step, self.stop)
            .map_err(|e| config_error(format!("[sweep]: {e}")))?;
        t.extend(&self.points);
        Ok(t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSection {
    pub states: Vec<String>,
    pub gamma: f64,
    pub delta: f64,
}

impl Default for OracleSection {
    fn default() -> Self {
        let p = StateParams::default();
        Self {
            states: ["bell", "epr", "flat", "C", "P", "M"]
                .map(String::from)
                .to_vec(),
            gamma: p.gamma,
            delta: p.delta,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineSection {
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub rms_stop: f64,
}

impl Default for BaselineSection {
    fn default() -> Self {
        let d = MlpConfig::default();
        Self {
            hidden: d.layer_sizes[1..d.layer_sizes.len() - 1].to_vec(),
            learning_rate: d.learning_rate,
            max_epochs: d.max_epochs,
            rms_stop: d.rms_stop,
        }
    }
}

impl BaselineSection {
    pub fn to_mlp_config(&self, seed: u64) -> Result<MlpConfig> {
        let mut layer_sizes = vec![4];
        layer_sizes.extend(&self.hidden);
        layer_sizes.push(1);
        let cfg = MlpConfig {
            layer_sizes,
            learning_rate: self.learning_rate,
            max_epochs: self.max_epochs,
            rms_stop: self.rms_stop,
            seed,
            ..MlpConfig::default()
        };
        cfg.validate()
            .map_err(|e| config_error(format!("[baseline]: {e}")))?;
        Ok(cfg)
    }
}

impl Config {
    /// Parses TOML; syntax and type errors carry the line and column.
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| config_error(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    /// Canonical text of the resolved configuration, used for the digest.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_is_default() {
        assert_eq!(Config::parse("").unwrap(), Config::default());
    }

    #[test]
    fn canonical_roundtrip() {
        let c = Config::default();
        assert_eq!(Config::parse(&c.canonical()).unwrap(), c);
    }

    #[test]
    fn errors_name_the_line() {
        let err = Config::parse("seed = 1\n[train]\ninit = \"sideways\"\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        let err = Config::parse("seed = 1\n\n[train]\nbogus = 2\n").unwrap_err();
        assert!(err.to_string().contains("line 4"), "{err}");
    }

    #[test]
    fn inline_pairs() {
        let text = r#"
[train]
pairs = [
  { state = "bell", target = 1.0 },
  { state = "C", gamma = 0.2, target = 0.0 },
]
"#;
        let c = Config::parse(text).unwrap();
        let d = c.train.dataset().unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d[1].label, "C");
    }

    #[test]
    fn pair_needs_one_source() {
        let p = PairSpec {
            state: None,
            matrix: None,
            label: None,
            gamma: None,
            delta: None,
            target: 0.0,
        };
        assert!(p.build().is_err());
    }
}
