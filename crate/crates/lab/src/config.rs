//! TOML experiment configuration.
//!
//! ```toml
//! n = 32                          # optional; commands may sweep n instead
//! beta = [-0.225, 0.3]
//! graphs = ["edge", "triangle"]   # names or edge lists such as [[0, 1], [1, 2]]
//! pattern = "triangle"            # optional subgraph for verify-conjecture
//!
//! [chain]
//! seed = 1
//! burn_in_sweeps = 200
//! thinning_sweeps = 5
//! samples = 5000
//! ptilde_samples = 4000
//! replicates = 8
//! ```
//!
//! Terms may instead be listed as `[[terms]]` tables with `beta` and `edges`.

use std::path::Path;

use ergm_core::model::SubgraphSpec;
use ergm_core::sampler::{ChainConfig, InitialState, DEFAULT_BURN_IN_SWEEPS, DEFAULT_THINNING_SWEEPS};
use ergm_core::ErgmParams;
use serde::{Deserialize, Serialize};

pub const DEFAULT_SAMPLES: usize = 5000;
pub const DEFAULT_PTILDE_SAMPLES: usize = 4000;
pub const DEFAULT_REPLICATES: usize = 8;
pub const DEFAULT_N_LIST: [usize; 5] = [16, 24, 32, 48, 64];

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// A pattern given by name (`edge`, `two-star`, `triangle`) or edge list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphEntry {
    Named(String),
    Edges(Vec<[usize; 2]>),
}

impl GraphEntry {
    pub fn to_spec(&self) -> Result<SubgraphSpec, ConfigError> {
        match self {
            GraphEntry::Named(name) => SubgraphSpec::named(name)
                .ok_or_else(|| ConfigError::Invalid(format!("unknown graph name {name:?}"))),
            GraphEntry::Edges(edges) => {
                let pairs: Vec<(usize, usize)> = edges.iter().map(|e| (e[0], e[1])).collect();
                SubgraphSpec::new(&pairs).map_err(|e| ConfigError::Invalid(e.to_string()))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermEntry {
    pub beta: f64,
    pub edges: GraphEntry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChainSection {
    pub seed: u64,
    pub burn_in_sweeps: usize,
    pub thinning_sweeps: usize,
    /// Records per conditional chain, or per unconditional chain in
    /// experiments without conditioning.
    pub samples: usize,
    /// Records used to estimate `p̃` before conditioning.
    pub ptilde_samples: usize,
    /// Independent chains per `n` where an experiment averages replicates.
    pub replicates: usize,
    /// Starting density; defaults to the fixed point when known.
    pub initial_density: Option<f64>,
}

impl Default for ChainSection {
    fn default() -> Self {
        ChainSection {
            seed: 0,
            burn_in_sweeps: DEFAULT_BURN_IN_SWEEPS,
            thinning_sweeps: DEFAULT_THINNING_SWEEPS,
            samples: DEFAULT_SAMPLES,
            ptilde_samples: DEFAULT_PTILDE_SAMPLES,
            replicates: DEFAULT_REPLICATES,
            initial_density: None,
        }
    }
}

impl ChainSection {
    pub fn chain_config(&self, seed: u64, samples: usize, fallback_density: f64) -> ChainConfig {
        ChainConfig {
            seed,
            burn_in_sweeps: self.burn_in_sweeps,
            samples,
            thinning_sweeps: self.thinning_sweeps,
            initial_state: InitialState::Iid(self.initial_density.unwrap_or(fallback_density)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub beta: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub graphs: Vec<GraphEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<TermEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<GraphEntry>,
    #[serde(default)]
    pub chain: ChainSection,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let config: ExperimentConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        config.terms_list()?;
        if let Some(p) = &config.pattern {
            p.to_spec()?;
        }
        if config.chain.samples == 0 || config.chain.thinning_sweeps == 0 || config.chain.replicates == 0 {
            return Err(ConfigError::Invalid(
                "chain.samples, chain.thinning_sweeps and chain.replicates must be positive".into(),
            ));
        }
        if let Some(d) = config.chain.initial_density {
            if !(0.0..=1.0).contains(&d) {
                return Err(ConfigError::Invalid(format!("chain.initial_density = {d} outside [0, 1]")));
            }
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<(Self, String), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok((Self::from_toml_str(&text)?, text))
    }

    /// `(β_l, H_l)` in model order.
    pub fn terms_list(&self) -> Result<Vec<(f64, SubgraphSpec)>, ConfigError> {
        let from_lists = !self.beta.is_empty() || !self.graphs.is_empty();
        if from_lists && !self.terms.is_empty() {
            return Err(ConfigError::Invalid("use either beta/graphs or terms, not both".into()));
        }
        if from_lists {
            if self.beta.len() != self.graphs.len() {
                return Err(ConfigError::Invalid(format!(
                    "beta has {} entries but graphs has {}",
                    self.beta.len(),
                    self.graphs.len()
                )));
            }
            self.beta
                .iter()
                .zip(&self.graphs)
                .map(|(&b, g)| Ok((b, g.to_spec()?)))
                .collect()
        } else if !self.terms.is_empty() {
            self.terms.iter().map(|t| Ok((t.beta, t.edges.to_spec()?))).collect()
        } else {
            Err(ConfigError::Invalid("missing key `beta` (no model terms given)".into()))
        }
    }

    /// Largest pattern size, the smallest admissible `n`.
    pub fn min_n(&self) -> Result<usize, ConfigError> {
        Ok(self.terms_list()?.iter().map(|(_, h)| h.vertex_count()).max().unwrap_or(2).max(2))
    }

    pub fn params(&self, n: usize) -> Result<ErgmParams, ConfigError> {
        ErgmParams::new(n, self.terms_list()?).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn pattern_spec(&self) -> Result<Option<SubgraphSpec>, ConfigError> {
        self.pattern.as_ref().map(GraphEntry::to_spec).transpose()
    }

    /// The `n` values to run: explicit list, then the config's `n`, then
    /// the defaults.
    pub fn n_list(&self, explicit: Option<&[usize]>) -> Vec<usize> {
        match (explicit, self.n) {
            (Some(list), _) if !list.is_empty() => list.to_vec(),
            (_, Some(n)) => vec![n],
            _ => DEFAULT_N_LIST.to_vec(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_named_and_edge_list_graphs() {
        let c = ExperimentConfig::from_toml_str(
            r#"
            n = 12
            beta = [-0.2, 0.1, 0.05]
            graphs = ["edge", [[0, 1], [1, 2]], [[0, 1], [1, 2], [2, 3], [3, 0]]]
            [chain]
            seed = 9
            samples = 10
            "#,
        )
        .unwrap();
        let terms = c.terms_list().unwrap();
        assert_eq!(terms.len(), 3);
        assert_eq!(terms[1].1.kind(), ergm_core::model::PatternKind::TwoStar);
        assert_eq!(terms[2].1.vertex_count(), 4);
        assert_eq!(c.chain.seed, 9);
        assert_eq!(c.chain.burn_in_sweeps, DEFAULT_BURN_IN_SWEEPS);
        assert_eq!(c.params(12).unwrap().n(), 12);
        assert_eq!(c.n_list(None), vec![12]);
        assert_eq!(c.n_list(Some(&[5, 6])), vec![5, 6]);
    }

    #[test]
    fn parses_terms_tables() {
        let c = ExperimentConfig::from_toml_str(
            r#"
            [[terms]]
            beta = 0.1
            edges = [[0, 1]]
            [[terms]]
            beta = 0.2
            edges = "triangle"
            "#,
        )
        .unwrap();
        let terms = c.terms_list().unwrap();
        assert_eq!(terms[1].1, SubgraphSpec::triangle());
        assert_eq!(c.min_n().unwrap(), 3);
        assert_eq!(c.n_list(None), DEFAULT_N_LIST.to_vec());
    }

    #[test]
    fn diagnostics_name_the_offending_key() {
        let err = ExperimentConfig::from_toml_str("beta = [0.0]\ngraphs = [\"edge\"]\nbetta = 1").unwrap_err();
        assert!(err.to_string().contains("betta"), "{err}");
        let err = ExperimentConfig::from_toml_str("graphs = [\"edge\"]").unwrap_err();
        assert!(err.to_string().contains("beta"), "{err}");
        let err = ExperimentConfig::from_toml_str("beta = [0.0]\ngraphs = [\"edge\"]\n[chain]\nsamples = \"x\"").unwrap_err();
        assert!(err.to_string().contains("samples"), "{err}");
        let err = ExperimentConfig::from_toml_str("beta = [0.0]\ngraphs = [\"pentagon\"]").unwrap_err();
        assert!(err.to_string().contains("pentagon"), "{err}");
    }

    #[test]
    fn model_rules_are_enforced() {
        let c = ExperimentConfig::from_toml_str("beta = [0.0, -0.1]\ngraphs = [\"edge\", \"triangle\"]").unwrap();
        assert!(c.params(10).is_err());
        let c = ExperimentConfig::from_toml_str("beta = [0.0, 0.1]\ngraphs = [\"edge\"]");
        assert!(c.is_err());
    }

    #[test]
    fn round_trips_through_toml() {
        let text = "n = 10\nbeta = [0.5, 0.25]\ngraphs = [\"edge\", \"two-star\"]\npattern = [[0, 1], [1, 2], [0, 2]]\n";
        let c = ExperimentConfig::from_toml_str(text).unwrap();
        let again = ExperimentConfig::from_toml_str(&toml::to_string(&c).unwrap()).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.pattern_spec().unwrap(), Some(SubgraphSpec::triangle()));
    }
}
