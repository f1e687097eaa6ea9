//! Run configuration: a flat TOML document with CLI-flag overrides.
//! Referenced paths are checked at load; the seed is mandatory for mock
//! runs and feeds every random choice in a run.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Deserialize;
use thiserror::Error;

use symbolizer_core::planner::{SearchBudget, Tiebreak};
use symbolizer_core::schema::SchemaLimits;

use crate::grounder::{GrounderConfig, MockNoise};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub endpoint: EndpointSection,
    pub mock: MockSection,
    pub planner: PlannerSection,
    pub schema: SchemaSection,
    pub examples: ExamplesSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EndpointSection {
    pub url: String,
    pub model: String,
    pub timeout_s: u64,
    pub max_retries: u32,
    pub temperature: f64,
    pub cache_dir: Option<PathBuf>,
}

impl Default for EndpointSection {
    fn default() -> Self {
        EndpointSection {
            url: String::new(),
            model: String::new(),
            timeout_s: 60,
            max_retries: 2,
            temperature: 0.0,
            cache_dir: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MockSection {
    pub epsilon: f64,
    pub spurious: usize,
}

impl Default for MockSection {
    fn default() -> Self {
        MockSection {
            epsilon: 0.0,
            spurious: 0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerSection {
    pub max_expansions: u64,
    pub max_wall_s: Option<u64>,
    pub max_plan_length: Option<usize>,
    pub tiebreak: String,
}

impl Default for PlannerSection {
    fn default() -> Self {
        PlannerSection {
            max_expansions: 1_000_000,
            max_wall_s: None,
            max_plan_length: None,
            tiebreak: "novelty".to_string(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchemaSection {
    pub max_objects: usize,
    pub max_atoms: usize,
}

impl Default for SchemaSection {
    fn default() -> Self {
        SchemaSection {
            max_objects: 64,
            max_atoms: 512,
        }
    }
}

/// In-context example files per stage, resolved relative to the config
/// file location.
#[derive(Debug, Clone, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ExamplesSection {
    pub objects: Vec<PathBuf>,
    pub predicates: Vec<PathBuf>,
    pub goal: Vec<PathBuf>,
    pub successor: Vec<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        let mut config: RunConfig =
            toml::from_str(&text).map_err(|e| ConfigError::Invalid {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.resolve_paths(base);
        config.validate(&path.display().to_string())?;
        Ok(config)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&p);
            }
        };
        for list in [
            &mut self.examples.objects,
            &mut self.examples.predicates,
            &mut self.examples.goal,
            &mut self.examples.successor,
        ] {
            for p in list.iter_mut() {
                resolve(p);
            }
        }
        if let Some(dir) = &mut self.endpoint.cache_dir {
            resolve(dir);
        }
        if let Some(dir) = &mut self.output_dir {
            resolve(dir);
        }
    }

    pub fn validate(&self, origin: &str) -> Result<(), ConfigError> {
        let invalid = |message: String| ConfigError::Invalid {
            path: origin.to_string(),
            message,
        };
        if !(0.0..=1.0).contains(&self.mock.epsilon) {
            return Err(invalid(format!(
                "mock.epsilon {} outside [0, 1]",
                self.mock.epsilon
            )));
        }
        if self.endpoint.timeout_s == 0 {
            return Err(invalid("endpoint.timeout_s must be positive".into()));
        }
        if Tiebreak::parse(&self.planner.tiebreak).is_none() {
            return Err(invalid(format!(
                "planner.tiebreak {:?} (expected novelty, novelty-pairs, or fifo)",
                self.planner.tiebreak
            )));
        }
        for path in self
            .examples
            .objects
            .iter()
            .chain(&self.examples.predicates)
            .chain(&self.examples.goal)
            .chain(&self.examples.successor)
        {
            if !path.exists() {
                return Err(invalid(format!(
                    "example file {} does not exist",
                    path.display()
                )));
            }
        }
        Ok(())
    }

    /// The seed, which mock runs must declare.
    pub fn require_seed(&self) -> Result<u64, ConfigError> {
        self.seed.ok_or_else(|| ConfigError::Invalid {
            path: "config".to_string(),
            message: "mock runs need an explicit seed".to_string(),
        })
    }

    pub fn grounder_config(&self) -> GrounderConfig {
        GrounderConfig {
            endpoint: self.endpoint.url.clone(),
            model: self.endpoint.model.clone(),
            timeout: Duration::from_secs(self.endpoint.timeout_s),
            max_retries: self.endpoint.max_retries,
            temperature: self.endpoint.temperature,
            cache_dir: self.endpoint.cache_dir.clone(),
            noise: MockNoise {
                epsilon: self.mock.epsilon,
                spurious: self.mock.spurious,
                seed: self.seed.unwrap_or(0),
            },
        }
    }

    pub fn budget(&self) -> SearchBudget {
        SearchBudget {
            max_expansions: self.planner.max_expansions,
            max_wall: self.planner.max_wall_s.map(Duration::from_secs),
            max_plan_length: self.planner.max_plan_length,
        }
    }

    pub fn tiebreak(&self) -> Tiebreak {
        Tiebreak::parse(&self.planner.tiebreak).expect("validated at load")
    }

    pub fn schema_limits(&self) -> SchemaLimits {
        SchemaLimits {
            max_objects: self.schema.max_objects,
            max_atoms: self.schema.max_atoms,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let config = RunConfig::default();
        assert!(config.validate("default").is_ok());
        assert_eq!(config.budget().max_expansions, 1_000_000);
        assert_eq!(config.tiebreak(), Tiebreak::Novelty);
    }

    #[test]
    fn loads_and_resolves_relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        let examples = dir.path().join("objects.json");
        fs::write(&examples, "[]").unwrap();
        let config_path = dir.path().join("run.toml");
        fs::write(
            &config_path,
            r#"
seed = 7

[endpoint]
url = "http://localhost/v1/chat/completions"
model = "m"

[mock]
epsilon = 0.1

[planner]
tiebreak = "fifo"

[examples]
objects = ["objects.json"]
"#,
        )
        .unwrap();
        let config = RunConfig::load(&config_path).unwrap();
        assert_eq!(config.seed, Some(7));
        assert_eq!(config.tiebreak(), Tiebreak::Fifo);
        assert_eq!(config.examples.objects[0], examples);
        assert!((config.grounder_config().noise.epsilon - 0.1).abs() < 1e-12);
    }

    #[test]
    fn bad_epsilon_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let config_path = dir.path().join("run.toml");
        fs::write(&config_path, "[mock]\nepsilon = 1.5\n").unwrap();
        assert!(matches!(
            RunConfig::load(&config_path),
            Err(ConfigError::Invalid { .. })
        ));
    }

    #[test]
    fn missing_example_file_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let config_path = dir.path().join("run.toml");
        fs::write(&config_path, "[examples]\nobjects = [\"nope.json\"]\n").unwrap();
        assert!(RunConfig::load(&config_path).is_err());
    }

    #[test]
    fn seed_required_for_mock() {
        let config = RunConfig::default();
        assert!(config.require_seed().is_err());
        let config = RunConfig {
            seed: Some(3),
            ..RunConfig::default()
        };
        assert_eq!(config.require_seed().unwrap(), 3);
    }
}
