//! Pipeline configuration: a flat key=value file with CLI overrides layered
//! on top.

use kgqa_allocator::ScoreWeights;
use kgqa_llm::RemoteBackendConfig;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub enum BackendChoice {
    #[default]
    Rule,
    Remote {
        url: String,
        model: String,
        api_key_env: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClarificationMode {
    Interactive,
    #[default]
    FailFast,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AblationFlags {
    pub decomposer: bool,
    pub allocator: bool,
    pub verifier: bool,
    pub alignment: bool,
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub registry_path: PathBuf,
    pub backend: BackendChoice,
    pub weak_k: usize,
    pub weights: ScoreWeights,
    /// Counterfactual perturbations per query (m).
    pub perturbations: usize,
    pub fanout_cap: usize,
    pub clarification: ClarificationMode,
    pub ablation: AblationFlags,
    pub parallelism: usize,
    pub token_ceiling: Option<u64>,
    pub lexicon_path: Option<PathBuf>,
    pub template_path: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            registry_path: PathBuf::from("registry.json"),
            backend: BackendChoice::Rule,
            weak_k: kgqa_allocator::DEFAULT_WEAK_K,
            weights: ScoreWeights::default(),
            perturbations: kgqa_verifier::DEFAULT_PERTURBATIONS,
            fanout_cap: kgqa_synthesizer::DEFAULT_FANOUT_CAP,
            clarification: ClarificationMode::FailFast,
            ablation: AblationFlags::default(),
            parallelism: 1,
            token_ceiling: None,
            lexicon_path: None,
            template_path: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !self.weights.valid() {
            return Err(ConfigError::Invalid(
                "score weights must be non-negative and sum to 1".into(),
            ));
        }
        for (name, value) in [
            ("weak_k", self.weak_k),
            ("perturbations", self.perturbations),
            ("fanout_cap", self.fanout_cap),
            ("parallelism", self.parallelism),
        ] {
            if value < 1 {
                return Err(ConfigError::Invalid(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }

    pub fn remote_backend_config(&self) -> Option<RemoteBackendConfig> {
        match &self.backend {
            BackendChoice::Remote {
                url,
                model,
                api_key_env,
            } => Some(RemoteBackendConfig {
                url: url.clone(),
                model: model.clone(),
                api_key_env: api_key_env.clone(),
                timeout_secs: 30,
            }),
            BackendChoice::Rule => None,
        }
    }

    /// Loads a flat key=value file. Unknown keys are an error so typos do
    /// not pass silently; `#` starts a comment.
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let mut config = PipelineConfig::default();
        let mut backend_kind = String::from("rule");
        let mut backend_url = String::new();
        let mut backend_model = String::new();
        let mut backend_api_key_env: Option<String> = None;
        for (line_no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Parse {
                path: path.display().to_string(),
                message: format!("line {}: expected key = value", line_no + 1),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let parse_err = |message: String| ConfigError::Parse {
                path: path.display().to_string(),
                message: format!("line {}: {message}", line_no + 1),
            };
            match key {
                "registry" => config.registry_path = PathBuf::from(value),
                "backend.kind" => backend_kind = value.to_string(),
                "backend.url" => backend_url = value.to_string(),
                "backend.model" => backend_model = value.to_string(),
                "backend.api_key_env" => backend_api_key_env = Some(value.to_string()),
                "weak_k" => config.weak_k = value.parse().map_err(|e| parse_err(format!("{e}")))?,
                "weight.weak" => {
                    config.weights.weak = value.parse().map_err(|e| parse_err(format!("{e}")))?
                }
                "weight.strong" => {
                    config.weights.strong = value.parse().map_err(|e| parse_err(format!("{e}")))?
                }
                "weight.utility" => {
                    config.weights.utility = value.parse().map_err(|e| parse_err(format!("{e}")))?
                }
                "perturbations" => {
                    config.perturbations = value.parse().map_err(|e| parse_err(format!("{e}")))?
                }
                "fanout_cap" => {
                    config.fanout_cap = value.parse().map_err(|e| parse_err(format!("{e}")))?
                }
                "clarification" => {
                    config.clarification = match value {
                        "interactive" => ClarificationMode::Interactive,
                        "fail-fast" => ClarificationMode::FailFast,
                        other => return Err(parse_err(format!("unknown mode `{other}`"))),
                    }
                }
                "parallelism" => {
                    config.parallelism = value.parse().map_err(|e| parse_err(format!("{e}")))?
                }
                "token_ceiling" => {
                    config.token_ceiling =
                        Some(value.parse().map_err(|e| parse_err(format!("{e}")))?)
                }
                "lexicon" => config.lexicon_path = Some(PathBuf::from(value)),
                "templates" => config.template_path = Some(PathBuf::from(value)),
                "ablate.decomposer" => {
                    config.ablation.decomposer =
                        value.parse().map_err(|e| parse_err(format!("{e}")))?
                }
                "ablate.allocator" => {
                    config.ablation.allocator =
                        value.parse().map_err(|e| parse_err(format!("{e}")))?
                }
                "ablate.verifier" => {
                    config.ablation.verifier =
                        value.parse().map_err(|e| parse_err(format!("{e}")))?
                }
                "ablate.alignment" => {
                    config.ablation.alignment =
                        value.parse().map_err(|e| parse_err(format!("{e}")))?
                }
                other => return Err(parse_err(format!("unknown key `{other}`"))),
            }
        }
        if backend_kind == "remote" {
            config.backend = BackendChoice::Remote {
                url: backend_url,
                model: backend_model,
                api_key_env: backend_api_key_env,
            };
        }
        config.validate()?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_must_sum_to_one() {
        let mut config = PipelineConfig::default();
        config.weights.weak = 0.9;
        assert!(config.validate().is_err());
    }

    #[test]
    fn config_file_round_trip() {
        let dir = std::env::temp_dir().join(format!("kgqa-config-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("pipeline.conf");
        std::fs::write(
            &path,
            "# pipeline settings\nregistry = fixtures/registry.json\nweak_k = 4\nweight.weak = 0.2\nweight.strong = 0.6\nweight.utility = 0.2\nclarification = interactive\nablate.verifier = true\n",
        )
        .unwrap();
        let config = PipelineConfig::from_file(&path).unwrap();
        assert_eq!(config.weak_k, 4);
        assert_eq!(config.clarification, ClarificationMode::Interactive);
        assert!(config.ablation.verifier);
        assert!((config.weights.strong - 0.6).abs() < 1e-12);
        let _ = std::fs::remove_dir_all(&dir);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = std::env::temp_dir().join(format!("kgqa-config2-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("pipeline.conf");
        std::fs::write(&path, "weakk = 4\n").unwrap();
        assert!(PipelineConfig::from_file(&path).is_err());
        let _ = std::fs::remove_dir_all(&dir);
    }
}
