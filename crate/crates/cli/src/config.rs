//! Run configuration file (TOML). See `docs/run_config.example.toml` for
//! the annotated reference.

use serde::{Deserialize, Serialize};
use shapebench_core::genclient::{SamplingRegime, StrategyKind};
use shapebench_core::geomtest::{Delta, MatchConfig};
use shapebench_core::meshgen::TessellationDefaults;
use shapebench_core::metrics::ClassifyConfig;
use shapebench_core::shapescript::ExecLimits;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Corpus directory.
    pub corpus: PathBuf,
    /// Generation strategy name: zero_shot | zero_shot_cot | one_shot |
    /// few_shot | one_shot_cot.
    pub strategy: String,
    /// Sampling regime: greedy | nucleus.
    #[serde(default = "default_regime")]
    pub regime: String,
    /// Attempts per sample under nucleus sampling (greedy always runs 1).
    #[serde(default = "default_n")]
    pub n: u32,
    /// pass@k columns to report; every k must satisfy 1 <= k <= attempts.
    #[serde(default = "default_ks")]
    pub ks: Vec<u64>,
    /// Provider: mock | live.
    pub provider: String,
    /// Fixture directory (mock provider only).
    #[serde(default)]
    pub fixtures: Option<PathBuf>,
    /// Worker threads over samples.
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    /// Output directory for report.json / report.csv.
    pub out_dir: PathBuf,
    /// Seed for the dispatch-order shuffle (mock runs only; reports are
    /// id-ordered regardless).
    #[serde(default)]
    pub seed: u64,
    /// Refinement rounds per attempt; 1 means generate once, no feedback.
    #[serde(default = "default_refine_rounds")]
    pub refine_rounds: u32,
    /// Template directory; the built-in templates when absent.
    #[serde(default)]
    pub templates: Option<PathBuf>,
    /// Model identifier recorded in requests and reports.
    #[serde(default = "default_model")]
    pub model: String,
    #[serde(default, rename = "match")]
    pub match_overrides: MatchSection,
    #[serde(default)]
    pub provider_live: LiveSection,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchSection {
    /// Relative delta as a fraction of the truth bbox diagonal.
    pub delta_rel: Option<f64>,
    /// Absolute delta in meters; takes precedence over delta_rel.
    pub delta_abs: Option<f64>,
    pub eigen_tie_tol: Option<f64>,
    /// Structural-vs-spatial classification threshold.
    pub t_struct: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiveSection {
    pub endpoint: String,
    /// Environment variable holding the API credential.
    pub api_key_env: String,
    #[serde(default = "default_true")]
    pub supports_images: bool,
    #[serde(default = "default_max_concurrent")]
    pub max_concurrent: usize,
}

impl Default for LiveSection {
    fn default() -> Self {
        LiveSection {
            endpoint: "https://api.openai.com/v1".into(),
            api_key_env: "SHAPEBENCH_API_KEY".into(),
            supports_images: true,
            max_concurrent: default_max_concurrent(),
        }
    }
}

fn default_regime() -> String {
    "greedy".into()
}
fn default_n() -> u32 {
    5
}
fn default_ks() -> Vec<u64> {
    vec![1]
}
fn default_parallelism() -> usize {
    1
}
fn default_refine_rounds() -> u32 {
    1
}
fn default_model() -> String {
    "mock-model".into()
}
fn default_true() -> bool {
    true
}
fn default_max_concurrent() -> usize {
    4
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
        let config: RunConfig = toml::from_str(&text)
            .map_err(|e| anyhow::anyhow!("bad config {}: {e}", path.display()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.strategy_kind()?;
        self.sampling_regime()?;
        if self.provider != "mock" && self.provider != "live" {
            anyhow::bail!("provider must be `mock` or `live`, got `{}`", self.provider);
        }
        if self.provider == "mock" && self.fixtures.is_none() {
            anyhow::bail!("mock provider requires a `fixtures` directory");
        }
        if self.parallelism < 1 {
            anyhow::bail!("parallelism must be >= 1");
        }
        let attempts = self.attempts_per_sample();
        if self.ks.is_empty() {
            anyhow::bail!("ks must not be empty");
        }
        for &k in &self.ks {
            if k < 1 || k > attempts as u64 {
                anyhow::bail!("k={k} out of range: need 1 <= k <= n ({attempts})");
            }
        }
        if self.refine_rounds < 1 {
            anyhow::bail!("refine_rounds must be >= 1");
        }
        for (name, value) in [
            ("delta_rel", self.match_overrides.delta_rel),
            ("delta_abs", self.match_overrides.delta_abs),
            ("t_struct", self.match_overrides.t_struct),
        ] {
            if let Some(v) = value {
                if !(v.is_finite() && v > 0.0) {
                    anyhow::bail!("{name} must be positive and finite, got {v}");
                }
            }
        }
        if let Some(tol) = self.match_overrides.eigen_tie_tol {
            if !(tol > 0.0 && tol < 1.0) {
                anyhow::bail!("eigen_tie_tol must be in (0, 1), got {tol}");
            }
        }
        Ok(())
    }

    pub fn strategy_kind(&self) -> anyhow::Result<StrategyKind> {
        StrategyKind::from_name(&self.strategy)
            .ok_or_else(|| anyhow::anyhow!("unknown strategy `{}`", self.strategy))
    }

    pub fn sampling_regime(&self) -> anyhow::Result<SamplingRegime> {
        match self.regime.as_str() {
            "greedy" => Ok(SamplingRegime::Greedy),
            "nucleus" => Ok(SamplingRegime::Nucleus),
            other => anyhow::bail!("unknown sampling regime `{other}`"),
        }
    }

    /// Attempts actually issued per sample under the configured regime.
    pub fn attempts_per_sample(&self) -> u32 {
        match self.regime.as_str() {
            "greedy" => 1,
            _ => self.n,
        }
    }

    /// Precedence: meta.json override > config file > defaults. This
    /// builds the config-file layer.
    pub fn match_config(&self) -> MatchConfig {
        let mut cfg = MatchConfig::default();
        if let Some(rel) = self.match_overrides.delta_rel {
            cfg.delta = Delta::Relative(rel);
        }
        if let Some(abs) = self.match_overrides.delta_abs {
            cfg.delta = Delta::Absolute(abs);
        }
        if let Some(tol) = self.match_overrides.eigen_tie_tol {
            cfg.eigen_tie_tol = tol;
        }
        cfg
    }

    pub fn classify_config(&self) -> ClassifyConfig {
        let mut cfg = ClassifyConfig::default();
        if let Some(t) = self.match_overrides.t_struct {
            cfg.t_struct = t;
        }
        cfg
    }

    pub fn limits(&self) -> ExecLimits {
        ExecLimits::default()
    }

    pub fn tessellation(&self) -> TessellationDefaults {
        TessellationDefaults::default()
    }
}
