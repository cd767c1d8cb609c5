//! Generation harness: prompt strategies, provider abstraction, code
//! extraction, and the visual-feedback refinement loop.

mod provider;
mod refine;
mod templates;

pub use provider::{
    api_key_from_env, message_hash, ChatTransport, HttpProvider, HttpProviderConfig, MockProvider,
    Provider, ProviderError, TransportReply,
};
pub use refine::{
    refine_loop, ExecSummary, FeedbackKind, RefineConfig, RefineError, RefineRound,
    RefineTranscript, Termination,
};
pub use templates::{TemplateError, TemplateSet};

use crate::corpus::Sample;
use serde::{Deserialize, Serialize};
use thiserror::Error;

// ── message model ───────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    System,
    User,
    Assistant,
}

impl Role {
    pub fn name(self) -> &'static str {
        match self {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
        }
    }
}

/// Provider-neutral message content: text and/or base64 image payloads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum ContentPart {
    Text { text: String },
    Image { media_type: String, base64: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: Vec<ContentPart>,
}

impl ChatMessage {
    pub fn text(role: Role, text: impl Into<String>) -> ChatMessage {
        ChatMessage {
            role,
            content: vec![ContentPart::Text { text: text.into() }],
        }
    }

    /// Concatenated text parts.
    pub fn text_content(&self) -> String {
        let mut out = String::new();
        for part in &self.content {
            if let ContentPart::Text { text } = part {
                out.push_str(text);
            }
        }
        out
    }

    pub fn image_count(&self) -> usize {
        self.content
            .iter()
            .filter(|p| matches!(p, ContentPart::Image { .. }))
            .count()
    }
}

// ── sampling ────────────────────────────────────────────────────

/// One chat-completion request: `n` samples at a fixed temperature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    pub n: u32,
}

impl GenRequest {
    pub fn validate(&self) -> Result<(), GenError> {
        if self.n < 1 {
            return Err(GenError::BadRequest("n must be >= 1".into()));
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(GenError::BadRequest(format!(
                "temperature must be in [0, 2], got {}",
                self.temperature
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenResponse {
    pub completions: Vec<String>,
    /// Provider name, model, and any other reporting metadata.
    pub meta: std::collections::BTreeMap<String, String>,
}

/// The two sampling regimes: greedy decoding for pass@1 and nucleus
/// sampling for pass@k.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingRegime {
    Greedy,
    Nucleus,
}

impl SamplingRegime {
    pub fn temperature(self) -> f64 {
        match self {
            SamplingRegime::Greedy => 0.0,
            SamplingRegime::Nucleus => 0.9,
        }
    }

    /// Greedy always requests one sample; nucleus requests the configured
    /// count (default 5).
    pub fn sample_count(self, configured_n: u32) -> u32 {
        match self {
            SamplingRegime::Greedy => 1,
            SamplingRegime::Nucleus => configured_n,
        }
    }

    pub fn build_request(
        self,
        model: impl Into<String>,
        messages: Vec<ChatMessage>,
        configured_n: u32,
    ) -> GenRequest {
        GenRequest {
            model: model.into(),
            messages,
            temperature: self.temperature(),
            n: self.sample_count(configured_n),
        }
    }
}

// ── strategies ──────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    ZeroShot,
    ZeroShotCot,
    OneShot,
    FewShot,
    OneShotCot,
}

impl StrategyKind {
    pub fn all() -> [StrategyKind; 5] {
        [
            StrategyKind::ZeroShot,
            StrategyKind::ZeroShotCot,
            StrategyKind::OneShot,
            StrategyKind::FewShot,
            StrategyKind::OneShotCot,
        ]
    }

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::ZeroShot => "zero_shot",
            StrategyKind::ZeroShotCot => "zero_shot_cot",
            StrategyKind::OneShot => "one_shot",
            StrategyKind::FewShot => "few_shot",
            StrategyKind::OneShotCot => "one_shot_cot",
        }
    }

    pub fn from_name(name: &str) -> Option<StrategyKind> {
        StrategyKind::all().into_iter().find(|k| k.name() == name)
    }

    /// In-context exemplars the strategy embeds: 1 for one-shot, 3 for
    /// few-shot.
    pub fn exemplar_count(self) -> usize {
        match self {
            StrategyKind::ZeroShot | StrategyKind::ZeroShotCot => 0,
            StrategyKind::OneShot | StrategyKind::OneShotCot => 1,
            StrategyKind::FewShot => 3,
        }
    }

    /// Whether exemplars carry a reasoning block.
    pub fn exemplar_includes_reasoning(self) -> bool {
        matches!(self, StrategyKind::OneShotCot)
    }
}

/// A strategy plus the concrete exemplar samples it embeds. Exemplars must
/// be disjoint from the evaluated sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Strategy {
    pub kind: StrategyKind,
    pub exemplar_ids: Vec<String>,
}

impl Strategy {
    /// Chooses the first eligible corpus samples (in id order) as
    /// exemplars, skipping the evaluated sample.
    pub fn with_default_exemplars(
        kind: StrategyKind,
        corpus: &[Sample],
        evaluated_id: &str,
    ) -> Result<Strategy, GenError> {
        let ids: Vec<String> = corpus
            .iter()
            .filter(|s| s.id != evaluated_id)
            .take(kind.exemplar_count())
            .map(|s| s.id.clone())
            .collect();
        let strategy = Strategy {
            kind,
            exemplar_ids: ids,
        };
        strategy.validate(corpus, evaluated_id)?;
        Ok(strategy)
    }

    pub fn validate(&self, corpus: &[Sample], evaluated_id: &str) -> Result<(), GenError> {
        if self.exemplar_ids.len() != self.kind.exemplar_count() {
            return Err(GenError::BadStrategy(format!(
                "{} needs {} exemplar(s), got {}",
                self.kind.name(),
                self.kind.exemplar_count(),
                self.exemplar_ids.len()
            )));
        }
        for id in &self.exemplar_ids {
            if id == evaluated_id {
                return Err(GenError::BadStrategy(format!(
                    "exemplar `{id}` is the evaluated sample"
                )));
            }
            if !corpus.iter().any(|s| &s.id == id) {
                return Err(GenError::MissingExemplar { id: id.clone() });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GenError {
    #[error("exemplar sample `{id}` is not in the corpus")]
    MissingExemplar { id: String },
    #[error("bad strategy: {0}")]
    BadStrategy(String),
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Provider(#[from] ProviderError),
}

// ── prompt assembly ─────────────────────────────────────────────

/// Assembles the system and user messages for one sample under a strategy.
/// Deterministic for fixed inputs and template version.
pub fn build_prompt(
    strategy: &Strategy,
    sample: &Sample,
    corpus: &[Sample],
    templates: &TemplateSet,
) -> Result<Vec<ChatMessage>, GenError> {
    strategy.validate(corpus, &sample.id)?;

    let mut exemplars = String::new();
    for id in &strategy.exemplar_ids {
        let exemplar = corpus
            .iter()
            .find(|s| &s.id == id)
            .ok_or_else(|| GenError::MissingExemplar { id: id.clone() })?;
        let block = if strategy.kind.exemplar_includes_reasoning() {
            let reasoning = derive_reasoning(exemplar)?;
            templates.render_exemplar_cot(
                &exemplar.prompt,
                &reasoning,
                &exemplar.canonical_program,
            )?
        } else {
            templates.render_exemplar(&exemplar.prompt, &exemplar.canonical_program)?
        };
        exemplars.push_str(&block);
    }

    let user_text = templates.render_user(strategy.kind, &sample.prompt, &exemplars)?;
    Ok(vec![
        ChatMessage::text(Role::System, templates.system()),
        ChatMessage::text(Role::User, user_text),
    ])
}

/// Mechanically derives a step-by-step reasoning block from an exemplar's
/// canonical program: each primitive's shape, dimensions, position, and
/// rotation, in creation order.
pub fn derive_reasoning(sample: &Sample) -> Result<String, GenError> {
    use crate::shapescript::{evaluate, parse, ExecLimits, ShapeParams};
    let program = parse(&sample.canonical_program).map_err(|e| {
        GenError::BadStrategy(format!("exemplar `{}` does not parse: {e}", sample.id))
    })?;
    let instances = evaluate(&program, &ExecLimits::default()).map_err(|e| {
        GenError::BadStrategy(format!("exemplar `{}` does not run: {e}", sample.id))
    })?;

    let mut lines = vec![format!(
        "The object consists of {} primitive elements:",
        instances.len()
    )];
    for (i, inst) in instances.iter().enumerate() {
        let shape = match inst.shape {
            ShapeParams::Cuboid { size } => {
                format!("a cuboid {} x {} x {} m", size.x, size.y, size.z)
            }
            ShapeParams::Cylinder { radius, depth } => {
                format!("a cylinder of radius {radius} m and depth {depth} m")
            }
            ShapeParams::Sphere { radius } => format!("a sphere of radius {radius} m"),
            ShapeParams::Cone {
                radius_bottom,
                radius_top,
                depth,
            } => format!(
                "a cone with bottom radius {radius_bottom} m, top radius {radius_top} m, depth {depth} m"
            ),
        };
        let mut line = format!(
            "{}. Element {}: {shape}, centered at ({}, {}, {})",
            i + 1,
            i + 1,
            inst.location.x,
            inst.location.y,
            inst.location.z
        );
        if inst.rotation != crate::geom::Vec3::ZERO {
            line.push_str(&format!(
                ", rotated (XYZ Euler, radians) by ({}, {}, {})",
                inst.rotation.x, inst.rotation.y, inst.rotation.z
            ));
        }
        line.push('.');
        lines.push(line);
    }
    lines.push(
        "Declaring each dimension as a variable and building shared parts with functions \
         keeps the program faithful to these values."
            .to_string(),
    );
    Ok(lines.join("\n"))
}

/// Extracts program source from a model reply: the content of the last
/// fenced code block, or the whole reply trimmed when no fence exists.
/// Never fails.
pub fn extract_code(response_text: &str) -> String {
    let mut blocks: Vec<String> = Vec::new();
    let mut current: Option<String> = None;
    for line in response_text.lines() {
        let fence = line.trim_start().starts_with("```");
        match (&mut current, fence) {
            (None, true) => current = Some(String::new()),
            (Some(block), true) => {
                blocks.push(std::mem::take(block));
                current = None;
            }
            (Some(block), false) => {
                block.push_str(line);
                block.push('\n');
            }
            (None, false) => {}
        }
    }
    match blocks.last() {
        Some(block) => block.trim_end().to_string(),
        None => response_text.trim().to_string(),
    }
}
