//! Iterative generate -> execute -> render -> feed-back loop.
//!
//! Round 1 generates from the strategy prompt. Each later round feeds back
//! either the execution diagnostic (when the program failed to run) or the
//! three rendered orthographic views of what the program built, and asks
//! for a corrected program. The loop stops on the first passing program,
//! when the round budget runs out, or when the model stops producing code.

use super::templates::TemplateSet;
use super::{
    build_prompt, extract_code, ChatMessage, ContentPart, GenError, Provider, ProviderError, Role,
    SamplingRegime, Strategy,
};
use crate::corpus::Sample;
use crate::geomtest::{evaluate_pair, MatchConfig, Verdict};
use crate::meshgen::{assemble, extract_vertices, PointCloud, TessellationDefaults};
use crate::render::render_views;
use crate::shapescript::{evaluate, parse, ExecLimits};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ExecSummary {
    /// Parse or runtime failure, with the diagnostic text.
    Error {
        message: String,
    },
    EmptyObject,
    Evaluated {
        verdict: Verdict,
        chamfer: f64,
        worst: f64,
        delta: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum FeedbackKind {
    /// Terminal round: no feedback was sent.
    None,
    /// Diagnostic text for a program that failed to execute.
    ErrorText { error: String },
    /// Rendered views attached as images.
    Images { count: usize },
    /// Text-only fallback for providers without image input.
    TextFallback,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineRound {
    pub model_reply: String,
    pub program: String,
    pub exec: ExecSummary,
    pub feedback: FeedbackKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Pass,
    MaxRounds,
    /// The model produced an empty program, so there is nothing to refine.
    GiveUp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineTranscript {
    pub sample_id: String,
    pub rounds: Vec<RefineRound>,
    pub final_program: String,
    pub terminated_by: Termination,
}

/// Provider failure mid-loop, with everything recorded so far attached.
#[derive(Debug)]
pub struct RefineError {
    pub error: ProviderError,
    pub partial: RefineTranscript,
}

impl std::fmt::Display for RefineError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "refine loop aborted after {} round(s): {}",
            self.partial.rounds.len(),
            self.error
        )
    }
}

impl std::error::Error for RefineError {}

#[derive(Debug, Clone)]
pub struct RefineConfig {
    pub model: String,
    pub regime: SamplingRegime,
    pub max_rounds: u32,
    pub match_config: MatchConfig,
    pub limits: ExecLimits,
    pub tessellation: TessellationDefaults,
    /// Rendered view size in pixels for visual feedback.
    pub render_size: u32,
}

impl RefineConfig {
    pub fn new(model: impl Into<String>) -> RefineConfig {
        RefineConfig {
            model: model.into(),
            regime: SamplingRegime::Greedy,
            max_rounds: 3,
            match_config: MatchConfig::default(),
            limits: ExecLimits::default(),
            tessellation: TessellationDefaults::default(),
            render_size: 256,
        }
    }
}

/// Runs up to `cfg.max_rounds` generate/execute/feed-back rounds against
/// one sample. The transcript records every round even on early exit.
pub fn refine_loop(
    provider: &dyn Provider,
    sample: &Sample,
    strategy: &Strategy,
    corpus: &[Sample],
    templates: &TemplateSet,
    cfg: &RefineConfig,
) -> Result<RefineTranscript, Box<RefineError>> {
    let match_cfg = sample.match_config(&cfg.match_config);

    let mut transcript = RefineTranscript {
        sample_id: sample.id.clone(),
        rounds: Vec::new(),
        final_program: String::new(),
        terminated_by: Termination::MaxRounds,
    };

    let truth = match sample.truth_cloud(&cfg.limits, &cfg.tessellation) {
        Ok(cloud) => cloud,
        Err(e) => {
            return Err(Box::new(RefineError {
                error: ProviderError::InvalidRequest(format!(
                    "sample `{}` has no usable ground truth: {e}",
                    sample.id
                )),
                partial: transcript,
            }))
        }
    };

    let mut messages = match build_prompt(strategy, sample, corpus, templates) {
        Ok(m) => m,
        Err(GenError::Provider(e)) => {
            return Err(Box::new(RefineError {
                error: e,
                partial: transcript,
            }))
        }
        Err(e) => {
            return Err(Box::new(RefineError {
                error: ProviderError::InvalidRequest(e.to_string()),
                partial: transcript,
            }))
        }
    };

    for round in 1..=cfg.max_rounds {
        // Refinement consumes one completion per round.
        let request = cfg
            .regime
            .build_request(cfg.model.clone(), messages.clone(), 1);
        let response = match provider.generate(&request) {
            Ok(r) => r,
            Err(e) => {
                return Err(Box::new(RefineError {
                    error: e,
                    partial: transcript,
                }))
            }
        };
        let reply = response.completions.first().cloned().unwrap_or_default();
        let program = extract_code(&reply);
        let exec = run_program(&program, &truth, &match_cfg, cfg);

        let passed = matches!(
            exec,
            ExecSummary::Evaluated {
                verdict: Verdict::Pass,
                ..
            }
        );
        let gave_up = program.trim().is_empty();
        if passed || gave_up || round == cfg.max_rounds {
            transcript.rounds.push(RefineRound {
                model_reply: reply,
                program: program.clone(),
                exec,
                feedback: FeedbackKind::None,
            });
            transcript.final_program = program;
            transcript.terminated_by = if passed {
                Termination::Pass
            } else if gave_up {
                Termination::GiveUp
            } else {
                Termination::MaxRounds
            };
            return Ok(transcript);
        }

        // Build feedback for the next round.
        let feedback_message;
        let feedback_kind;
        match &exec {
            ExecSummary::Error { message } => {
                let text = templates
                    .render_refine_error(&sample.prompt, message)
                    .expect("refine_error placeholders are fixed");
                feedback_message = ChatMessage::text(Role::User, text);
                feedback_kind = FeedbackKind::ErrorText {
                    error: message.clone(),
                };
            }
            ExecSummary::EmptyObject => {
                let text = templates
                    .render_refine_error(&sample.prompt, "the program created no geometry")
                    .expect("refine_error placeholders are fixed");
                feedback_message = ChatMessage::text(Role::User, text);
                feedback_kind = FeedbackKind::ErrorText {
                    error: "the program created no geometry".into(),
                };
            }
            ExecSummary::Evaluated { worst, delta, .. } => {
                if provider.supports_images() {
                    match render_feedback_images(&program, cfg) {
                        Some(images) => {
                            let text = templates
                                .render_refine_visual(&sample.prompt)
                                .expect("refine_visual placeholders are fixed");
                            let mut content = vec![ContentPart::Text { text }];
                            let count = images.len();
                            content.extend(images);
                            feedback_message = ChatMessage {
                                role: Role::User,
                                content,
                            };
                            feedback_kind = FeedbackKind::Images { count };
                        }
                        None => {
                            let text = templates
                                .render_refine_fallback(&sample.prompt, *worst, *delta)
                                .expect("refine_fallback placeholders are fixed");
                            feedback_message = ChatMessage::text(Role::User, text);
                            feedback_kind = FeedbackKind::TextFallback;
                        }
                    }
                } else {
                    let text = templates
                        .render_refine_fallback(&sample.prompt, *worst, *delta)
                        .expect("refine_fallback placeholders are fixed");
                    feedback_message = ChatMessage::text(Role::User, text);
                    feedback_kind = FeedbackKind::TextFallback;
                }
            }
        }

        transcript.rounds.push(RefineRound {
            model_reply: reply.clone(),
            program,
            exec,
            feedback: feedback_kind,
        });
        messages.push(ChatMessage::text(Role::Assistant, reply));
        messages.push(feedback_message);
    }

    Ok(transcript)
}

fn run_program(
    source: &str,
    truth: &PointCloud,
    match_cfg: &MatchConfig,
    cfg: &RefineConfig,
) -> ExecSummary {
    let program = match parse(source) {
        Ok(p) => p,
        Err(e) => {
            return ExecSummary::Error {
                message: e.to_string(),
            }
        }
    };
    let instances = match evaluate(&program, &cfg.limits) {
        Ok(i) => i,
        Err(e) => {
            return ExecSummary::Error {
                message: e.to_string(),
            }
        }
    };
    let mesh = match assemble(&instances, &cfg.tessellation) {
        Ok(m) => m,
        Err(crate::meshgen::MeshError::EmptyObject) => return ExecSummary::EmptyObject,
        Err(e) => {
            return ExecSummary::Error {
                message: e.to_string(),
            }
        }
    };
    let cloud = extract_vertices(&mesh);
    match evaluate_pair(&cloud, truth, match_cfg) {
        Ok(outcome) => ExecSummary::Evaluated {
            verdict: outcome.verdict,
            chamfer: outcome.chamfer,
            worst: outcome.worst_match_distance,
            delta: outcome.delta_used,
        },
        Err(e) => ExecSummary::Error {
            message: e.to_string(),
        },
    }
}

fn render_feedback_images(program: &str, cfg: &RefineConfig) -> Option<Vec<ContentPart>> {
    use base64::Engine;
    let parsed = parse(program).ok()?;
    let instances = evaluate(&parsed, &cfg.limits).ok()?;
    let mesh = assemble(&instances, &cfg.tessellation).ok()?;
    let views = render_views(&mesh, cfg.render_size).ok()?;
    let mut parts = Vec::with_capacity(3);
    for view in &views {
        let png = view.to_png().ok()?;
        parts.push(ContentPart::Image {
            media_type: "image/png".into(),
            base64: base64::engine::general_purpose::STANDARD.encode(png),
        });
    }
    Some(parts)
}
