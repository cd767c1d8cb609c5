//! Versioned prompt templates with `{{name}}` placeholders.
//!
//! The normative templates live as text files in the repository's
//! `templates/` directory; the compiled-in defaults embed those same files.
//! A run can swap in a different template directory without rebuilding.

use super::StrategyKind;
use std::fs;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum TemplateError {
    #[error("template `{0}` is missing or unreadable: {1}")]
    Missing(String, String),
    #[error("template `{template}` leaves placeholder `{placeholder}` unfilled")]
    UnfilledPlaceholder {
        template: String,
        placeholder: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemplateSet {
    pub version: String,
    system: String,
    zero_shot: String,
    zero_shot_cot: String,
    one_shot: String,
    few_shot: String,
    one_shot_cot: String,
    exemplar_block: String,
    exemplar_cot_block: String,
    refine_error: String,
    refine_visual: String,
    refine_fallback: String,
}

impl TemplateSet {
    /// The templates shipped with the crate (the `templates/` directory at
    /// the repository root, embedded at compile time).
    pub fn builtin() -> TemplateSet {
        macro_rules! embed {
            ($name:literal) => {
                include_str!(concat!("../../../../templates/", $name)).to_string()
            };
        }
        TemplateSet {
            version: embed!("VERSION").trim().to_string(),
            system: embed!("system.txt"),
            zero_shot: embed!("zero_shot.txt"),
            zero_shot_cot: embed!("zero_shot_cot.txt"),
            one_shot: embed!("one_shot.txt"),
            few_shot: embed!("few_shot.txt"),
            one_shot_cot: embed!("one_shot_cot.txt"),
            exemplar_block: embed!("exemplar_block.txt"),
            exemplar_cot_block: embed!("exemplar_cot_block.txt"),
            refine_error: embed!("refine_error.txt"),
            refine_visual: embed!("refine_visual.txt"),
            refine_fallback: embed!("refine_fallback.txt"),
        }
    }

    /// Loads a template directory with the same layout as the shipped one.
    pub fn load(dir: &Path) -> Result<TemplateSet, TemplateError> {
        let read = |name: &str| -> Result<String, TemplateError> {
            fs::read_to_string(dir.join(name))
                .map_err(|e| TemplateError::Missing(name.to_string(), e.to_string()))
        };
        Ok(TemplateSet {
            version: read("VERSION")?.trim().to_string(),
            system: read("system.txt")?,
            zero_shot: read("zero_shot.txt")?,
            zero_shot_cot: read("zero_shot_cot.txt")?,
            one_shot: read("one_shot.txt")?,
            few_shot: read("few_shot.txt")?,
            one_shot_cot: read("one_shot_cot.txt")?,
            exemplar_block: read("exemplar_block.txt")?,
            exemplar_cot_block: read("exemplar_cot_block.txt")?,
            refine_error: read("refine_error.txt")?,
            refine_visual: read("refine_visual.txt")?,
            refine_fallback: read("refine_fallback.txt")?,
        })
    }

    pub fn system(&self) -> &str {
        &self.system
    }

    pub fn render_user(
        &self,
        kind: StrategyKind,
        prompt: &str,
        exemplars: &str,
    ) -> Result<String, TemplateError> {
        let (name, template) = match kind {
            StrategyKind::ZeroShot => ("zero_shot", &self.zero_shot),
            StrategyKind::ZeroShotCot => ("zero_shot_cot", &self.zero_shot_cot),
            StrategyKind::OneShot => ("one_shot", &self.one_shot),
            StrategyKind::FewShot => ("few_shot", &self.few_shot),
            StrategyKind::OneShotCot => ("one_shot_cot", &self.one_shot_cot),
        };
        render(
            name,
            template,
            &[("prompt", prompt), ("exemplars", exemplars)],
        )
    }

    pub fn render_exemplar(&self, prompt: &str, program: &str) -> Result<String, TemplateError> {
        render(
            "exemplar_block",
            &self.exemplar_block,
            &[("exemplar_prompt", prompt), ("exemplar_program", program)],
        )
    }

    pub fn render_exemplar_cot(
        &self,
        prompt: &str,
        reasoning: &str,
        program: &str,
    ) -> Result<String, TemplateError> {
        render(
            "exemplar_cot_block",
            &self.exemplar_cot_block,
            &[
                ("exemplar_prompt", prompt),
                ("exemplar_reasoning", reasoning),
                ("exemplar_program", program),
            ],
        )
    }

    pub fn render_refine_error(&self, prompt: &str, error: &str) -> Result<String, TemplateError> {
        render(
            "refine_error",
            &self.refine_error,
            &[("prompt", prompt), ("error", error)],
        )
    }

    pub fn render_refine_visual(&self, prompt: &str) -> Result<String, TemplateError> {
        render("refine_visual", &self.refine_visual, &[("prompt", prompt)])
    }

    pub fn render_refine_fallback(
        &self,
        prompt: &str,
        worst: f64,
        delta: f64,
    ) -> Result<String, TemplateError> {
        render(
            "refine_fallback",
            &self.refine_fallback,
            &[
                ("prompt", prompt),
                ("worst", &format!("{worst:.6}")),
                ("delta", &format!("{delta:.6}")),
            ],
        )
    }
}

/// Substitutes `{{name}}` placeholders; errors if any placeholder survives.
fn render(
    template_name: &str,
    template: &str,
    vars: &[(&str, &str)],
) -> Result<String, TemplateError> {
    let mut out = template.to_string();
    for (name, value) in vars {
        out = out.replace(&format!("{{{{{name}}}}}"), value);
    }
    if let Some(start) = out.find("{{") {
        let rest = &out[start + 2..];
        let placeholder = rest
            .split("}}")
            .next()
            .unwrap_or("")
            .chars()
            .take(40)
            .collect::<String>();
        return Err(TemplateError::UnfilledPlaceholder {
            template: template_name.to_string(),
            placeholder,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_matches_template_directory() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../templates");
        let loaded = TemplateSet::load(&dir).unwrap();
        assert_eq!(loaded, TemplateSet::builtin());
    }

    #[test]
    fn unfilled_placeholder_is_an_error() {
        let err = render("t", "hello {{missing}}", &[]).unwrap_err();
        assert!(matches!(err, TemplateError::UnfilledPlaceholder { .. }));
    }

    #[test]
    fn load_missing_directory_errors() {
        let err = TemplateSet::load(Path::new("/nonexistent-template-dir")).unwrap_err();
        assert!(matches!(err, TemplateError::Missing(..)));
    }
}
