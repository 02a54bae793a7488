//! Project template files (TOML).
//!
//! ```toml
//! format_version = "1"
//! project_id = "dyad-study"            # optional in files passed to `create`
//! state = "draft"                      # draft | staged | published
//! instructions = "Rate how your partner came across."
//! logging_interval = 1.0
//! fps = 30
//! identifier_prompt = true
//! dyads = [["A", "B"]]                 # optional; two slots pair up implicitly
//!
//! [scale]
//! min = -7
//! max = 7
//! step = 1
//! neutral = 0
//! negative_label = "Disagreeable"
//! positive_label = "Agreeable"
//!
//! [media]
//! A = "dyad01_partner_b.mp4"
//! B = "dyad01_partner_a.mp4"
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ModelError, ProjectState, ProjectTemplate, RatingScale, DEFAULT_FPS};

pub const TEMPLATE_VERSION: &str = "1";

#[derive(Debug, Error)]
pub enum TemplateError {
    #[error("template syntax: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("unsupported template format_version {0:?}")]
    UnsupportedVersion(String),
    #[error(transparent)]
    Invalid(#[from] ModelError),
    #[error("template serialization: {0}")]
    Render(#[from] toml::ser::Error),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TemplateFile {
    #[serde(default = "default_version")]
    format_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    project_id: Option<String>,
    #[serde(default = "default_state")]
    state: ProjectState,
    #[serde(default)]
    instructions: String,
    #[serde(default = "default_interval")]
    logging_interval: f64,
    #[serde(default = "default_fps")]
    fps: u32,
    #[serde(default = "default_true")]
    identifier_prompt: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    dyads: Vec<(String, String)>,
    #[serde(default)]
    scale: ScaleSection,
    #[serde(default)]
    media: BTreeMap<String, String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScaleSection {
    min: i32,
    max: i32,
    step: i32,
    neutral: i32,
    negative_label: String,
    positive_label: String,
}

impl Default for ScaleSection {
    fn default() -> Self {
        let s = RatingScale::default();
        Self {
            min: s.min(),
            max: s.max(),
            step: s.step(),
            neutral: s.neutral(),
            negative_label: s.negative_label().into(),
            positive_label: s.positive_label().into(),
        }
    }
}

fn default_version() -> String {
    TEMPLATE_VERSION.into()
}

fn default_state() -> ProjectState {
    ProjectState::Draft
}

fn default_interval() -> f64 {
    1.0
}

fn default_fps() -> u32 {
    DEFAULT_FPS
}

fn default_true() -> bool {
    true
}

/// Parses a template. `project_id` overrides (or supplies) the id in the file.
pub fn parse_template(
    text: &str,
    project_id: Option<&str>,
) -> Result<ProjectTemplate, TemplateError> {
    let file: TemplateFile = toml::from_str(text)?;
    if file.format_version != TEMPLATE_VERSION {
        return Err(TemplateError::UnsupportedVersion(file.format_version));
    }
    let id = project_id
        .map(str::to_owned)
        .or(file.project_id)
        .ok_or_else(|| ModelError::InvalidTemplate("missing project_id".into()))?;
    let sc = file.scale;
    let template = ProjectTemplate {
        project_id: id,
        scale: RatingScale::new(
            sc.min,
            sc.max,
            sc.step,
            sc.neutral,
            sc.negative_label,
            sc.positive_label,
        )?,
        instructions: file.instructions,
        logging_interval: file.logging_interval,
        fps: file.fps,
        identifier_prompt_enabled: file.identifier_prompt,
        media_entries: file.media,
        dyads: file.dyads,
        state: file.state,
    };
    template.check()?;
    Ok(template)
}

pub fn render_template(template: &ProjectTemplate) -> Result<String, TemplateError> {
    let s = &template.scale;
    let file = TemplateFile {
        format_version: TEMPLATE_VERSION.into(),
        project_id: Some(template.project_id.clone()),
        state: template.state,
        instructions: template.instructions.clone(),
        logging_interval: template.logging_interval,
        fps: template.fps,
        identifier_prompt: template.identifier_prompt_enabled,
        dyads: template.dyads.clone(),
        scale: ScaleSection {
            min: s.min(),
            max: s.max(),
            step: s.step(),
            neutral: s.neutral(),
            negative_label: s.negative_label().into(),
            positive_label: s.positive_label().into(),
        },
        media: template.media_entries.clone(),
    };
    Ok(toml::to_string(&file)?)
}
