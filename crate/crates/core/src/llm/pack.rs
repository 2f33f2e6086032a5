use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::Deserialize;

use super::LlmError;
use crate::text::SeverityLevel;

pub const TEMPLATES_PER_SEVERITY: u8 = 4;

const DEFAULT_PACK: &str = include_str!("../../packs/default.toml");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub severity: SeverityLevel,
    pub template_id: u8,
    pub system_text: String,
    pub user_text: String,
}

/// Sixteen templates, four per severity, sorted by (severity, id).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptPack {
    /// Model the templates were written for, if any.
    pub model: Option<String>,
    pub anchors: Vec<String>,
    templates: Vec<PromptTemplate>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PackFile {
    model: Option<String>,
    #[serde(default)]
    anchors: Vec<String>,
    pack: BTreeMap<String, Vec<TemplateEntry>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TemplateEntry {
    id: Option<u8>,
    system: String,
    user: String,
}

fn malformed(msg: impl Into<String>) -> LlmError {
    LlmError::PackMalformed(msg.into())
}

impl PromptPack {
    /// The built-in pack.
    pub fn builtin() -> PromptPack {
        PromptPack::from_toml_str(DEFAULT_PACK).expect("built-in pack is well formed")
    }

    /// Parses a pack. Template ids default to their position (1-based).
    /// `{anchors}` in a user segment expands to the anchor list.
    pub fn from_toml_str(text: &str) -> Result<PromptPack, LlmError> {
        let file: PackFile = toml::from_str(text).map_err(|e| malformed(e.to_string()))?;
        let anchors_text = file.anchors.join("; ");
        let mut templates = Vec::new();
        let mut seen_severities = BTreeSet::new();

        for (key, entries) in &file.pack {
            let severity: SeverityLevel = key
                .parse()
                .map_err(|_| malformed(format!("unknown severity `{key}`")))?;
            if !seen_severities.insert(severity) {
                return Err(malformed(format!("severity {severity} listed twice")));
            }
            let mut ids = BTreeSet::new();
            for (pos, entry) in entries.iter().enumerate() {
                let id = entry.id.unwrap_or(pos as u8 + 1);
                if !(1..=TEMPLATES_PER_SEVERITY).contains(&id) {
                    return Err(malformed(format!(
                        "{severity}: template id {id} outside 1..=4"
                    )));
                }
                if !ids.insert(id) {
                    return Err(malformed(format!("duplicate template ({severity}, {id})")));
                }
                if entry.system.trim().is_empty() || entry.user.trim().is_empty() {
                    return Err(malformed(format!(
                        "({severity}, {id}) has an empty segment"
                    )));
                }
                templates.push(PromptTemplate {
                    severity,
                    template_id: id,
                    system_text: entry.system.trim().to_string(),
                    user_text: entry.user.trim().replace("{anchors}", &anchors_text),
                });
            }
            if ids.len() != TEMPLATES_PER_SEVERITY as usize {
                return Err(malformed(format!(
                    "{severity} has {} templates, expected {TEMPLATES_PER_SEVERITY}",
                    ids.len()
                )));
            }
        }
        if let Some(missing) = SeverityLevel::ALL
            .iter()
            .find(|s| !seen_severities.contains(s))
        {
            return Err(malformed(format!("missing severity {missing}")));
        }
        templates.sort_by_key(|t| (t.severity, t.template_id));
        Ok(PromptPack {
            model: file.model,
            anchors: file.anchors,
            templates,
        })
    }

    pub fn templates(&self) -> &[PromptTemplate] {
        &self.templates
    }

    pub fn get(&self, severity: SeverityLevel, template_id: u8) -> Option<&PromptTemplate> {
        self.templates
            .iter()
            .find(|t| t.severity == severity && t.template_id == template_id)
    }
}

pub fn load_prompt_pack(path: &Path) -> Result<PromptPack, LlmError> {
    let text = std::fs::read_to_string(path).map_err(|source| LlmError::PackIo {
        path: path.to_path_buf(),
        source,
    })?;
    PromptPack::from_toml_str(&text)
}
