//! Configuration files: one decision per line, `+feature` selects and
//! `-feature` deselects. Blank lines and `#` comments are ignored; features
//! not listed stay undecided.

use std::fmt::Write as _;

use thiserror::Error;

use crate::encode::EncodedModel;
use crate::model::{Configuration, Decision, FeatureId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigFileError {
    #[error("line {line}: expected `+feature` or `-feature`, found `{text}`")]
    Malformed { line: usize, text: String },
    #[error("line {line}: unknown feature `{feature}`")]
    UnknownFeature { line: usize, feature: String },
    #[error("line {line}: feature `{feature}` is decided twice")]
    Duplicate { line: usize, feature: String },
}

pub fn parse_configuration(
    text: &str,
    model: &EncodedModel,
) -> Result<Configuration, ConfigFileError> {
    let mut cfg = Configuration::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (decision, name) = match content.split_at(1) {
            ("+", rest) => (Decision::Selected, rest.trim()),
            ("-", rest) => (Decision::Deselected, rest.trim()),
            _ => {
                return Err(ConfigFileError::Malformed {
                    line,
                    text: content.to_string(),
                })
            }
        };
        if !FeatureId::is_valid_lexeme(name) {
            return Err(ConfigFileError::Malformed {
                line,
                text: content.to_string(),
            });
        }
        let id = model
            .feature(name)
            .ok_or_else(|| ConfigFileError::UnknownFeature {
                line,
                feature: name.to_string(),
            })?;
        if cfg.get(name) != Decision::Undecided {
            return Err(ConfigFileError::Duplicate {
                line,
                feature: name.to_string(),
            });
        }
        cfg.set(id.clone(), decision);
    }
    Ok(cfg)
}

/// Decided features in model preorder.
pub fn write_configuration(cfg: &Configuration, model: &EncodedModel) -> String {
    let mut out = String::new();
    for f in model.features() {
        match cfg.get(f.as_str()) {
            Decision::Selected => {
                let _ = writeln!(out, "+{f}");
            }
            Decision::Deselected => {
                let _ = writeln!(out, "-{f}");
            }
            Decision::Undecided => {}
        }
    }
    out
}
