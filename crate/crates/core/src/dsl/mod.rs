//! Textual feature-model language (`.fm` files).
//!
//! ```text
//! model CADPartial
//! feature CAD {
//!   mandatory {
//!     v1 { xor { v1.1 v1.2 } }
//!     v2
//!   }
//! }
//! constraints {
//!   v2.3.1 requires v1.1
//! }
//! ```
//!
//! Nested features may be written with or without the `feature` keyword.
//! Identifiers may contain dots, so there is no attribute-access syntax.
//! `#` starts a comment that runs to the end of the line.

mod lexer;
mod parser;

use std::fmt::{self, Write as _};

use serde::Serialize;

use crate::model::{Feature, FeatureModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct SourceSpan {
    /// 1-based.
    pub line: usize,
    /// 1-based, counted in characters.
    pub column: usize,
    pub length: usize,
}

impl SourceSpan {
    pub fn new(line: usize, column: usize, length: usize) -> Self {
        SourceSpan {
            line,
            column,
            length: length.max(1),
        }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ParseErrorCode {
    Lexical,
    Syntax,
    DuplicateFeature,
    UnknownFeature,
    SelfConstraint,
    GroupTooSmall,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParseError {
    pub span: SourceSpan,
    pub code: ParseErrorCode,
    pub expected: String,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {:?}: expected {}, found {}",
            self.span, self.code, self.expected, self.found
        )
    }
}

impl std::error::Error for ParseError {}

/// Parses a model file. On failure every error found in one pass is returned,
/// sorted by position.
pub fn parse_model(source: &str) -> Result<FeatureModel, Vec<ParseError>> {
    parser::parse(source)
}

/// Canonical text for `model`: two-space indent, declaration order kept.
pub fn serialize_model(model: &FeatureModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "model {}", model.name);
    let _ = writeln!(out, "feature {} {{", model.root.id);
    write_groups(&mut out, &model.root, 1);
    out.push_str("}\n");
    if !model.constraints.is_empty() {
        out.push_str("constraints {\n");
        for c in &model.constraints {
            let _ = writeln!(out, "  {c}");
        }
        out.push_str("}\n");
    }
    out
}

fn write_groups(out: &mut String, feature: &Feature, depth: usize) {
    let pad = "  ".repeat(depth);
    for group in &feature.groups {
        let _ = writeln!(out, "{pad}{} {{", group.kind);
        for child in &group.children {
            if child.groups.is_empty() {
                let _ = writeln!(out, "{pad}  {}", child.id);
            } else {
                let _ = writeln!(out, "{pad}  {} {{", child.id);
                write_groups(out, child, depth + 2);
                let _ = writeln!(out, "{pad}  }}");
            }
        }
        let _ = writeln!(out, "{pad}}}");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_structure, ConstraintKind, FeatureId, GroupKind};

    const CAD_PARTIAL: &str = include_str!("../../examples/cad_partial.fm");

    #[test]
    fn cad_partial_corpus_file() {
        let m = parse_model(CAD_PARTIAL).unwrap();
        assert_eq!(m.name, "CADPartial");
        assert_eq!(m.feature_count(), 14);
        assert_eq!(m.constraints.len(), 2);
        assert!(validate_structure(&m).is_empty());
        let ids: Vec<String> = m.features_preorder().iter().map(|f| f.to_string()).collect();
        assert_eq!(
            ids,
            [
                "CAD", "v1", "v1.1", "v1.2", "v2", "v2.1", "v2.2", "v2.3", "v2.3.1", "v2.3.2",
                "v2.4", "v3", "v3.1", "v3.2"
            ]
        );
        assert_eq!(m.find("v1").unwrap().groups[0].kind, GroupKind::Alternative);
        assert_eq!(m.find("v2").unwrap().groups[0].kind, GroupKind::Or);
        assert_eq!(m.constraints[0].kind, ConstraintKind::Requires);
        assert_eq!(m.constraints[0].source, FeatureId::new("v2.3.1"));
        assert_eq!(m.constraints[0].target, FeatureId::new("v1.1"));
    }

    #[test]
    fn minimal_program() {
        let m = parse_model("model M feature Root { }").unwrap();
        assert_eq!(m.feature_count(), 1);
        assert!(m.root.groups.is_empty());
        assert_eq!(parse_model("model M feature Root").unwrap(), m);
        assert_eq!(serialize_model(&m), "model M\nfeature Root {\n}\n");
    }

    #[test]
    fn single_child_xor_is_group_too_small() {
        let errs = parse_model("model M feature Root { xor { A } }").unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].code, ParseErrorCode::GroupTooSmall);
        assert_eq!(errs[0].span, SourceSpan::new(1, 24, 3));
    }

    #[test]
    fn all_group_keywords() {
        let src = "model M feature R { mandatory { a } optional { b } xor { c d } \
                   xor? { e f } or { g h } or? { i j } }";
        let m = parse_model(src).unwrap();
        let kinds: Vec<_> = m.root.groups.iter().map(|g| g.kind).collect();
        assert_eq!(kinds, GroupKind::ALL);
    }

    #[test]
    fn feature_keyword_is_optional_for_children() {
        let a = parse_model("model M feature R { optional { feature a { or { feature b c } } } }")
            .unwrap();
        let b = parse_model("model M feature R { optional { a { or { b c } } } }").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn constraints_block_in_order() {
        let m = parse_model(
            "model M feature R { optional { a b } }\nconstraints {\n b excludes a\n a requires b\n}",
        )
        .unwrap();
        let text = serialize_model(&m);
        assert!(text.ends_with("constraints {\n  b excludes a\n  a requires b\n}\n"));
        assert_eq!(parse_model(&text).unwrap(), m);
    }

    #[test]
    fn cad_partial_round_trip() {
        let m = parse_model(CAD_PARTIAL).unwrap();
        assert_eq!(parse_model(&serialize_model(&m)).unwrap(), m);
    }

    #[test]
    fn reports_several_errors_in_one_pass() {
        let src = "model M\nfeature R {\n  optional { a $ b }\n  bogus { c }\n  or { d }\n}\n\
                   constraints {\n  a requires zz\n  a frobs b\n  b excludes b\n}\n";
        let errs = parse_model(src).unwrap_err();
        let codes: Vec<_> = errs.iter().map(|e| e.code).collect();
        assert_eq!(
            codes,
            vec![
                ParseErrorCode::Lexical,
                ParseErrorCode::Syntax,
                ParseErrorCode::GroupTooSmall,
                ParseErrorCode::UnknownFeature,
                ParseErrorCode::Syntax,
                ParseErrorCode::SelfConstraint,
            ]
        );
        assert_eq!(
            errs[1].to_string(),
            "4:3: Syntax: expected group kind or `}`, found `bogus`"
        );
    }

    #[test]
    fn duplicate_feature_points_at_redeclaration() {
        let errs = parse_model("model M feature R { optional { a a } }").unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].code, ParseErrorCode::DuplicateFeature);
        assert_eq!(errs[0].span.column, 34);
    }

    #[test]
    fn keywords_are_not_feature_names() {
        let errs = parse_model("model M feature R { optional { or } }").unwrap_err();
        assert_eq!(errs[0].found, "keyword `or`");
    }

    #[test]
    fn unterminated_input() {
        let errs = parse_model("model M feature R { optional { a ").unwrap_err();
        assert!(errs.iter().all(|e| e.code == ParseErrorCode::Syntax));
        assert!(parse_model("").is_err());
    }

    #[test]
    fn deep_nesting_is_an_error_not_a_crash() {
        let mut src = String::from("model M feature R ");
        for i in 0..5000 {
            src.push_str(&format!("{{ optional {{ f{i} "));
        }
        assert!(parse_model(&src).is_err());
    }
}
