//! In-memory feature models, configurations and analysis results.
//!
//! A [`FeatureModel`] is an owned tree: every [`Feature`] holds its child
//! groups, and each [`ChildGroup`] owns its child features. Structural rules
//! that the type system cannot express (identifier syntax, unique ids, group
//! arity, resolvable constraint endpoints) are checked by
//! [`validate_structure`].

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// Words the DSL reserves; a feature may not be named after one of them.
pub const RESERVED_WORDS: &[&str] = &[
    "model",
    "feature",
    "constraints",
    "requires",
    "excludes",
    "mandatory",
    "optional",
    "xor",
    "or",
];

/// Identifier of a feature. Case-sensitive, cheap to clone.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureId(Arc<str>);

impl FeatureId {
    pub fn new(id: impl AsRef<str>) -> Self {
        FeatureId(Arc::from(id.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Whether `s` matches `[A-Za-z_][A-Za-z0-9_.]*`.
    pub fn is_valid_lexeme(s: &str) -> bool {
        let mut chars = s.chars();
        match chars.next() {
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
            _ => return false,
        }
        chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
    }
}

impl fmt::Debug for FeatureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl fmt::Display for FeatureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for FeatureId {
    fn from(s: &str) -> Self {
        FeatureId::new(s)
    }
}

impl std::borrow::Borrow<str> for FeatureId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// The six parent/child relationship kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupKind {
    Mandatory,
    Optional,
    Alternative,
    OptionalAlternative,
    Or,
    OptionalOr,
}

impl GroupKind {
    pub const ALL: [GroupKind; 6] = [
        GroupKind::Mandatory,
        GroupKind::Optional,
        GroupKind::Alternative,
        GroupKind::OptionalAlternative,
        GroupKind::Or,
        GroupKind::OptionalOr,
    ];

    /// DSL keyword for this kind.
    pub fn keyword(self) -> &'static str {
        match self {
            GroupKind::Mandatory => "mandatory",
            GroupKind::Optional => "optional",
            GroupKind::Alternative => "xor",
            GroupKind::OptionalAlternative => "xor?",
            GroupKind::Or => "or",
            GroupKind::OptionalOr => "or?",
        }
    }

    pub fn from_keyword(kw: &str) -> Option<GroupKind> {
        GroupKind::ALL.into_iter().find(|k| k.keyword() == kw)
    }

    /// Smallest legal number of children.
    pub fn min_children(self) -> usize {
        match self {
            GroupKind::Mandatory | GroupKind::Optional => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

impl Serialize for GroupKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.keyword())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Feature {
    pub id: FeatureId,
    pub display_name: String,
    pub groups: Vec<ChildGroup>,
}

impl Feature {
    pub fn leaf(id: impl Into<FeatureId>) -> Self {
        let id = id.into();
        Feature {
            display_name: id.to_string(),
            id,
            groups: Vec::new(),
        }
    }

    pub fn with_group(mut self, kind: GroupKind, children: Vec<Feature>) -> Self {
        self.groups.push(ChildGroup { kind, children });
        self
    }

    pub fn children(&self) -> impl Iterator<Item = &Feature> {
        self.groups.iter().flat_map(|g| g.children.iter())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChildGroup {
    pub kind: GroupKind,
    pub children: Vec<Feature>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintKind {
    Requires,
    Excludes,
}

impl ConstraintKind {
    pub fn keyword(self) -> &'static str {
        match self {
            ConstraintKind::Requires => "requires",
            ConstraintKind::Excludes => "excludes",
        }
    }
}

/// A cross-tree dependency between two features.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CrossTreeConstraint {
    pub kind: ConstraintKind,
    pub source: FeatureId,
    pub target: FeatureId,
}

impl CrossTreeConstraint {
    pub fn requires(source: impl Into<FeatureId>, target: impl Into<FeatureId>) -> Self {
        CrossTreeConstraint {
            kind: ConstraintKind::Requires,
            source: source.into(),
            target: target.into(),
        }
    }

    pub fn excludes(source: impl Into<FeatureId>, target: impl Into<FeatureId>) -> Self {
        CrossTreeConstraint {
            kind: ConstraintKind::Excludes,
            source: source.into(),
            target: target.into(),
        }
    }
}

impl fmt::Display for CrossTreeConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.source, self.kind.keyword(), self.target)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FeatureModel {
    pub name: String,
    pub root: Feature,
    pub constraints: Vec<CrossTreeConstraint>,
}

impl FeatureModel {
    pub fn new(name: impl Into<String>, root: Feature) -> Self {
        FeatureModel {
            name: name.into(),
            root,
            constraints: Vec::new(),
        }
    }

    pub fn with_constraint(mut self, c: CrossTreeConstraint) -> Self {
        self.constraints.push(c);
        self
    }

    /// Features in preorder: parent before children, groups and children in
    /// declaration order.
    pub fn features_preorder(&self) -> Vec<FeatureId> {
        self.walk().into_iter().map(|f| f.id.clone()).collect()
    }

    /// Preorder walk over feature nodes.
    pub fn walk(&self) -> Vec<&Feature> {
        let mut out = Vec::new();
        let mut stack = vec![&self.root];
        while let Some(f) = stack.pop() {
            out.push(f);
            let children: Vec<&Feature> = f.children().collect();
            stack.extend(children.into_iter().rev());
        }
        out
    }

    pub fn feature_count(&self) -> usize {
        self.walk().len()
    }

    pub fn find(&self, id: &str) -> Option<&Feature> {
        self.walk().into_iter().find(|f| f.id.as_str() == id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.find(id).is_some()
    }
}

/// Codes for structural problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum DiagnosticCode {
    InvalidIdentifier,
    ReservedIdentifier,
    DuplicateFeature,
    GroupTooSmall,
    UnknownFeature,
    SelfConstraint,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StructureDiagnostic {
    pub code: DiagnosticCode,
    pub features: Vec<FeatureId>,
    pub message: String,
}

impl fmt::Display for StructureDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.code, self.message)
    }
}

/// Checks every structural invariant of `model`. An empty result means the
/// model is well formed.
pub fn validate_structure(model: &FeatureModel) -> Vec<StructureDiagnostic> {
    let mut diags = Vec::new();
    let mut seen = HashSet::new();
    for feature in model.walk() {
        let id = feature.id.as_str();
        if !FeatureId::is_valid_lexeme(id) {
            diags.push(StructureDiagnostic {
                code: DiagnosticCode::InvalidIdentifier,
                features: vec![feature.id.clone()],
                message: format!("`{id}` is not a valid feature identifier"),
            });
        } else if RESERVED_WORDS.contains(&id) {
            diags.push(StructureDiagnostic {
                code: DiagnosticCode::ReservedIdentifier,
                features: vec![feature.id.clone()],
                message: format!("`{id}` is a reserved word"),
            });
        }
        if !seen.insert(id) {
            diags.push(StructureDiagnostic {
                code: DiagnosticCode::DuplicateFeature,
                features: vec![feature.id.clone()],
                message: format!("feature `{id}` is declared more than once"),
            });
        }
        for group in &feature.groups {
            let min = group.kind.min_children();
            if group.children.len() < min {
                diags.push(StructureDiagnostic {
                    code: DiagnosticCode::GroupTooSmall,
                    features: vec![feature.id.clone()],
                    message: format!(
                        "{} group under `{id}` has {} child(ren), needs at least {min}",
                        group.kind,
                        group.children.len()
                    ),
                });
            }
        }
    }
    for c in &model.constraints {
        for end in [&c.source, &c.target] {
            if !seen.contains(end.as_str()) {
                diags.push(StructureDiagnostic {
                    code: DiagnosticCode::UnknownFeature,
                    features: vec![end.clone()],
                    message: format!("constraint `{c}` references unknown feature `{end}`"),
                });
            }
        }
        if c.source == c.target {
            diags.push(StructureDiagnostic {
                code: DiagnosticCode::SelfConstraint,
                features: vec![c.source.clone()],
                message: format!("constraint `{c}` relates a feature to itself"),
            });
        }
    }
    diags
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Selected,
    Deselected,
    #[default]
    Undecided,
}

impl Decision {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Decision::Selected
        } else {
            Decision::Deselected
        }
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            Decision::Selected => Some(true),
            Decision::Deselected => Some(false),
            Decision::Undecided => None,
        }
    }
}

/// Tri-state assignment. Features absent from the map are undecided.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Configuration {
    decisions: BTreeMap<FeatureId, Decision>,
}

impl Configuration {
    pub fn new() -> Self {
        Self::default()
    }

    /// Every feature of `features` selected iff it is in `selected`, others
    /// deselected.
    pub fn full_from_selection<'a>(
        features: impl IntoIterator<Item = &'a FeatureId>,
        selected: &[&str],
    ) -> Self {
        let mut cfg = Configuration::new();
        for f in features {
            cfg.set(f.clone(), Decision::from_bool(selected.contains(&f.as_str())));
        }
        cfg
    }

    pub fn selecting(ids: &[&str]) -> Self {
        let mut cfg = Configuration::new();
        for id in ids {
            cfg.set(FeatureId::new(id), Decision::Selected);
        }
        cfg
    }

    pub fn get(&self, id: &str) -> Decision {
        self.decisions.get(id).copied().unwrap_or_default()
    }

    pub fn set(&mut self, id: FeatureId, d: Decision) {
        if d == Decision::Undecided {
            self.decisions.remove(&id);
        } else {
            self.decisions.insert(id, d);
        }
    }

    /// Decided entries in key order.
    pub fn iter(&self) -> impl Iterator<Item = (&FeatureId, Decision)> {
        self.decisions.iter().map(|(k, v)| (k, *v))
    }

    pub fn len(&self) -> usize {
        self.decisions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decisions.is_empty()
    }

    /// Whether every feature in `features` is decided.
    pub fn is_full<'a>(&self, features: impl IntoIterator<Item = &'a FeatureId>) -> bool {
        features
            .into_iter()
            .all(|f| self.get(f.as_str()) != Decision::Undecided)
    }

    pub fn selected(&self) -> impl Iterator<Item = &FeatureId> {
        self.decisions
            .iter()
            .filter(|(_, d)| **d == Decision::Selected)
            .map(|(k, _)| k)
    }
}

/// Outcome of the model-wide analyses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnalysisReport {
    pub void: bool,
    #[serde(rename = "dead")]
    pub dead_features: BTreeSet<FeatureId>,
    #[serde(rename = "core")]
    pub core_features: BTreeSet<FeatureId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub product_count: Option<u64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn root_with(kind: GroupKind, children: &[&str]) -> FeatureModel {
        let kids = children.iter().map(|c| Feature::leaf(*c)).collect();
        FeatureModel::new("M", Feature::leaf("Root").with_group(kind, kids))
    }

    #[test]
    fn lexeme_rules() {
        assert!(FeatureId::is_valid_lexeme("v2.3.1"));
        assert!(FeatureId::is_valid_lexeme("_x"));
        assert!(!FeatureId::is_valid_lexeme(""));
        assert!(!FeatureId::is_valid_lexeme("1a"));
        assert!(!FeatureId::is_valid_lexeme(".a"));
        assert!(!FeatureId::is_valid_lexeme("a-b"));
    }

    #[test]
    fn single_child_alternative_is_too_small() {
        let m = root_with(GroupKind::Alternative, &["A"]);
        let d = validate_structure(&m);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].code, DiagnosticCode::GroupTooSmall);
        assert_eq!(d[0].features, vec![FeatureId::new("Root")]);
    }

    #[test]
    fn single_child_mandatory_and_optional_are_fine() {
        assert!(validate_structure(&root_with(GroupKind::Mandatory, &["A"])).is_empty());
        assert!(validate_structure(&root_with(GroupKind::Optional, &["A"])).is_empty());
        for kind in [GroupKind::Mandatory, GroupKind::Optional] {
            let codes: Vec<_> = validate_structure(&root_with(kind, &[]))
                .into_iter()
                .map(|d| d.code)
                .collect();
            assert_eq!(codes, vec![DiagnosticCode::GroupTooSmall]);
        }
    }

    #[test]
    fn unknown_constraint_endpoint() {
        let m = root_with(GroupKind::Optional, &["v1.1"])
            .with_constraint(CrossTreeConstraint::requires("v9", "v1.1"));
        let d = validate_structure(&m);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].code, DiagnosticCode::UnknownFeature);
        assert_eq!(d[0].features, vec![FeatureId::new("v9")]);
    }

    #[test]
    fn duplicates_self_constraints_and_reserved_words() {
        let m = root_with(GroupKind::Or, &["A", "A", "or"])
            .with_constraint(CrossTreeConstraint::excludes("A", "A"));
        let codes: Vec<_> = validate_structure(&m).into_iter().map(|d| d.code).collect();
        assert_eq!(
            codes,
            vec![
                DiagnosticCode::DuplicateFeature,
                DiagnosticCode::ReservedIdentifier,
                DiagnosticCode::SelfConstraint
            ]
        );
    }

    #[test]
    fn preorder_keeps_declaration_order() {
        assert_eq!(
            FeatureModel::new("M", Feature::leaf("root")).features_preorder(),
            vec![FeatureId::new("root")]
        );
        let m = root_with(GroupKind::Optional, &["B", "A"]);
        let ids: Vec<_> = m.features_preorder().iter().map(|f| f.to_string()).collect();
        assert_eq!(ids, ["Root", "B", "A"]);
    }

    #[test]
    fn configuration_tristate() {
        let mut cfg = Configuration::selecting(&["a"]);
        cfg.set(FeatureId::new("b"), Decision::Deselected);
        assert_eq!(cfg.get("a"), Decision::Selected);
        assert_eq!(cfg.get("b"), Decision::Deselected);
        assert_eq!(cfg.get("c"), Decision::Undecided);
        let feats = [FeatureId::new("a"), FeatureId::new("b")];
        assert!(cfg.is_full(&feats));
        cfg.set(FeatureId::new("b"), Decision::Undecided);
        assert!(!cfg.is_full(&feats));
        assert_eq!(cfg.len(), 1);
    }
}
