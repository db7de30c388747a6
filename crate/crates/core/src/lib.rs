//! Feature-model verification: a textual model language, propositional
//! encoding of the six group kinds and cross-tree constraints, and SAT-based
//! analyses (validity, decision propagation, void/dead/core detection,
//! counting).

pub mod analysis;
pub mod cli;
pub mod config_file;
pub mod dsl;
pub mod encode;
pub mod model;
pub mod service;

pub use dsl::{parse_model, serialize_model, ParseError};
pub use encode::{encode_model, EncodedModel, PropFormula};
pub use model::{
    validate_structure, AnalysisReport, Configuration, CrossTreeConstraint, Decision, Feature,
    FeatureId, FeatureModel, GroupKind,
};
