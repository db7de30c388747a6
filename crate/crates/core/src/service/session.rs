//! Configuration sessions. A session's state is a pure function of the model
//! and the user's decisions, recomputed on every change.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::analysis::{
    check_full_configuration, is_extensible, propagate, AnalysisError, ConflictReport,
    PropagationResult, SolverBackend,
};
use crate::encode::{ConjunctRef, EncodedModel};
use crate::model::{Configuration, Decision, FeatureId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DecisionRequest {
    Select,
    Deselect,
    Undecide,
}

impl DecisionRequest {
    pub fn decision(self) -> Decision {
        match self {
            DecisionRequest::Select => Decision::Selected,
            DecisionRequest::Deselect => Decision::Deselected,
            DecisionRequest::Undecide => Decision::Undecided,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureState {
    UserSelected,
    UserDeselected,
    ForcedSelected,
    ForcedDeselected,
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FeatureView {
    pub id: FeatureId,
    pub state: FeatureState,
    /// Human-readable reason for forced states.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason_ref: Option<ConjunctRef>,
    /// Decisions the forcing conjunct depended on.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub premises: Vec<(FeatureId, bool)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SessionState {
    pub session_id: String,
    pub model: String,
    /// Every feature in preorder.
    pub features: Vec<FeatureView>,
    pub user_decisions: Configuration,
    pub derived_decisions: Configuration,
    pub conflict: Option<ConflictReport>,
    /// The decision that produced the current conflict.
    pub flagged_decision: Option<FeatureId>,
    pub extensible: bool,
    /// Validity of the configuration once nothing is undecided, else null.
    pub complete_valid: Option<bool>,
}

#[derive(Debug)]
pub struct Session {
    pub id: String,
    pub model: String,
    pub user: Configuration,
    pub flagged: Option<FeatureId>,
    pub last_used: Instant,
}

impl Session {
    pub fn new(id: String, model: String) -> Self {
        Session {
            id,
            model,
            user: Configuration::new(),
            flagged: None,
            last_used: Instant::now(),
        }
    }

    /// Applies a decision. The decision is kept even when it conflicts; the
    /// returned state then carries the conflict and flags the feature.
    pub fn decide(
        &mut self,
        e: &EncodedModel,
        feature: &FeatureId,
        d: Decision,
    ) -> Result<SessionState, AnalysisError> {
        self.user.set(feature.clone(), d);
        let state = self.state(e)?;
        self.flagged = state.conflict.as_ref().map(|_| feature.clone());
        Ok(SessionState {
            flagged_decision: self.flagged.clone(),
            ..state
        })
    }

    pub fn state(&self, e: &EncodedModel) -> Result<SessionState, AnalysisError> {
        session_state(e, &self.id, &self.model, &self.user, self.flagged.clone())
    }
}

pub fn session_state(
    e: &EncodedModel,
    session_id: &str,
    model: &str,
    user: &Configuration,
    flagged: Option<FeatureId>,
) -> Result<SessionState, AnalysisError> {
    let result = propagate(e, user)?;
    let extensible = is_extensible(e, user, SolverBackend::Auto)?.is_sat();
    let mut features = Vec::with_capacity(e.feature_count());
    let mut derived = Configuration::new();
    let (conflict, complete_valid) = match &result {
        PropagationResult::Conflict(c) => (Some(c.clone()), None),
        PropagationResult::Consistent { decisions, .. } => {
            let complete = decisions.is_full(e.features());
            let valid = if complete {
                Some(check_full_configuration(e, decisions)?.is_valid())
            } else {
                None
            };
            (None, valid)
        }
    };
    for f in e.features() {
        let view = match user.get(f.as_str()) {
            Decision::Selected => plain(f, FeatureState::UserSelected),
            Decision::Deselected => plain(f, FeatureState::UserDeselected),
            Decision::Undecided => match result.derivation_of(f.as_str()) {
                Some(d) => {
                    derived.set(f.clone(), Decision::from_bool(d.value));
                    FeatureView {
                        id: f.clone(),
                        state: if d.value {
                            FeatureState::ForcedSelected
                        } else {
                            FeatureState::ForcedDeselected
                        },
                        reason: Some(d.reason.to_string()),
                        reason_ref: Some(d.reason.clone()),
                        premises: d.premises.clone(),
                    }
                }
                None => plain(f, FeatureState::Undecided),
            },
        };
        features.push(view);
    }
    Ok(SessionState {
        session_id: session_id.to_string(),
        model: model.to_string(),
        features,
        user_decisions: user.clone(),
        derived_decisions: derived,
        conflict,
        flagged_decision: flagged,
        extensible,
        complete_valid,
    })
}

fn plain(f: &FeatureId, state: FeatureState) -> FeatureView {
    FeatureView {
        id: f.clone(),
        state,
        reason: None,
        reason_ref: None,
        premises: Vec::new(),
    }
}
