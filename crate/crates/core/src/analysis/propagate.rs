//! Decision propagation: unit propagation over the clause form, keeping the
//! conjunct responsible for each forced value.

use serde::Serialize;

use super::{check_known, AnalysisError};
use crate::encode::{ConjunctRef, EncodedModel, Lit};
use crate::model::{Configuration, Decision, FeatureId};

/// A value forced by propagation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Derivation {
    pub feature: FeatureId,
    pub value: bool,
    pub reason: ConjunctRef,
    /// Decisions the forcing clause depended on, in the order they were made.
    pub premises: Vec<(FeatureId, bool)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CauseStep {
    pub origin: ConjunctRef,
    pub feature: FeatureId,
    pub value: bool,
}

/// Two incompatible requirements on one feature, with the derivation chain
/// that led there. The last step is the one that could not be applied.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConflictReport {
    pub conflicting_feature: FeatureId,
    pub forced_value: bool,
    pub cause_chain: Vec<CauseStep>,
}

impl ConflictReport {
    pub fn mentions(&self, origin: &ConjunctRef) -> bool {
        self.cause_chain.iter().any(|s| &s.origin == origin)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PropagationResult {
    Consistent {
        /// User decisions plus forced values.
        decisions: Configuration,
        /// Forced values in the order they were derived.
        derivations: Vec<Derivation>,
    },
    Conflict(ConflictReport),
}

impl PropagationResult {
    pub fn conflict(&self) -> Option<&ConflictReport> {
        match self {
            PropagationResult::Conflict(c) => Some(c),
            _ => None,
        }
    }

    pub fn derivation_of(&self, id: &str) -> Option<&Derivation> {
        match self {
            PropagationResult::Consistent { derivations, .. } => {
                derivations.iter().find(|d| d.feature.as_str() == id)
            }
            _ => None,
        }
    }
}

struct State<'a> {
    e: &'a EncodedModel,
    value: Vec<i8>,
    /// Clause that forced each variable; `None` for user decisions.
    reason: Vec<Option<usize>>,
    /// Trail position of each assigned variable.
    position: Vec<usize>,
    trail: Vec<usize>,
}

impl State<'_> {
    fn lit_value(&self, l: Lit) -> i8 {
        let v = self.value[l.unsigned_abs() as usize];
        if l < 0 {
            -v
        } else {
            v
        }
    }

    fn assign(&mut self, var: usize, value: bool, reason: Option<usize>) {
        self.value[var] = if value { 1 } else { -1 };
        self.reason[var] = reason;
        self.position[var] = self.trail.len();
        self.trail.push(var);
    }

    fn is_feature(&self, var: usize) -> bool {
        var <= self.e.feature_count()
    }

    fn feature(&self, var: usize) -> FeatureId {
        self.e.features()[var - 1].clone()
    }

    /// Variables whose forced values led to the clause `ci` being falsified
    /// or unit, in trail order.
    fn cone(&self, ci: usize) -> Vec<usize> {
        let cnf = self.e.cnf();
        let mut marked = vec![false; self.value.len()];
        let mut stack: Vec<usize> = cnf.clauses[ci]
            .iter()
            .map(|l| l.unsigned_abs() as usize)
            .collect();
        let mut out = Vec::new();
        while let Some(v) = stack.pop() {
            if marked[v] || self.value[v] == 0 {
                continue;
            }
            marked[v] = true;
            if let Some(r) = self.reason[v] {
                out.push(v);
                stack.extend(cnf.clauses[r].iter().map(|l| l.unsigned_abs() as usize));
            }
        }
        out.sort_by_key(|&v| self.position[v]);
        out
    }
}

/// Unit propagation to fixpoint from the user's decisions. The root is
/// always forced selected. User decisions are never changed: a forced value
/// that contradicts one is reported as a conflict.
pub fn propagate(
    e: &EncodedModel,
    cfg: &Configuration,
) -> Result<PropagationResult, AnalysisError> {
    check_known(e, cfg)?;
    let cnf = e.cnf();
    let mut st = State {
        e,
        value: vec![0; cnf.num_vars + 1],
        reason: vec![None; cnf.num_vars + 1],
        position: vec![0; cnf.num_vars + 1],
        trail: Vec::new(),
    };
    for (i, f) in e.features().iter().enumerate() {
        if let Some(v) = cfg.get(f.as_str()).as_bool() {
            st.assign(i + 1, v, None);
        }
    }
    let mut changed = true;
    while changed {
        changed = false;
        for (ci, clause) in cnf.clauses.iter().enumerate() {
            let mut open = None;
            let mut open_count = 0;
            let mut satisfied = false;
            for &l in clause {
                match st.lit_value(l) {
                    1 => {
                        satisfied = true;
                        break;
                    }
                    0 => {
                        open_count += 1;
                        open = Some(l);
                    }
                    _ => {}
                }
            }
            if satisfied {
                continue;
            }
            match open_count {
                0 => return Ok(PropagationResult::Conflict(conflict_report(&st, ci))),
                1 => {
                    let l = open.unwrap();
                    st.assign(l.unsigned_abs() as usize, l > 0, Some(ci));
                    changed = true;
                }
                _ => {}
            }
        }
    }

    let mut decisions = cfg.clone();
    let mut derivations = Vec::new();
    for &var in &st.trail {
        let Some(ci) = st.reason[var] else { continue };
        if !st.is_feature(var) {
            continue;
        }
        let value = st.value[var] > 0;
        let feature = st.feature(var);
        decisions.set(feature.clone(), Decision::from_bool(value));
        let mut premises: Vec<usize> = cnf.clauses[ci]
            .iter()
            .map(|l| l.unsigned_abs() as usize)
            .filter(|&v| v != var && st.is_feature(v))
            .collect();
        premises.sort_by_key(|&v| st.position[v]);
        derivations.push(Derivation {
            feature,
            value,
            reason: cnf.origins[ci].clone(),
            premises: premises
                .into_iter()
                .map(|v| (st.feature(v), st.value[v] > 0))
                .collect(),
        });
    }
    Ok(PropagationResult::Consistent {
        decisions,
        derivations,
    })
}

fn conflict_report(st: &State<'_>, ci: usize) -> ConflictReport {
    let cnf = st.e.cnf();
    let clause = &cnf.clauses[ci];
    let mut cause_chain: Vec<CauseStep> = st
        .cone(ci)
        .into_iter()
        .filter(|&v| st.is_feature(v))
        .map(|v| CauseStep {
            origin: cnf.origins[st.reason[v].unwrap()].clone(),
            feature: st.feature(v),
            value: st.value[v] > 0,
        })
        .collect();
    // The feature assigned last in the falsified clause is the one the
    // clause would have needed the other way round.
    let latest = clause
        .iter()
        .copied()
        .filter(|l| st.is_feature(l.unsigned_abs() as usize))
        .max_by_key(|l| st.position[l.unsigned_abs() as usize]);
    let (feature, forced_value) = match latest {
        Some(l) => (st.feature(l.unsigned_abs() as usize), l > 0),
        None => {
            let last = cause_chain.last().expect("auxiliary conflicts have a cause");
            (last.feature.clone(), !last.value)
        }
    };
    cause_chain.push(CauseStep {
        origin: cnf.origins[ci].clone(),
        feature: feature.clone(),
        value: forced_value,
    });
    ConflictReport {
        conflicting_feature: feature,
        forced_value,
        cause_chain,
    }
}
