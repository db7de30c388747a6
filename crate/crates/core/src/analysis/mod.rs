//! Analyses over an [`EncodedModel`]: configuration validity, decision
//! propagation, satisfiability with assumptions, void/dead/core detection,
//! product counting and enumeration.
//!
//! Satisfiability questions go through one of two engines: an exhaustive
//! enumerator over the feature variables and a DPLL solver over the clause
//! form. [`SolverBackend::Auto`] picks the enumerator for small models.

mod brute;
mod compiled;
mod dpll;
mod propagate;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::encode::{eval_formula, ConjunctRef, EncodedModel, EvalError};
use crate::model::{AnalysisReport, Configuration, Decision, FeatureId};

pub use propagate::{propagate, CauseStep, ConflictReport, Derivation, PropagationResult};

/// Models with at most this many features run on the enumerator under
/// [`SolverBackend::Auto`].
pub const AUTO_BRUTE_FORCE_LIMIT: usize = 20;
/// Default feature cap for counting and enumeration.
pub const DEFAULT_COUNT_CAP: usize = 24;
/// Hard ceiling for exhaustive enumeration, whatever cap is configured.
pub const MAX_ENUMERATION_FEATURES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverBackend {
    BruteForce,
    Dpll,
    #[default]
    Auto,
}

impl SolverBackend {
    /// The concrete engine used for a model of `feature_count` features.
    pub fn resolve(self, feature_count: usize) -> SolverBackend {
        match self {
            SolverBackend::Auto if feature_count <= AUTO_BRUTE_FORCE_LIMIT => {
                SolverBackend::BruteForce
            }
            SolverBackend::Auto => SolverBackend::Dpll,
            other => other,
        }
    }
}

impl FromStr for SolverBackend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "brute" | "bruteforce" | "brute-force" => Ok(SolverBackend::BruteForce),
            "dpll" => Ok(SolverBackend::Dpll),
            "auto" => Ok(SolverBackend::Auto),
            other => Err(format!("unknown backend `{other}` (expected brute, dpll or auto)")),
        }
    }
}

impl fmt::Display for SolverBackend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverBackend::BruteForce => "brute",
            SolverBackend::Dpll => "dpll",
            SolverBackend::Auto => "auto",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("model has {features} features, above the limit of {cap}")]
    TooLarge { features: usize, cap: usize },
    #[error("model is void: it has no valid product")]
    VoidModel,
    #[error("feature `{0}` is undecided")]
    UndecidedFeature(FeatureId),
    #[error("feature `{0}` is not part of the model")]
    UnknownFeature(String),
    #[error("analysis cancelled")]
    Cancelled,
}

impl From<EvalError> for AnalysisError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::UndecidedFeature(f) => AnalysisError::UndecidedFeature(f),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Progress {
    pub done: u64,
    pub total: u64,
}

type ProgressFn = dyn Fn(Progress) + Send + Sync;

/// Cooperative cancellation flag and progress callback for long analyses.
#[derive(Clone, Default)]
pub struct Control {
    cancel: Option<Arc<AtomicBool>>,
    progress: Option<Arc<ProgressFn>>,
}

impl fmt::Debug for Control {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Control")
            .field("cancel", &self.cancel)
            .field("progress", &self.progress.is_some())
            .finish()
    }
}

impl Control {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn with_cancel(mut self, flag: Arc<AtomicBool>) -> Self {
        self.cancel = Some(flag);
        self
    }

    pub fn with_progress(mut self, f: impl Fn(Progress) + Send + Sync + 'static) -> Self {
        self.progress = Some(Arc::new(f));
        self
    }

    pub(crate) fn check(&self) -> Result<(), AnalysisError> {
        match &self.cancel {
            Some(flag) if flag.load(Ordering::Relaxed) => Err(AnalysisError::Cancelled),
            _ => Ok(()),
        }
    }

    pub(crate) fn report(&self, done: u64, total: u64) {
        if let Some(f) = &self.progress {
            f(Progress { done, total });
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatOutcome {
    /// A full configuration satisfying the model and the assumptions.
    Satisfiable(Configuration),
    Unsatisfiable,
}

impl SatOutcome {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatOutcome::Satisfiable(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConfigCheck {
    Valid,
    Invalid(Vec<ConjunctRef>),
}

impl ConfigCheck {
    pub fn is_valid(&self) -> bool {
        matches!(self, ConfigCheck::Valid)
    }
}

fn resolve_assumptions(
    e: &EncodedModel,
    assumptions: &[(FeatureId, bool)],
) -> Result<Vec<(usize, bool)>, AnalysisError> {
    assumptions
        .iter()
        .map(|(f, v)| {
            e.index_of(f.as_str())
                .map(|i| (i, *v))
                .ok_or_else(|| AnalysisError::UnknownFeature(f.to_string()))
        })
        .collect()
}

fn check_known(e: &EncodedModel, cfg: &Configuration) -> Result<(), AnalysisError> {
    match cfg.iter().find(|(f, _)| e.index_of(f.as_str()).is_none()) {
        Some((f, _)) => Err(AnalysisError::UnknownFeature(f.to_string())),
        None => Ok(()),
    }
}

/// Truth value of every conjunct under a full configuration, in conjunct
/// order.
pub fn evaluate_conjuncts(
    e: &EncodedModel,
    cfg: &Configuration,
) -> Result<Vec<(ConjunctRef, bool)>, AnalysisError> {
    check_known(e, cfg)?;
    if let Some(f) = e.features().iter().find(|f| cfg.get(f.as_str()) == Decision::Undecided) {
        return Err(AnalysisError::UndecidedFeature(f.clone()));
    }
    e.conjuncts()
        .into_iter()
        .map(|(r, f)| Ok((r, eval_formula(f, cfg)?)))
        .collect()
}

/// Valid iff every conjunct evaluates to true under `cfg`.
pub fn check_full_configuration(
    e: &EncodedModel,
    cfg: &Configuration,
) -> Result<ConfigCheck, AnalysisError> {
    let failing: Vec<ConjunctRef> = evaluate_conjuncts(e, cfg)?
        .into_iter()
        .filter(|(_, v)| !v)
        .map(|(r, _)| r)
        .collect();
    Ok(if failing.is_empty() {
        ConfigCheck::Valid
    } else {
        ConfigCheck::Invalid(failing)
    })
}

/// Decides the model formula conjoined with `assumptions`.
pub fn sat(
    e: &EncodedModel,
    assumptions: &[(FeatureId, bool)],
    backend: SolverBackend,
) -> Result<SatOutcome, AnalysisError> {
    sat_with(e, assumptions, backend, &Control::none())
}

pub fn sat_with(
    e: &EncodedModel,
    assumptions: &[(FeatureId, bool)],
    backend: SolverBackend,
    ctl: &Control,
) -> Result<SatOutcome, AnalysisError> {
    let fixed = resolve_assumptions(e, assumptions)?;
    let model = match backend.resolve(e.feature_count()) {
        SolverBackend::Dpll => dpll::solve(e.cnf(), &fixed, ctl)?,
        _ => brute::solve(e, &fixed, ctl)?,
    };
    Ok(match model {
        Some(values) => SatOutcome::Satisfiable(to_configuration(e, &values)),
        None => SatOutcome::Unsatisfiable,
    })
}

/// Whether every decided feature of `cfg` can be kept in some valid product.
pub fn is_extensible(
    e: &EncodedModel,
    cfg: &Configuration,
    backend: SolverBackend,
) -> Result<SatOutcome, AnalysisError> {
    check_known(e, cfg)?;
    let assumptions: Vec<(FeatureId, bool)> = cfg
        .iter()
        .filter_map(|(f, d)| d.as_bool().map(|b| (f.clone(), b)))
        .collect();
    sat(e, &assumptions, backend)
}

pub(crate) fn to_configuration(e: &EncodedModel, values: &[bool]) -> Configuration {
    let mut cfg = Configuration::new();
    for (f, v) in e.features().iter().zip(values) {
        cfg.set(f.clone(), Decision::from_bool(*v));
    }
    cfg
}

/// True iff the model has no valid product.
pub fn is_void(e: &EncodedModel, backend: SolverBackend) -> Result<bool, AnalysisError> {
    Ok(!sat(e, &[], backend)?.is_sat())
}

/// Features contained in no valid product.
pub fn dead_features(
    e: &EncodedModel,
    backend: SolverBackend,
) -> Result<BTreeSet<FeatureId>, AnalysisError> {
    dead_features_with(e, backend, &Control::none())
}

pub fn dead_features_with(
    e: &EncodedModel,
    backend: SolverBackend,
    ctl: &Control,
) -> Result<BTreeSet<FeatureId>, AnalysisError> {
    Ok(scan(e, backend, ctl)?.0)
}

/// Features contained in every valid product.
pub fn core_features(
    e: &EncodedModel,
    backend: SolverBackend,
) -> Result<BTreeSet<FeatureId>, AnalysisError> {
    core_features_with(e, backend, &Control::none())
}

pub fn core_features_with(
    e: &EncodedModel,
    backend: SolverBackend,
    ctl: &Control,
) -> Result<BTreeSet<FeatureId>, AnalysisError> {
    Ok(scan(e, backend, ctl)?.1)
}

/// Dead and core sets together. The enumerator gets both from one pass; the
/// solver probes each feature in each polarity, skipping features already
/// seen with that value in an earlier witness.
fn scan(
    e: &EncodedModel,
    backend: SolverBackend,
    ctl: &Control,
) -> Result<(BTreeSet<FeatureId>, BTreeSet<FeatureId>), AnalysisError> {
    if backend.resolve(e.feature_count()) != SolverBackend::Dpll {
        return brute::dead_and_core(e, ctl)?.ok_or(AnalysisError::VoidModel);
    }
    let n = e.feature_count();
    let mut seen_true = vec![false; n];
    let mut seen_false = vec![false; n];
    let absorb = |cfg: &Configuration, t: &mut Vec<bool>, f: &mut Vec<bool>| {
        for (i, id) in e.features().iter().enumerate() {
            match cfg.get(id.as_str()) {
                Decision::Selected => t[i] = true,
                _ => f[i] = true,
            }
        }
    };
    match sat_with(e, &[], SolverBackend::Dpll, ctl)? {
        SatOutcome::Satisfiable(w) => absorb(&w, &mut seen_true, &mut seen_false),
        SatOutcome::Unsatisfiable => return Err(AnalysisError::VoidModel),
    }
    let (mut dead, mut core) = (BTreeSet::new(), BTreeSet::new());
    for i in 0..n {
        ctl.check()?;
        ctl.report(i as u64, n as u64);
        let id = &e.features()[i];
        for value in [true, false] {
            let seen = if value { seen_true[i] } else { seen_false[i] };
            if seen {
                continue;
            }
            match sat_with(e, &[(id.clone(), value)], SolverBackend::Dpll, ctl)? {
                SatOutcome::Satisfiable(w) => absorb(&w, &mut seen_true, &mut seen_false),
                SatOutcome::Unsatisfiable if value => {
                    dead.insert(id.clone());
                }
                SatOutcome::Unsatisfiable => {
                    core.insert(id.clone());
                }
            }
        }
    }
    ctl.report(n as u64, n as u64);
    Ok((dead, core))
}

/// Number of valid products, by exhaustive enumeration over the feature
/// variables. Fails above `cap` features.
pub fn count_products(e: &EncodedModel, cap: usize) -> Result<u64, AnalysisError> {
    count_products_with(e, cap, &Control::none())
}

pub fn count_products_with(e: &EncodedModel, cap: usize, ctl: &Control) -> Result<u64, AnalysisError> {
    guard_size(e, cap)?;
    brute::count(e, ctl)
}

/// Up to `limit` valid products in lexicographic preorder order (deselected
/// before selected).
pub fn enumerate_products(
    e: &EncodedModel,
    limit: usize,
    cap: usize,
) -> Result<Vec<Configuration>, AnalysisError> {
    enumerate_products_with(e, limit, cap, &Control::none())
}

pub fn enumerate_products_with(
    e: &EncodedModel,
    limit: usize,
    cap: usize,
    ctl: &Control,
) -> Result<Vec<Configuration>, AnalysisError> {
    guard_size(e, cap)?;
    brute::enumerate(e, limit, ctl)
}

fn guard_size(e: &EncodedModel, cap: usize) -> Result<(), AnalysisError> {
    let cap = cap.min(MAX_ENUMERATION_FEATURES);
    if e.feature_count() > cap {
        Err(AnalysisError::TooLarge {
            features: e.feature_count(),
            cap,
        })
    } else {
        Ok(())
    }
}

/// Void flag, dead and core features, and optionally the product count.
/// On a void model the dead and core sets are reported empty.
pub fn analyze(
    e: &EncodedModel,
    backend: SolverBackend,
    count_cap: Option<usize>,
    ctl: &Control,
) -> Result<AnalysisReport, AnalysisError> {
    if let Some(cap) = count_cap {
        guard_size(e, cap)?;
    }
    let (void, dead, core) = match scan(e, backend, ctl) {
        Ok((dead, core)) => (false, dead, core),
        Err(AnalysisError::VoidModel) => (true, BTreeSet::new(), BTreeSet::new()),
        Err(other) => return Err(other),
    };
    let product_count = match count_cap {
        Some(_) if void => Some(0),
        Some(cap) => Some(count_products_with(e, cap, ctl)?),
        None => None,
    };
    Ok(AnalysisReport {
        void,
        dead_features: dead,
        core_features: core,
        product_count,
    })
}
