//! Exhaustive enumeration over the feature variables.

use std::collections::BTreeSet;

use super::compiled::{bit, Compiled};
use super::{to_configuration, AnalysisError, Control, MAX_ENUMERATION_FEATURES};
use crate::encode::EncodedModel;
use crate::model::{Configuration, FeatureId};

const CHECK_EVERY: u64 = 1 << 16;

fn guard(e: &EncodedModel) -> Result<usize, AnalysisError> {
    let n = e.feature_count();
    if n > MAX_ENUMERATION_FEATURES {
        return Err(AnalysisError::TooLarge {
            features: n,
            cap: MAX_ENUMERATION_FEATURES,
        });
    }
    Ok(n)
}

fn decode(n: usize, code: u64) -> Vec<bool> {
    (0..n).map(|i| code & bit(n, i) != 0).collect()
}

/// Visits every code whose fixed bits match `fixed`, in increasing order,
/// until `visit` returns false.
fn for_each_code(
    n: usize,
    fixed: &[(usize, bool)],
    ctl: &Control,
    mut visit: impl FnMut(u64) -> bool,
) -> Result<(), AnalysisError> {
    let mut fmask = 0u64;
    let mut fval = 0u64;
    for &(i, v) in fixed {
        let b = bit(n, i);
        if fmask & b != 0 && (fval & b != 0) != v {
            // Contradictory assumptions: nothing to visit.
            return Ok(());
        }
        fmask |= b;
        if v {
            fval |= b;
        }
    }
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let last = fval | (all & !fmask);
    let total = 1u64 << (n as u32 - fmask.count_ones()).min(63);
    let mut code = fval;
    let mut visited = 0u64;
    loop {
        if visited.is_multiple_of(CHECK_EVERY) {
            ctl.check()?;
            ctl.report(visited, total);
        }
        visited += 1;
        if !visit(code) || code == last {
            break;
        }
        code = (((code | fmask) + 1) & !fmask) | fval;
    }
    ctl.report(total, total);
    Ok(())
}

pub(super) fn solve(
    e: &EncodedModel,
    fixed: &[(usize, bool)],
    ctl: &Control,
) -> Result<Option<Vec<bool>>, AnalysisError> {
    let n = guard(e)?;
    let f = Compiled::model(e);
    let mut found = None;
    for_each_code(n, fixed, ctl, |code| {
        if f.eval(code) {
            found = Some(code);
            false
        } else {
            true
        }
    })?;
    Ok(found.map(|c| decode(n, c)))
}

/// `(dead, core)`, or `None` for a void model.
pub(super) fn dead_and_core(
    e: &EncodedModel,
    ctl: &Control,
) -> Result<Option<(BTreeSet<FeatureId>, BTreeSet<FeatureId>)>, AnalysisError> {
    let n = guard(e)?;
    let f = Compiled::model(e);
    let mut any = 0u64;
    let mut every = u64::MAX;
    let mut found = false;
    for_each_code(n, &[], ctl, |code| {
        if f.eval(code) {
            found = true;
            any |= code;
            every &= code;
        }
        true
    })?;
    if !found {
        return Ok(None);
    }
    let pick = |mask: u64, want: bool| {
        e.features()
            .iter()
            .enumerate()
            .filter(|(i, _)| (mask & bit(n, *i) != 0) == want)
            .map(|(_, id)| id.clone())
            .collect::<BTreeSet<_>>()
    };
    Ok(Some((pick(any, false), pick(every, true))))
}

pub(super) fn count(e: &EncodedModel, ctl: &Control) -> Result<u64, AnalysisError> {
    let n = guard(e)?;
    let f = Compiled::model(e);
    let mut total = 0u64;
    for_each_code(n, &[], ctl, |code| {
        total += f.eval(code) as u64;
        true
    })?;
    Ok(total)
}

pub(super) fn enumerate(
    e: &EncodedModel,
    limit: usize,
    ctl: &Control,
) -> Result<Vec<Configuration>, AnalysisError> {
    let n = guard(e)?;
    let f = Compiled::model(e);
    let mut out = Vec::new();
    if limit == 0 {
        return Ok(out);
    }
    for_each_code(n, &[], ctl, |code| {
        if f.eval(code) {
            out.push(to_configuration(e, &decode(n, code)));
        }
        out.len() < limit
    })?;
    Ok(out)
}
