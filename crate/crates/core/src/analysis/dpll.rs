//! Chronological-backtracking DPLL over the clause form.
//!
//! Branching follows variable order (features in preorder, then
//! auxiliaries) and tries `false` first. No clause learning.

use super::{AnalysisError, Control};
use crate::encode::{CnfClauseSet, Lit};

const UNASSIGNED: i8 = 0;

struct Solver<'a> {
    clauses: &'a [Vec<Lit>],
    /// Clause indices by literal, `occurs[lit_index(l)]` lists clauses
    /// containing `l`.
    occurs: Vec<Vec<usize>>,
    value: Vec<i8>,
    trail: Vec<Lit>,
    /// Trail length and decision literal per decision level.
    levels: Vec<(usize, Lit)>,
}

fn lit_index(l: Lit) -> usize {
    let v = l.unsigned_abs() as usize;
    2 * v + usize::from(l < 0)
}

impl<'a> Solver<'a> {
    fn new(cnf: &'a CnfClauseSet) -> Self {
        let mut occurs = vec![Vec::new(); 2 * (cnf.num_vars + 1)];
        for (ci, c) in cnf.clauses.iter().enumerate() {
            for &l in c {
                occurs[lit_index(l)].push(ci);
            }
        }
        Solver {
            clauses: &cnf.clauses,
            occurs,
            value: vec![UNASSIGNED; cnf.num_vars + 1],
            trail: Vec::new(),
            levels: Vec::new(),
        }
    }

    fn lit_value(&self, l: Lit) -> i8 {
        let v = self.value[l.unsigned_abs() as usize];
        if l < 0 {
            -v
        } else {
            v
        }
    }

    fn assign(&mut self, l: Lit) {
        self.value[l.unsigned_abs() as usize] = if l > 0 { 1 } else { -1 };
        self.trail.push(l);
    }

    /// Unit propagation from trail position `from`. Returns false on conflict.
    fn propagate(&mut self, mut from: usize) -> bool {
        while from < self.trail.len() {
            let falsified = -self.trail[from];
            from += 1;
            for k in 0..self.occurs[lit_index(falsified)].len() {
                let ci = self.occurs[lit_index(falsified)][k];
                let mut unit = None;
                let mut open = 0;
                let mut satisfied = false;
                for &l in &self.clauses[ci] {
                    match self.lit_value(l) {
                        1 => {
                            satisfied = true;
                            break;
                        }
                        UNASSIGNED => {
                            open += 1;
                            unit = Some(l);
                        }
                        _ => {}
                    }
                }
                if satisfied {
                    continue;
                }
                match open {
                    0 => return false,
                    1 => self.assign(unit.unwrap()),
                    _ => {}
                }
            }
        }
        true
    }

    /// Undoes the most recent open decision and asserts its negation.
    /// Returns false when no decision is left to flip.
    fn backtrack(&mut self) -> bool {
        while let Some((len, decision)) = self.levels.pop() {
            while self.trail.len() > len {
                let l = self.trail.pop().unwrap();
                self.value[l.unsigned_abs() as usize] = UNASSIGNED;
            }
            if decision < 0 {
                // `false` was tried first; now try `true` as a forced value
                // of the enclosing level.
                let from = self.trail.len();
                self.assign(-decision);
                if self.propagate(from) {
                    return true;
                }
            }
        }
        false
    }

    fn run(&mut self, assumptions: &[Lit], ctl: &Control) -> Result<bool, AnalysisError> {
        if self.clauses.iter().any(|c| c.is_empty()) {
            return Ok(false);
        }
        for &l in assumptions {
            match self.lit_value(l) {
                1 => {}
                UNASSIGNED => self.assign(l),
                _ => return Ok(false),
            }
        }
        let units: Vec<Lit> = self
            .clauses
            .iter()
            .filter(|c| c.len() == 1)
            .map(|c| c[0])
            .collect();
        for l in units {
            match self.lit_value(l) {
                1 => {}
                UNASSIGNED => self.assign(l),
                _ => return Ok(false),
            }
        }
        if !self.propagate(0) {
            return Ok(false);
        }
        let mut steps = 0u64;
        let mut next_var = 1usize;
        loop {
            steps += 1;
            if steps.is_multiple_of(1024) {
                ctl.check()?;
            }
            while next_var < self.value.len() && self.value[next_var] != UNASSIGNED {
                next_var += 1;
            }
            if next_var == self.value.len() {
                return Ok(true);
            }
            let decision = -(next_var as Lit);
            self.levels.push((self.trail.len(), decision));
            let from = self.trail.len();
            self.assign(decision);
            if !self.propagate(from) && !self.backtrack() {
                return Ok(false);
            }
            // Backtracking may unassign variables below `next_var`.
            next_var = 1;
        }
    }
}

/// A satisfying assignment of the feature variables, or `None`.
/// `fixed` pins feature `i` (0-based) to a value.
pub(super) fn solve(
    cnf: &CnfClauseSet,
    fixed: &[(usize, bool)],
    ctl: &Control,
) -> Result<Option<Vec<bool>>, AnalysisError> {
    let assumptions: Vec<Lit> = fixed
        .iter()
        .map(|&(i, v)| if v { i as Lit + 1 } else { -(i as Lit + 1) })
        .collect();
    let mut s = Solver::new(cnf);
    if !s.run(&assumptions, ctl)? {
        return Ok(None);
    }
    Ok(Some(
        (1..=cnf.num_features()).map(|v| s.value[v] == 1).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FeatureId;

    fn cnf(n: usize, clauses: Vec<Vec<Lit>>) -> CnfClauseSet {
        CnfClauseSet {
            features: (0..n).map(|i| FeatureId::new(format!("x{i}"))).collect(),
            num_vars: n,
            origins: vec![
                crate::encode::ConjunctRef::Root {
                    feature: FeatureId::new("x0")
                };
                clauses.len()
            ],
            clauses,
        }
    }

    fn brute(c: &CnfClauseSet) -> bool {
        (0u32..1 << c.num_vars).any(|m| {
            let vals: Vec<bool> = (0..c.num_vars).map(|i| m >> i & 1 == 1).collect();
            c.satisfied_by(&vals)
        })
    }

    #[test]
    fn small_instances_agree_with_truth_tables() {
        let cases = vec![
            cnf(1, vec![vec![1], vec![-1]]),
            cnf(2, vec![vec![1, 2], vec![-1, 2], vec![1, -2], vec![-1, -2]]),
            cnf(3, vec![vec![1, 2, 3], vec![-1, -2], vec![-2, -3], vec![-1, -3]]),
            cnf(3, vec![vec![-1, 2], vec![-2, 3], vec![-3, -1], vec![1]]),
            cnf(2, vec![]),
            cnf(2, vec![vec![]]),
        ];
        for c in cases {
            let got = solve(&c, &[], &Control::none()).unwrap();
            assert_eq!(got.is_some(), brute(&c), "{:?}", c.clauses);
            if let Some(vals) = got {
                assert!(c.satisfied_by(&vals));
            }
        }
    }

    #[test]
    fn false_branch_first() {
        let c = cnf(3, vec![vec![1, 2, 3]]);
        assert_eq!(
            solve(&c, &[], &Control::none()).unwrap(),
            Some(vec![false, false, true])
        );
    }

    #[test]
    fn assumptions() {
        let c = cnf(2, vec![vec![-1, 2]]);
        assert_eq!(
            solve(&c, &[(0, true)], &Control::none()).unwrap(),
            Some(vec![true, true])
        );
        assert_eq!(
            solve(&c, &[(0, true), (1, false)], &Control::none()).unwrap(),
            None
        );
        assert_eq!(
            solve(&c, &[(0, true), (0, false)], &Control::none()).unwrap(),
            None
        );
    }

    #[test]
    fn pigeonhole_three_into_two_is_unsat() {
        // p(i,j): pigeon i in hole j, variable 2*i + j + 1.
        let p = |i: i32, j: i32| 2 * i + j + 1;
        let mut clauses = Vec::new();
        for i in 0..3 {
            clauses.push(vec![p(i, 0), p(i, 1)]);
        }
        for j in 0..2 {
            for a in 0..3 {
                for b in a + 1..3 {
                    clauses.push(vec![-p(a, j), -p(b, j)]);
                }
            }
        }
        assert_eq!(solve(&cnf(6, clauses), &[], &Control::none()).unwrap(), None);
    }
}
