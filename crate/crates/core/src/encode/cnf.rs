//! Clause form for the model formula.
//!
//! Shapes the encoder produces (literal biconditionals, implications,
//! pairwise exclusions, `(a ⊕ b) ⇔ p`, `(c₁ ∨ … ∨ cₙ) ⇔ p`) are clausified
//! directly. Anything else gets Tseitin auxiliaries, each defined by a full
//! equivalence so that it is functionally determined by the feature
//! variables.

use std::collections::BTreeMap;

use super::encoder::{ConjunctRef, EncodedModel};
use super::formula::PropFormula;
use crate::model::FeatureId;

/// DIMACS-style literal: positive or negative 1-based variable index.
pub type Lit = i32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfClauseSet {
    /// Feature variables in preorder; feature `i` is variable `i + 1`.
    pub features: Vec<FeatureId>,
    /// Total variable count, auxiliaries included.
    pub num_vars: usize,
    pub clauses: Vec<Vec<Lit>>,
    /// The conjunct each clause was generated from, parallel to `clauses`.
    pub origins: Vec<ConjunctRef>,
}

impl CnfClauseSet {
    pub fn num_features(&self) -> usize {
        self.features.len()
    }

    pub fn variable_map(&self) -> BTreeMap<FeatureId, usize> {
        self.features
            .iter()
            .enumerate()
            .map(|(i, f)| (f.clone(), i + 1))
            .collect()
    }

    /// Whether an assignment over all variables (index 0 ↔ variable 1)
    /// satisfies every clause.
    pub fn satisfied_by(&self, values: &[bool]) -> bool {
        self.clauses.iter().all(|c| {
            c.iter().any(|&l| {
                let v = values[l.unsigned_abs() as usize - 1];
                if l > 0 {
                    v
                } else {
                    !v
                }
            })
        })
    }
}

/// Clausifies the conjuncts of `e` in order.
pub fn to_cnf(e: &EncodedModel) -> CnfClauseSet {
    let mut b = Builder::new(e.features().to_vec());
    for (origin, f) in e.conjuncts() {
        b.assert_formula(&f.fold_constants(), &origin);
    }
    b.finish()
}

/// Clausifies a single formula over the given feature variables.
pub fn formula_to_cnf(f: &PropFormula, features: &[FeatureId], origin: &ConjunctRef) -> CnfClauseSet {
    let mut b = Builder::new(features.to_vec());
    b.assert_formula(&f.fold_constants(), origin);
    b.finish()
}

struct Builder {
    features: Vec<FeatureId>,
    index: BTreeMap<FeatureId, usize>,
    next_var: usize,
    clauses: Vec<Vec<Lit>>,
    origins: Vec<ConjunctRef>,
}

impl Builder {
    fn new(features: Vec<FeatureId>) -> Self {
        let index = features
            .iter()
            .enumerate()
            .map(|(i, f)| (f.clone(), i + 1))
            .collect();
        Builder {
            next_var: features.len(),
            features,
            index,
            clauses: Vec::new(),
            origins: Vec::new(),
        }
    }

    fn finish(self) -> CnfClauseSet {
        CnfClauseSet {
            features: self.features,
            num_vars: self.next_var,
            clauses: self.clauses,
            origins: self.origins,
        }
    }

    fn emit(&mut self, clause: Vec<Lit>, origin: &ConjunctRef) {
        self.clauses.push(clause);
        self.origins.push(origin.clone());
    }

    fn fresh(&mut self) -> Lit {
        self.next_var += 1;
        self.next_var as Lit
    }

    fn literal(&self, f: &PropFormula) -> Option<Lit> {
        match f {
            PropFormula::Var(id) => Some(
                *self
                    .index
                    .get(id)
                    .unwrap_or_else(|| panic!("variable `{id}` is not a model feature"))
                    as Lit,
            ),
            PropFormula::Not(inner) => self.literal(inner).map(|l| -l),
            _ => None,
        }
    }

    fn literals(&self, fs: &[PropFormula]) -> Option<Vec<Lit>> {
        fs.iter().map(|f| self.literal(f)).collect()
    }

    /// Literals of `f` when it is a disjunction of literals.
    fn as_clause(&self, f: &PropFormula) -> Option<Vec<Lit>> {
        match f {
            PropFormula::Or(fs) => self.literals(fs),
            PropFormula::Implies(a, b) => {
                let mut c = vec![-self.literal(a)?];
                c.extend(self.as_clause(b)?);
                Some(c)
            }
            PropFormula::Not(inner) => match &**inner {
                PropFormula::And(fs) => Some(self.literals(fs)?.into_iter().map(|l| -l).collect()),
                _ => self.literal(f).map(|l| vec![l]),
            },
            _ => self.literal(f).map(|l| vec![l]),
        }
    }

    /// Adds clauses forcing `f` to hold. `f` must be constant-folded.
    fn assert_formula(&mut self, f: &PropFormula, origin: &ConjunctRef) {
        use PropFormula as F;
        if let F::Const(b) = f {
            if !b {
                self.emit(Vec::new(), origin);
            }
            return;
        }
        if let F::And(fs) = f {
            for g in fs {
                self.assert_formula(g, origin);
            }
            return;
        }
        if let Some(clause) = self.as_clause(f) {
            self.emit(clause, origin);
            return;
        }
        match f {
            F::Iff(a, b) => {
                if let (Some(x), Some(y)) = (self.literal(a), self.literal(b)) {
                    self.emit(vec![-x, y], origin);
                    self.emit(vec![-y, x], origin);
                    return;
                }
                for (lhs, rhs) in [(a, b), (b, a)] {
                    if let Some(p) = self.literal(rhs) {
                        if let F::Or(fs) = &**lhs {
                            if let Some(cs) = self.literals(fs) {
                                for &c in &cs {
                                    self.emit(vec![-c, p], origin);
                                }
                                let mut c = vec![-p];
                                c.extend(cs);
                                self.emit(c, origin);
                                return;
                            }
                        }
                        if let F::Xor(x, y) = &**lhs {
                            if let (Some(x), Some(y)) = (self.literal(x), self.literal(y)) {
                                self.emit(vec![-x, y, p], origin);
                                self.emit(vec![x, -y, p], origin);
                                self.emit(vec![-p, x, y], origin);
                                self.emit(vec![-p, -x, -y], origin);
                                return;
                            }
                        }
                    }
                }
                let x = self.define(a, origin);
                let y = self.define(b, origin);
                self.emit(vec![-x, y], origin);
                self.emit(vec![-y, x], origin);
            }
            F::Xor(a, b) => {
                let x = self.define(a, origin);
                let y = self.define(b, origin);
                self.emit(vec![x, y], origin);
                self.emit(vec![-x, -y], origin);
            }
            F::Implies(a, b) => {
                let x = self.define(a, origin);
                let y = self.define(b, origin);
                self.emit(vec![-x, y], origin);
            }
            F::Or(fs) => {
                let c = fs.iter().map(|g| self.define(g, origin)).collect();
                self.emit(c, origin);
            }
            F::Not(inner) => match &**inner {
                F::Not(g) => self.assert_formula(g, origin),
                F::Or(fs) => {
                    for g in fs {
                        self.assert_formula(&F::not(g.clone()), origin);
                    }
                }
                F::And(fs) => {
                    let c = fs.iter().map(|g| -self.define(g, origin)).collect();
                    self.emit(c, origin);
                }
                F::Implies(a, b) => {
                    self.assert_formula(a, origin);
                    self.assert_formula(&F::not((**b).clone()), origin);
                }
                F::Iff(a, b) => self.assert_formula(&F::Xor(a.clone(), b.clone()), origin),
                F::Xor(a, b) => self.assert_formula(&F::Iff(a.clone(), b.clone()), origin),
                F::Var(_) | F::Const(_) => unreachable!("handled as a literal or folded"),
            },
            F::Var(_) | F::Const(_) | F::And(_) => unreachable!("handled above"),
        }
    }

    /// A literal equivalent to `f`, introducing an auxiliary when needed.
    fn define(&mut self, f: &PropFormula, origin: &ConjunctRef) -> Lit {
        use PropFormula as F;
        if let Some(l) = self.literal(f) {
            return l;
        }
        match f {
            F::Not(inner) => -self.define(inner, origin),
            F::And(fs) => {
                let ls: Vec<Lit> = fs.iter().map(|g| self.define(g, origin)).collect();
                let a = self.fresh();
                for &l in &ls {
                    self.emit(vec![-a, l], origin);
                }
                let mut c = vec![a];
                c.extend(ls.iter().map(|l| -l));
                self.emit(c, origin);
                a
            }
            F::Or(fs) => {
                let ls: Vec<Lit> = fs.iter().map(|g| self.define(g, origin)).collect();
                let a = self.fresh();
                for &l in &ls {
                    self.emit(vec![a, -l], origin);
                }
                let mut c = vec![-a];
                c.extend(ls);
                self.emit(c, origin);
                a
            }
            F::Xor(x, y) => {
                let (x, y) = (self.define(x, origin), self.define(y, origin));
                let a = self.fresh();
                self.emit(vec![-a, x, y], origin);
                self.emit(vec![-a, -x, -y], origin);
                self.emit(vec![a, -x, y], origin);
                self.emit(vec![a, x, -y], origin);
                a
            }
            F::Iff(x, y) => {
                let (x, y) = (self.define(x, origin), self.define(y, origin));
                let a = self.fresh();
                self.emit(vec![-a, -x, y], origin);
                self.emit(vec![-a, x, -y], origin);
                self.emit(vec![a, x, y], origin);
                self.emit(vec![a, -x, -y], origin);
                a
            }
            F::Implies(x, y) => {
                let (x, y) = (self.define(x, origin), self.define(y, origin));
                let a = self.fresh();
                self.emit(vec![-a, -x, y], origin);
                self.emit(vec![a, x], origin);
                self.emit(vec![a, -y], origin);
                a
            }
            F::Var(_) => unreachable!("variables are literals"),
            F::Const(_) => unreachable!("constants are folded before clausification"),
        }
    }
}
